//! Dense two-phase tableau simplex with Bland's anti-cycling rule.
//!
//! Solves `maximize c·y  s.t.  A y <= b,  y >= 0` over any [`LpScalar`].
//! The `f64` instance compares against fixed tolerances; the [`Rational`]
//! instance is exact, so its status answers are certificates.

use std::cmp::Ordering;

use num_traits::{Signed, Zero};

use crate::rational::Rational;

pub trait LpScalar: Clone + std::fmt::Debug {
    fn zero() -> Self;
    fn one() -> Self;
    fn add(&self, o: &Self) -> Self;
    fn sub(&self, o: &Self) -> Self;
    fn mul(&self, o: &Self) -> Self;
    fn div(&self, o: &Self) -> Self;
    fn neg(&self) -> Self;
    /// Strictly positive beyond the pivoting tolerance.
    fn is_positive(&self) -> bool;
    fn is_negative(&self) -> bool {
        self.neg().is_positive()
    }
    /// Phase-one residual small enough to call the system feasible.
    fn within_feasibility(&self) -> bool;
    /// Ordering used for ratio-test ties.
    fn cmp_ratio(&self, o: &Self) -> Ordering;
    fn is_exact_zero(&self) -> bool;
}

pub const F64_PIVOT_TOL: f64 = 1e-9;
pub const F64_FEASIBILITY_TOL: f64 = 1e-7;

impl LpScalar for f64 {
    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn div(&self, o: &Self) -> Self {
        self / o
    }
    fn neg(&self) -> Self {
        -self
    }
    fn is_positive(&self) -> bool {
        *self > F64_PIVOT_TOL
    }
    fn within_feasibility(&self) -> bool {
        self.abs() <= F64_FEASIBILITY_TOL
    }
    fn cmp_ratio(&self, o: &Self) -> Ordering {
        if (self - o).abs() <= 1e-12 * (1.0 + self.abs().max(o.abs())) {
            Ordering::Equal
        } else {
            self.partial_cmp(o).unwrap_or(Ordering::Equal)
        }
    }
    fn is_exact_zero(&self) -> bool {
        *self == 0.0
    }
}

impl LpScalar for Rational {
    fn zero() -> Self {
        Zero::zero()
    }
    fn one() -> Self {
        num_traits::One::one()
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn div(&self, o: &Self) -> Self {
        self / o
    }
    fn neg(&self) -> Self {
        -self
    }
    fn is_positive(&self) -> bool {
        Signed::is_positive(self)
    }
    fn is_negative(&self) -> bool {
        Signed::is_negative(self)
    }
    fn within_feasibility(&self) -> bool {
        self.is_zero()
    }
    fn cmp_ratio(&self, o: &Self) -> Ordering {
        self.cmp(o)
    }
    fn is_exact_zero(&self) -> bool {
        self.is_zero()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SimplexOutcome<T> {
    Optimal { point: Vec<T>, objective: T },
    Infeasible,
    Unbounded,
    IterationLimit,
}

#[derive(Debug, Clone)]
pub struct StandardLp<T> {
    pub rows: Vec<Vec<T>>,
    pub rhs: Vec<T>,
    pub objective: Vec<T>,
}

struct Tableau<T> {
    /// m rows of width `cols + 1`; the last entry is the right-hand side.
    a: Vec<Vec<T>>,
    basis: Vec<usize>,
    cols: usize,
    n_structural: usize,
    n_slack: usize,
    reduced: Vec<T>,
    value: T,
    allowed: Vec<bool>,
}

impl<T: LpScalar> Tableau<T> {
    fn pivot(&mut self, r: usize, c: usize) {
        let width = self.cols + 1;
        let p = self.a[r][c].clone();
        for k in 0..width {
            self.a[r][k] = self.a[r][k].div(&p);
        }
        let pivot_row = self.a[r].clone();
        for (i, row) in self.a.iter_mut().enumerate() {
            if i == r {
                continue;
            }
            let f = row[c].clone();
            if !f.is_exact_zero() {
                for k in 0..width {
                    if !pivot_row[k].is_exact_zero() {
                        row[k] = row[k].sub(&f.mul(&pivot_row[k]));
                    }
                }
            }
            row[c] = T::zero();
        }
        let f = self.reduced[c].clone();
        for k in 0..self.cols {
            self.reduced[k] = self.reduced[k].sub(&f.mul(&pivot_row[k]));
        }
        self.reduced[c] = T::zero();
        self.value = self.value.add(&f.mul(&pivot_row[self.cols]));
        self.basis[r] = c;
    }

    fn set_costs(&mut self, costs: &[T]) {
        self.reduced = costs.to_vec();
        self.value = T::zero();
        for (i, &b) in self.basis.iter().enumerate() {
            let cb = costs[b].clone();
            if !cb.is_exact_zero() {
                for k in 0..self.cols {
                    self.reduced[k] = self.reduced[k].sub(&cb.mul(&self.a[i][k]));
                }
                self.value = self.value.add(&cb.mul(&self.a[i][self.cols]));
            }
        }
    }

    /// Bland's rule iterations. Returns `Some(false)` on unboundedness.
    fn run(&mut self, max_iter: usize) -> Option<bool> {
        for _ in 0..max_iter {
            let entering = (0..self.cols).find(|&j| self.allowed[j] && self.reduced[j].is_positive());
            let Some(c) = entering else {
                return Some(true);
            };
            let mut best: Option<(usize, T)> = None;
            for i in 0..self.a.len() {
                if !self.a[i][c].is_positive() {
                    continue;
                }
                let mut ratio = self.a[i][self.cols].div(&self.a[i][c]);
                if ratio.is_negative() {
                    // round-off below zero on a degenerate row
                    ratio = T::zero();
                }
                best = match best {
                    None => Some((i, ratio)),
                    Some((bi, br)) => match ratio.cmp_ratio(&br) {
                        Ordering::Less => Some((i, ratio)),
                        Ordering::Equal if self.basis[i] < self.basis[bi] => Some((i, ratio)),
                        _ => Some((bi, br)),
                    },
                };
            }
            match best {
                Some((r, _)) => self.pivot(r, c),
                None => return Some(false),
            }
        }
        None
    }
}

pub fn solve<T: LpScalar>(lp: &StandardLp<T>, max_iter: usize) -> SimplexOutcome<T> {
    let m = lp.rows.len();
    let n = lp.objective.len();
    let negative: Vec<usize> = (0..m).filter(|&i| lp.rhs[i].is_negative()).collect();
    let n_art = negative.len();
    let cols = n + m + n_art;
    let mut a = Vec::with_capacity(m);
    let mut basis = Vec::with_capacity(m);
    let mut art = 0;
    for i in 0..m {
        let mut row = vec![T::zero(); cols + 1];
        let flip = lp.rhs[i].is_negative();
        for j in 0..n {
            row[j] = if flip { lp.rows[i][j].neg() } else { lp.rows[i][j].clone() };
        }
        row[n + i] = if flip { T::one().neg() } else { T::one() };
        row[cols] = if flip { lp.rhs[i].neg() } else { lp.rhs[i].clone() };
        if flip {
            row[n + m + art] = T::one();
            basis.push(n + m + art);
            art += 1;
        } else {
            basis.push(n + i);
        }
        a.push(row);
    }
    let mut t = Tableau {
        a,
        basis,
        cols,
        n_structural: n,
        n_slack: m,
        reduced: vec![T::zero(); cols],
        value: T::zero(),
        allowed: vec![true; cols],
    };

    if n_art > 0 {
        let mut costs = vec![T::zero(); cols];
        for c in costs.iter_mut().skip(n + m) {
            *c = T::one().neg();
        }
        t.set_costs(&costs);
        match t.run(max_iter) {
            None => return SimplexOutcome::IterationLimit,
            Some(false) => unreachable!("phase one objective is bounded by zero"),
            Some(true) => {}
        }
        if !t.value.within_feasibility() {
            return SimplexOutcome::Infeasible;
        }
        // drive artificial variables out of the basis
        let first_art = t.n_structural + t.n_slack;
        let mut r = 0;
        while r < t.a.len() {
            if t.basis[r] >= first_art {
                let col = (0..first_art).find(|&j| {
                    let v = &t.a[r][j];
                    v.is_positive() || v.is_negative()
                });
                match col {
                    Some(c) => t.pivot(r, c),
                    None => {
                        t.a.remove(r);
                        t.basis.remove(r);
                        continue;
                    }
                }
            }
            r += 1;
        }
        for j in first_art..cols {
            t.allowed[j] = false;
        }
    }

    let mut costs = vec![T::zero(); cols];
    costs[..n].clone_from_slice(&lp.objective);
    t.set_costs(&costs);
    match t.run(max_iter) {
        None => SimplexOutcome::IterationLimit,
        Some(false) => SimplexOutcome::Unbounded,
        Some(true) => {
            let mut point = vec![T::zero(); n];
            for (i, &b) in t.basis.iter().enumerate() {
                if b < n {
                    point[b] = t.a[i][cols].clone();
                }
            }
            SimplexOutcome::Optimal { point, objective: t.value }
        }
    }
}

/// `maximize objective·x  s.t.  rows·x <= rhs`, where `x_j >= lower[j]` when a
/// lower bound is given and `x_j` is free otherwise.
pub fn solve_bounded<T: LpScalar>(
    rows: &[Vec<T>],
    rhs: &[T],
    lower: &[Option<T>],
    objective: &[T],
    max_iter: usize,
) -> SimplexOutcome<T> {
    let n = lower.len();
    // column layout: one column per variable, plus a negative part for free ones
    let mut neg_col = vec![None; n];
    let mut cols = n;
    for j in 0..n {
        if lower[j].is_none() {
            neg_col[j] = Some(cols);
            cols += 1;
        }
    }
    let mut std_rows = Vec::with_capacity(rows.len());
    let mut std_rhs = Vec::with_capacity(rows.len());
    for (row, b) in rows.iter().zip(rhs) {
        let mut r = vec![T::zero(); cols];
        let mut b = b.clone();
        for j in 0..n {
            r[j] = row[j].clone();
            match (&lower[j], neg_col[j]) {
                (Some(l), _) => b = b.sub(&row[j].mul(l)),
                (None, Some(c)) => r[c] = row[j].neg(),
                (None, None) => unreachable!(),
            }
        }
        std_rows.push(r);
        std_rhs.push(b);
    }
    let mut obj = vec![T::zero(); cols];
    let mut shift = T::zero();
    for j in 0..n {
        obj[j] = objective[j].clone();
        if let Some(c) = neg_col[j] {
            obj[c] = objective[j].neg();
        }
        if let Some(l) = &lower[j] {
            shift = shift.add(&objective[j].mul(l));
        }
    }
    let lp = StandardLp { rows: std_rows, rhs: std_rhs, objective: obj };
    match solve(&lp, max_iter) {
        SimplexOutcome::Optimal { point: y, objective } => {
            let point = (0..n)
                .map(|j| match (&lower[j], neg_col[j]) {
                    (Some(l), _) => l.add(&y[j]),
                    (None, Some(c)) => y[j].sub(&y[c]),
                    (None, None) => unreachable!(),
                })
                .collect();
            SimplexOutcome::Optimal { point, objective: objective.add(&shift) }
        }
        SimplexOutcome::Infeasible => SimplexOutcome::Infeasible,
        SimplexOutcome::Unbounded => SimplexOutcome::Unbounded,
        SimplexOutcome::IterationLimit => SimplexOutcome::IterationLimit,
    }
}
