//! Pattern feasibility programs.
//!
//! Variables are the three center coordinates of each placed box followed by
//! one slack `s`, maximized and capped at [`SLACK_CAP_MM`]. Every row has the
//! form `a·c + s <= b`: hull facets, box–box axis orders and box–obstacle
//! facet choices. Any point with `s >= 0` satisfies the pattern; the slack
//! only pushes solutions away from touching configurations.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::freespace::FeasibleRegion;
use crate::geometry::Halfspace;
use crate::rational::{self, Rational};
use crate::simplex::{self, SimplexOutcome};

pub const SLACK_CAP_MM: f64 = 1.0;
/// Slack below this counts as zero.
pub const SLACK_ZERO_MM: f64 = 1e-6;
pub const FEASIBILITY_TOL: f64 = 1e-7;
const MAX_PIVOTS: usize = 200_000;
/// Margin under the hull's lowest coordinate used as the variable lower bound.
const LOWER_MARGIN_MM: f64 = 1.0;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum LpError {
    #[error("placement {0} refers to unknown region {1}")]
    UnknownRegion(usize, usize),
    #[error("invalid constraint reference: {0}")]
    InvalidConstraintReference(String),
}

/// Which of the two boxes comes first along the axis.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum AxisOrder {
    /// `c_i + (e_i + e_j)/2 <= c_j`
    IBeforeJ,
    JBeforeI,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct BoxBoxConstraint {
    pub i: usize,
    pub j: usize,
    pub axis: usize,
    pub order: AxisOrder,
}

/// Box `i` stays on the outer side of separating facet `facet` of an obstacle.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct BoxObstacleConstraint {
    pub i: usize,
    pub obstacle: usize,
    pub facet: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub enum RowKind {
    Hull { i: usize },
    Order(BoxBoxConstraint),
    Facet(BoxObstacleConstraint),
}

/// One exact row `normal·c_i (or c_i,k - c_j,k) + weight·s <= rhs`.
#[derive(Clone, Debug, PartialEq)]
struct ExactRow {
    kind: RowKind,
    /// Sparse coefficients over center variables.
    coeffs: Vec<(usize, Rational)>,
    rhs: Rational,
}

#[derive(Clone, Debug)]
pub struct LinearProgram {
    pub num_boxes: usize,
    rows: Vec<ExactRow>,
    lower: Vec<f64>,
    /// Dense float rows with unit-length geometric part; slack column last.
    pub a: Vec<Vec<f64>>,
    pub b: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum LpOutcome {
    Feasible { centers: Vec<[f64; 3]>, slack: f64 },
    Infeasible,
    NumericalFailure,
}

#[derive(Clone, Debug, PartialEq)]
pub enum ExactOutcome {
    Feasible { centers: Vec<[Rational; 3]>, slack: Rational },
    Infeasible,
}

fn row_from_halfspace(var0: usize, h: &Halfspace, negate: bool) -> (Vec<(usize, Rational)>, Rational) {
    let sign = if negate { -rational::int(1) } else { rational::int(1) };
    let c = h.normal.coords();
    let coeffs = (0..3).filter(|&k| c[k] != &rational::int(0)).map(|k| (var0 + k, c[k] * &sign)).collect();
    (coeffs, &h.offset * &sign)
}

/// `regions[placements[i]]` is the region of box `i`.
pub fn build_lp(
    placements: &[usize],
    regions: &[FeasibleRegion],
    bb: &[BoxBoxConstraint],
    bo: &[BoxObstacleConstraint],
) -> Result<LinearProgram, LpError> {
    let n = placements.len();
    for (i, &r) in placements.iter().enumerate() {
        if r >= regions.len() {
            return Err(LpError::UnknownRegion(i, r));
        }
    }
    let region = |i: usize| &regions[placements[i]];
    let mut rows = Vec::new();
    let mut lower = Vec::with_capacity(3 * n);
    for i in 0..n {
        for h in region(i).hull.halfspaces() {
            let (coeffs, rhs) = row_from_halfspace(3 * i, h, false);
            rows.push(ExactRow { kind: RowKind::Hull { i }, coeffs, rhs });
        }
        let (lo, _) = region(i).hull.bounds();
        lower.extend(lo.to_f64().iter().map(|v| v - LOWER_MARGIN_MM));
    }
    for c in bb {
        if c.i >= n || c.j >= n || c.i == c.j || c.axis > 2 {
            return Err(LpError::InvalidConstraintReference(format!("{c:?}")));
        }
        let (first, second) = match c.order {
            AxisOrder::IBeforeJ => (c.i, c.j),
            AxisOrder::JBeforeI => (c.j, c.i),
        };
        let gap = (&region(c.i).extents[c.axis] + &region(c.j).extents[c.axis]) / rational::int(2);
        rows.push(ExactRow {
            kind: RowKind::Order(*c),
            coeffs: vec![(3 * first + c.axis, rational::int(1)), (3 * second + c.axis, rational::int(-1))],
            rhs: -gap,
        });
    }
    for c in bo {
        let facet = (c.i < n)
            .then(|| region(c.i).obstacles.iter().find(|o| o.id == c.obstacle))
            .flatten()
            .and_then(|o| o.facets().get(c.facet))
            .ok_or_else(|| LpError::InvalidConstraintReference(format!("{c:?}")))?;
        let (coeffs, rhs) = row_from_halfspace(3 * c.i, facet, true);
        rows.push(ExactRow { kind: RowKind::Facet(*c), coeffs, rhs });
    }

    let slack = 3 * n;
    let mut a = Vec::with_capacity(rows.len() + 1);
    let mut b = Vec::with_capacity(rows.len() + 1);
    for r in &rows {
        let mut dense = vec![0.0; slack + 1];
        for (j, v) in &r.coeffs {
            dense[*j] = rational::to_f64(v);
        }
        let len = dense.iter().map(|v| v * v).sum::<f64>().sqrt();
        for v in &mut dense {
            *v /= len;
        }
        dense[slack] = 1.0;
        a.push(dense);
        b.push(rational::to_f64(&r.rhs) / len);
    }
    let mut cap = vec![0.0; slack + 1];
    cap[slack] = 1.0;
    a.push(cap);
    b.push(SLACK_CAP_MM);
    Ok(LinearProgram { num_boxes: n, rows, lower, a, b })
}

impl LinearProgram {
    pub fn row_kinds(&self) -> impl Iterator<Item = &RowKind> {
        self.rows.iter().map(|r| &r.kind)
    }

    fn lower_bounds(&self) -> Vec<Option<f64>> {
        self.lower.iter().map(|&v| Some(v)).chain([Some(0.0)]).collect()
    }

    /// Largest violation of any row at `centers` with slack 0.
    pub fn max_residual(&self, centers: &[[f64; 3]]) -> f64 {
        let x: Vec<f64> = centers.iter().flatten().copied().chain([0.0]).collect();
        self.a
            .iter()
            .zip(&self.b)
            .map(|(row, rhs)| row.iter().zip(&x).map(|(a, v)| a * v).sum::<f64>() - rhs)
            .fold(0.0, f64::max)
    }

    /// Rational re-solve with `|n|_1`-weighted slack; its status is a certificate.
    pub fn solve_exact(&self) -> ExactOutcome {
        let n = 3 * self.num_boxes;
        let mut rows = Vec::with_capacity(self.rows.len() + 1);
        let mut rhs = Vec::with_capacity(self.rows.len() + 1);
        for r in &self.rows {
            let mut dense = vec![rational::int(0); n + 1];
            let mut l1 = rational::int(0);
            for (j, v) in &r.coeffs {
                dense[*j] = v.clone();
                l1 += rational::abs(v);
            }
            dense[n] = l1;
            rows.push(dense);
            rhs.push(r.rhs.clone());
        }
        let mut cap = vec![rational::int(0); n + 1];
        cap[n] = rational::int(1);
        rows.push(cap);
        rhs.push(rational::int(1));
        let lower: Vec<Option<Rational>> = (0..=n).map(|j| (j == n).then(|| rational::int(0))).collect();
        let mut objective = vec![rational::int(0); n + 1];
        objective[n] = rational::int(1);
        match simplex::solve_bounded(&rows, &rhs, &lower, &objective, usize::MAX) {
            SimplexOutcome::Optimal { point, objective } => ExactOutcome::Feasible {
                centers: point[..n].chunks(3).map(|c| [c[0].clone(), c[1].clone(), c[2].clone()]).collect(),
                slack: objective,
            },
            SimplexOutcome::Infeasible => ExactOutcome::Infeasible,
            other => unreachable!("exact pattern LP is bounded: {other:?}"),
        }
    }

    /// Writes the float program in CPLEX LP text format.
    pub fn to_lp_format(&self) -> String {
        let n = 3 * self.num_boxes;
        let name = |j: usize| if j == n { "s".to_string() } else { format!("c{}_{}", j / 3, ["x", "y", "z"][j % 3]) };
        let mut out = String::from("\\ pattern feasibility\nMaximize\n obj: s\nSubject To\n");
        for (r, (row, rhs)) in self.a.iter().zip(&self.b).enumerate() {
            let label = match self.rows.get(r).map(|x| &x.kind) {
                Some(RowKind::Hull { i }) => format!("hull{i}_{r}"),
                Some(RowKind::Order(c)) => format!("order{}_{}_{}", c.i, c.j, c.axis),
                Some(RowKind::Facet(c)) => format!("facet{}_{}_{}", c.i, c.obstacle, c.facet),
                None => "slack_cap".into(),
            };
            let mut terms = String::new();
            for (j, v) in row.iter().enumerate().filter(|(_, v)| **v != 0.0) {
                let _ = write!(terms, " {} {:e} {}", if *v < 0.0 { "-" } else { "+" }, v.abs(), name(j));
            }
            let _ = writeln!(out, " {label}:{terms} <= {rhs:e}");
        }
        out.push_str("Bounds\n");
        for (j, lo) in self.lower.iter().enumerate() {
            let _ = writeln!(out, " {} >= {lo:e}", name(j));
        }
        out.push_str(" s >= 0\nEnd\n");
        out
    }
}

/// Float solve; the returned point is residual-checked against the rows.
pub fn solve(lp: &LinearProgram) -> LpOutcome {
    let n = 3 * lp.num_boxes;
    let mut objective = vec![0.0; n + 1];
    objective[n] = 1.0;
    match simplex::solve_bounded(&lp.a, &lp.b, &lp.lower_bounds(), &objective, MAX_PIVOTS) {
        SimplexOutcome::Optimal { point, objective } => {
            let centers: Vec<[f64; 3]> = point[..n].chunks(3).map(|c| [c[0], c[1], c[2]]).collect();
            let slack = objective.max(0.0);
            let x: Vec<f64> = point.clone();
            let worst = lp
                .a
                .iter()
                .zip(&lp.b)
                .map(|(row, rhs)| row.iter().zip(&x).map(|(a, v)| a * v).sum::<f64>() - rhs)
                .fold(0.0, f64::max);
            if worst > FEASIBILITY_TOL * 10.0 {
                return LpOutcome::NumericalFailure;
            }
            LpOutcome::Feasible { centers, slack: if slack < SLACK_ZERO_MM { 0.0 } else { slack } }
        }
        SimplexOutcome::Infeasible => LpOutcome::Infeasible,
        SimplexOutcome::Unbounded | SimplexOutcome::IterationLimit => LpOutcome::NumericalFailure,
    }
}
