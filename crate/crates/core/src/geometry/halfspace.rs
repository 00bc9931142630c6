use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use super::Point3;
use crate::rational::{self, Rational};

/// The closed set `{ x : normal·x <= offset }`.
///
/// Constructors canonicalize: the normal is scaled to a primitive integer
/// vector, so proportional descriptions of one halfspace compare equal.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Halfspace {
    #[serde(rename = "n")]
    pub normal: Point3,
    #[serde(rename = "d", with = "rational::serde_rational")]
    pub offset: Rational,
}

impl Halfspace {
    /// Returns `None` for a zero normal.
    pub fn new(normal: Point3, offset: Rational) -> Option<Self> {
        if normal.is_zero() {
            return None;
        }
        let lcm = rational::common_denominator(normal.coords());
        let ints: Vec<BigInt> = normal
            .coords()
            .iter()
            .map(|c| (*c * Rational::from_integer(lcm.clone())).to_integer())
            .collect();
        let g = ints.iter().fold(BigInt::zero(), |g, v| g.gcd(v));
        let scale = Rational::new(lcm, g);
        let normal = normal.scale(&scale);
        let offset = offset * scale;
        Some(Halfspace { normal, offset })
    }

    pub fn contains(&self, p: &Point3) -> bool {
        self.normal.dot(p) <= self.offset
    }

    pub fn contains_strictly(&self, p: &Point3) -> bool {
        self.normal.dot(p) < self.offset
    }

    /// `normal·p - offset`; positive outside.
    pub fn excess(&self, p: &Point3) -> Rational {
        self.normal.dot(p) - &self.offset
    }

    pub fn on_boundary(&self, p: &Point3) -> bool {
        self.normal.dot(p) == self.offset
    }

    pub fn translated(&self, by: &Point3) -> Halfspace {
        Halfspace { normal: self.normal.clone(), offset: &self.offset + self.normal.dot(by) }
    }

    /// Same boundary plane with the opposite side.
    pub fn flipped(&self) -> Halfspace {
        Halfspace { normal: -&self.normal, offset: -&self.offset }
    }

    /// L1 norm of the normal; a rational stand-in for its length.
    pub fn normal_l1(&self) -> Rational {
        self.normal.coords().iter().map(|c| c.abs()).sum()
    }

    pub fn to_f64_unit(&self) -> ([f64; 3], f64) {
        let n = self.normal.to_f64();
        let len = (n[0] * n[0] + n[1] * n[1] + n[2] * n[2]).sqrt();
        ([n[0] / len, n[1] / len, n[2] / len], rational::to_f64(&self.offset) / len)
    }
}
