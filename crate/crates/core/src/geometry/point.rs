use std::fmt;
use std::ops::{Add, Index, Neg, Sub};

use num_traits::Zero;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::rational::{self, Rational};

/// A point or direction in millimeters with exact rational coordinates.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Point3 {
    pub x: Rational,
    pub y: Rational,
    pub z: Rational,
}

pub type Vector3 = Point3;

impl Point3 {
    pub fn new(x: Rational, y: Rational, z: Rational) -> Self {
        Point3 { x, y, z }
    }

    pub fn from_ints(x: i64, y: i64, z: i64) -> Self {
        Point3::new(rational::int(x), rational::int(y), rational::int(z))
    }

    pub fn from_array(a: [Rational; 3]) -> Self {
        let [x, y, z] = a;
        Point3 { x, y, z }
    }

    /// Exact conversion of finite `f64` coordinates.
    pub fn from_f64(a: [f64; 3]) -> Option<Self> {
        Some(Point3::new(
            rational::from_f64(a[0])?,
            rational::from_f64(a[1])?,
            rational::from_f64(a[2])?,
        ))
    }

    pub fn zero() -> Self {
        Point3::default()
    }

    pub fn is_zero(&self) -> bool {
        self.x.is_zero() && self.y.is_zero() && self.z.is_zero()
    }

    pub fn coords(&self) -> [&Rational; 3] {
        [&self.x, &self.y, &self.z]
    }

    pub fn dot(&self, o: &Point3) -> Rational {
        &self.x * &o.x + &self.y * &o.y + &self.z * &o.z
    }

    pub fn cross(&self, o: &Point3) -> Point3 {
        Point3::new(
            &self.y * &o.z - &self.z * &o.y,
            &self.z * &o.x - &self.x * &o.z,
            &self.x * &o.y - &self.y * &o.x,
        )
    }

    pub fn scale(&self, s: &Rational) -> Point3 {
        Point3::new(&self.x * s, &self.y * s, &self.z * s)
    }

    pub fn norm_squared(&self) -> Rational {
        self.dot(self)
    }

    pub fn to_f64(&self) -> [f64; 3] {
        [rational::to_f64(&self.x), rational::to_f64(&self.y), rational::to_f64(&self.z)]
    }
}

impl Index<usize> for Point3 {
    type Output = Rational;

    fn index(&self, i: usize) -> &Rational {
        match i {
            0 => &self.x,
            1 => &self.y,
            2 => &self.z,
            _ => panic!("axis index {i} out of range"),
        }
    }
}

impl Add for &Point3 {
    type Output = Point3;
    fn add(self, o: &Point3) -> Point3 {
        Point3::new(&self.x + &o.x, &self.y + &o.y, &self.z + &o.z)
    }
}

impl Sub for &Point3 {
    type Output = Point3;
    fn sub(self, o: &Point3) -> Point3 {
        Point3::new(&self.x - &o.x, &self.y - &o.y, &self.z - &o.z)
    }
}

impl Neg for &Point3 {
    type Output = Point3;
    fn neg(self) -> Point3 {
        Point3::new(-&self.x, -&self.y, -&self.z)
    }
}

impl fmt::Debug for Point3 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "({}, {}, {})",
            rational::format(&self.x),
            rational::format(&self.y),
            rational::format(&self.z)
        )
    }
}

impl Serialize for Point3 {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        rational::serde_rational_vec::serialize(
            &[self.x.clone(), self.y.clone(), self.z.clone()],
            s,
        )
    }
}

impl<'de> Deserialize<'de> for Point3 {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let v = rational::serde_rational_vec::deserialize(d)?;
        let arr: [Rational; 3] = v
            .try_into()
            .map_err(|_| serde::de::Error::custom("expected exactly three coordinates"))?;
        Ok(Point3::from_array(arr))
    }
}
