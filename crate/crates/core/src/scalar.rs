//! Exact rational scalars, affine maps and their `±∞` extensions.
//!
//! Everything in the crate is computed over [`Scalar`], an arbitrary precision
//! rational. There is no floating point on any decision path.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::de::{self, Deserializer, Visitor};
use serde::{Deserialize, Serialize, Serializer};

use crate::error::{Error, Result};

pub type Scalar = BigRational;

/// A point of `Rⁿ`.
pub type Point = Vec<Scalar>;

pub fn int(v: i64) -> Scalar {
    Scalar::from_integer(BigInt::from(v))
}

pub fn ratio(num: i64, den: i64) -> Scalar {
    Scalar::new(BigInt::from(num), BigInt::from(den))
}

pub fn point(coords: &[i64]) -> Point {
    coords.iter().map(|&c| int(c)).collect()
}

/// Parses `"p/q"` or `"p"`.
pub fn parse_scalar(s: &str) -> Result<Scalar> {
    let s = s.trim();
    let parsed = match s.split_once('/') {
        Some((n, d)) => {
            let n = BigInt::from_str(n.trim()).map_err(|e| Error::Parse(format!("{s}: {e}")))?;
            let d = BigInt::from_str(d.trim()).map_err(|e| Error::Parse(format!("{s}: {e}")))?;
            if d.is_zero() {
                return Err(Error::Parse(format!("{s}: zero denominator")));
            }
            Scalar::new(n, d)
        }
        None => Scalar::from_integer(
            BigInt::from_str(s).map_err(|e| Error::Parse(format!("{s}: {e}")))?,
        ),
    };
    Ok(parsed)
}

/// Canonical text form: `"p/q"`, with `q` omitted when it is 1.
pub fn format_scalar(q: &Scalar) -> String {
    if q.denom().is_one() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

/// Lossy decimal rendering, only for presentation.
pub fn to_f64(q: &Scalar) -> f64 {
    use num_traits::ToPrimitive;
    q.to_f64().unwrap_or(f64::NAN)
}

pub fn min_scalar(a: Scalar, b: Scalar) -> Scalar {
    if b < a {
        b
    } else {
        a
    }
}

pub fn max_scalar(a: Scalar, b: Scalar) -> Scalar {
    if b > a {
        b
    } else {
        a
    }
}

/// Wire wrapper giving [`Scalar`] its `"p/q"` JSON form. Integers are also
/// accepted on input.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WireScalar(pub Scalar);

impl Serialize for WireScalar {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&format_scalar(&self.0))
    }
}

impl<'de> Deserialize<'de> for WireScalar {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        struct V;
        impl Visitor<'_> for V {
            type Value = WireScalar;
            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a rational as \"p/q\" or an integer")
            }
            fn visit_str<E: de::Error>(self, v: &str) -> std::result::Result<WireScalar, E> {
                parse_scalar(v).map(WireScalar).map_err(E::custom)
            }
            fn visit_i64<E: de::Error>(self, v: i64) -> std::result::Result<WireScalar, E> {
                Ok(WireScalar(int(v)))
            }
            fn visit_u64<E: de::Error>(self, v: u64) -> std::result::Result<WireScalar, E> {
                Ok(WireScalar(Scalar::from_integer(BigInt::from(v))))
            }
        }
        d.deserialize_any(V)
    }
}

pub fn wire_point(p: &[Scalar]) -> Vec<WireScalar> {
    p.iter().cloned().map(WireScalar).collect()
}

pub fn unwire_point(p: Vec<WireScalar>) -> Point {
    p.into_iter().map(|w| w.0).collect()
}

/// `serde(with = ...)` adaptor for a single scalar.
pub mod serde_scalar {
    use super::*;

    pub fn serialize<S: Serializer>(q: &Scalar, s: S) -> std::result::Result<S::Ok, S::Error> {
        WireScalar(q.clone()).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Scalar, D::Error> {
        WireScalar::deserialize(d).map(|w| w.0)
    }
}

/// `serde(with = ...)` adaptor for a point.
pub mod serde_point {
    use super::*;

    pub fn serialize<S: Serializer>(p: &[Scalar], s: S) -> std::result::Result<S::Ok, S::Error> {
        wire_point(p).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Point, D::Error> {
        Vec::<WireScalar>::deserialize(d).map(unwire_point)
    }
}

pub mod serde_opt_point {
    use super::*;

    pub fn serialize<S: Serializer>(p: &Option<Point>, s: S) -> std::result::Result<S::Ok, S::Error> {
        p.as_deref().map(wire_point).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Option<Point>, D::Error> {
        Option::<Vec<WireScalar>>::deserialize(d).map(|p| p.map(unwire_point))
    }
}

pub mod serde_points {
    use super::*;

    pub fn serialize<S: Serializer>(ps: &[Point], s: S) -> std::result::Result<S::Ok, S::Error> {
        ps.iter().map(|p| wire_point(p)).collect::<Vec<_>>().serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Vec<Point>, D::Error> {
        Vec::<Vec<WireScalar>>::deserialize(d).map(|v| v.into_iter().map(unwire_point).collect())
    }
}

/// An affine function `λ₁x₁ + … + λₙxₙ + a`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct AffineMap {
    coeffs: Vec<Scalar>,
    constant: Scalar,
}

impl AffineMap {
    pub fn new(coeffs: Vec<Scalar>, constant: Scalar) -> Self {
        Self { coeffs, constant }
    }

    pub fn from_ints(coeffs: &[i64], constant: i64) -> Self {
        Self::new(coeffs.iter().map(|&c| int(c)).collect(), int(constant))
    }

    pub fn zero(arity: usize) -> Self {
        Self::constant(arity, Scalar::zero())
    }

    pub fn constant(arity: usize, c: Scalar) -> Self {
        Self::new(vec![Scalar::zero(); arity], c)
    }

    /// The coordinate function `x ↦ xᵢ`.
    pub fn coordinate(arity: usize, i: usize) -> Self {
        let mut coeffs = vec![Scalar::zero(); arity];
        coeffs[i] = Scalar::one();
        Self::new(coeffs, Scalar::zero())
    }

    pub fn arity(&self) -> usize {
        self.coeffs.len()
    }

    pub fn coeffs(&self) -> &[Scalar] {
        &self.coeffs
    }

    pub fn coeff(&self, i: usize) -> &Scalar {
        &self.coeffs[i]
    }

    pub fn constant_term(&self) -> &Scalar {
        &self.constant
    }

    pub fn is_zero(&self) -> bool {
        self.constant.is_zero() && self.is_constant()
    }

    pub fn is_constant(&self) -> bool {
        self.coeffs.iter().all(Zero::is_zero)
    }

    pub fn eval(&self, x: &[Scalar]) -> Result<Scalar> {
        if x.len() != self.arity() {
            return Err(Error::Arity { expected: self.arity(), got: x.len() });
        }
        Ok(self.eval_prefix(x))
    }

    /// Evaluates on the first `arity` coordinates of `x`, ignoring the rest.
    ///
    /// Panics if `x` is shorter than the arity.
    pub fn eval_prefix(&self, x: &[Scalar]) -> Scalar {
        let mut acc = self.constant.clone();
        for (c, v) in self.coeffs.iter().zip(&x[..self.arity()]) {
            if !c.is_zero() {
                acc += c * v;
            }
        }
        acc
    }

    /// The half-map `x ↦ f(x)/2`.
    pub fn half(&self) -> Self {
        let two = int(2);
        Self::new(self.coeffs.iter().map(|c| c / &two).collect(), &self.constant / &two)
    }

    pub fn scale(&self, k: &Scalar) -> Self {
        Self::new(self.coeffs.iter().map(|c| c * k).collect(), &self.constant * k)
    }

    /// The same function viewed in `arity` variables; extra variables get
    /// zero coefficients.
    pub fn lift(&self, arity: usize) -> Self {
        assert!(arity >= self.arity());
        let mut coeffs = self.coeffs.clone();
        coeffs.resize(arity, Scalar::zero());
        Self::new(coeffs, self.constant.clone())
    }

    /// Drops trailing variables, which must have zero coefficients.
    pub fn truncate(&self, arity: usize) -> Self {
        debug_assert!(self.coeffs[arity..].iter().all(Zero::is_zero));
        Self::new(self.coeffs[..arity].to_vec(), self.constant.clone())
    }

    /// Composition `self ∘ inner`, where `inner` lists one affine map per
    /// argument of `self`.
    pub fn compose(&self, inner: &[AffineMap]) -> Self {
        assert_eq!(inner.len(), self.arity());
        let arity = inner.first().map_or(0, AffineMap::arity);
        let mut out = AffineMap::constant(arity, self.constant.clone());
        for (c, g) in self.coeffs.iter().zip(inner) {
            if !c.is_zero() {
                out = &out + &g.scale(c);
            }
        }
        out
    }

    /// Replaces the coefficient of variable `i`.
    pub fn with_coeff(mut self, i: usize, c: Scalar) -> Self {
        self.coeffs[i] = c;
        self
    }

    pub fn with_constant(mut self, c: Scalar) -> Self {
        self.constant = c;
        self
    }
}

impl fmt::Display for AffineMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (i, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            if !first {
                f.write_str(if c.is_negative() { " - " } else { " + " })?;
            } else if c.is_negative() {
                f.write_str("-")?;
            }
            let a = c.abs();
            if !a.is_one() {
                write!(f, "{}*", format_scalar(&a))?;
            }
            write!(f, "x{}", i + 1)?;
            first = false;
        }
        if first {
            return f.write_str(&format_scalar(&self.constant));
        }
        if !self.constant.is_zero() {
            let sign = if self.constant.is_negative() { " - " } else { " + " };
            write!(f, "{sign}{}", format_scalar(&self.constant.abs()))?;
        }
        Ok(())
    }
}

impl Add for &AffineMap {
    type Output = AffineMap;
    fn add(self, rhs: &AffineMap) -> AffineMap {
        assert_eq!(self.arity(), rhs.arity(), "affine arity mismatch");
        AffineMap::new(
            self.coeffs.iter().zip(&rhs.coeffs).map(|(a, b)| a + b).collect(),
            &self.constant + &rhs.constant,
        )
    }
}

impl Sub for &AffineMap {
    type Output = AffineMap;
    fn sub(self, rhs: &AffineMap) -> AffineMap {
        assert_eq!(self.arity(), rhs.arity(), "affine arity mismatch");
        AffineMap::new(
            self.coeffs.iter().zip(&rhs.coeffs).map(|(a, b)| a - b).collect(),
            &self.constant - &rhs.constant,
        )
    }
}

impl Neg for &AffineMap {
    type Output = AffineMap;
    fn neg(self) -> AffineMap {
        AffineMap::new(self.coeffs.iter().map(|c| -c).collect(), -&self.constant)
    }
}

impl Mul<&Scalar> for &AffineMap {
    type Output = AffineMap;
    fn mul(self, k: &Scalar) -> AffineMap {
        self.scale(k)
    }
}

#[derive(Serialize, Deserialize)]
struct AffineRepr {
    coeffs: Vec<WireScalar>,
    #[serde(rename = "const")]
    constant: WireScalar,
}

impl Serialize for AffineMap {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        AffineRepr { coeffs: wire_point(&self.coeffs), constant: WireScalar(self.constant.clone()) }
            .serialize(s)
    }
}

impl<'de> Deserialize<'de> for AffineMap {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let r = AffineRepr::deserialize(d)?;
        Ok(AffineMap::new(unwire_point(r.coeffs), r.constant.0))
    }
}

/// An affine map or one of the constant sentinels `±∞`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum ExtAffine {
    NegInf,
    Finite(AffineMap),
    PosInf,
}

impl ExtAffine {
    pub fn finite(&self) -> Option<&AffineMap> {
        match self {
            ExtAffine::Finite(f) => Some(f),
            _ => None,
        }
    }

    pub fn is_finite(&self) -> bool {
        matches!(self, ExtAffine::Finite(_))
    }
}

impl From<AffineMap> for ExtAffine {
    fn from(f: AffineMap) -> Self {
        ExtAffine::Finite(f)
    }
}

impl fmt::Display for ExtAffine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtAffine::NegInf => f.write_str("-inf"),
            ExtAffine::PosInf => f.write_str("+inf"),
            ExtAffine::Finite(m) => m.fmt(f),
        }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum ExtRepr {
    Inf(String),
    Finite(AffineMap),
}

impl Serialize for ExtAffine {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            ExtAffine::NegInf => s.serialize_str("-inf"),
            ExtAffine::PosInf => s.serialize_str("+inf"),
            ExtAffine::Finite(m) => m.serialize(s),
        }
    }
}

impl<'de> Deserialize<'de> for ExtAffine {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        match ExtRepr::deserialize(d)? {
            ExtRepr::Finite(m) => Ok(ExtAffine::Finite(m)),
            ExtRepr::Inf(s) if s == "-inf" => Ok(ExtAffine::NegInf),
            ExtRepr::Inf(s) if s == "+inf" || s == "inf" => Ok(ExtAffine::PosInf),
            ExtRepr::Inf(s) => Err(de::Error::custom(format!("expected \"-inf\" or \"+inf\", got {s:?}"))),
        }
    }
}

/// Outcome of comparing two maps uniformly over a cell.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Order {
    Less,
    Equal,
    Greater,
    Incomparable,
}

impl From<Ordering> for Order {
    fn from(o: Ordering) -> Self {
        match o {
            Ordering::Less => Order::Less,
            Ordering::Equal => Order::Equal,
            Ordering::Greater => Order::Greater,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eval_examples() {
        let f = AffineMap::new(vec![ratio(1, 2)], int(2));
        assert_eq!(f.eval(&point(&[4])).unwrap(), int(4));
        assert_eq!(AffineMap::zero(3).eval(&point(&[1, -7, 9])).unwrap(), int(0));
        let d = AffineMap::from_ints(&[1, -1], 0);
        assert_eq!(d.eval(&point(&[3, 3])).unwrap(), int(0));
    }

    #[test]
    fn eval_rejects_arity_mismatch() {
        let f = AffineMap::from_ints(&[1, 1], 0);
        assert_eq!(f.eval(&point(&[1])), Err(Error::Arity { expected: 2, got: 1 }));
    }

    #[test]
    fn half_map_examples() {
        let g = AffineMap::new(vec![ratio(1, 2)], int(2));
        assert_eq!(g.half(), AffineMap::new(vec![ratio(1, 4)], int(1)));
        assert_eq!(AffineMap::zero(2).half(), AffineMap::zero(2));
        assert_eq!(AffineMap::constant(0, int(4)).half(), AffineMap::constant(0, int(2)));
    }

    #[test]
    fn scalar_text_form() {
        assert_eq!(format_scalar(&ratio(6, -4)), "-3/2");
        assert_eq!(format_scalar(&int(7)), "7");
        assert_eq!(parse_scalar(" -3/2 ").unwrap(), ratio(-3, 2));
        assert!(parse_scalar("1/0").is_err());
        assert!(parse_scalar("x").is_err());
    }

    #[test]
    fn affine_json_shape() {
        let f = AffineMap::new(vec![ratio(1, 2), int(0)], int(-3));
        let js = serde_json::to_string(&f).unwrap();
        assert_eq!(js, r#"{"coeffs":["1/2","0"],"const":"-3"}"#);
        let back: AffineMap = serde_json::from_str(r#"{"coeffs":["1/2", 0],"const":-3}"#).unwrap();
        assert_eq!(back, f);
        let inf: ExtAffine = serde_json::from_str(r#""-inf""#).unwrap();
        assert_eq!(inf, ExtAffine::NegInf);
        assert_eq!(serde_json::to_string(&ExtAffine::PosInf).unwrap(), r#""+inf""#);
    }

    #[test]
    fn compose_and_display() {
        // f(u, v) = u - 2v + 1, with u = x + 1, v = 3x
        let f = AffineMap::from_ints(&[1, -2], 1);
        let inner = [AffineMap::from_ints(&[1], 1), AffineMap::from_ints(&[3], 0)];
        assert_eq!(f.compose(&inner), AffineMap::from_ints(&[-5], 2));
        assert_eq!(f.to_string(), "x1 - 2*x2 + 1");
        assert_eq!(AffineMap::new(vec![ratio(-1, 2)], int(0)).to_string(), "-1/2*x1");
    }
}
