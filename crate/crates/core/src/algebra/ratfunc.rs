//! Canonical products `∏ q_i(z)^{e_i}` of irreducible integer polynomials.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::factor::factor_over_q;
use super::poly::{IntPoly, QPoly};
use super::rational::Rational;
use crate::error::{Error, Result};

/// Rational function in canonical product form.
///
/// Every factor is primitive, irreducible over ℚ, has constant term 1 and a
/// nonzero exponent; factors are sorted by degree, then coefficients. The
/// empty product is the constant 1.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct RatFuncProduct {
    factors: Vec<(IntPoly, i64)>,
}

fn sort_key(q: &IntPoly) -> (usize, &[BigInt]) {
    (q.degree().unwrap_or(0), q.coeffs())
}

impl RatFuncProduct {
    pub fn one() -> Self {
        Self::default()
    }

    /// Canonicalizes an arbitrary list of `(q, e)`; each `q` must satisfy
    /// `q(0) = 1` and is split into irreducible factors.
    pub fn new(factors: impl IntoIterator<Item = (IntPoly, i64)>) -> Result<Self> {
        let mut acc: BTreeMap<IntPoly, i64> = BTreeMap::new();
        for (q, e) in factors {
            if e == 0 {
                continue;
            }
            if q.coeff(0) != BigInt::one() {
                return Err(Error::Shape(format!(
                    "zeta factor {q} must have constant term 1"
                )));
            }
            if q.degree() == Some(0) {
                continue;
            }
            let fac = factor_over_q(&q)?;
            for (f, m) in fac.factors {
                let f = if f.coeff(0).is_negative() { f.neg() } else { f };
                debug_assert!(f.coeff(0).is_one());
                *acc.entry(f).or_insert(0) += e * m as i64;
            }
        }
        Ok(Self::from_canonical_map(acc))
    }

    /// Factors known to be irreducible with constant term 1.
    fn from_canonical_map(acc: BTreeMap<IntPoly, i64>) -> Self {
        let mut factors: Vec<(IntPoly, i64)> = acc.into_iter().filter(|(_, e)| *e != 0).collect();
        factors.sort_by(|a, b| sort_key(&a.0).cmp(&sort_key(&b.0)));
        Self { factors }
    }

    fn map(&self, f: impl Fn(&IntPoly, i64) -> (IntPoly, i64)) -> Self {
        let mut acc: BTreeMap<IntPoly, i64> = BTreeMap::new();
        for (q, e) in &self.factors {
            let (q2, e2) = f(q, *e);
            *acc.entry(q2).or_insert(0) += e2;
        }
        Self::from_canonical_map(acc)
    }

    pub fn factors(&self) -> &[(IntPoly, i64)] {
        &self.factors
    }

    pub fn is_one(&self) -> bool {
        self.factors.is_empty()
    }

    /// `R(−z)`.
    pub fn negate_z(&self) -> Self {
        self.map(|q, e| (q.negate_var(), e))
    }

    /// `1 / R(z)`.
    pub fn reciprocal(&self) -> Self {
        self.map(|q, e| (q.clone(), -e))
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut acc: BTreeMap<IntPoly, i64> = BTreeMap::new();
        for (q, e) in self.factors.iter().chain(&other.factors) {
            *acc.entry(q.clone()).or_insert(0) += e;
        }
        Self::from_canonical_map(acc)
    }

    pub fn div(&self, other: &Self) -> Self {
        self.mul(&other.reciprocal())
    }

    /// Numerator and denominator as expanded integer polynomials.
    pub fn as_fraction(&self) -> (IntPoly, IntPoly) {
        let mut num = IntPoly::one();
        let mut den = IntPoly::one();
        for (q, e) in &self.factors {
            let pw = q.pow(e.unsigned_abs() as usize);
            if *e > 0 {
                num = num.mul(&pw);
            } else {
                den = den.mul(&pw);
            }
        }
        (num, den)
    }

    /// `c_1..c_n` of `z·d/dz log R(z) = Σ c_k z^k`.
    pub fn log_derivative_coeffs(&self, n: usize) -> Vec<Rational> {
        let mut out = vec![Rational::zero(); n];
        for (q, e) in &self.factors {
            let qq = q.to_qpoly();
            let zq = &QPoly::x() * &qq.derivative();
            let series = zq.series_div(&qq, n + 1);
            let e = Rational::from_integer(BigInt::from(*e));
            for k in 1..=n {
                out[k - 1] += &series[k] * &e;
            }
        }
        out
    }

    /// First `n` Taylor coefficients of `R(z)` itself.
    pub fn taylor(&self, n: usize) -> Vec<Rational> {
        let (num, den) = self.as_fraction();
        num.to_qpoly().series_div(&den.to_qpoly(), n)
    }
}

impl fmt::Display for RatFuncProduct {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn part(fs: &[(&IntPoly, u64)]) -> String {
            if fs.is_empty() {
                return "1".into();
            }
            fs.iter()
                .map(|(q, e)| {
                    if *e == 1 {
                        format!("({q})")
                    } else {
                        format!("({q})^{e}")
                    }
                })
                .collect::<Vec<_>>()
                .join("*")
        }
        let num: Vec<_> = self
            .factors
            .iter()
            .filter(|(_, e)| *e > 0)
            .map(|(q, e)| (q, *e as u64))
            .collect();
        let den: Vec<_> = self
            .factors
            .iter()
            .filter(|(_, e)| *e < 0)
            .map(|(q, e)| (q, e.unsigned_abs()))
            .collect();
        match den.len() {
            0 => write!(f, "{}", part(&num)),
            1 => write!(f, "{}/{}", part(&num), part(&den)),
            _ => write!(f, "{}/({})", part(&num), part(&den)),
        }
    }
}

#[derive(Serialize, Deserialize)]
struct WireFactor {
    poly: Vec<serde_json::Value>,
    exp: i64,
}

fn int_to_json(c: &BigInt) -> serde_json::Value {
    match c.to_i64() {
        Some(v) => serde_json::Value::from(v),
        None => serde_json::Value::from(c.to_string()),
    }
}

fn json_to_int(v: &serde_json::Value) -> std::result::Result<BigInt, String> {
    match v {
        serde_json::Value::Number(n) => n
            .as_i64()
            .map(BigInt::from)
            .ok_or_else(|| format!("non-integer coefficient {n}")),
        serde_json::Value::String(s) => s.parse().map_err(|_| format!("bad coefficient {s:?}")),
        other => Err(format!("bad coefficient {other}")),
    }
}

impl Serialize for RatFuncProduct {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let wire: Vec<WireFactor> = self
            .factors
            .iter()
            .map(|(q, e)| WireFactor {
                poly: q.coeffs().iter().map(int_to_json).collect(),
                exp: *e,
            })
            .collect();
        wire.serialize(s)
    }
}

impl<'de> Deserialize<'de> for RatFuncProduct {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let wire = Vec::<WireFactor>::deserialize(d)?;
        let mut factors = Vec::with_capacity(wire.len());
        for w in wire {
            let coeffs = w
                .poly
                .iter()
                .map(json_to_int)
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(serde::de::Error::custom)?;
            factors.push((IntPoly::new(coeffs), w.exp));
        }
        RatFuncProduct::new(factors).map_err(serde::de::Error::custom)
    }
}
