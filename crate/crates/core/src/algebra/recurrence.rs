//! Exact linear-recurrence reconstruction of `S(z) = Σ_{k≥1} c_k z^k` and
//! recovery of a product form from its logarithmic derivative.

use num_traits::{One, Zero};

use super::factor::factor_qpoly;
use super::matrix::QMatrix;
use super::poly::{IntPoly, QPoly};
use super::ratfunc::RatFuncProduct;
use super::rational::{is_integer, Rational};
use crate::error::{Error, Result};

/// Fits `S(z) = Σ_{k≥1} seq[k-1] z^k` as `num/den` with `den(0) = 1`.
///
/// The recurrence is found from the first `2·bound + 2` terms; every
/// remaining supplied term is then checked against the re-expansion.
pub fn berlekamp_massey_q(seq: &[Rational], bound: usize) -> Result<(QPoly, QPoly)> {
    let fit = 2 * bound + 2;
    if seq.len() < fit {
        return Err(Error::Shape(format!(
            "need at least {fit} terms for bound {bound}, got {}",
            seq.len()
        )));
    }
    let s = &seq[..fit];
    let mut c = vec![Rational::one()];
    let mut b = vec![Rational::one()];
    let mut len = 0usize;
    let mut shift = 1usize;
    let mut last = Rational::one();
    for n in 0..s.len() {
        let mut d = s[n].clone();
        for i in 1..=len.min(c.len() - 1) {
            d += &c[i] * &s[n - i];
        }
        if d.is_zero() {
            shift += 1;
            continue;
        }
        let coef = &d / &last;
        let prev = c.clone();
        if c.len() < b.len() + shift {
            c.resize(b.len() + shift, Rational::zero());
        }
        for (i, bi) in b.iter().enumerate() {
            c[i + shift] -= &coef * bi;
        }
        if 2 * len <= n {
            len = n + 1 - len;
            b = prev;
            last = d;
            shift = 1;
        } else {
            shift += 1;
        }
    }
    if len > bound {
        return Err(Error::RecurrenceTooLong { bound });
    }
    let den = QPoly::new(c);
    // S = z·T with T·den ≡ P (mod z^len)
    let t = QPoly::new(s.to_vec());
    let p = t.mul_trunc(&den, len);
    let num = &QPoly::x() * &p;
    let expanded = num.series_div(&den, seq.len() + 1);
    if expanded[1..] != *seq {
        return Err(Error::RecurrenceTooLong { bound });
    }
    Ok((num, den))
}

/// Recovers `∏ q_i^{e_i}` from `z·d/dz log ∏ q_i^{e_i} = num/den`.
pub fn exponents_from_logderiv(num: &QPoly, den: &QPoly) -> Result<RatFuncProduct> {
    if den.coeff(0) != Rational::one() {
        return Err(Error::NotPowerSum("denominator must have constant term 1".into()));
    }
    if num.is_zero() {
        return Ok(RatFuncProduct::one());
    }
    let g = num.gcd(den);
    let num = num.div_rem(&g).0;
    let den = den.div_rem(&g).0;
    let c0 = den.coeff(0);
    let (num, den) = (num.scale(&c0.recip()), den.scale(&c0.recip()));

    let mut qs: Vec<IntPoly> = Vec::new();
    for (q, mult) in factor_qpoly(&den)? {
        if mult != 1 {
            return Err(Error::NotPowerSum(format!("repeated denominator factor {q}")));
        }
        let q0 = q.coeff(0);
        let q = if q0 == -num_bigint::BigInt::one() {
            q.neg()
        } else if q0.is_one() {
            q
        } else {
            return Err(Error::NotPowerSum(format!("factor {q} has constant term {q0}")));
        };
        qs.push(q);
    }
    // den = ∏ q_i exactly once both have constant term 1.
    let qpolys: Vec<QPoly> = qs.iter().map(IntPoly::to_qpoly).collect();
    let columns: Vec<QPoly> = (0..qs.len())
        .map(|i| {
            qpolys
                .iter()
                .enumerate()
                .filter(|(j, _)| *j != i)
                .fold(&QPoly::x() * &qpolys[i].derivative(), |acc, (_, q)| &acc * q)
        })
        .collect();
    let rows = columns
        .iter()
        .map(|c| c.degree().unwrap_or(0))
        .chain(num.degree())
        .max()
        .unwrap_or(0)
        + 1;
    let mut aug = QMatrix::zeros(rows, qs.len() + 1);
    for (j, col) in columns.iter().enumerate() {
        for r in 0..rows {
            aug[(r, j)] = col.coeff(r);
        }
    }
    for r in 0..rows {
        aug[(r, qs.len())] = num.coeff(r);
    }
    let (red, pivots) = aug.rref();
    if pivots.contains(&qs.len()) || pivots.len() != qs.len() {
        return Err(Error::NotPowerSum(
            "numerator is not a combination of the logarithmic derivatives".into(),
        ));
    }
    let mut factors = Vec::with_capacity(qs.len());
    for (row, (&pivot, q)) in pivots.iter().zip(&qs).enumerate() {
        debug_assert_eq!(pivot, row);
        let e = &red[(row, qs.len())];
        if !is_integer(e) {
            return Err(Error::NotPowerSum(format!("exponent {e} of {q} is not an integer")));
        }
        let e = e.to_integer();
        let e: i64 = num_traits::ToPrimitive::to_i64(&e)
            .ok_or_else(|| Error::NotPowerSum(format!("exponent {e} out of range")))?;
        factors.push((q.clone(), e));
    }
    RatFuncProduct::new(factors)
}

/// Convenience: reconstructs the product form directly from `c_1, c_2, …`.
pub fn product_from_sequence(seq: &[Rational], bound: usize) -> Result<RatFuncProduct> {
    let (num, den) = berlekamp_massey_q(seq, bound)?;
    let prod = exponents_from_logderiv(&num, &den)?;
    if prod.log_derivative_coeffs(seq.len()) != seq {
        return Err(Error::NotPowerSum("re-expansion does not reproduce the sequence".into()));
    }
    Ok(prod)
}
