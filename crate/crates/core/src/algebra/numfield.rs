//! Elements of ℚ(θ) for a real algebraic θ of degree ≤ 3.

use num_traits::{One, Signed, Zero};

use super::factor::is_irreducible;
use super::poly::{IntPoly, QPoly};
use super::rational::{rat, sign, Rational};
use super::sturm::{sturm_count, Bound};
use crate::error::{Error, Result};

/// `repr(θ)` where θ is the unique root of `minpoly` inside `(lo, hi)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NumberFieldElem {
    minpoly: IntPoly,
    repr: QPoly,
    lo: Rational,
    hi: Rational,
}

impl NumberFieldElem {
    pub fn new(minpoly: IntPoly, repr: QPoly, lo: Rational, hi: Rational) -> Result<Self> {
        let deg = minpoly.degree().unwrap_or(0);
        if !(1..=3).contains(&deg) || !is_irreducible(&minpoly) {
            return Err(Error::Shape(format!(
                "minimal polynomial {minpoly} must be irreducible of degree 1..=3"
            )));
        }
        let m = minpoly.to_qpoly();
        if sturm_count(&m, &Bound::At(lo.clone()), &Bound::At(hi.clone())) != 1 {
            return Err(Error::Shape(format!(
                "interval ({lo}, {hi}) does not isolate a single root of {minpoly}"
            )));
        }
        let repr = repr.div_rem(&m).1;
        Ok(Self { minpoly, repr, lo, hi })
    }

    /// θ itself.
    pub fn generator(minpoly: IntPoly, lo: Rational, hi: Rational) -> Result<Self> {
        Self::new(minpoly, QPoly::x(), lo, hi)
    }

    pub fn minpoly(&self) -> &IntPoly {
        &self.minpoly
    }

    pub fn repr(&self) -> &QPoly {
        &self.repr
    }

    pub fn interval(&self) -> (&Rational, &Rational) {
        (&self.lo, &self.hi)
    }

    /// Same field and root, different representation.
    pub fn with_repr(&self, repr: QPoly) -> Self {
        let repr = repr.div_rem(&self.minpoly.to_qpoly()).1;
        Self { repr, ..self.clone() }
    }

    pub fn from_rational(&self, c: Rational) -> Self {
        self.with_repr(QPoly::constant(c))
    }

    pub fn is_zero(&self) -> bool {
        self.repr.is_zero()
    }

    pub fn add(&self, other: &Self) -> Self {
        self.with_repr(&self.repr + &other.repr)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.with_repr(&self.repr - &other.repr)
    }

    pub fn mul(&self, other: &Self) -> Self {
        self.with_repr(&self.repr * &other.repr)
    }

    pub fn neg(&self) -> Self {
        self.with_repr(-&self.repr)
    }

    /// Rational approximation of θ to within `eps` (midpoint of a refined
    /// isolating interval).
    pub fn approx_root(&self, eps: &Rational) -> Rational {
        let m = self.minpoly.to_qpoly();
        let (mut lo, mut hi) = (self.lo.clone(), self.hi.clone());
        while &(&hi - &lo) > eps {
            bisect(&m, &mut lo, &mut hi);
        }
        (lo + hi) / rat(2)
    }
}

/// Halves `(lo, hi)` keeping the single root of `m` inside.
fn bisect(m: &QPoly, lo: &mut Rational, hi: &mut Rational) {
    let mid = (&*lo + &*hi) / rat(2);
    if m.eval(&mid).is_zero() {
        // rational root (degree-1 minimal polynomial): collapse around it
        let quarter = (&*hi - &*lo) / rat(4);
        *lo = &mid - &quarter;
        *hi = &mid + &quarter;
    } else if sturm_count(m, &Bound::At(lo.clone()), &Bound::At(mid.clone())) == 1 {
        *hi = mid;
    } else {
        *lo = mid;
    }
}

/// Sign of `x.repr(θ)`.
pub fn nf_sign(x: &NumberFieldElem) -> i32 {
    if x.repr.is_zero() {
        return 0;
    }
    let m = x.minpoly.to_qpoly();
    if m.degree() == Some(1) {
        let root = -m.coeff(0) / m.coeff(1);
        return sign(&x.repr.eval(&root));
    }
    let (mut lo, mut hi) = (x.lo.clone(), x.hi.clone());
    // repr(θ) ≠ 0, so refining eventually leaves no root of repr near θ.
    loop {
        let at_lo = x.repr.eval(&lo);
        if !at_lo.is_zero()
            && sturm_count(&x.repr, &Bound::At(lo.clone()), &Bound::At(hi.clone())) == 0
        {
            return sign(&at_lo);
        }
        bisect(&m, &mut lo, &mut hi);
    }
}

/// Disjoint isolating intervals `(lo, hi)` for every real root of a
/// square-free polynomial, in increasing order.
pub fn isolate_real_roots(p: &QPoly) -> Vec<(Rational, Rational)> {
    let p = p.squarefree_part();
    let Some(deg) = p.degree() else { return Vec::new() };
    if deg == 0 {
        return Vec::new();
    }
    // Cauchy bound
    let lead = p.leading();
    let cb = p
        .coeffs()
        .iter()
        .take(deg)
        .map(|c| (c / &lead).abs())
        .fold(Rational::zero(), |a, b| if b > a { b } else { a })
        + Rational::one();
    let mut out = Vec::new();
    let mut stack = vec![(-cb.clone(), cb)];
    while let Some((lo, hi)) = stack.pop() {
        let count = sturm_count(&p, &Bound::At(lo.clone()), &Bound::At(hi.clone()));
        if count == 0 {
            continue;
        }
        if count == 1 {
            out.push((lo, hi));
            continue;
        }
        let mid = (&lo + &hi) / rat(2);
        if p.eval(&mid).is_zero() {
            // root exactly at the midpoint: isolate it in its own small box
            let w = (&hi - &lo) / rat(1 << 10);
            let mut eps = w;
            while sturm_count(&p, &Bound::At(&mid - &eps), &Bound::At(&mid + &eps)) != 1 {
                eps /= rat(2);
            }
            out.push((&mid - &eps, &mid + &eps));
            stack.push((lo, &mid - &eps));
            stack.push((&mid + &eps, hi));
            continue;
        }
        stack.push((lo, mid.clone()));
        stack.push((mid, hi));
    }
    out.sort();
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::rational::ratio;

    fn sqrt2(repr: QPoly) -> NumberFieldElem {
        NumberFieldElem::new(IntPoly::from_ints(&[-2, 0, 1]), repr, rat(1), rat(2)).unwrap()
    }

    #[test]
    fn documented_signs() {
        assert_eq!(nf_sign(&sqrt2(QPoly::zero())), 0);
        assert_eq!(nf_sign(&sqrt2(QPoly::from_ints(&[-1, 1]))), 1);
        assert_eq!(nf_sign(&sqrt2(QPoly::from_ints(&[-3, 0, 1]))), -1);
    }

    #[test]
    fn symbolic_zero_is_detected() {
        // θ² − 2 reduces to 0
        let x = sqrt2(QPoly::from_ints(&[-2, 0, 1]));
        assert!(x.is_zero());
        assert_eq!(nf_sign(&x), 0);
    }

    #[test]
    fn close_values() {
        // 140/99 < √2 < 99/70
        let a = sqrt2(QPoly::new(vec![-ratio(140, 99), Rational::one()]));
        let b = sqrt2(QPoly::new(vec![-ratio(99, 70), Rational::one()]));
        assert_eq!(nf_sign(&a), 1);
        assert_eq!(nf_sign(&b), -1);
    }

    #[test]
    fn rejects_bad_intervals() {
        let m = IntPoly::from_ints(&[-2, 0, 1]);
        assert!(NumberFieldElem::generator(m.clone(), rat(-2), rat(2)).is_err());
        assert!(NumberFieldElem::generator(IntPoly::from_ints(&[-1, 0, 1]), rat(0), rat(2)).is_err());
    }

    #[test]
    fn cubic_field_arithmetic() {
        // θ³ − θ − 1 (plastic number ≈ 1.3247)
        let m = IntPoly::from_ints(&[-1, -1, 0, 1]);
        let t = NumberFieldElem::generator(m, rat(1), rat(2)).unwrap();
        let t3 = t.mul(&t).mul(&t);
        assert_eq!(t3.repr(), &QPoly::from_ints(&[1, 1]));
        // θ² − 7/4 ≈ 0.0048 > 0
        let d = t.mul(&t).sub(&t.from_rational(ratio(7, 4)));
        assert_eq!(nf_sign(&d), 1);
        let approx = t.approx_root(&ratio(1, 1_000_000));
        assert!((approx - ratio(13247, 10000)).abs() < ratio(1, 1000));
    }

    #[test]
    fn isolation() {
        let p = QPoly::from_ints(&[0, -1, 0, 1]); // x³ − x
        let iv = isolate_real_roots(&p);
        assert_eq!(iv.len(), 3);
        for (lo, hi) in &iv {
            assert_eq!(sturm_count(&p, &Bound::At(lo.clone()), &Bound::At(hi.clone())), 1);
        }
    }
}
