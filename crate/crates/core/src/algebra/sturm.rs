//! Real-root counting with Sturm sequences.

use num_traits::Zero;

use super::poly::QPoly;
use super::rational::{sign, Rational};

/// Interval endpoint.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Bound {
    NegInf,
    At(Rational),
    PosInf,
}

impl From<Rational> for Bound {
    fn from(x: Rational) -> Self {
        Bound::At(x)
    }
}

/// Sturm chain of the square-free part of `poly`.
pub fn sturm_chain(poly: &QPoly) -> Vec<QPoly> {
    let p = poly.squarefree_part();
    if p.degree().unwrap_or(0) == 0 {
        return vec![p];
    }
    let mut chain = vec![p.clone(), p.derivative()];
    loop {
        let n = chain.len();
        let r = chain[n - 2].div_rem(&chain[n - 1]).1;
        if r.is_zero() {
            break;
        }
        chain.push(-&r);
    }
    chain
}

fn sign_at(p: &QPoly, at: &Bound) -> i32 {
    match at {
        Bound::At(x) => sign(&p.eval(x)),
        Bound::PosInf => sign(&p.leading()),
        Bound::NegInf => {
            let s = sign(&p.leading());
            if p.degree().unwrap_or(0) % 2 == 1 {
                -s
            } else {
                s
            }
        }
    }
}

fn variations(chain: &[QPoly], at: &Bound) -> usize {
    let signs: Vec<i32> = chain
        .iter()
        .map(|p| sign_at(p, at))
        .filter(|&s| s != 0)
        .collect();
    signs.windows(2).filter(|w| w[0] != w[1]).count()
}

fn less(a: &Bound, b: &Bound) -> bool {
    match (a, b) {
        (Bound::NegInf, Bound::NegInf) | (Bound::PosInf, _) | (_, Bound::NegInf) => false,
        (Bound::NegInf, _) | (_, Bound::PosInf) => true,
        (Bound::At(x), Bound::At(y)) => x < y,
    }
}

/// Number of distinct real roots of `poly` in the open interval `(lo, hi)`.
///
/// Constants (including zero) have no roots. Multiplicities are ignored; use
/// the square-free decomposition to recover them.
pub fn sturm_count(poly: &QPoly, lo: &Bound, hi: &Bound) -> usize {
    if poly.degree().unwrap_or(0) == 0 || !less(lo, hi) {
        return 0;
    }
    let chain = sturm_chain(poly);
    // (lo, hi] count, then drop hi itself if it is a root.
    let half_open = variations(&chain, lo) - variations(&chain, hi);
    match hi {
        Bound::At(x) if chain[0].eval(x).is_zero() => half_open - 1,
        _ => half_open,
    }
}

/// Distinct real roots on the whole line.
pub fn real_root_count(poly: &QPoly) -> usize {
    sturm_count(poly, &Bound::NegInf, &Bound::PosInf)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::rational::{rat, ratio};

    fn at(n: i64) -> Bound {
        Bound::At(rat(n))
    }

    #[test]
    fn documented_examples() {
        let p = QPoly::from_ints(&[15, -8, 1]);
        assert_eq!(sturm_count(&p, &at(1), &Bound::PosInf), 2);
        let q = QPoly::from_ints(&[1, 0, 1]);
        assert_eq!(real_root_count(&q), 0);
        // x² − x − 1: roots (1 ± √5)/2 ≈ 1.618, −0.618
        let g = QPoly::from_ints(&[-1, -1, 1]);
        assert_eq!(sturm_count(&g, &at(1), &Bound::PosInf), 1);
        assert_eq!(sturm_count(&g, &at(-1), &at(0)), 1);
    }

    #[test]
    fn endpoints_are_excluded() {
        let p = QPoly::from_ints(&[15, -8, 1]); // roots 3, 5
        assert_eq!(sturm_count(&p, &at(3), &at(5)), 0);
        assert_eq!(sturm_count(&p, &at(2), &at(5)), 1);
        assert_eq!(sturm_count(&p, &at(3), &at(6)), 1);
        assert_eq!(sturm_count(&p, &at(5), &at(3)), 0);
    }

    #[test]
    fn multiplicities_collapse() {
        // (x − 2)³ (x + 1)
        let a = QPoly::from_ints(&[-2, 1]);
        let p = &a.pow(3) * &QPoly::from_ints(&[1, 1]);
        assert_eq!(real_root_count(&p), 2);
        assert_eq!(sturm_count(&p, &Bound::At(ratio(3, 2)), &Bound::PosInf), 1);
    }

    #[test]
    fn constants_have_no_roots() {
        assert_eq!(real_root_count(&QPoly::from_ints(&[3])), 0);
        assert_eq!(real_root_count(&QPoly::zero()), 0);
    }
}
