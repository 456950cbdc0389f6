//! Factorization of integer polynomials over ℚ.
//!
//! Square-free decomposition first, then cheap rational-root extraction, then
//! closed-form irreducibility for small residues; anything left goes through
//! modular factorization, Hensel lifting and subset recombination.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::modp::{odd_primes, Field, PolyP};
use super::poly::{IntPoly, QPoly};
use crate::error::{Error, Result};

/// Largest degree the factorizer is exercised on.
pub const MAX_DEGREE: usize = 16;

const DIVISOR_LIMIT: u64 = 1_000_000_000_000;
const CANDIDATE_LIMIT: usize = 4096;

/// `poly = unit · ∏ factor^mult` with every factor primitive, irreducible over
/// ℚ and with positive leading coefficient.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Factorization {
    pub unit: BigInt,
    pub factors: Vec<(IntPoly, usize)>,
}

impl Factorization {
    pub fn expand(&self) -> IntPoly {
        self.factors
            .iter()
            .fold(IntPoly::new(vec![self.unit.clone()]), |acc, (f, m)| {
                acc.mul(&f.pow(*m))
            })
    }
}

pub fn factor_over_q(poly: &IntPoly) -> Result<Factorization> {
    if poly.is_zero() {
        return Err(Error::ZeroPolynomial);
    }
    let mut unit = poly.content();
    if poly.leading().is_negative() {
        unit = -unit;
    }
    let prim = IntPoly::new(poly.coeffs().iter().map(|c| c / &unit).collect());
    let mut factors = Vec::new();
    for (s, mult) in prim.to_qpoly().squarefree_decomposition() {
        for f in factor_squarefree(&positive(s.to_primitive_int())) {
            factors.push((f, mult));
        }
    }
    factors.sort();
    Ok(Factorization { unit, factors })
}

/// Irreducible factors of a rational polynomial, ignoring constants.
pub fn factor_qpoly(poly: &QPoly) -> Result<Vec<(IntPoly, usize)>> {
    if poly.is_zero() {
        return Err(Error::ZeroPolynomial);
    }
    Ok(factor_over_q(&poly.to_primitive_int())?.factors)
}

pub fn is_irreducible(poly: &IntPoly) -> bool {
    match factor_over_q(poly) {
        Ok(f) => f.factors.len() == 1 && f.factors[0].1 == 1 && poly.degree().unwrap_or(0) > 0,
        Err(_) => false,
    }
}

fn positive(p: IntPoly) -> IntPoly {
    if p.leading().is_negative() {
        p.neg()
    } else {
        p
    }
}

/// `f` primitive, square-free, positive leading coefficient.
fn factor_squarefree(f: &IntPoly) -> Vec<IntPoly> {
    let mut out = Vec::new();
    let mut rest = f.clone();
    if rest.degree().unwrap_or(0) == 0 {
        return out;
    }
    if rest.coeff(0).is_zero() {
        let x = IntPoly::from_ints(&[0, 1]);
        out.push(x.clone());
        rest = rest.exact_div(&x).expect("x divides");
    }
    let enumerated = match rational_roots(&rest) {
        Some(roots) => {
            for (num, den) in roots {
                let lin = positive(IntPoly::new(vec![-num, den]));
                if let Some(q) = rest.exact_div(&lin) {
                    out.push(lin);
                    rest = q;
                }
            }
            true
        }
        None => false,
    };
    match rest.degree() {
        None | Some(0) => {}
        Some(1) => out.push(rest),
        Some(2 | 3) if enumerated => out.push(rest),
        Some(2) => {
            let (a, b, c) = (rest.coeff(2), rest.coeff(1), rest.coeff(0));
            let disc = &b * &b - BigInt::from(4) * a * c;
            if is_square(&disc) {
                out.extend(zassenhaus(&rest));
            } else {
                out.push(rest);
            }
        }
        Some(_) => out.extend(zassenhaus(&rest)),
    }
    out.into_iter().map(positive).collect()
}

fn is_square(n: &BigInt) -> bool {
    if n.is_negative() {
        return false;
    }
    let r = n.sqrt();
    &(&r * &r) == n
}

fn small_divisors(n: &BigInt) -> Option<Vec<u64>> {
    let n = n.abs().to_u64()?;
    if n == 0 || n > DIVISOR_LIMIT {
        return None;
    }
    let mut small = Vec::new();
    let mut large = Vec::new();
    let mut d = 1u64;
    while d * d <= n {
        if n % d == 0 {
            small.push(d);
            if d * d != n {
                large.push(n / d);
            }
        }
        d += 1;
    }
    small.extend(large.into_iter().rev());
    Some(small)
}

/// Distinct rational roots `num/den` (reduced, `den > 0`) when the candidate
/// set is small enough to enumerate; `None` otherwise.
fn rational_roots(f: &IntPoly) -> Option<Vec<(BigInt, BigInt)>> {
    let nums = small_divisors(&f.coeff(0))?;
    let dens = small_divisors(&f.leading())?;
    if nums.len() * dens.len() > CANDIDATE_LIMIT {
        return None;
    }
    let n = f.degree().unwrap_or(0);
    let mut roots = Vec::new();
    for &q in &dens {
        for &p in &nums {
            if p.gcd(&q) != 1 {
                continue;
            }
            for sgn in [1i64, -1] {
                let num = BigInt::from(p) * sgn;
                let den = BigInt::from(q);
                // q^n · f(p/q)
                let mut acc = BigInt::zero();
                for (i, c) in f.coeffs().iter().enumerate() {
                    acc += c * num.pow(i as u32) * den.pow((n - i) as u32);
                }
                if acc.is_zero() {
                    roots.push((num, den));
                }
            }
        }
    }
    Some(roots)
}

fn sym_mod(x: &BigInt, m: &BigInt) -> BigInt {
    let r = x.mod_floor(m);
    if &r * 2 > *m {
        r - m
    } else {
        r
    }
}

fn poly_mod(p: &[BigInt], m: &BigInt) -> Vec<BigInt> {
    let mut v: Vec<BigInt> = p.iter().map(|c| c.mod_floor(m)).collect();
    while v.last().is_some_and(Zero::is_zero) {
        v.pop();
    }
    v
}

fn poly_mul(a: &[BigInt], b: &[BigInt]) -> Vec<BigInt> {
    IntPoly::new(a.to_vec())
        .mul(&IntPoly::new(b.to_vec()))
        .coeffs()
        .to_vec()
}

fn mod_inverse(a: &BigInt, m: &BigInt) -> BigInt {
    let e = a.extended_gcd(m);
    debug_assert!(e.gcd.is_one());
    e.x.mod_floor(m)
}

/// Choose a prime with `p ∤ lc(f)` and `f mod p` square-free, preferring the
/// fewest modular factors among the first few candidates.
fn choose_prime(f: &IntPoly) -> (Field, PolyP, Vec<(PolyP, usize)>) {
    // (field, image of f, its factors with multiplicity, factor count)
    type Candidate = (Field, PolyP, Vec<(PolyP, usize)>, usize);
    let mut best: Option<Candidate> = None;
    let mut tried = 0;
    for p in odd_primes(20_000) {
        let field = Field::new(p);
        if field.reduce_big(&f.leading()) == 0 {
            continue;
        }
        let fp = field.monic(&field.from_ints(f.coeffs()));
        if !field.is_squarefree(&fp) {
            continue;
        }
        let ddf = field.distinct_degree(&fp);
        let count: usize = ddf
            .iter()
            .map(|(g, d)| g.degree().unwrap_or(0) / d)
            .sum();
        if best.as_ref().is_none_or(|b| count < b.3) {
            best = Some((field, fp, ddf, count));
        }
        tried += 1;
        if tried >= 5 || count == 1 {
            break;
        }
    }
    let (field, fp, ddf, _) = best.expect("some prime keeps a square-free image");
    (field, fp, ddf)
}

/// Lifts `F ≡ g·h (mod p)` to `F ≡ G·H (mod p^k)` with `G` monic.
fn hensel_pair(
    field: &Field,
    target: &[BigInt],
    g: &PolyP,
    h: &PolyP,
    k: u32,
) -> (Vec<BigInt>, Vec<BigInt>) {
    let p = BigInt::from(field.p);
    let modulus = p.pow(k);
    let lc = target.last().cloned().unwrap_or_default().mod_floor(&modulus);
    let (_, s, t) = field.xgcd(g, h);
    let mut big_g: Vec<BigInt> = g.c.iter().map(|&x| BigInt::from(x)).collect();
    let mut big_h: Vec<BigInt> = h.c.iter().map(|&x| BigInt::from(x)).collect();
    *big_h.last_mut().expect("nonzero cofactor") = lc;
    let mut pk = p.clone();
    for step in 1..k {
        let next = p.pow(step + 1);
        let prod = poly_mul(&big_g, &big_h);
        let n = target.len().max(prod.len());
        let err: Vec<BigInt> = (0..n)
            .map(|i| {
                let a = target.get(i).cloned().unwrap_or_default();
                let b = prod.get(i).cloned().unwrap_or_default();
                (a - b).mod_floor(&next)
            })
            .collect();
        let e = field.from_ints(
            &err.iter()
                .map(|c| {
                    debug_assert!((c % &pk).is_zero());
                    c / &pk
                })
                .collect::<Vec<_>>(),
        );
        let (q, tau) = field.divrem(&field.pmul(&e, &t), g);
        let sigma = field.padd(&field.pmul(&e, &s), &field.pmul(&q, h));
        for (i, &c) in tau.c.iter().enumerate() {
            big_g[i] += &pk * c;
        }
        for (i, &c) in sigma.c.iter().enumerate() {
            big_h[i] += &pk * c;
        }
        big_g = poly_mod(&big_g, &next);
        big_h = poly_mod(&big_h, &next);
        pk = next;
    }
    (big_g, big_h)
}

fn zassenhaus(f: &IntPoly) -> Vec<IntPoly> {
    let n = f.degree().expect("nonzero");
    let (field, _fp, ddf) = choose_prime(f);
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed ^ field.p);
    let mut modular: Vec<PolyP> = Vec::new();
    for (g, d) in &ddf {
        modular.extend(field.equal_degree(g, *d, &mut rng));
    }
    if modular.len() <= 1 {
        return vec![f.clone()];
    }

    // Coefficient bound for lc·g where g | f.
    let lc = f.leading();
    let bound: BigInt =
        lc.abs() * (BigInt::one() << n) * BigInt::from(n + 1) * f.max_abs_coeff();
    let p = BigInt::from(field.p);
    let mut k = 1u32;
    while p.pow(k) <= &bound * 2 {
        k += 1;
    }
    let modulus = p.pow(k);

    // Peel one modular factor at a time.
    let lc_p = field.reduce_big(&lc);
    let mut lifted: Vec<Vec<BigInt>> = Vec::new();
    let mut target: Vec<BigInt> = f.coeffs().to_vec();
    for i in 0..modular.len() - 1 {
        let cofactor = modular[i + 1..]
            .iter()
            .fold(PolyP::new(vec![lc_p]), |acc, u| field.pmul(&acc, u));
        let (g, h) = hensel_pair(&field, &target, &modular[i], &cofactor, k);
        lifted.push(g);
        target = h;
    }
    let inv = mod_inverse(&lc, &modulus);
    lifted.push(poly_mod(
        &target.iter().map(|c| c * &inv).collect::<Vec<_>>(),
        &modulus,
    ));

    recombine(f, lifted, &modulus)
}

fn recombine(f: &IntPoly, mut lifted: Vec<Vec<BigInt>>, modulus: &BigInt) -> Vec<IntPoly> {
    let mut out = Vec::new();
    let mut rest = f.clone();
    let mut size = 1;
    'outer: while 2 * size <= lifted.len() {
        for subset in super::matrix::k_subsets(lifted.len(), size) {
            let lc = rest.leading();
            let prod = subset
                .iter()
                .fold(vec![lc.clone()], |acc, &i| poly_mod(&poly_mul(&acc, &lifted[i]), modulus));
            let cand = IntPoly::new(prod.iter().map(|c| sym_mod(c, modulus)).collect()).primitive();
            if cand.degree().unwrap_or(0) == 0 {
                continue;
            }
            let c0 = cand.coeff(0);
            if !c0.is_zero() && !(rest.coeff(0) % &c0).is_zero() {
                continue;
            }
            if let Some(q) = rest.exact_div(&cand) {
                out.push(cand);
                rest = q;
                for &i in subset.iter().rev() {
                    lifted.remove(i);
                }
                continue 'outer;
            }
        }
        size += 1;
    }
    if rest.degree().unwrap_or(0) > 0 {
        out.push(rest);
    }
    out
}

/// Mignotte-style sanity check used by tests: `|coeffs|` of a factor never
/// exceed the lifting bound.
#[cfg(test)]
fn coefficient_bound(f: &IntPoly) -> BigInt {
    let n = f.degree().unwrap_or(0);
    f.leading().abs() * (BigInt::one() << n) * BigInt::from(n + 1) * f.max_abs_coeff()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn p(c: &[i64]) -> IntPoly {
        IntPoly::from_ints(c)
    }

    fn check_roundtrip(f: &IntPoly) -> Factorization {
        let fac = factor_over_q(f).unwrap();
        assert_eq!(&fac.expand(), f, "expansion of {f}");
        for (g, _) in &fac.factors {
            assert!(g.leading().is_positive());
            assert!(g.content().is_one());
        }
        fac
    }

    #[test]
    fn rational_roots_and_multiplicity() {
        // 2(x − 1)²(2x + 3)
        let f = p(&[2]).mul(&p(&[-1, 1]).pow(2)).mul(&p(&[3, 2]));
        let fac = check_roundtrip(&f);
        assert_eq!(fac.unit, BigInt::from(2));
        assert_eq!(fac.factors, vec![(p(&[-1, 1]), 2), (p(&[3, 2]), 1)]);
    }

    #[test]
    fn negative_leading_coefficient_goes_to_unit() {
        let f = p(&[1, -5]); // 1 − 5z
        let fac = check_roundtrip(&f);
        assert_eq!(fac.unit, BigInt::from(-1));
        assert_eq!(fac.factors, vec![(p(&[-1, 5]), 1)]);
    }

    #[test]
    fn x4_plus_1_is_irreducible() {
        // splits modulo every prime, so recombination must reassemble it
        let f = p(&[1, 0, 0, 0, 1]);
        let fac = check_roundtrip(&f);
        assert_eq!(fac.factors, vec![(f, 1)]);
    }

    #[test]
    fn products_of_quadratics() {
        let f = p(&[-2, 0, 1]).mul(&p(&[-3, 0, 1])).mul(&p(&[-1, -1, 1]));
        let fac = check_roundtrip(&f);
        assert_eq!(fac.factors.len(), 3);
    }

    #[test]
    fn large_coefficients_skip_divisor_enumeration() {
        // (1 − 1000003 z)(1 − 3z + z²)(1 + 7z³ + 2z^4)
        let f = p(&[1, -1_000_003]).mul(&p(&[1, -3, 1])).mul(&p(&[1, 0, 0, 7, 2]));
        let f = f.mul(&p(&[1, 999_983]));
        let fac = check_roundtrip(&f);
        assert_eq!(fac.factors.len(), 4);
    }

    #[test]
    fn cyclotomic_products() {
        // z^12 − 1 = Φ1 Φ2 Φ3 Φ4 Φ6 Φ12
        let mut c = vec![0i64; 13];
        c[0] = -1;
        c[12] = 1;
        let fac = check_roundtrip(&p(&c));
        assert_eq!(fac.factors.len(), 6);
    }

    #[test]
    fn degree_sixteen() {
        let f = p(&[1, 0, 0, 0, 1]).mul(&p(&[-2, 0, 1]).pow(3)).mul(&p(&[5, 1, 0, 1]).pow(2));
        assert_eq!(f.degree(), Some(MAX_DEGREE));
        let fac = check_roundtrip(&f);
        assert_eq!(fac.factors.len(), 3);
    }

    #[test]
    fn zero_is_an_error() {
        assert!(matches!(factor_over_q(&IntPoly::new(vec![])), Err(Error::ZeroPolynomial)));
    }

    #[test]
    fn bound_dominates_known_factor() {
        let g = p(&[1, -30, 1]);
        let f = g.mul(&p(&[1, 1, 1]));
        assert!(coefficient_bound(&f) >= g.max_abs_coeff());
    }

    fn small_poly() -> impl Strategy<Value = IntPoly> {
        (1usize..=3)
            .prop_flat_map(|d| proptest::collection::vec(-9i64..=9, d + 1))
            .prop_map(|mut c| {
                if *c.last().unwrap() == 0 {
                    *c.last_mut().unwrap() = 1;
                }
                IntPoly::from_ints(&c)
            })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn product_factorization_roundtrips(a in small_poly(), b in small_poly(), c in small_poly()) {
            let f = a.mul(&b).mul(&c);
            let fac = factor_over_q(&f).unwrap();
            prop_assert_eq!(fac.expand(), f.clone());
            for (g, _) in &fac.factors {
                // each reported factor divides f and is irreducible of its own accord
                prop_assert!(f.exact_div(g).is_some());
            }
            let total: usize = fac.factors.iter().map(|(g, m)| g.degree().unwrap() * m).sum();
            prop_assert_eq!(total, f.degree().unwrap());
            // at least as many factors as the nonconstant inputs provide
            let parts = [&a, &b, &c].iter().filter(|q| q.degree().unwrap_or(0) > 0).count();
            let count: usize = fac.factors.iter().map(|(_, m)| m).sum();
            prop_assert!(count >= parts);
        }
    }
}
