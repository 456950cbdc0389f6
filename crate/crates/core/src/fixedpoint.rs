//! Lefschetz and Nielsen numbers of f^k by averaging over the holonomy
//! group, spectrum classification, the positive part Γ⁺ and the cheap
//! criteria for N(f) = |L(f)|.

use std::sync::atomic::{AtomicUsize, Ordering};

use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use rayon::prelude::*;

use crate::affine::MapCandidate;
use crate::algebra::factor::factor_qpoly;
use crate::algebra::numfield::{nf_sign, NumberFieldElem};
use crate::algebra::rational::{rat, to_integer};
use crate::algebra::sturm::{sturm_count, Bound};
use crate::algebra::{IntPoly, QMatrix, QPoly, Rational};
use crate::{Error, Result};

static MIXED_FACTOR_HITS: AtomicUsize = AtomicUsize::new(0);
static MIXED_CUBIC_HITS: AtomicUsize = AtomicUsize::new(0);

/// How often `positive_part` needed the ℚ(θ) eigenvector path:
/// (any mixed-modulus factor, mixed-modulus irreducible cubics).
pub fn mixed_path_counters() -> (usize, usize) {
    (MIXED_FACTOR_HITS.load(Ordering::Relaxed), MIXED_CUBIC_HITS.load(Ordering::Relaxed))
}

/// det(I − A·M) for every holonomy element A, in holonomy order.
pub fn det_table(elements: &[QMatrix], m: &QMatrix) -> Vec<Rational> {
    let n = m.rows();
    let id = QMatrix::identity(n);
    elements.iter().map(|a| (&id - &(a * m)).det()).collect()
}

fn exact_average(values: impl Iterator<Item = Rational>, count: usize, what: &str) -> Result<BigInt> {
    let sum: Rational = values.fold(Rational::zero(), |acc, v| acc + v);
    let avg = sum / rat(count as i64);
    to_integer(&avg).ok_or_else(|| Error::NonIntegral(format!("{what} = {avg}")))
}

/// L(f^k) = (1/#F)·Σ det(I − A∗D∗^k).
pub fn lefschetz_number(c: &MapCandidate, k: u32) -> Result<BigInt> {
    let hol = &c.entry.holonomy;
    let t = det_table(&hol.elements, &c.dstar.pow(k));
    exact_average(t.into_iter(), hol.order(), &format!("L(f^{k})"))
}

/// N(f^k) = (1/#F)·Σ |det(I − A∗D∗^k)|.
pub fn nielsen_number(c: &MapCandidate, k: u32) -> Result<BigInt> {
    let hol = &c.entry.holonomy;
    let t = det_table(&hol.elements, &c.dstar.pow(k));
    let l = exact_average(t.iter().cloned(), hol.order(), &format!("L(f^{k})"))?;
    let n = exact_average(t.into_iter().map(|v| v.abs()), hol.order(), &format!("N(f^{k})"))?;
    if n < l.abs() {
        return Err(Error::NonIntegral(format!("N(f^{k}) = {n} < |L(f^{k})| = {}", l.abs())));
    }
    Ok(n)
}

/// L, L⁺ (index 2 only) and N of one iterate, from a single determinant table.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IterateNumbers {
    pub k: u32,
    pub lefschetz: BigInt,
    pub lefschetz_plus: Option<BigInt>,
    pub nielsen: BigInt,
}

/// Numbers for f^1 … f^kmax.
pub fn iterate_numbers(c: &MapCandidate, pp: &PositivePart, kmax: u32) -> Result<Vec<IterateNumbers>> {
    let hol = &c.entry.holonomy;
    let mut powers = Vec::with_capacity(kmax as usize);
    let mut cur = QMatrix::identity(c.dim());
    for _ in 0..kmax {
        cur = &cur * &c.dstar;
        powers.push(cur.clone());
    }
    powers
        .par_iter()
        .enumerate()
        .map(|(i, dk)| {
            let k = i as u32 + 1;
            let t = det_table(&hol.elements, dk);
            let lefschetz = exact_average(t.iter().cloned(), t.len(), &format!("L(f^{k})"))?;
            let nielsen = exact_average(t.iter().map(|v| v.abs()), t.len(), &format!("N(f^{k})"))?;
            if nielsen < lefschetz.abs() {
                return Err(Error::NonIntegral(format!("N(f^{k}) = {nielsen} < |L(f^{k})|")));
            }
            let lefschetz_plus = if pp.index == 2 {
                Some(exact_average(
                    pp.f_plus.iter().map(|&j| t[j].clone()),
                    pp.f_plus.len(),
                    &format!("L(f⁺^{k})"),
                )?)
            } else {
                None
            };
            Ok(IterateNumbers { k, lefschetz, lefschetz_plus, nielsen })
        })
        .collect()
}

/// Root counts of one irreducible factor of the characteristic polynomial,
/// each counted with the factor's multiplicity.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FactorClass {
    pub factor: IntPoly,
    pub multiplicity: usize,
    /// Roots of modulus < 1, = 1 and > 1.
    pub below: usize,
    pub on: usize,
    pub above: usize,
    /// Real roots > 1 and < −1.
    pub real_gt1: usize,
    pub real_lt_neg1: usize,
}

impl FactorClass {
    /// Roots on both sides of the |λ| ≤ 1 / |λ| > 1 split.
    pub fn is_mixed(&self) -> bool {
        self.above > 0 && self.below + self.on > 0
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EigenClass {
    pub charpoly: QPoly,
    pub factors: Vec<FactorClass>,
    /// Real eigenvalues > 1, with multiplicity.
    pub p: usize,
    /// Real eigenvalues < −1, with multiplicity.
    pub n: usize,
    /// Eigenvalues of modulus > 1, with multiplicity.
    pub dim_gt1: usize,
}

impl EigenClass {
    pub fn degree(&self) -> usize {
        self.charpoly.degree().unwrap_or(0)
    }

    /// Whether every irreducible factor lies entirely on one side of the split.
    pub fn aligned(&self) -> bool {
        self.factors.iter().all(|f| !f.is_mixed())
    }
}

fn cauchy_bound(f: &QPoly) -> Rational {
    let lead = f.leading().abs();
    let max = f.coeffs().iter().map(|c| c.abs() / &lead).fold(Rational::zero(), |a, b| if b > a { b } else { a });
    max + rat(1)
}

fn classify_factor(f: &IntPoly, mult: usize) -> FactorClass {
    let q = f.to_qpoly();
    let deg = q.degree().unwrap_or(0);
    let (mut below, mut on, mut above, mut gt1, mut lt1) = (0, 0, 0, 0, 0);
    if deg == 1 {
        let r = -q.coeff(0) / q.coeff(1);
        let one = rat(1);
        match r.abs().cmp(&one) {
            std::cmp::Ordering::Less => below = 1,
            std::cmp::Ordering::Equal => on = 1,
            std::cmp::Ordering::Greater => {
                above = 1;
                if r > one {
                    gt1 = 1
                } else {
                    lt1 = 1
                }
            }
        }
    } else {
        // irreducible of degree ≥ 2: no rational roots, so ±1 are never roots
        gt1 = sturm_count(&q, &Bound::At(rat(1)), &Bound::PosInf);
        lt1 = sturm_count(&q, &Bound::NegInf, &Bound::At(rat(-1)));
        let mid = sturm_count(&q, &Bound::At(rat(-1)), &Bound::At(rat(1)));
        above = gt1 + lt1;
        below = mid;
        let complex = deg - gt1 - lt1 - mid;
        if complex == 2 {
            // |μ|² = |c₀/c_d| for a quadratic; for a cubic |r|·|μ|² = |c₀/c₃|
            let c = (q.coeff(0) / q.leading()).abs();
            let pair_above = match deg {
                2 => match c.cmp(&rat(1)) {
                    std::cmp::Ordering::Less => Some(false),
                    std::cmp::Ordering::Equal => None,
                    std::cmp::Ordering::Greater => Some(true),
                },
                // |r| < c ⇔ |μ| > 1; |r| = c would make r rational
                3 => Some(sturm_count(&q, &Bound::At(-c.clone()), &Bound::At(c)) == 1),
                _ => unreachable!("dimension ≤ 3"),
            };
            match pair_above {
                Some(true) => above += 2,
                Some(false) => below += 2,
                None => on += 2,
            }
        }
    }
    FactorClass {
        factor: f.clone(),
        multiplicity: mult,
        below: below * mult,
        on: on * mult,
        above: above * mult,
        real_gt1: gt1 * mult,
        real_lt_neg1: lt1 * mult,
    }
}

/// Exact modulus classification of the eigenvalues of D∗.
pub fn eigen_classify(dstar: &QMatrix) -> EigenClass {
    let charpoly = dstar.charpoly().expect("square matrix");
    let factors: Vec<FactorClass> = factor_qpoly(&charpoly)
        .expect("characteristic polynomial is monic")
        .iter()
        .map(|(f, m)| classify_factor(f, *m))
        .collect();
    let p = factors.iter().map(|f| f.real_gt1).sum();
    let n = factors.iter().map(|f| f.real_lt_neg1).sum();
    let dim_gt1 = factors.iter().map(|f| f.above).sum();
    EigenClass { charpoly, factors, p, n, dim_gt1 }
}

/// Γ⁺ = {γ : det ρ_{>1}(γ∗) = 1}, described by its holonomy.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PositivePart {
    /// [Γ : Γ⁺] ∈ {1, 2}.
    pub index: u8,
    /// Indices (into the entry's holonomy group) of F⁺.
    pub f_plus: Vec<usize>,
    /// det ρ_{>1}(A) for every holonomy element A.
    pub det_signs: Vec<i32>,
}

fn unit_sign(x: &Rational, what: &str) -> Result<i32> {
    if *x == rat(1) {
        Ok(1)
    } else if *x == rat(-1) {
        Ok(-1)
    } else {
        Err(Error::PositivePart(format!("{what} = {x}, expected ±1")))
    }
}

/// Matrix R with W·R = A·W, or None if span(W) is not A-invariant.
fn restrict(a: &QMatrix, w: &QMatrix) -> Option<QMatrix> {
    let wt = w.transpose();
    let gram_inv = (&wt * w).inverse()?;
    let aw = a * w;
    let r = &(&gram_inv * &wt) * &aw;
    ((w * &r) == aw).then_some(r)
}

/// det ρ_{>1}(A) via restriction to V_{≤1} = ker g(D∗), where g collects
/// every factor with all roots of modulus ≤ 1 (raised to its multiplicity).
fn signs_aligned(dstar: &QMatrix, ec: &EigenClass, elements: &[QMatrix]) -> Result<Vec<i32>> {
    let g = ec
        .factors
        .iter()
        .filter(|f| f.above == 0)
        .fold(QPoly::one(), |acc, f| &acc * &f.factor.to_qpoly().pow(f.multiplicity as u32));
    let basis = dstar.eval_poly(&g).kernel();
    if basis.len() != ec.degree() - ec.dim_gt1 {
        return Err(Error::PositivePart("V≤1 has the wrong dimension".into()));
    }
    let w = QMatrix::from_columns(&basis);
    elements
        .iter()
        .map(|a| {
            let r = restrict(a, &w).ok_or_else(|| Error::PositivePart("V≤1 is not holonomy-invariant".into()))?;
            unit_sign(&(a.det() / r.det()), "det ρ>1")
        })
        .collect()
}

/// D∗ − xI with polynomial entries, and its adjugate evaluated at θ.
fn adjugate_at(dstar: &QMatrix, theta: &NumberFieldElem) -> Vec<Vec<NumberFieldElem>> {
    let n = dstar.rows();
    let m: Vec<Vec<QPoly>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    let c = QPoly::constant(dstar[(i, j)].clone());
                    if i == j {
                        &c - &QPoly::x()
                    } else {
                        c
                    }
                })
                .collect()
        })
        .collect();
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    // adj[i][j] = (−1)^{i+j} · minor(j, i)
                    let minor: Vec<Vec<QPoly>> = (0..n)
                        .filter(|&r| r != j)
                        .map(|r| (0..n).filter(|&c| c != i).map(|c| m[r][c].clone()).collect())
                        .collect();
                    let d = poly_det(&minor);
                    let d = if (i + j) % 2 == 1 { -&d } else { d };
                    theta.with_repr(d)
                })
                .collect()
        })
        .collect()
}

fn poly_det(m: &[Vec<QPoly>]) -> QPoly {
    match m.len() {
        0 => QPoly::one(),
        1 => m[0][0].clone(),
        n => (0..n).fold(QPoly::zero(), |acc, j| {
            let minor: Vec<Vec<QPoly>> =
                m[1..].iter().map(|row| row.iter().enumerate().filter(|&(c, _)| c != j).map(|(_, e)| e.clone()).collect()).collect();
            let term = &m[0][j] * &poly_det(&minor);
            if j % 2 == 1 {
                &acc - &term
            } else {
                &acc + &term
            }
        }),
    }
}

fn scaled(x: &NumberFieldElem, c: &Rational) -> NumberFieldElem {
    x.with_repr(x.repr().scale(c))
}

/// ε with u·A = ε·u (left) or A·u = ε·u (right), for u over ℚ(θ).
fn eigen_sign(a: &QMatrix, u: &[NumberFieldElem], left: bool) -> Result<i32> {
    let n = u.len();
    let image: Vec<NumberFieldElem> = (0..n)
        .map(|i| {
            (0..n).fold(u[0].from_rational(rat(0)), |acc, j| {
                let coeff = if left { &a[(j, i)] } else { &a[(i, j)] };
                acc.add(&scaled(&u[j], coeff))
            })
        })
        .collect();
    let i = u.iter().position(|x| !x.is_zero()).expect("nonzero eigenvector");
    let eps = nf_sign(&image[i].mul(&u[i]));
    let eps_q = rat(eps as i64);
    if eps == 0 || (0..n).any(|j| image[j] != scaled(&u[j], &eps_q)) {
        return Err(Error::PositivePart("holonomy does not act by ±1 on the eigenline".into()));
    }
    Ok(eps)
}

/// det ρ_{>1}(A) when one irreducible factor straddles the split. The
/// one-dimensional side is a simple real root θ of that factor: for
/// dim_gt1 = 1 the left θ-eigenvector spans the dual of V/V≤1, otherwise the
/// right θ-eigenvector spans V≤1.
fn signs_mixed(dstar: &QMatrix, ec: &EigenClass, elements: &[QMatrix]) -> Result<Vec<i32>> {
    let mixed = ec.factors.iter().find(|f| f.is_mixed()).expect("mixed factor");
    MIXED_FACTOR_HITS.fetch_add(1, Ordering::Relaxed);
    if mixed.factor.degree() == Some(3) {
        MIXED_CUBIC_HITS.fetch_add(1, Ordering::Relaxed);
    }
    let n = ec.degree();
    let left = ec.dim_gt1 == 1;
    if !left && ec.dim_gt1 != n - 1 {
        return Err(Error::PositivePart(format!("unexpected split {} + {}", n - ec.dim_gt1, ec.dim_gt1)));
    }
    let q = mixed.factor.to_qpoly();
    let b = cauchy_bound(&q);
    let one = rat(1);
    let (lo, hi) = if left {
        if sturm_count(&q, &Bound::At(one.clone()), &Bound::At(b.clone())) == 1 {
            (one, b)
        } else {
            (-b, -one)
        }
    } else {
        (-one.clone(), one)
    };
    let theta = NumberFieldElem::generator(mixed.factor.clone(), lo, hi)?;
    let adj = adjugate_at(dstar, &theta);
    let u: Vec<NumberFieldElem> = if left {
        adj.iter().find(|row| row.iter().any(|x| !x.is_zero())).cloned()
    } else {
        (0..n).map(|j| adj.iter().map(|row| row[j].clone()).collect::<Vec<_>>()).find(|col| col.iter().any(|x| !x.is_zero()))
    }
    .ok_or_else(|| Error::PositivePart("adjugate of D∗ − θI vanishes".into()))?;
    elements
        .iter()
        .map(|a| {
            let eps = eigen_sign(a, &u, left)?;
            if left {
                Ok(eps)
            } else {
                unit_sign(&(a.det() * rat(eps as i64)), "det ρ>1")
            }
        })
        .collect()
}

/// The positive part of Γ with respect to the split of D∗.
pub fn positive_part(c: &MapCandidate) -> Result<PositivePart> {
    positive_part_with(c, &eigen_classify(&c.dstar))
}

pub fn positive_part_with(c: &MapCandidate, ec: &EigenClass) -> Result<PositivePart> {
    let hol = &c.entry.holonomy;
    let n = c.dim();
    let det_signs = if ec.dim_gt1 == 0 {
        vec![1; hol.order()]
    } else if ec.dim_gt1 == n {
        hol.elements.iter().map(|a| unit_sign(&a.det(), "det A")).collect::<Result<_>>()?
    } else if ec.aligned() {
        signs_aligned(&c.dstar, ec, &hol.elements)?
    } else {
        signs_mixed(&c.dstar, ec, &hol.elements)?
    };
    let f_plus: Vec<usize> = (0..hol.order()).filter(|&i| det_signs[i] == 1).collect();
    let index = if f_plus.len() == hol.order() { 1 } else { 2 };
    let closed = f_plus.iter().all(|&i| f_plus.iter().all(|&j| det_signs[hol.table[i][j]] == 1));
    if !closed || f_plus.len() * index as usize != hol.order() {
        return Err(Error::PositivePart(format!("signs {det_signs:?} do not define an index-≤2 subgroup")));
    }
    Ok(PositivePart { index, f_plus, det_signs })
}

/// Which criterion guarantees N(f^k) = |L(f^k)|.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FastPathReason {
    TrivialHolonomy,
    CyclicWithoutMinusOne,
    NoIndexTwoSubgroup,
    NoExpandingPart,
    TrivialRhoGt1,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FastPath {
    Holds(FastPathReason),
    Unknown,
}

/// Cheap sufficient criteria for Γ = Γ⁺; never reports failure.
pub fn anosov_fastpath(c: &MapCandidate) -> FastPath {
    use FastPathReason::*;
    let hol = &c.entry.holonomy;
    let order = hol.order();
    if order == 1 {
        return FastPath::Holds(TrivialHolonomy);
    }
    let id = QMatrix::identity(c.dim());
    if let Some(g) = (0..order).find(|&i| hol.element_order(i) == order) {
        if !(&hol.elements[g] + &id).det().is_zero() {
            return FastPath::Holds(CyclicWithoutMinusOne);
        }
    }
    let squares: Vec<usize> = (0..order).map(|i| hol.table[i][i]).collect();
    if hol.generated_by(&squares).len() == order {
        return FastPath::Holds(NoIndexTwoSubgroup);
    }
    let ec = eigen_classify(&c.dstar);
    if ec.dim_gt1 == 0 {
        return FastPath::Holds(NoExpandingPart);
    }
    if ec.aligned() && ec.dim_gt1 < c.dim() {
        let g = ec
            .factors
            .iter()
            .filter(|f| f.above == 0)
            .fold(QPoly::one(), |acc, f| &acc * &f.factor.to_qpoly().pow(f.multiplicity as u32));
        let basis = c.dstar.eval_poly(&g).kernel();
        let rank = basis.len();
        // ρ_{>1}(A) = id ⇔ (A − I)V ⊆ V≤1
        let trivial = hol.elements.iter().all(|a| {
            let diff = a - &id;
            let mut cols = basis.clone();
            cols.extend((0..c.dim()).map(|j| diff.column(j)));
            QMatrix::from_columns(&cols).rank() == rank
        });
        if trivial {
            return FastPath::Holds(TrivialRhoGt1);
        }
    }
    FastPath::Unknown
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SignViolation {
    pub k: u32,
    pub nielsen: BigInt,
    pub predicted: BigInt,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SignReport {
    pub p: usize,
    pub n: usize,
    pub index: u8,
    pub checked: u32,
    pub violation: Option<SignViolation>,
}

impl SignReport {
    pub fn passed(&self) -> bool {
        self.violation.is_none()
    }
}

/// The value N(f^k) must equal: ±L(f^k) for index 1, ±(L(f⁺^k) − L(f^k))
/// for index 2, with sign (−1)^p for odd k and (−1)^{p+n} for even k.
pub fn predicted_nielsen(nums: &IterateNumbers, p: usize, n: usize) -> BigInt {
    let base = match &nums.lefschetz_plus {
        Some(lp) => lp - &nums.lefschetz,
        None => nums.lefschetz.clone(),
    };
    let exp = if nums.k % 2 == 1 { p } else { p + n };
    if exp % 2 == 1 {
        -base
    } else {
        base
    }
}

/// Checks the sign relations between N, L and L⁺ for k = 1..=kmax.
pub fn check_sign_relations(c: &MapCandidate, kmax: u32) -> Result<SignReport> {
    let ec = eigen_classify(&c.dstar);
    let pp = positive_part_with(c, &ec)?;
    let nums = iterate_numbers(c, &pp, kmax)?;
    let violation = nums.iter().find_map(|x| {
        let predicted = predicted_nielsen(x, ec.p, ec.n);
        (predicted != x.nielsen).then(|| SignViolation { k: x.k, nielsen: x.nielsen.clone(), predicted })
    });
    Ok(SignReport { p: ec.p, n: ec.n, index: pp.index, checked: kmax, violation })
}
