//! Lefschetz and Nielsen zeta functions as canonical products, by two routes:
//! reconstruction from the exact N(f^k) sequence, and assembly from L_f and
//! L_{f⁺} according to the parities of p and n.

use std::fmt;

use num_bigint::BigInt;
use num_traits::Signed;
use serde::Serialize;

use crate::affine::MapCandidate;
use crate::algebra::recurrence::product_from_sequence;
use crate::algebra::{IntPoly, QMatrix, QPoly, RatFuncProduct, Rational};
use crate::families::Cell;
use crate::fixedpoint::{det_table, eigen_classify, iterate_numbers, positive_part_with, EigenClass, IterateNumbers, PositivePart};
use crate::{Error, Result};

/// Extra terms checked after reconstruction.
pub const HELD_OUT: usize = 10;

/// Recurrence-order bound 2^(n+1) for an n-dimensional manifold.
pub fn recurrence_bound(dim: usize) -> usize {
    1 << (dim + 1)
}

/// Terms used for reconstruction (before the held-out ones).
pub fn fit_length(dim: usize) -> usize {
    2 * recurrence_bound(dim) + 12
}

/// Reconstructs ∏ q_i^{e_i} from c_1, c_2, … and checks the held-out tail.
fn reconstruct(seq: &[BigInt], dim: usize, what: &str) -> Result<RatFuncProduct> {
    let seq: Vec<Rational> = seq.iter().cloned().map(Rational::from_integer).collect();
    let fit = fit_length(dim).min(seq.len());
    let prod = product_from_sequence(&seq[..fit], recurrence_bound(dim))?;
    if prod.log_derivative_coeffs(seq.len()) != seq {
        return Err(Error::NotPowerSum(format!("{what}: held-out terms disagree with {prod}")));
    }
    Ok(prod)
}

/// L(f^k) averaged over a subset of the holonomy group, k = 1..=count.
fn lefschetz_sequence(c: &MapCandidate, subset: &[usize], count: usize) -> Result<Vec<BigInt>> {
    let elements: Vec<QMatrix> = subset.iter().map(|&i| c.entry.holonomy.elements[i].clone()).collect();
    let mut cur = QMatrix::identity(c.dim());
    let mut out = Vec::with_capacity(count);
    for k in 1..=count {
        cur = &cur * &c.dstar;
        let sum = det_table(&elements, &cur).into_iter().fold(Rational::from_integer(0.into()), |a, b| a + b);
        let avg = sum / Rational::from_integer(subset.len().into());
        if !avg.is_integer() {
            return Err(Error::NonIntegral(format!("L(f^{k}) over {} elements = {avg}", subset.len())));
        }
        out.push(avg.to_integer());
    }
    Ok(out)
}

/// det(I − zM) as an integer polynomial.
fn det_one_minus_z(m: &QMatrix) -> Result<IntPoly> {
    let chi = m.charpoly()?;
    let n = m.rows();
    let coeffs: Vec<Rational> = (0..=n).map(|i| chi.coeff(n - i)).collect();
    let poly = QPoly::new(coeffs);
    if !poly.coeffs().iter().all(|c| c.is_integer()) {
        return Err(Error::NonIntegral(format!("det(I − zM) = {poly} has non-integral coefficients")));
    }
    Ok(IntPoly::new(poly.coeffs().iter().map(|c| c.to_integer()).collect()))
}

/// ∏_j det(I − z·Λ^j D∗)^{(−1)^{j+1}}, the Lefschetz zeta function of a map
/// with trivial holonomy.
pub fn torus_closed_form(dstar: &QMatrix) -> Result<RatFuncProduct> {
    let n = dstar.rows();
    let mut factors = vec![(IntPoly::from_ints(&[1, -1]), -1)];
    for j in 1..=n {
        let e = if j % 2 == 1 { 1 } else { -1 };
        factors.push((det_one_minus_z(&dstar.exterior_power(j)?)?, e));
    }
    RatFuncProduct::new(factors)
}

/// L_f(z) from the holonomy average over `subset` (F or F⁺). With the full
/// trivial group it is cross-checked against the exterior-power closed form.
pub fn lefschetz_zeta(c: &MapCandidate, subset: &[usize]) -> Result<RatFuncProduct> {
    let seq = lefschetz_sequence(c, subset, fit_length(c.dim()) + HELD_OUT)?;
    let prod = reconstruct(&seq, c.dim(), "L")?;
    if c.entry.holonomy.order() == 1 {
        let closed = torus_closed_form(&c.dstar)?;
        if closed != prod {
            return Err(Error::RouteMismatch(format!("L_f: reconstructed {prod}, closed form {closed}")));
        }
    }
    Ok(prod)
}

/// N_f(z) reconstructed from the exact sequence N(f^k).
pub fn nielsen_zeta_direct(c: &MapCandidate) -> Result<RatFuncProduct> {
    let count = fit_length(c.dim()) + HELD_OUT;
    let hol = &c.entry.holonomy;
    let mut cur = QMatrix::identity(c.dim());
    let mut seq = Vec::with_capacity(count);
    for k in 1..=count {
        cur = &cur * &c.dstar;
        let sum = det_table(&hol.elements, &cur).into_iter().fold(Rational::from_integer(0.into()), |a, b| a + b.abs());
        let avg = sum / Rational::from_integer(hol.order().into());
        if !avg.is_integer() {
            return Err(Error::NonIntegral(format!("N(f^{k}) = {avg}")));
        }
        seq.push(avg.to_integer());
    }
    reconstruct(&seq, c.dim(), "N")
}

/// Which entry of the (index, p parity, n parity) table applies.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct CaseLabel {
    pub index: u8,
    #[serde(serialize_with = "cell_str")]
    pub cell: Cell,
}

fn cell_str<S: serde::Serializer>(c: &Cell, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_str(c)
}

impl fmt::Display for CaseLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let g = if self.index == 1 { "Γ = Γ⁺" } else { "Γ ≠ Γ⁺" };
        write!(f, "{g}, {}", self.cell)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RfpOp {
    NegateZ,
    Reciprocal,
}

/// R(−z) or 1/R(z), canonical.
pub fn rfp_transform(x: &RatFuncProduct, op: RfpOp) -> RatFuncProduct {
    match op {
        RfpOp::NegateZ => x.negate_z(),
        RfpOp::Reciprocal => x.reciprocal(),
    }
}

/// Structural equality of canonical products.
pub fn rfp_equal(a: &RatFuncProduct, b: &RatFuncProduct) -> bool {
    a.factors() == b.factors()
}

/// N_f(z) from L_f (and L_{f⁺} when the index is 2): with X = L_f or
/// L_{f⁺}/L_f, the four parity cells are X(z), 1/X(−z), 1/X(z), X(−z).
pub fn assemble_structural(cell: Cell, lf: &RatFuncProduct, lf_plus: Option<&RatFuncProduct>) -> RatFuncProduct {
    let x = match lf_plus {
        Some(lp) => lp.div(lf),
        None => lf.clone(),
    };
    match cell {
        Cell::PeNe => x,
        Cell::PeNo => rfp_transform(&rfp_transform(&x, RfpOp::NegateZ), RfpOp::Reciprocal),
        Cell::PoNe => rfp_transform(&x, RfpOp::Reciprocal),
        Cell::PoNo => rfp_transform(&x, RfpOp::NegateZ),
    }
}

/// N_f(z) via the parity table.
pub fn nielsen_zeta_structural(c: &MapCandidate) -> Result<RatFuncProduct> {
    let ec = eigen_classify(&c.dstar);
    let pp = positive_part_with(c, &ec)?;
    let all: Vec<usize> = (0..c.entry.holonomy.order()).collect();
    let lf = lefschetz_zeta(c, &all)?;
    let lfp = if pp.index == 2 { Some(lefschetz_zeta(c, &pp.f_plus)?) } else { None };
    Ok(assemble_structural(Cell::from_counts(ec.p, ec.n), &lf, lfp.as_ref()))
}

#[derive(Clone, Debug, Serialize)]
pub struct ZetaResult {
    pub lefschetz: RatFuncProduct,
    pub lefschetz_plus: Option<RatFuncProduct>,
    pub nielsen_direct: RatFuncProduct,
    pub nielsen_structural: RatFuncProduct,
    pub p: usize,
    pub n: usize,
    pub index: u8,
    pub case: CaseLabel,
}

impl ZetaResult {
    pub fn nielsen(&self) -> &RatFuncProduct {
        &self.nielsen_direct
    }
}

/// Both routes; disagreement is an error.
pub fn compute_zeta(c: &MapCandidate) -> Result<ZetaResult> {
    let ec = eigen_classify(&c.dstar);
    let pp = positive_part_with(c, &ec)?;
    compute_zeta_with(c, &ec, &pp)
}

pub fn compute_zeta_with(c: &MapCandidate, ec: &EigenClass, pp: &PositivePart) -> Result<ZetaResult> {
    let all: Vec<usize> = (0..c.entry.holonomy.order()).collect();
    let lefschetz = lefschetz_zeta(c, &all)?;
    let lefschetz_plus = if pp.index == 2 { Some(lefschetz_zeta(c, &pp.f_plus)?) } else { None };
    let cell = Cell::from_counts(ec.p, ec.n);
    let nielsen_structural = assemble_structural(cell, &lefschetz, lefschetz_plus.as_ref());
    let nielsen_direct = nielsen_zeta_direct(c)?;
    if !rfp_equal(&nielsen_direct, &nielsen_structural) {
        return Err(Error::RouteMismatch(format!(
            "{}: direct {nielsen_direct}, structural {nielsen_structural}",
            c.entry.id
        )));
    }
    Ok(ZetaResult {
        lefschetz,
        lefschetz_plus,
        nielsen_direct,
        nielsen_structural,
        p: ec.p,
        n: ec.n,
        index: pp.index,
        case: CaseLabel { index: pp.index, cell },
    })
}

/// Numbers and zeta functions together, as reported by the command line.
#[derive(Clone, Debug)]
pub struct Report {
    pub eigen: EigenClass,
    pub positive: PositivePart,
    pub numbers: Vec<IterateNumbers>,
    pub zeta: ZetaResult,
}

pub fn report(c: &MapCandidate, kmax: u32) -> Result<Report> {
    let eigen = eigen_classify(&c.dstar);
    let positive = positive_part_with(c, &eigen)?;
    let numbers = iterate_numbers(c, &positive, kmax)?;
    let zeta = compute_zeta_with(c, &eigen, &positive)?;
    Ok(Report { eigen, positive, numbers, zeta })
}
