//! Oracles shared by the integration tests. Nothing here calls into the
//! library's own determinant, power or spectral code: exact values come from
//! cofactor expansion over `BigRational`, spectral data from nalgebra in f64.
#![allow(dead_code)]

use nalgebra::{Complex, DMatrix, DVector, Schur, SVD};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};

use nilzeta::affine::MapCandidate;
use nilzeta::algebra::{IntPoly, QMatrix};

pub type Mat = Vec<Vec<BigRational>>;

pub fn entries(m: &QMatrix) -> Mat {
    (0..m.rows()).map(|i| m.row(i).to_vec()).collect()
}

pub fn identity(n: usize) -> Mat {
    (0..n)
        .map(|i| (0..n).map(|j| BigRational::from_integer(BigInt::from((i == j) as i32))).collect())
        .collect()
}

pub fn mul(a: &Mat, b: &Mat) -> Mat {
    let n = a.len();
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| (0..n).fold(BigRational::zero(), |s, t| s + &a[i][t] * &b[t][j]))
                .collect()
        })
        .collect()
}

/// Laplace expansion along the first row.
pub fn det(m: &Mat) -> BigRational {
    match m.len() {
        0 => BigRational::from_integer(1.into()),
        1 => m[0][0].clone(),
        n => (0..n).fold(BigRational::zero(), |acc, j| {
            let minor: Mat = m[1..]
                .iter()
                .map(|row| row.iter().enumerate().filter(|(c, _)| *c != j).map(|(_, x)| x.clone()).collect())
                .collect();
            let term = &m[0][j] * det(&minor);
            if j % 2 == 0 {
                acc + term
            } else {
                acc - term
            }
        }),
    }
}

pub fn one_minus(m: &Mat) -> Mat {
    let n = m.len();
    (0..n)
        .map(|i| (0..n).map(|j| BigRational::from_integer(BigInt::from((i == j) as i32)) - &m[i][j]).collect())
        .collect()
}

/// Exact L and N of f^k averaged over the holonomy elements in `subset`,
/// as unreduced rationals (integrality is for the caller to check).
pub struct Averages {
    pub lefschetz: BigRational,
    pub nielsen: BigRational,
}

/// D∗^k for k = 1..=kmax.
pub fn powers(dstar: &QMatrix, kmax: u32) -> Vec<Mat> {
    let d = entries(dstar);
    let mut cur = identity(d.len());
    (1..=kmax)
        .map(|_| {
            cur = mul(&cur, &d);
            cur.clone()
        })
        .collect()
}

pub fn averages(c: &MapCandidate, subset: &[usize], dk: &Mat) -> Averages {
    let (mut l, mut n) = (BigRational::zero(), BigRational::zero());
    for &i in subset {
        let a = entries(&c.entry.holonomy.elements[i]);
        let v = det(&one_minus(&mul(&a, dk)));
        n += v.abs();
        l += v;
    }
    let size = BigRational::from_integer(BigInt::from(subset.len()));
    Averages { lefschetz: l / &size, nielsen: n / size }
}

// ---------- floating point ----------

pub fn to_f64(m: &QMatrix) -> DMatrix<f64> {
    let n = m.rows();
    DMatrix::from_fn(n, n, |i, j| m.row(i)[j].to_f64().unwrap())
}

/// Unshifted QR can stall on exactly structured matrices (permutations and
/// the like), so the iteration is bounded and retried after an orthogonal
/// similarity by a Householder reflection.
pub fn eigenvalues(m: &DMatrix<f64>) -> Vec<Complex<f64>> {
    let n = m.nrows();
    if m.iter().all(|x| *x == 0.0) {
        return vec![Complex::new(0.0, 0.0); n];
    }
    let mut a = m.clone();
    for attempt in 1..=8 {
        if let Some(s) = Schur::try_new(a.clone(), f64::EPSILON, 10_000) {
            return s.complex_eigenvalues().iter().copied().collect();
        }
        let v = DVector::from_fn(n, |i, _| ((i + 1) as f64 * 0.7548776662 * attempt as f64).sin());
        let h = DMatrix::identity(n, n) - (&v * v.transpose()) * (2.0 / v.norm_squared());
        a = &h * m * &h;
    }
    panic!("no eigenvalues for {m}");
}

/// Eigenvalues with multiplicity; roots closer than 1e-4 are replaced by
/// their mean (a multiple root splits into an O(ε^{1/m}) cloud).
pub fn clustered_eigenvalues(m: &DMatrix<f64>) -> Vec<(Complex<f64>, usize)> {
    let mut clusters: Vec<(Complex<f64>, usize)> = Vec::new();
    for z in eigenvalues(m) {
        match clusters.iter_mut().find(|(c, _)| (*c - z).norm() < 1e-4) {
            Some((c, k)) => {
                *c = (*c * (*k as f64) + z) / (*k as f64 + 1.0);
                *k += 1;
            }
            None => clusters.push((z, 1)),
        }
    }
    clusters
}

pub fn poly_f64(p: &IntPoly) -> Vec<f64> {
    p.coeffs().iter().map(|c| c.to_f64().unwrap()).collect()
}

fn horner(c: &[f64], z: Complex<f64>) -> (Complex<f64>, Complex<f64>) {
    let (mut v, mut dv) = (Complex::new(0.0, 0.0), Complex::new(0.0, 0.0));
    for &a in c.iter().rev() {
        dv = dv * z + v;
        v = v * z + a;
    }
    (v, dv)
}

/// Newton polish of an approximate simple root of `c` (ascending coefficients).
pub fn polish(c: &[f64], mut z: Complex<f64>) -> Complex<f64> {
    for _ in 0..60 {
        let (v, dv) = horner(c, z);
        if dv.norm() == 0.0 {
            break;
        }
        let step = v / dv;
        z -= step;
        if step.norm() < 1e-17 {
            break;
        }
    }
    z
}

pub fn residual(c: &[f64], z: Complex<f64>) -> f64 {
    let r = z.norm().max(1.0);
    let scale: f64 = c.iter().enumerate().map(|(i, a)| a.abs() * r.powi(i as i32)).sum();
    horner(c, z).0.norm() / scale
}

/// Numbers of real eigenvalues > 1 and < −1, from f64 eigenvalues.
pub fn float_pn(m: &QMatrix) -> (usize, usize) {
    let (mut p, mut n) = (0, 0);
    for (z, k) in clustered_eigenvalues(&to_f64(m)) {
        if z.im.abs() < 1e-9 {
            if z.re > 1.0 + 1e-9 {
                p += k;
            } else if z.re < -1.0 - 1e-9 {
                n += k;
            }
        }
    }
    (p, n)
}

/// For each holonomy element A, the sign of det(A) / det(A restricted to
/// V≤1), where V≤1 is the sum of generalized eigenspaces of D∗ for |λ| ≤ 1.
/// The projector onto V≤1 comes from a trapezoidal contour integral of the
/// resolvent on a circle separating the two groups of eigenvalues.
pub fn float_det_signs(c: &MapCandidate) -> Vec<i32> {
    let d = to_f64(&c.dstar);
    let n = d.nrows();
    let eig = clustered_eigenvalues(&d);
    let inner = eig.iter().filter(|(z, _)| z.norm() <= 1.0 + 1e-9).map(|(z, _)| z.norm()).fold(0.0, f64::max);
    let outer = eig.iter().filter(|(z, _)| z.norm() > 1.0 + 1e-9).map(|(z, _)| z.norm()).fold(f64::INFINITY, f64::min);
    let rank: usize = eig.iter().filter(|(z, _)| z.norm() <= 1.0 + 1e-9).map(|(_, k)| k).sum();
    let sign = |x: f64| if x > 0.0 { 1 } else { -1 };
    let elements: Vec<DMatrix<f64>> = c.entry.holonomy.elements.iter().map(to_f64).collect();
    if rank == 0 {
        return elements.iter().map(|a| sign(a.determinant())).collect();
    }
    if rank == n {
        return vec![1; elements.len()];
    }
    let rho = (inner + outer) / 2.0;
    let dc: DMatrix<Complex<f64>> = d.map(|x| Complex::new(x, 0.0));
    let points = 4096;
    let mut proj = DMatrix::<Complex<f64>>::zeros(n, n);
    for j in 0..points {
        let theta = 2.0 * std::f64::consts::PI * j as f64 / points as f64;
        let z = Complex::from_polar(rho, theta);
        let resolvent = (DMatrix::<Complex<f64>>::identity(n, n) * z - &dc).try_inverse().expect("z not an eigenvalue");
        proj += resolvent * z;
    }
    let proj = proj.map(|x| x.re / points as f64);
    let svd = SVD::try_new(proj, true, false, f64::EPSILON, 10_000).expect("SVD converges");
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| svd.singular_values[b].partial_cmp(&svd.singular_values[a]).unwrap());
    let u = svd.u.unwrap();
    let basis = DMatrix::from_fn(n, rank, |i, j| u[(i, order[j])]);
    elements
        .iter()
        .map(|a| {
            let restricted = basis.transpose() * a * &basis;
            sign(a.determinant() / restricted.determinant())
        })
        .collect()
}
