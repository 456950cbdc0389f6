//! Affine homotopy lifts (d, D) and the self-map condition
//! (d, D)·γ = φ(γ)·(d, D) for all γ ∈ Γ.

use std::sync::Arc;

use crate::algebra::rational::rat;
use crate::algebra::{QMatrix, Rational};
use crate::catalog::{lattice_member, linear_part, psi_embed, psi_preimage, AffineElement, CatalogEntry, Model};
use crate::{Error, Result};

/// A candidate lift. For Heisenberg entries `d = (r, s, t)` stands for
/// h(r, s, t) and `dstar` is the differential in the basis {log c, log a, log b}.
#[derive(Clone, Debug)]
pub struct MapCandidate {
    pub entry: Arc<CatalogEntry>,
    pub d: Vec<Rational>,
    pub dstar: QMatrix,
}

/// φ(γ) for one generator γ.
#[derive(Clone, Debug)]
pub struct PhiImage {
    pub generator: String,
    /// Index of B = φ(γ)∗ in the entry's holonomy group.
    pub holonomy_index: usize,
    pub image: AffineElement,
}

#[derive(Clone, Debug)]
pub struct PhiAssignment {
    pub images: Vec<PhiImage>,
}

/// True iff the first column of D∗ is (det of the lower-right 2×2 block, 0, 0)ᵀ.
pub fn heis_endo_check(dstar: &QMatrix) -> bool {
    if dstar.rows() != 3 || dstar.cols() != 3 {
        return false;
    }
    let block = dstar.submatrix(1, 3, 1, 3);
    dstar[(0, 0)] == block.det() && dstar[(1, 0)] == rat(0) && dstar[(2, 0)] == rat(0)
}

impl MapCandidate {
    pub fn new(entry: Arc<CatalogEntry>, d: Vec<Rational>, dstar: QMatrix) -> Result<Self> {
        let n = entry.dim;
        if d.len() != n || dstar.rows() != n || dstar.cols() != n {
            return Err(Error::Shape(format!(
                "{}: expected d of length {n} and a {n}×{n} matrix",
                entry.id
            )));
        }
        if entry.model.is_heisenberg() && !heis_endo_check(&dstar) {
            return Err(Error::Shape(format!(
                "{}: D∗ is not a Lie algebra endomorphism (first column must be (det, 0, 0))",
                entry.id
            )));
        }
        Ok(MapCandidate { entry, d, dstar })
    }

    pub fn dim(&self) -> usize {
        self.entry.dim
    }

    /// The lift as a matrix: [[D, d], [0, 1]] or ψ(h(d), D∗).
    pub fn matrix(&self) -> QMatrix {
        match self.entry.model {
            Model::Abelian => {
                let n = self.dim();
                let mut m = QMatrix::identity(n + 1);
                for i in 0..n {
                    for j in 0..n {
                        m[(i, j)] = self.dstar[(i, j)].clone();
                    }
                    m[(i, n)] = self.d[i].clone();
                }
                m
            }
            Model::Heisenberg { k } => psi_embed(&self.d[0], &self.d[1], &self.d[2], &self.dstar, k),
        }
    }

    fn from_matrix(entry: Arc<CatalogEntry>, m: &QMatrix) -> Self {
        match entry.model {
            Model::Abelian => {
                let n = entry.dim;
                let dstar = m.submatrix(0, n, 0, n);
                let d = (0..n).map(|i| m[(i, n)].clone()).collect();
                MapCandidate { entry, d, dstar }
            }
            Model::Heisenberg { k } => {
                let (x, y, z, phi) = psi_preimage(m, k);
                MapCandidate { entry, d: vec![x, y, z], dstar: phi }
            }
        }
    }

    /// self ∘ other.
    pub fn compose(&self, other: &Self) -> Self {
        MapCandidate::from_matrix(self.entry.clone(), &(&self.matrix() * &other.matrix()))
    }

    /// The lift of f^k.
    pub fn iterate(&self, k: u32) -> Self {
        MapCandidate::from_matrix(self.entry.clone(), &self.matrix().pow(k))
    }
}

/// The pure-translation part of an element (abelian: the translation; Heisenberg: h(x,y,z)).
fn translation_matrix(m: &QMatrix, model: &Model) -> QMatrix {
    match model {
        Model::Abelian => {
            let n = m.rows() - 1;
            let mut t = QMatrix::identity(n + 1);
            for i in 0..n {
                t[(i, n)] = m[(i, n)].clone();
            }
            t
        }
        Model::Heisenberg { k } => {
            let (x, y, z, _) = psi_preimage(m, *k);
            psi_embed(&x, &y, &z, &QMatrix::identity(3), *k)
        }
    }
}

/// Searches, per generator γ and in holonomy order, for B with D∗γ∗ = BD∗ and a
/// lattice element λ with (d,D)γ = λ·c_B·(d,D), where c_B is the entry's
/// representative of B. φ need not be a homomorphism, so generators are
/// handled independently.
pub fn validate_selfmap(c: &MapCandidate) -> Result<PhiAssignment> {
    let entry = &c.entry;
    let model = &entry.model;
    let dm = c.matrix();
    let hol = &entry.holonomy;
    let mut images = Vec::with_capacity(entry.generators.len());
    for g in &entry.generators {
        let x = &dm * &g.element.matrix;
        let x_lin = linear_part(&x, model);
        let tx = translation_matrix(&x, model);
        let mut found = None;
        for (bi, rep) in hol.reps.iter().enumerate() {
            let y = &rep.matrix * &dm;
            if linear_part(&y, model) != x_lin {
                continue;
            }
            let ty = translation_matrix(&y, model);
            let lambda = AffineElement {
                matrix: &tx * &ty.inverse().expect("translations are invertible"),
                model: model.clone(),
            };
            if lattice_member(&lambda) {
                found = Some(PhiImage { generator: g.name.clone(), holonomy_index: bi, image: lambda.mul(rep) });
                break;
            }
        }
        match found {
            Some(img) => images.push(img),
            None => {
                return Err(Error::InvalidMap(format!(
                    "{}: no admissible image for generator {}",
                    entry.id, g.name
                )))
            }
        }
    }
    Ok(PhiAssignment { images })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::rational::ratio;
    use crate::catalog::catalog_lookup;
    use crate::expr::{env_of, Env};

    fn entry(id: &str, env: &Env) -> Arc<CatalogEntry> {
        Arc::new(catalog_lookup(id, env).unwrap())
    }

    #[test]
    fn klein_examples() {
        let e = entry("klein-bottle", &Env::new());
        let good = MapCandidate::new(e.clone(), vec![rat(0), ratio(1, 2)], QMatrix::from_ints(&[&[3, 0], &[0, 5]])).unwrap();
        assert!(validate_selfmap(&good).is_ok());
        // a forced zero column with an odd diagonal entry fails
        let bad = MapCandidate::new(e.clone(), vec![rat(0), rat(0)], QMatrix::from_ints(&[&[3, 0], &[0, 0]])).unwrap();
        assert!(matches!(validate_selfmap(&bad), Err(Error::InvalidMap(_))));
        let bad2 = MapCandidate::new(e, vec![rat(0), ratio(1, 4)], QMatrix::from_ints(&[&[3, 0], &[0, 5]])).unwrap();
        assert!(validate_selfmap(&bad2).is_err());
    }

    #[test]
    fn identity_is_valid_everywhere() {
        let cat = crate::catalog::Catalog::builtin();
        for id in cat.ids() {
            let env = cat.default_k(id).map(|k| env_of([("k", rat(k))])).unwrap_or_default();
            let e = Arc::new(cat.lookup(id, &env).unwrap());
            let n = e.dim;
            let c = MapCandidate::new(e.clone(), vec![rat(0); n], QMatrix::identity(n)).unwrap();
            let phi = validate_selfmap(&c).unwrap();
            for (img, g) in phi.images.iter().zip(&e.generators) {
                assert_eq!(img.image, g.element, "{id}");
            }
        }
    }

    #[test]
    fn hw_family_example() {
        let e = entry("hantzsche-wendt", &Env::new());
        let c = MapCandidate::new(e, vec![ratio(1, 2), rat(0), ratio(1, 2)], QMatrix::diagonal(&[rat(3), rat(5), rat(7)])).unwrap();
        assert!(validate_selfmap(&c).is_ok());
    }

    #[test]
    fn endo_check() {
        assert!(heis_endo_check(&QMatrix::identity(3)));
        assert!(heis_endo_check(&QMatrix::from_ints(&[&[1, 4, 5], &[0, 2, 1], &[0, 1, 1]])));
        assert!(!heis_endo_check(&QMatrix::from_ints(&[&[2, 0, 0], &[0, 2, 1], &[0, 1, 1]])));
        let e = entry("heis-I", &env_of([("k", rat(2))]));
        assert!(MapCandidate::new(e.clone(), vec![rat(0); 3], QMatrix::from_ints(&[&[2, 0, 0], &[0, 2, 1], &[0, 1, 1]])).is_err());
        let id = MapCandidate::new(e, vec![rat(0); 3], QMatrix::identity(3)).unwrap();
        assert!(validate_selfmap(&id).is_ok());
    }

    #[test]
    fn iterate_matches_compose() {
        let e = entry("heis-I", &env_of([("k", rat(2))]));
        let c = MapCandidate::new(e, vec![rat(1), rat(2), ratio(1, 3)], QMatrix::from_ints(&[&[1, 0, 0], &[0, 2, 1], &[0, 1, 1]])).unwrap();
        let c2 = c.compose(&c);
        let i2 = c.iterate(2);
        assert_eq!(c2.d, i2.d);
        assert_eq!(c2.dstar, i2.dstar);
        assert_eq!(c2.dstar, c.dstar.pow(2));
    }
}
