//! Group presentations of the supported manifolds.
//!
//! Abelian entries (flat manifolds) act on ℝⁿ by affine maps stored as
//! (n+1)×(n+1) matrices. Heisenberg entries act on the 3-dimensional
//! Heisenberg group H; their elements are stored through the faithful
//! representation `psi_embed` as 4×4 matrices. The raw data lives in
//! `data/catalog.json` (schema in `data/README.md`).

use std::collections::{HashMap, VecDeque};
use std::fmt;
use std::sync::OnceLock;

use num_traits::{Signed, ToPrimitive};
use serde::Deserialize;

use crate::algebra::rational::{is_integer, rat};
use crate::algebra::{QMatrix, Rational};
use crate::expr::{Env, Expr};
use crate::{Error, Result};

/// Hard cap on the holonomy closure; every supported group has order ≤ 6.
pub const HOLONOMY_CAP: usize = 48;

const BUILTIN: &str = include_str!("../data/catalog.json");

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Model {
    Abelian,
    Heisenberg { k: i64 },
}

impl Model {
    pub fn is_heisenberg(&self) -> bool {
        matches!(self, Model::Heisenberg { .. })
    }
}

impl fmt::Display for Model {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Model::Abelian => write!(f, "abelian"),
            Model::Heisenberg { k } => write!(f, "heisenberg(k={k})"),
        }
    }
}

/// A group element: an affine matrix (abelian) or a ψ-image (Heisenberg).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AffineElement {
    pub matrix: QMatrix,
    pub model: Model,
}

impl AffineElement {
    pub fn identity(model: &Model, dim: usize) -> Self {
        let size = if model.is_heisenberg() { 4 } else { dim + 1 };
        AffineElement { matrix: QMatrix::identity(size), model: model.clone() }
    }

    pub fn mul(&self, other: &Self) -> Self {
        AffineElement { matrix: &self.matrix * &other.matrix, model: self.model.clone() }
    }

    pub fn inverse(&self) -> Self {
        let matrix = self.matrix.inverse().expect("group elements are invertible");
        AffineElement { matrix, model: self.model.clone() }
    }

    pub fn pow(&self, e: i64) -> Self {
        let base = if e < 0 { self.inverse() } else { self.clone() };
        AffineElement { matrix: base.matrix.pow(e.unsigned_abs() as u32), model: self.model.clone() }
    }

    /// The rotational part x∗ (n×n).
    pub fn linear(&self) -> QMatrix {
        linear_part(&self.matrix, &self.model)
    }

    /// Abelian: the translation vector. Heisenberg: (x, y, z) with the
    /// element's H-component h(x, y, z).
    pub fn translation(&self) -> Vec<Rational> {
        translation_part(&self.matrix, &self.model)
    }
}

pub fn linear_part(m: &QMatrix, model: &Model) -> QMatrix {
    match model {
        Model::Abelian => m.submatrix(0, m.rows() - 1, 0, m.cols() - 1),
        Model::Heisenberg { k } => psi_preimage(m, *k).3,
    }
}

pub fn translation_part(m: &QMatrix, model: &Model) -> Vec<Rational> {
    match model {
        Model::Abelian => {
            let n = m.rows() - 1;
            (0..n).map(|i| m[(i, n)].clone()).collect()
        }
        Model::Heisenberg { k } => {
            let (x, y, z, _) = psi_preimage(m, *k);
            vec![x, y, z]
        }
    }
}

fn heis_t(x: &Rational, y: &Rational, z: &Rational, k: i64) -> QMatrix {
    let k = rat(k);
    let half = Rational::new(1.into(), 2.into());
    let mut t = QMatrix::identity(4);
    t[(0, 1)] = &k * y * &half;
    t[(0, 2)] = -(&k * x * &half);
    t[(0, 3)] = -(&k * x * y * &half) + z;
    t[(1, 3)] = x.clone();
    t[(2, 3)] = y.clone();
    t
}

/// ψ(h(x,y,z), φ): the translation matrix of h(x,y,z) times blockdiag(φ∗, 1).
pub fn psi_embed(x: &Rational, y: &Rational, z: &Rational, phi_star: &QMatrix, k: i64) -> QMatrix {
    assert_eq!((phi_star.rows(), phi_star.cols()), (3, 3), "φ∗ must be 3×3");
    let mut block = QMatrix::identity(4);
    for i in 0..3 {
        for j in 0..3 {
            block[(i, j)] = phi_star[(i, j)].clone();
        }
    }
    &heis_t(x, y, z, k) * &block
}

/// Inverse of `psi_embed` on its image: returns (x, y, z, φ∗).
pub fn psi_preimage(m: &QMatrix, k: i64) -> (Rational, Rational, Rational, QMatrix) {
    let kq = rat(k);
    let half = Rational::new(1.into(), 2.into());
    let x = m[(1, 3)].clone();
    let y = m[(2, 3)].clone();
    let z = &m[(0, 3)] + &kq * &x * &y * &half;
    let t = heis_t(&x, &y, &z, k).submatrix(0, 3, 0, 3);
    let t_inv = t.inverse().expect("unipotent");
    let phi = &t_inv * &m.submatrix(0, 3, 0, 3);
    (x, y, z, phi)
}

/// True iff the element lies in the lattice (ℤⁿ, resp. h(ℤ³)).
pub fn lattice_member(elem: &AffineElement) -> bool {
    elem.linear().is_identity() && elem.translation().iter().all(is_integer)
}

#[derive(Clone, Debug)]
pub struct Generator {
    pub name: String,
    pub element: AffineElement,
}

/// Finite holonomy group F ⊂ GL(n, ℚ) in discovery order (identity first).
#[derive(Clone, Debug)]
pub struct HolonomyGroup {
    pub elements: Vec<QMatrix>,
    /// `table[i][j]` is the index of `elements[i] * elements[j]`.
    pub table: Vec<Vec<usize>>,
    /// Index of each generator's rotational part.
    pub generator_indices: Vec<usize>,
    /// For each element, a group element of Γ with that rotational part.
    pub reps: Vec<AffineElement>,
}

impl HolonomyGroup {
    pub fn order(&self) -> usize {
        self.elements.len()
    }

    pub fn index_of(&self, m: &QMatrix) -> Option<usize> {
        self.elements.iter().position(|e| e == m)
    }

    pub fn identity_index(&self) -> usize {
        0
    }

    pub fn element_order(&self, i: usize) -> usize {
        let mut cur = i;
        let mut n = 1;
        while cur != 0 {
            cur = self.table[cur][i];
            n += 1;
        }
        n
    }

    /// Closure of a set of element indices under multiplication.
    pub fn generated_by(&self, gens: &[usize]) -> Vec<usize> {
        let mut seen = vec![false; self.order()];
        seen[0] = true;
        let mut queue: VecDeque<usize> = VecDeque::from([0]);
        while let Some(i) = queue.pop_front() {
            for &g in gens {
                let j = self.table[i][g];
                if !seen[j] {
                    seen[j] = true;
                    queue.push_back(j);
                }
            }
        }
        (0..self.order()).filter(|&i| seen[i]).collect()
    }
}

#[derive(Clone, Debug)]
pub struct CatalogEntry {
    pub id: String,
    pub title: String,
    pub dim: usize,
    pub model: Model,
    pub generators: Vec<Generator>,
    pub holonomy_order: usize,
    pub holonomy_type: String,
    pub relators: Vec<String>,
    pub holonomy: HolonomyGroup,
}

impl CatalogEntry {
    pub fn generator(&self, name: &str) -> Option<&AffineElement> {
        self.generators.iter().find(|g| g.name == name).map(|g| &g.element)
    }

    pub fn identity(&self) -> AffineElement {
        AffineElement::identity(&self.model, self.dim)
    }

    /// A named element: a generator, or `e1..en` (abelian lattice basis).
    pub fn named(&self, name: &str) -> Option<AffineElement> {
        if let Some(g) = self.generator(name) {
            return Some(g.clone());
        }
        if self.model == Model::Abelian {
            let i: usize = name.strip_prefix('e')?.parse().ok()?;
            if i == 0 || i > self.dim {
                return None;
            }
            let mut m = QMatrix::identity(self.dim + 1);
            m[(i - 1, self.dim)] = rat(1);
            return Some(AffineElement { matrix: m, model: Model::Abelian });
        }
        None
    }

    /// Evaluates a word such as `a^-1 b c^(-k/2)`.
    pub fn eval_word(&self, word: &str) -> Result<AffineElement> {
        let mut env = Env::new();
        if let Model::Heisenberg { k } = self.model {
            env.insert("k".into(), rat(k));
        }
        let mut acc = self.identity();
        for tok in word.split_whitespace() {
            let (name, exp) = match tok.split_once('^') {
                Some((n, e)) => {
                    let v = Expr::parse(e)?.eval_rational(&env)?;
                    if !is_integer(&v) {
                        return Err(Error::Parse(format!("non-integral exponent in {tok:?}")));
                    }
                    (n, v.to_integer().to_i64().ok_or_else(|| Error::Parse(tok.into()))?)
                }
                None => (tok, 1),
            };
            let g = self
                .named(name)
                .ok_or_else(|| Error::Parse(format!("unknown generator {name:?} in {}", self.id)))?;
            acc = acc.mul(&g.pow(exp));
        }
        Ok(acc)
    }

    /// Checks every documented relator `lhs = rhs`; returns the failures.
    pub fn failing_relators(&self) -> Result<Vec<String>> {
        let mut bad = Vec::new();
        for r in &self.relators {
            let (l, rhs) = r
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("relator without '=': {r}")))?;
            if self.eval_word(l)? != self.eval_word(rhs)? {
                bad.push(r.clone());
            }
        }
        Ok(bad)
    }
}

#[derive(Deserialize)]
struct RawCatalog {
    entries: Vec<RawEntry>,
}

#[derive(Deserialize, Clone)]
struct RawEntry {
    id: String,
    title: String,
    dim: usize,
    model: String,
    #[serde(default)]
    k: Option<KConstraint>,
    holonomy_order: usize,
    holonomy_type: String,
    generators: Vec<RawGenerator>,
    #[serde(default)]
    relators: Vec<String>,
}

#[derive(Deserialize, Clone)]
struct KConstraint {
    #[serde(rename = "mod")]
    modulus: i64,
    residues: Vec<i64>,
}

#[derive(Deserialize, Clone)]
struct RawGenerator {
    name: String,
    matrix: Vec<Vec<String>>,
    #[serde(default)]
    star: Option<Vec<Vec<String>>>,
}

/// The set of catalog entries (raw, uninstantiated).
pub struct Catalog {
    raw: Vec<RawEntry>,
}

fn eval_matrix(rows: &[Vec<String>], env: &Env) -> Result<QMatrix> {
    let rows = rows
        .iter()
        .map(|r| r.iter().map(|s| Expr::parse(s)?.eval_rational(env)).collect::<Result<Vec<_>>>())
        .collect::<Result<Vec<_>>>()?;
    QMatrix::from_rows(rows)
}

impl Catalog {
    pub fn builtin() -> &'static Catalog {
        static CAT: OnceLock<Catalog> = OnceLock::new();
        CAT.get_or_init(|| Catalog::from_json(BUILTIN).expect("embedded catalog is valid"))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let raw: RawCatalog = serde_json::from_str(text)?;
        Ok(Catalog { raw: raw.entries })
    }

    pub fn ids(&self) -> Vec<&str> {
        self.raw.iter().map(|e| e.id.as_str()).collect()
    }

    pub fn is_heisenberg(&self, id: &str) -> Option<bool> {
        self.raw.iter().find(|e| e.id == id).map(|e| e.model == "heisenberg")
    }

    /// Smallest positive k allowed by the entry (for listings).
    pub fn default_k(&self, id: &str) -> Option<i64> {
        let e = self.raw.iter().find(|e| e.id == id)?;
        let kc = e.k.as_ref()?;
        (1..=kc.modulus * 2).find(|k| kc.residues.contains(&k.rem_euclid(kc.modulus)))
    }

    pub fn lookup(&self, id: &str, params: &Env) -> Result<CatalogEntry> {
        let raw = self
            .raw
            .iter()
            .find(|e| e.id == id)
            .ok_or_else(|| Error::UnknownEntry(id.to_string()))?;
        let mut env = Env::new();
        let model = match raw.model.as_str() {
            "abelian" => Model::Abelian,
            "heisenberg" => {
                let kq = params
                    .get("k")
                    .ok_or_else(|| Error::Constraint(format!("{id}: parameter k is required")))?;
                if !is_integer(kq) || !kq.is_positive() {
                    return Err(Error::Constraint(format!("{id}: k must be a positive integer")));
                }
                let k = kq.to_integer().to_i64().ok_or_else(|| Error::Constraint("k too large".into()))?;
                if let Some(kc) = &raw.k {
                    if !kc.residues.contains(&k.rem_euclid(kc.modulus)) {
                        let res: Vec<String> = kc.residues.iter().map(|r| r.to_string()).collect();
                        return Err(Error::Constraint(format!(
                            "{id}: k ≡ {} mod {} violated (k = {k})",
                            res.join(" or "),
                            kc.modulus
                        )));
                    }
                }
                env.insert("k".into(), rat(k));
                Model::Heisenberg { k }
            }
            other => return Err(Error::Parse(format!("unknown model {other:?}"))),
        };
        let size = if model.is_heisenberg() { 4 } else { raw.dim + 1 };
        let mut generators = Vec::new();
        for g in &raw.generators {
            let matrix = eval_matrix(&g.matrix, &env)?;
            if matrix.rows() != size || matrix.cols() != size {
                return Err(Error::Shape(format!("{id}/{}: expected {size}×{size}", g.name)));
            }
            let last: Vec<Rational> = (0..size).map(|j| if j == size - 1 { rat(1) } else { rat(0) }).collect();
            if matrix.row(size - 1) != last.as_slice() {
                return Err(Error::Shape(format!("{id}/{}: last row must be (0,…,0,1)", g.name)));
            }
            let element = AffineElement { matrix, model: model.clone() };
            if let Some(star) = &g.star {
                let stated = eval_matrix(star, &env)?;
                if stated != element.linear() {
                    return Err(Error::Corpus(format!(
                        "{id}/{}: stated differential disagrees with ψ-preimage",
                        g.name
                    )));
                }
            }
            generators.push(Generator { name: g.name.clone(), element });
        }
        let holonomy = holonomy_closure(&generators, &model, raw.dim)?;
        if holonomy.order() != raw.holonomy_order {
            return Err(Error::Corpus(format!(
                "{id}: holonomy has order {} but {} is recorded",
                holonomy.order(),
                raw.holonomy_order
            )));
        }
        Ok(CatalogEntry {
            id: raw.id.clone(),
            title: raw.title.clone(),
            dim: raw.dim,
            model,
            generators,
            holonomy_order: raw.holonomy_order,
            holonomy_type: raw.holonomy_type.clone(),
            relators: raw.relators.clone(),
            holonomy,
        })
    }
}

/// Looks up an entry of the built-in catalog.
pub fn catalog_lookup(id: &str, params: &Env) -> Result<CatalogEntry> {
    Catalog::builtin().lookup(id, params)
}

/// Breadth-first closure over positive words in the generators. The first
/// group element found for each rotational part becomes its representative.
fn holonomy_closure(gens: &[Generator], model: &Model, dim: usize) -> Result<HolonomyGroup> {
    let id = AffineElement::identity(model, dim);
    let mut elements = vec![id.linear()];
    let mut reps = vec![id];
    let mut index: HashMap<QMatrix, usize> = HashMap::from([(elements[0].clone(), 0)]);
    let mut queue = VecDeque::from([0usize]);
    while let Some(i) = queue.pop_front() {
        for g in gens {
            let next = reps[i].mul(&g.element);
            let lin = next.linear();
            if !index.contains_key(&lin) {
                if elements.len() >= HOLONOMY_CAP {
                    return Err(Error::HolonomyTooLarge { cap: HOLONOMY_CAP });
                }
                index.insert(lin.clone(), elements.len());
                queue.push_back(elements.len());
                elements.push(lin);
                reps.push(next);
            }
        }
    }
    let table = elements
        .iter()
        .map(|a| {
            elements
                .iter()
                .map(|b| {
                    index
                        .get(&(a * b))
                        .copied()
                        .ok_or_else(|| Error::Corpus("holonomy not closed".into()))
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    let generator_indices = gens.iter().map(|g| index[&g.element.linear()]).collect();
    Ok(HolonomyGroup { elements, table, generator_indices, reps })
}

/// The holonomy group of an entry.
pub fn holonomy(entry: &CatalogEntry) -> &HolonomyGroup {
    &entry.holonomy
}
