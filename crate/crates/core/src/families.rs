//! Parametrized map families: parameter domains, constraints, the matrix
//! templates and the expected Nielsen zeta tables. See `data/README.md` for
//! the corpus schema.

use std::fmt;
use std::sync::{Arc, OnceLock};

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;

use crate::affine::{validate_selfmap, MapCandidate};
use crate::algebra::rational::{format_rational, in_lattice, parse_rational, rat, ratio};
use crate::algebra::{IntPoly, QMatrix, QPoly, RatFuncProduct, Rational};
use crate::catalog::{catalog_lookup, CatalogEntry};
use crate::expr::{Env, Expr};
use crate::{Error, Result};

const BUILTIN: &str = include_str!("../data/families.json");

/// Rationals used for free real parameters.
const REAL_POOL: [(i64, i64); 7] = [(0, 1), (1, 2), (-1, 3), (2, 5), (1, 1), (-3, 7), (5, 4)];

#[derive(Clone, Debug, PartialEq)]
pub enum Domain {
    /// Integers, optionally restricted to residues mod `modulus` and bounded below.
    Int { modulus: Option<i64>, residues: Vec<i64>, min: Option<i64> },
    /// Free real parameter (sampled from a pool of rationals).
    Real,
    /// `step·ℤ`, minus `exclude·ℤ` when given.
    Lattice { step: Rational, exclude: Option<Rational> },
    /// `offset + step·ℤ`, the offset an expression in earlier parameters.
    Coset { offset: Expr, step: Rational },
}

#[derive(Clone, Debug)]
pub struct ParamSpec {
    pub name: String,
    pub domain: Domain,
}

/// Table cell selected by parity of p (# real eigenvalues > 1) and n (# real eigenvalues < −1).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Cell {
    PeNe,
    PeNo,
    PoNe,
    PoNo,
}

impl Cell {
    pub fn from_counts(p: usize, n: usize) -> Cell {
        match (p.is_multiple_of(2), n.is_multiple_of(2)) {
            (true, true) => Cell::PeNe,
            (true, false) => Cell::PeNo,
            (false, true) => Cell::PoNe,
            (false, false) => Cell::PoNo,
        }
    }

    fn slot(self) -> usize {
        self as usize
    }
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Cell::PeNe => "p even, n even",
            Cell::PeNo => "p even, n odd",
            Cell::PoNe => "p odd, n even",
            Cell::PoNo => "p odd, n odd",
        })
    }
}

type FactorTemplate = Vec<(Expr, i64)>;

#[derive(Clone, Debug)]
pub struct ZetaRow {
    pub when: Option<Expr>,
    pub lets: Vec<(String, Expr)>,
    /// [Γ : Γ⁺].
    pub index: u8,
    /// Indexed by `Cell`.
    pub cells: [FactorTemplate; 4],
}

#[derive(Clone, Debug)]
pub struct FamilySpec {
    pub manifold: String,
    pub index: usize,
    pub label: String,
    pub params: Vec<ParamSpec>,
    pub constraints: Vec<Expr>,
    pub lets: Vec<(String, Expr)>,
    pub dstar: Vec<Vec<Expr>>,
    pub d: Vec<Expr>,
    pub zeta: Vec<ZetaRow>,
}

// ---------- raw JSON ----------

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCorpus {
    families: Vec<RawFamily>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFamily {
    manifold: String,
    index: usize,
    #[serde(default)]
    label: String,
    params: Vec<RawParam>,
    #[serde(default)]
    constraints: Vec<String>,
    #[serde(default, rename = "let")]
    lets: Vec<(String, String)>,
    #[serde(rename = "D")]
    dstar: Vec<Vec<String>>,
    d: Vec<String>,
    zeta: Vec<RawRow>,
}

#[derive(Deserialize)]
struct RawParam {
    name: String,
    #[serde(flatten)]
    domain: RawDomain,
}

#[derive(Deserialize)]
#[serde(rename_all = "lowercase")]
enum RawDomain {
    Int {
        #[serde(rename = "mod")]
        modulus: Option<i64>,
        #[serde(default)]
        residues: Vec<i64>,
        min: Option<i64>,
    },
    Real {},
    Lattice { step: String, exclude: Option<String> },
    Coset { offset: String, step: String },
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRow {
    when: Option<String>,
    #[serde(default, rename = "let")]
    lets: Vec<(String, String)>,
    index: u8,
    cells: Option<RawCells>,
    all: Option<Vec<(String, i64)>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCells {
    pe_ne: Vec<(String, i64)>,
    pe_no: Vec<(String, i64)>,
    po_ne: Vec<(String, i64)>,
    po_no: Vec<(String, i64)>,
}

fn parse_lets(raw: Vec<(String, String)>) -> Result<Vec<(String, Expr)>> {
    raw.into_iter().map(|(n, e)| Ok((n, Expr::parse(&e)?))).collect()
}

fn parse_factors(raw: &[(String, i64)]) -> Result<FactorTemplate> {
    raw.iter().map(|(p, e)| Ok((Expr::parse(p)?, *e))).collect()
}

impl RawFamily {
    fn compile(self) -> Result<FamilySpec> {
        let tag = format!("{}#{}", self.manifold, self.index);
        let ctx = |e: Error| Error::Corpus(format!("{tag}: {e}"));
        let params = self
            .params
            .into_iter()
            .map(|p| {
                let domain = match p.domain {
                    RawDomain::Int { modulus, residues, min } => {
                        if let Some(m) = modulus {
                            if m <= 0 || residues.is_empty() || residues.iter().any(|r| *r < 0 || *r >= m) {
                                return Err(Error::Corpus(format!("bad residues for {}", p.name)));
                            }
                        }
                        Domain::Int { modulus, residues, min }
                    }
                    RawDomain::Real {} => Domain::Real,
                    RawDomain::Lattice { step, exclude } => Domain::Lattice {
                        step: parse_rational(&step)?,
                        exclude: exclude.as_deref().map(parse_rational).transpose()?,
                    },
                    RawDomain::Coset { offset, step } => {
                        Domain::Coset { offset: Expr::parse(&offset)?, step: parse_rational(&step)? }
                    }
                };
                Ok(ParamSpec { name: p.name, domain })
            })
            .collect::<Result<Vec<_>>>()
            .map_err(ctx)?;
        let zeta = self
            .zeta
            .into_iter()
            .map(|r| {
                let cells = match (r.cells, r.all) {
                    (Some(c), None) => [
                        parse_factors(&c.pe_ne)?,
                        parse_factors(&c.pe_no)?,
                        parse_factors(&c.po_ne)?,
                        parse_factors(&c.po_no)?,
                    ],
                    (None, Some(all)) => {
                        let f = parse_factors(&all)?;
                        [f.clone(), f.clone(), f.clone(), f]
                    }
                    _ => return Err(Error::Corpus("zeta row needs exactly one of `cells`, `all`".into())),
                };
                if !(1..=2).contains(&r.index) {
                    return Err(Error::Corpus(format!("zeta row index {} not in {{1, 2}}", r.index)));
                }
                Ok(ZetaRow { when: r.when.as_deref().map(Expr::parse).transpose()?, lets: parse_lets(r.lets)?, index: r.index, cells })
            })
            .collect::<Result<Vec<_>>>()
            .map_err(ctx)?;
        let dstar = self
            .dstar
            .iter()
            .map(|row| row.iter().map(|e| Expr::parse(e)).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<_>>>()
            .map_err(ctx)?;
        let n = self.d.len();
        if dstar.len() != n || dstar.iter().any(|r| r.len() != n) {
            return Err(Error::Corpus(format!("{tag}: D and d have inconsistent shapes")));
        }
        Ok(FamilySpec {
            manifold: self.manifold,
            index: self.index,
            label: self.label,
            params,
            constraints: self.constraints.iter().map(|c| Expr::parse(c)).collect::<Result<_>>().map_err(ctx)?,
            lets: parse_lets(self.lets).map_err(ctx)?,
            dstar,
            d: self.d.iter().map(|e| Expr::parse(e)).collect::<Result<_>>().map_err(ctx)?,
            zeta,
        })
    }
}

// ---------- corpus ----------

#[derive(Clone, Debug)]
pub struct Corpus {
    pub families: Vec<FamilySpec>,
}

impl Corpus {
    pub fn builtin() -> &'static Corpus {
        static CORPUS: OnceLock<Corpus> = OnceLock::new();
        CORPUS.get_or_init(|| Corpus::from_json(BUILTIN).expect("embedded corpus is valid"))
    }

    pub fn from_json(text: &str) -> Result<Corpus> {
        let raw: RawCorpus = serde_json::from_str(text).map_err(|e| Error::Corpus(e.to_string()))?;
        let families = raw.families.into_iter().map(RawFamily::compile).collect::<Result<Vec<_>>>()?;
        Ok(Corpus { families })
    }

    pub fn load(path: &std::path::Path) -> Result<Corpus> {
        Corpus::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn for_manifold<'a>(&'a self, id: &'a str) -> impl Iterator<Item = &'a FamilySpec> + 'a {
        self.families.iter().filter(move |f| f.manifold == id)
    }

    pub fn get(&self, id: &str, index: usize) -> Option<&FamilySpec> {
        self.families.iter().find(|f| f.manifold == id && f.index == index)
    }

    /// True if some family of the candidate's manifold produces exactly
    /// `cand` and passes its own checks. Parameters that appear as bare
    /// entries of the family's D∗ or d are read off the candidate; others come
    /// from `params` or default to 0. Used to excuse perturbations that land in
    /// a neighbouring family (e.g. the b = 0 member of a wider family).
    pub fn covers(&self, params: &Env, cand: &MapCandidate) -> bool {
        self.for_manifold(&cand.entry.id).any(|f| {
            let mut env = params.clone();
            let cells = f.dstar.iter().flatten().zip(cand.dstar.entries());
            for (e, v) in cells.chain(f.d.iter().zip(&cand.d)) {
                let name = e.to_string();
                if f.params.iter().any(|p| p.name == name) {
                    env.insert(name, v.clone());
                }
            }
            for p in &f.params {
                env.entry(p.name.clone()).or_insert_with(Rational::zero);
            }
            match f.bind(&env).and_then(|b| f.matrices(&b)) {
                Ok((dm, d)) => dm == cand.dstar && d == cand.d,
                Err(_) => false,
            }
        })
    }
}

fn fnv1a(text: &str) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in text.bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    h
}

fn rational_to_i64(x: &Rational) -> Option<i64> {
    use num_traits::ToPrimitive;
    if x.is_integer() {
        x.to_integer().to_i64()
    } else {
        None
    }
}

fn int_poly(p: &QPoly) -> Result<IntPoly> {
    let coeffs = p
        .coeffs()
        .iter()
        .map(|c| {
            if c.is_integer() {
                Ok(c.to_integer())
            } else {
                Err(Error::Corpus(format!("zeta factor has non-integer coefficient {}", format_rational(c))))
            }
        })
        .collect::<Result<Vec<BigInt>>>()?;
    Ok(IntPoly::new(coeffs))
}

impl FamilySpec {
    pub fn tag(&self) -> String {
        format!("{}#{}", self.manifold, self.index)
    }

    pub fn dim(&self) -> usize {
        self.d.len()
    }

    /// Membership of `value` in the domain of `p`; `env` supplies coset offsets.
    pub fn check_domain(p: &ParamSpec, value: &Rational, env: &Env) -> Result<()> {
        let fail = |what: String| Err(Error::Constraint(format!("{}: {what}, got {}", p.name, format_rational(value))));
        match &p.domain {
            Domain::Real => Ok(()),
            Domain::Int { modulus, residues, min } => {
                if !value.is_integer() {
                    return fail("must be an integer".into());
                }
                let v = value.to_integer();
                if let Some(m) = min {
                    if v < BigInt::from(*m) {
                        return fail(format!("must be ≥ {m}"));
                    }
                }
                if let Some(m) = modulus {
                    let r = num_integer::Integer::mod_floor(&v, &BigInt::from(*m));
                    if !residues.iter().any(|x| BigInt::from(*x) == r) {
                        return match (*m, residues.as_slice()) {
                            (2, [0]) => fail("must be even".into()),
                            (2, [1]) => fail("must be odd".into()),
                            _ => fail(format!("must be ≡ {residues:?} mod {m}")),
                        };
                    }
                }
                Ok(())
            }
            Domain::Lattice { step, exclude } => {
                if !in_lattice(value, step) {
                    return fail(format!("must lie in {}·ℤ", format_rational(step)));
                }
                if let Some(ex) = exclude {
                    if in_lattice(value, ex) {
                        return fail(format!("must not lie in {}·ℤ", format_rational(ex)));
                    }
                }
                Ok(())
            }
            Domain::Coset { offset, step } => {
                let off = offset.eval_rational(env)?;
                if !in_lattice(&(value - &off), step) {
                    return fail(format!("must lie in {offset} + {}·ℤ", format_rational(step)));
                }
                Ok(())
            }
        }
    }

    /// Checks parameter domains and constraints; returns the environment
    /// extended by the family's `let` bindings. Missing real parameters
    /// default to 0.
    pub fn bind(&self, params: &Env) -> Result<Env> {
        let mut env = Env::new();
        for p in &self.params {
            let v = match params.get(&p.name) {
                Some(v) => v.clone(),
                None if p.domain == Domain::Real => Rational::zero(),
                None => return Err(Error::Constraint(format!("{}: missing parameter {}", self.tag(), p.name))),
            };
            Self::check_domain(p, &v, &env).map_err(|e| match e {
                Error::Constraint(m) => Error::Constraint(format!("{}: {m}", self.tag())),
                other => other,
            })?;
            env.insert(p.name.clone(), v);
        }
        self.extend_lets(&mut env)?;
        for c in &self.constraints {
            if !c.eval_bool(&env)? {
                return Err(Error::Constraint(format!("{}: constraint `{c}` fails", self.tag())));
            }
        }
        Ok(env)
    }

    fn extend_lets(&self, env: &mut Env) -> Result<()> {
        for (name, e) in &self.lets {
            let v = e.eval_rational(env)?;
            env.insert(name.clone(), v);
        }
        Ok(())
    }

    /// D∗ and d from a bound environment.
    pub fn matrices(&self, env: &Env) -> Result<(QMatrix, Vec<Rational>)> {
        let rows = self
            .dstar
            .iter()
            .map(|r| r.iter().map(|e| e.eval_rational(env)).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<_>>>()?;
        let d = self.d.iter().map(|e| e.eval_rational(env)).collect::<Result<Vec<_>>>()?;
        Ok((QMatrix::from_rows(rows)?, d))
    }

    fn entry(&self, env: &Env) -> Result<Arc<CatalogEntry>> {
        Ok(Arc::new(catalog_lookup(&self.manifold, env)?))
    }

    /// Builds the candidate without checking domains or constraints
    /// (`let` bindings are still evaluated) and without validation.
    pub fn candidate_unchecked(&self, params: &Env) -> Result<MapCandidate> {
        let mut env = params.clone();
        for p in &self.params {
            if p.domain == Domain::Real {
                env.entry(p.name.clone()).or_insert_with(Rational::zero);
            }
        }
        self.extend_lets(&mut env)?;
        let (dstar, d) = self.matrices(&env)?;
        MapCandidate::new(self.entry(&env)?, d, dstar)
    }

    /// Picks the first zeta row for `index` whose condition holds and
    /// instantiates the cell for (p, n).
    pub fn expected_zeta(&self, env: &Env, index: u8, p: usize, n: usize) -> Result<RatFuncProduct> {
        for row in self.zeta.iter().filter(|r| r.index == index) {
            if let Some(w) = &row.when {
                if !w.eval_bool(env)? {
                    continue;
                }
            }
            let mut env = env.clone();
            for (name, e) in &row.lets {
                let v = e.eval_rational(&env)?;
                env.insert(name.clone(), v);
            }
            let cell = Cell::from_counts(p, n);
            let mut factors = Vec::new();
            for (e, exp) in &row.cells[cell.slot()] {
                factors.push((int_poly(&e.eval_poly(&env)?)?, *exp));
            }
            return RatFuncProduct::new(factors).map_err(|e| Error::Corpus(format!("{}: {e}", self.tag())));
        }
        Err(Error::Corpus(format!("{}: no zeta row for index {index} matches", self.tag())))
    }

    /// Deterministic sample of `count` distinct parameter tuples satisfying
    /// every domain and constraint. Heisenberg families always get a `k`.
    pub fn sample(&self, count: usize) -> Result<Vec<Env>> {
        self.sample_seeded(count, fnv1a(&self.tag()))
    }

    /// As [`FamilySpec::sample`], from an explicit seed.
    pub fn sample_seeded(&self, count: usize, seed: u64) -> Result<Vec<Env>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut out: Vec<Env> = Vec::new();
        let mut attempts = 0;
        while out.len() < count {
            attempts += 1;
            if attempts > 20_000 {
                return Err(Error::Corpus(format!("{}: could not draw {count} samples", self.tag())));
            }
            let Some(env) = self.draw(&mut rng) else { continue };
            if self.bind(&env).is_err() || out.contains(&env) {
                continue;
            }
            out.push(env);
        }
        Ok(out)
    }

    fn draw(&self, rng: &mut ChaCha8Rng) -> Option<Env> {
        let mut env = Env::new();
        for p in &self.params {
            let v = match &p.domain {
                Domain::Real => {
                    let (a, b) = *REAL_POOL.choose(rng)?;
                    ratio(a, b)
                }
                Domain::Int { modulus, residues, min } => {
                    let ok = |v: i64| {
                        min.is_none_or(|m| v >= m)
                            && modulus.is_none_or(|m| residues.contains(&v.rem_euclid(m)))
                    };
                    if min.is_some() {
                        // k: keep it small
                        let choices: Vec<i64> = (1..=24).filter(|v| ok(*v)).take(3).collect();
                        rat(*choices.choose(rng)?)
                    } else {
                        let mut choices: Vec<i64> = (-5..=5).filter(|v| ok(*v)).collect();
                        for _ in 0..2 {
                            let big = rng.gen_range(6..=30) * if rng.gen_bool(0.5) { 1 } else { -1 };
                            if let Some(v) = (0..12).map(|i| big + i).find(|v| ok(*v)) {
                                choices.push(v);
                            }
                        }
                        rat(*choices.choose(rng)?)
                    }
                }
                Domain::Lattice { step, exclude } => {
                    let choices: Vec<Rational> = (-4..=4)
                        .map(|m| step * rat(m))
                        .filter(|v| exclude.as_ref().is_none_or(|ex| !in_lattice(v, ex)))
                        .collect();
                    choices.choose(rng)?.clone()
                }
                Domain::Coset { offset, step } => {
                    let off = offset.eval_rational(&env).ok()?;
                    off + step * rat(rng.gen_range(-2..=2))
                }
            };
            env.insert(p.name.clone(), v);
        }
        Some(env)
    }

    /// Single-parameter perturbations that leave the parameter's own domain:
    /// integers with a congruence condition are bumped until they violate it,
    /// lattice and coset parameters are shifted by half a step.
    pub fn perturbations(&self, params: &Env) -> Vec<(String, Env)> {
        let mut out = Vec::new();
        for p in &self.params {
            let Some(v) = params.get(&p.name) else { continue };
            let new = match &p.domain {
                Domain::Int { modulus: Some(_), .. } => {
                    let mut w = v.clone();
                    let mut found = None;
                    for _ in 0..12 {
                        w += Rational::one();
                        if Self::check_domain(p, &w, params).is_err() {
                            found = Some(w.clone());
                            break;
                        }
                    }
                    found
                }
                Domain::Lattice { step, .. } | Domain::Coset { step, .. } => Some(v + step / rat(2)),
                _ => None,
            };
            if let Some(w) = new {
                if p.name == "k" && !w.is_positive() {
                    continue;
                }
                let mut env = params.clone();
                env.insert(p.name.clone(), w);
                out.push((p.name.clone(), env));
            }
        }
        out
    }

    /// Integer value of a bound parameter, if it is one.
    pub fn int_param(env: &Env, name: &str) -> Option<i64> {
        env.get(name).and_then(rational_to_i64)
    }
}

/// Checks parameters, builds the candidate and validates it eagerly. A
/// validation failure after a successful bind means the corpus entry is wrong.
pub fn family_instantiate(spec: &FamilySpec, params: &Env) -> Result<MapCandidate> {
    let env = spec.bind(params)?;
    let (dstar, d) = spec.matrices(&env)?;
    let cand = MapCandidate::new(spec.entry(&env)?, d, dstar)
        .map_err(|e| Error::Corpus(format!("{}: {e}", spec.tag())))?;
    validate_selfmap(&cand).map_err(|e| Error::Corpus(format!("{}: instantiated map is invalid: {e}", spec.tag())))?;
    Ok(cand)
}

/// `name=value` list for messages, parameters in declaration order.
pub fn describe_params(spec: &FamilySpec, env: &Env) -> String {
    spec.params
        .iter()
        .filter_map(|p| env.get(&p.name).map(|v| format!("{}={}", p.name, format_rational(v))))
        .collect::<Vec<_>>()
        .join(", ")
}
