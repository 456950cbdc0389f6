mod output;

use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Parser, Subcommand};
use nilzeta::affine::{validate_selfmap, MapCandidate};
use nilzeta::algebra::rational::{format_rational, parse_rational, rat};
use nilzeta::algebra::{QMatrix, Rational};
use nilzeta::catalog::{Catalog, CatalogEntry};
use nilzeta::expr::Env;
use nilzeta::families::{Corpus, FamilySpec};
use nilzeta::fixedpoint::{anosov_fastpath, FastPath};
use nilzeta::verify::verify_corpus;
use nilzeta::zeta::report;
use nilzeta::Error;

use output::{iterate_rows, matrix_rows, rationals, ComputeOutput};

const EXIT_USAGE: u8 = 1;
const EXIT_INVALID_MAP: u8 = 2;
const EXIT_CONSTRAINT: u8 = 3;
const EXIT_CORPUS: u8 = 4;
const EXIT_INTERNAL: u8 = 5;

const BROKEN_PIPE: &str = "broken pipe";

fn emit(text: &str) -> Result<(), Failure> {
    let mut out = io::stdout().lock();
    match out.write_all(text.as_bytes()).and_then(|_| out.flush()) {
        Err(e) if e.kind() == io::ErrorKind::BrokenPipe => Err(Failure::new(0, BROKEN_PIPE)),
        r => Ok(r?),
    }
}

#[derive(Parser)]
#[command(name = "zeta", version, about = "Exact Nielsen and Lefschetz zeta functions of affine maps on infra-nilmanifolds")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// List the manifolds with their holonomy and number of map families.
    Catalog {
        /// Only ids containing this substring.
        #[arg(long)]
        filter: Option<String>,
    },
    /// Lefschetz/Nielsen numbers and zeta functions of one map.
    Compute {
        #[arg(long)]
        manifold: String,
        /// Parameter binding such as a=3 or s=1/2 (repeatable).
        #[arg(long = "param", value_name = "NAME=VALUE")]
        params: Vec<String>,
        /// Use this family of the manifold instead of the first matching one.
        #[arg(long)]
        family: Option<usize>,
        /// Explicit D∗ as rows separated by ';' (e.g. "3,0;0,5"); bypasses the families.
        #[arg(long, requires = "translation", conflicts_with = "family")]
        matrix: Option<String>,
        /// Explicit translation d, comma separated (e.g. "0,1/2").
        #[arg(long, requires = "matrix")]
        translation: Option<String>,
        /// Largest iterate reported.
        #[arg(long, default_value_t = 40, value_parser = clap::value_parser!(u32).range(1..=200))]
        kmax: u32,
        #[arg(long)]
        json: bool,
    },
    /// Check every family of the corpus against its zeta table.
    VerifyTables {
        /// Corpus JSON file (defaults to the built-in corpus).
        #[arg(long, env = "ZETA_CORPUS")]
        corpus: Option<PathBuf>,
        /// Sampled parameter tuples per family.
        #[arg(long, default_value_t = 3)]
        samples: usize,
    },
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn new(code: u8, message: impl Into<String>) -> Self {
        Failure { code, message: message.into() }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::new(EXIT_CORPUS, e.to_string())
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match &e {
            Error::InvalidMap(_) | Error::Shape(_) => EXIT_INVALID_MAP,
            Error::Constraint(_) => EXIT_CONSTRAINT,
            Error::Corpus(_) | Error::Json(_) | Error::Io(_) => EXIT_CORPUS,
            Error::Parse(_) | Error::UnknownEntry(_) => EXIT_USAGE,
            _ => EXIT_INTERNAL,
        };
        Failure::new(code, e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(EXIT_USAGE) } else { ExitCode::SUCCESS };
        }
    };
    let result = match cli.command {
        Command::Catalog { filter } => cmd_catalog(filter.as_deref()),
        Command::Compute { manifold, params, family, matrix, translation, kmax, json } => {
            cmd_compute(&manifold, &params, family, matrix.as_deref().zip(translation.as_deref()), kmax, json)
        }
        Command::VerifyTables { corpus, samples } => cmd_verify(corpus, samples),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        // `zeta catalog | head` and the like
        Err(f) if f.message == BROKEN_PIPE => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn lookup_entry(id: &str, env: &Env) -> Result<CatalogEntry, Failure> {
    let cat = Catalog::builtin();
    let mut env = env.clone();
    if let (Some(k), false) = (cat.default_k(id), env.contains_key("k")) {
        env.insert("k".into(), rat(k));
    }
    Ok(cat.lookup(id, &env)?)
}

fn cmd_catalog(filter: Option<&str>) -> Result<(), Failure> {
    let cat = Catalog::builtin();
    let corpus = Corpus::builtin();
    let mut text = format!("{:<18} {:>3}  {:<16} {:>3}  {:<8} {:>8}  title\n", "id", "dim", "model", "|F|", "F", "families");
    for id in cat.ids().into_iter().filter(|id| filter.is_none_or(|f| id.contains(f))) {
        let e = lookup_entry(id, &Env::new())?;
        text += &format!(
            "{:<18} {:>3}  {:<16} {:>3}  {:<8} {:>8}  {}\n",
            id,
            e.dim,
            e.model.to_string(),
            e.holonomy.order(),
            e.holonomy_type,
            corpus.for_manifold(id).count(),
            e.title
        );
    }
    emit(&text)
}

fn parse_params(items: &[String]) -> Result<Env, Failure> {
    let mut env = Env::new();
    for item in items {
        let (name, value) = item
            .split_once('=')
            .ok_or_else(|| Failure::new(EXIT_USAGE, format!("parameter {item:?} is not NAME=VALUE")))?;
        env.insert(name.trim().to_string(), parse_rational(value)?);
    }
    Ok(env)
}

fn parse_list(text: &str) -> Result<Vec<Rational>, Failure> {
    Ok(text.split(',').map(parse_rational).collect::<Result<Vec<_>, _>>()?)
}

/// First family (or the requested one) whose domains and constraints hold.
fn pick_family<'a>(
    corpus: &'a Corpus,
    manifold: &'a str,
    env: &Env,
    index: Option<usize>,
) -> Result<(&'a FamilySpec, Env), Failure> {
    if let Some(i) = index {
        let f = corpus
            .get(manifold, i)
            .ok_or_else(|| Failure::new(EXIT_USAGE, format!("{manifold} has no family {i}")))?;
        return Ok((f, f.bind(env)?));
    }
    let mut reasons = Vec::new();
    for f in corpus.for_manifold(manifold) {
        match f.bind(env) {
            Ok(bound) => return Ok((f, bound)),
            Err(e) => reasons.push(e.to_string()),
        }
    }
    if reasons.is_empty() {
        return Err(Failure::new(EXIT_USAGE, format!("no map families for {manifold}; use --matrix/--translation")));
    }
    Err(Failure::new(EXIT_CONSTRAINT, format!("no family of {manifold} accepts these parameters:\n  {}", reasons.join("\n  "))))
}

fn cmd_compute(
    manifold: &str,
    params: &[String],
    family: Option<usize>,
    explicit: Option<(&str, &str)>,
    kmax: u32,
    json: bool,
) -> Result<(), Failure> {
    let env = parse_params(params)?;
    let corpus = Corpus::builtin();
    let (cand, spec, bound) = match explicit {
        Some((m, t)) => {
            let rows = m.split(';').map(parse_list).collect::<Result<Vec<_>, _>>()?;
            let dstar = QMatrix::from_rows(rows).map_err(|e| Failure::new(EXIT_USAGE, e.to_string()))?;
            let entry = Arc::new(lookup_entry(manifold, &env)?);
            (MapCandidate::new(entry, parse_list(t)?, dstar)?, None, env.clone())
        }
        None => {
            lookup_entry(manifold, &env)?;
            let (spec, bound) = pick_family(corpus, manifold, &env, family)?;
            (spec.candidate_unchecked(&bound)?, Some(spec), bound)
        }
    };
    validate_selfmap(&cand)?;
    let rep = report(&cand, kmax)?;
    let z = &rep.zeta;
    let table_zeta = match spec {
        Some(s) => Some(s.expected_zeta(&bound, z.index, z.p, z.n)?),
        None => None,
    };
    let param_list = match spec {
        Some(s) => s
            .params
            .iter()
            .filter_map(|p| bound.get(&p.name).map(|v| (p.name.clone(), format_rational(v))))
            .collect(),
        None => {
            let mut v: Vec<_> = env.iter().map(|(k, v)| (k.clone(), format_rational(v))).collect();
            v.sort();
            v
        }
    };
    let out = ComputeOutput {
        manifold: cand.entry.id.clone(),
        family: spec.map(|s| format!("{}: {}", s.tag(), s.label)),
        params: param_list,
        dstar: matrix_rows(&cand.dstar),
        d: rationals(&cand.d),
        p: z.p,
        n: z.n,
        dim_gt1: rep.eigen.dim_gt1,
        index: z.index,
        case: z.case.to_string(),
        anosov_fastpath: match anosov_fastpath(&cand) {
            FastPath::Holds(r) => format!("holds ({r:?})"),
            FastPath::Unknown => "unknown".into(),
        },
        lefschetz_zeta: z.lefschetz.clone(),
        lefschetz_plus_zeta: z.lefschetz_plus.clone(),
        nielsen_zeta: z.nielsen_direct.clone(),
        nielsen_zeta_structural: z.nielsen_structural.clone(),
        table_zeta,
        iterates: iterate_rows(&rep),
    };
    if json {
        let text = serde_json::to_string_pretty(&out).map_err(|e| Failure::new(EXIT_INTERNAL, e.to_string()))?;
        emit(&(text + "\n"))
    } else {
        emit(&out.render_text())
    }
}

fn cmd_verify(path: Option<PathBuf>, samples: usize) -> Result<(), Failure> {
    let loaded;
    let corpus = match &path {
        Some(p) => {
            loaded = Corpus::load(p).map_err(|e| Failure::new(EXIT_CORPUS, format!("{}: {e}", p.display())))?;
            &loaded
        }
        None => Corpus::builtin(),
    };
    if samples == 0 {
        eprintln!("warning: --samples 0 checks nothing; the run passes vacuously");
    }
    let rep = verify_corpus(corpus, samples).map_err(|e| Failure::new(EXIT_CORPUS, e.to_string()))?;
    let failed: Vec<_> = rep.failures().collect();
    let mut per_family: Vec<(String, usize, usize)> = Vec::new();
    for o in &rep.outcomes {
        match per_family.last_mut() {
            Some((f, pass, total)) if *f == o.family => {
                *total += 1;
                *pass += o.passed() as usize;
            }
            _ => per_family.push((o.family.clone(), o.passed() as usize, 1)),
        }
    }
    let mut text = String::new();
    for (f, pass, total) in &per_family {
        let mark = if pass == total { "ok  " } else { "FAIL" };
        text += &format!("{mark} {f:<22} {pass}/{total}\n");
    }
    text += &format!(
        "{} families, {} instances, {} passed, {} failed in {:.1}s\n",
        rep.families,
        rep.outcomes.len(),
        rep.outcomes.len() - failed.len(),
        failed.len(),
        rep.elapsed.as_secs_f64()
    );
    emit(&text)?;
    if let Some(first) = failed.first() {
        return Err(Failure::new(
            EXIT_CORPUS,
            format!("first failure: {} [{}]: {}", first.family, first.params, first.error.as_deref().unwrap_or("")),
        ));
    }
    Ok(())
}
