//! Stable JSON shape of `zeta compute --json`. Integers that may exceed 64
//! bits (L, N) and all rationals are strings.

use nilzeta::algebra::rational::format_rational;
use nilzeta::algebra::{QMatrix, RatFuncProduct, Rational};
use nilzeta::zeta::Report;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterateRow {
    pub k: u32,
    pub lefschetz: String,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub lefschetz_plus: Option<String>,
    pub nielsen: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComputeOutput {
    pub manifold: String,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub family: Option<String>,
    pub params: Vec<(String, String)>,
    pub dstar: Vec<Vec<String>>,
    pub d: Vec<String>,
    pub p: usize,
    pub n: usize,
    pub dim_gt1: usize,
    pub index: u8,
    pub case: String,
    pub anosov_fastpath: String,
    pub lefschetz_zeta: RatFuncProduct,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub lefschetz_plus_zeta: Option<RatFuncProduct>,
    pub nielsen_zeta: RatFuncProduct,
    pub nielsen_zeta_structural: RatFuncProduct,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub table_zeta: Option<RatFuncProduct>,
    pub iterates: Vec<IterateRow>,
}

pub fn rationals(xs: &[Rational]) -> Vec<String> {
    xs.iter().map(format_rational).collect()
}

pub fn matrix_rows(m: &QMatrix) -> Vec<Vec<String>> {
    (0..m.rows()).map(|i| rationals(m.row(i))).collect()
}

pub fn iterate_rows(rep: &Report) -> Vec<IterateRow> {
    rep.numbers
        .iter()
        .map(|x| IterateRow {
            k: x.k,
            lefschetz: x.lefschetz.to_string(),
            lefschetz_plus: x.lefschetz_plus.as_ref().map(|v| v.to_string()),
            nielsen: x.nielsen.to_string(),
        })
        .collect()
}

impl ComputeOutput {
    pub fn render_text(&self) -> String {
        let mut out = String::new();
        let mut line = |k: &str, v: String| out.push_str(&format!("{k:<11}{v}\n"));
        line("manifold", self.manifold.clone());
        if let Some(f) = &self.family {
            line("family", f.clone());
        }
        if !self.params.is_empty() {
            line("params", self.params.iter().map(|(k, v)| format!("{k}={v}")).collect::<Vec<_>>().join(", "));
        }
        line("D∗", format!("[{}]", self.dstar.iter().map(|r| r.join(", ")).collect::<Vec<_>>().join("; ")));
        line("d", format!("({})", self.d.join(", ")));
        line("spectrum", format!("p={}, n={}, dim_gt1={}", self.p, self.n, self.dim_gt1));
        line("case", self.case.clone());
        line("fast path", self.anosov_fastpath.clone());
        line("L_f(z)", self.lefschetz_zeta.to_string());
        if let Some(lp) = &self.lefschetz_plus_zeta {
            line("L_f⁺(z)", lp.to_string());
        }
        line("N_f(z)", format!("{}  (direct and structural routes agree)", self.nielsen_zeta));
        if let Some(t) = &self.table_zeta {
            let verdict = if *t == self.nielsen_zeta { "matches" } else { "DIFFERS" };
            line("table", format!("{t}  ({verdict})"));
        }
        let plus = self.index == 2;
        out.push_str(&format!("\n{:>4}  {:>24}  ", "k", "L(f^k)"));
        if plus {
            out.push_str(&format!("{:>24}  ", "L(f⁺^k)"));
        }
        out.push_str(&format!("{:>24}\n", "N(f^k)"));
        for r in &self.iterates {
            out.push_str(&format!("{:>4}  {:>24}  ", r.k, r.lefschetz));
            if plus {
                out.push_str(&format!("{:>24}  ", r.lefschetz_plus.as_deref().unwrap_or("")));
            }
            out.push_str(&format!("{:>24}\n", r.nielsen));
        }
        out
    }
}
