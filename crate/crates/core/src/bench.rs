//! Corpus runner: solve every `*.prob` file in a directory and compare
//! against the optional `expected` solution.

use std::collections::{BTreeMap, HashMap};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;

use crate::canon::canonicalize;
use crate::expr::{Expr, Name};
use crate::problem::{read_problem, PdeProblem, SolutionRecord};
use crate::search::{solve, SearchConfig};
use crate::verify::{check_equivalence, verify_with, Equivalence, VerifyContext};
use crate::Rational;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum BenchStatus {
    /// Verified, and identical to the expected solution at reference values
    /// (or no expected solution given).
    Recovered,
    /// Verified, and an affine reparameterization of the expected solution.
    Equivalent,
    Failed,
}

impl BenchStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            BenchStatus::Recovered => "recovered",
            BenchStatus::Equivalent => "equivalent",
            BenchStatus::Failed => "failed",
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct BenchReportRow {
    pub name: String,
    pub status: BenchStatus,
    pub solution: String,
    pub candidates: u64,
    pub wall_time_ms: u64,
    /// Why a row failed, or how it matched.
    pub detail: String,
    #[serde(skip)]
    pub record: Option<SolutionRecord>,
}

#[derive(Clone, Debug, Default)]
pub struct BenchConfig {
    pub seed: u64,
    pub record_timing: bool,
    pub budget: Option<u64>,
    pub max_insertions: Option<usize>,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct BenchSummary {
    pub recovered: usize,
    pub equivalent: usize,
    pub failed: usize,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct BenchReport {
    pub rows: Vec<BenchReportRow>,
    pub summary: BenchSummary,
}

#[derive(Debug, thiserror::Error)]
pub enum BenchError {
    #[error("cannot read corpus {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("cannot write report: {0}")]
    Csv(#[from] csv::Error),
}

impl BenchReport {
    pub fn any_failed(&self) -> bool {
        self.summary.failed > 0
    }

    /// CSV with columns `name,status,solution,candidates,wall_time_ms`.
    pub fn to_csv(&self) -> Result<Vec<u8>, BenchError> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["name", "status", "solution", "candidates", "wall_time_ms"])?;
        for r in &self.rows {
            w.write_record([
                r.name.as_str(),
                r.status.as_str(),
                r.solution.as_str(),
                &r.candidates.to_string(),
                &r.wall_time_ms.to_string(),
            ])?;
        }
        w.into_inner().map_err(|e| BenchError::Csv(e.into_error().into()))
    }

    pub fn to_json(&self) -> Vec<u8> {
        let mut out = serde_json::to_vec_pretty(self).expect("report serializes");
        out.push(b'\n');
        out
    }
}

fn failed(name: String, detail: String) -> BenchReportRow {
    BenchReportRow {
        name,
        status: BenchStatus::Failed,
        solution: String::new(),
        candidates: 0,
        wall_time_ms: 0,
        detail,
        record: None,
    }
}

fn at_refs(e: &Expr, refs: &BTreeMap<Name, Rational>) -> Expr {
    let map: HashMap<Name, Expr> = refs.iter().map(|(k, v)| (k.clone(), Expr::Const(v.clone()))).collect();
    e.substitute_params(&map)
}

fn same(a: &Expr, b: &Expr) -> bool {
    matches!(canonicalize::<Rational>(&(a.clone() - b.clone())), Ok(r) if r.is_zero())
}

/// Compares a verified record with the expected solution.
pub fn classify(problem: &PdeProblem, record: &SolutionRecord) -> (BenchStatus, String) {
    let Some(expected) = &problem.expected else {
        return (BenchStatus::Recovered, "verified; no expected solution".into());
    };
    let found = &record.expression;
    if same(found, expected) {
        return (BenchStatus::Recovered, "identical to expected".into());
    }
    let mut refs = problem.ref_values.clone();
    for f in &record.free_params {
        if let Some(r) = &f.reference {
            refs.entry(f.name.clone()).or_insert_with(|| r.clone());
        }
    }
    if same(&at_refs(found, &refs), &at_refs(expected, &refs)) {
        return (BenchStatus::Recovered, "identical to expected at reference values".into());
    }
    match check_equivalence(expected, found, &problem.coefficients) {
        Equivalence::Equivalent(map) => {
            let shown: Vec<String> = map.iter().map(|(k, v)| format!("{k} = {v}")).collect();
            (BenchStatus::Equivalent, format!("equivalent via {}", shown.join(", ")))
        }
        Equivalence::Distinct => (BenchStatus::Failed, "verified but distinct from expected".into()),
        Equivalence::Undecided => (BenchStatus::Failed, "verified; equivalence to expected undecided".into()),
    }
}

/// Solves one problem file and classifies the outcome.
pub fn run_problem(path: &Path, cfg: &BenchConfig) -> BenchReportRow {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let problem = match read_problem(path) {
        Ok(p) => p,
        Err(e) => return failed(stem, e.to_string()),
    };
    let mut sc = SearchConfig::for_problem(&problem);
    sc.seed = cfg.seed;
    sc.record_timing = cfg.record_timing;
    if let Some(b) = cfg.budget {
        sc.budget = b;
    }
    if let Some(m) = cfg.max_insertions {
        sc.max_insertions = m;
    }
    let record = match solve(&problem, &sc) {
        Ok(r) => r,
        Err(e) => return failed(problem.name.clone(), e.to_string()),
    };
    // independent re-check of the emitted expression
    let refs = record
        .free_params
        .iter()
        .filter_map(|f| f.reference.clone().map(|r| (f.name.clone(), r)))
        .chain(problem.ref_values.clone())
        .collect();
    let ctx = VerifyContext { refs, seed: cfg.seed, full_report: true, ..VerifyContext::default() };
    if !verify_with(&problem, &record.expression, &ctx).passed() {
        return failed(problem.name.clone(), "emitted solution failed re-verification".into());
    }
    let (status, detail) = classify(&problem, &record);
    BenchReportRow {
        name: problem.name.clone(),
        status,
        solution: record.expression.to_string(),
        candidates: record.stats.candidates_evaluated,
        wall_time_ms: record.stats.wall_time_ms,
        detail,
        record: Some(record),
    }
}

/// Problem files (`*.prob`) directly inside `dir`, sorted by path.
pub fn corpus_files(dir: &Path) -> Result<Vec<PathBuf>, BenchError> {
    let io = |source| BenchError::Io { path: dir.to_path_buf(), source };
    let mut files = Vec::new();
    for entry in std::fs::read_dir(dir).map_err(io)? {
        let path = entry.map_err(io)?.path();
        if path.is_file() && path.extension().is_some_and(|e| e == "prob") {
            files.push(path);
        }
    }
    files.sort();
    Ok(files)
}

/// Runs every problem in `dir`; rows are ordered by problem name.
pub fn run_bench(dir: &Path, cfg: &BenchConfig) -> Result<BenchReport, BenchError> {
    let files = corpus_files(dir)?;
    let mut rows: Vec<BenchReportRow> = files.par_iter().map(|f| run_problem(f, cfg)).collect();
    rows.sort_by(|a, b| a.name.cmp(&b.name));
    let mut summary = BenchSummary::default();
    for r in &rows {
        match r.status {
            BenchStatus::Recovered => summary.recovered += 1,
            BenchStatus::Equivalent => summary.equivalent += 1,
            BenchStatus::Failed => summary.failed += 1,
        }
    }
    Ok(BenchReport { rows, summary })
}
