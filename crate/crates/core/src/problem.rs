//! Problem files and the solution-exchange record.
//!
//! A problem file is a list of `key = value` lines; `#` starts a comment.
//!
//! ```text
//! name = heat-exp
//! unknown = u(x, t)
//! pde = u_t - a*u_xx = 0
//! coefficients = a
//! time = t
//! ic = exp(x)
//! ```

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::expr::{name, Expr, Name};
use crate::parse::{parse_expr_with, parse_rational, parse_sexp, ParseContext, SyntaxError};
use crate::Rational;

pub const DEFAULT_BUDGET: u64 = 200_000;
pub const DEFAULT_MAX_INSERTIONS: usize = 2;

/// Function symbols a problem may list under `functions`.
pub const KNOWN_FUNCTIONS: &[&str] = &["add", "sub", "mul", "div", "pow", "exp", "log", "sin", "cos", "sqrt"];

const KEYS: &[&str] = &[
    "name",
    "unknown",
    "pde",
    "coefficients",
    "time",
    "ic",
    "ref",
    "budget",
    "max_insertions",
    "expected",
    "functions",
];
const REQUIRED: &[&str] = &["name", "unknown", "pde", "time", "ic"];

#[derive(Debug, thiserror::Error)]
pub enum ProblemError {
    #[error("schema error: {0}")]
    Schema(String),
    #[error("syntax error in `{key}`: {error}")]
    Syntax { key: String, error: SyntaxError },
    #[error("semantic error: {0}")]
    Semantic(String),
}

#[derive(Clone, Debug, PartialEq)]
pub struct PdeProblem {
    pub name: String,
    pub unknown: Name,
    /// Independent variables of the unknown, in declaration order.
    pub variables: Vec<Name>,
    /// `lhs - rhs`; the PDE reads `operator = 0`.
    pub operator: Expr,
    pub coefficients: Vec<Name>,
    pub time_var: Name,
    pub ic: Expr,
    /// Reference values for parameters of the initial condition.
    pub ref_values: BTreeMap<Name, Rational>,
    pub budget: u64,
    pub max_insertions: usize,
    pub expected: Option<Expr>,
    pub functions: Option<Vec<String>>,
}

impl PdeProblem {
    pub fn spatial_vars(&self) -> Vec<Name> {
        self.variables.iter().filter(|v| **v != self.time_var).cloned().collect()
    }

    pub fn is_coefficient(&self, p: &str) -> bool {
        self.coefficients.iter().any(|c| &**c == p)
    }

    pub fn context(&self) -> ParseContext {
        ParseContext::new(self.variables.clone(), Some(self.unknown.clone()))
    }

    /// Context for expressions that must not mention the unknown.
    pub fn plain_context(&self) -> ParseContext {
        ParseContext::new(self.variables.clone(), None)
    }

    /// Every name that is already in use by the problem.
    pub fn reserved_names(&self) -> BTreeSet<Name> {
        let mut out: BTreeSet<Name> = self.variables.iter().cloned().collect();
        out.insert(self.unknown.clone());
        out.extend(self.coefficients.iter().cloned());
        out.extend(self.ic.params());
        out.extend(self.ref_values.keys().cloned());
        out
    }
}

fn schema(msg: impl Into<String>) -> ProblemError {
    ProblemError::Schema(msg.into())
}

fn semantic(msg: impl Into<String>) -> ProblemError {
    ProblemError::Semantic(msg.into())
}

fn is_identifier(s: &str) -> bool {
    !s.is_empty() && s.chars().all(|c| c.is_ascii_alphabetic())
}

fn parse_unknown(value: &str) -> Result<(Name, Vec<Name>), ProblemError> {
    let bad = || schema(format!("`unknown` must look like u(x, t), got `{value}`"));
    let (head, rest) = value.split_once('(').ok_or_else(bad)?;
    let args = rest.trim().strip_suffix(')').ok_or_else(bad)?;
    let head = head.trim();
    if !is_identifier(head) {
        return Err(bad());
    }
    let mut vars = Vec::new();
    for a in args.split(',') {
        let a = a.trim();
        if !is_identifier(a) {
            return Err(bad());
        }
        if a.len() != 1 {
            return Err(semantic(format!("variable `{a}` must be a single letter")));
        }
        if vars.iter().any(|v: &Name| &**v == a) {
            return Err(semantic(format!("variable `{a}` listed twice")));
        }
        vars.push(name(a));
    }
    if vars.iter().any(|v| &**v == head) {
        return Err(semantic(format!("unknown `{head}` is also a variable")));
    }
    Ok((name(head), vars))
}

fn split_list(value: &str) -> impl Iterator<Item = &str> {
    value.split(',').map(str::trim).filter(|s| !s.is_empty())
}

/// Parses a problem file.
pub fn parse_problem(bytes: &[u8]) -> Result<PdeProblem, ProblemError> {
    let text = std::str::from_utf8(bytes).map_err(|_| schema("problem file is not valid UTF-8"))?;
    let mut fields: BTreeMap<&str, &str> = BTreeMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| schema(format!("line {}: expected `key = value`", lineno + 1)))?;
        let key = key.trim();
        if !KEYS.contains(&key) {
            return Err(schema(format!("line {}: unknown key `{key}`", lineno + 1)));
        }
        if fields.insert(key, value.trim()).is_some() {
            return Err(schema(format!("line {}: duplicate key `{key}`", lineno + 1)));
        }
    }
    for key in REQUIRED {
        if !fields.contains_key(key) {
            return Err(schema(format!("missing required key `{key}`")));
        }
    }

    let problem_name = fields["name"].to_string();
    if problem_name.is_empty() {
        return Err(schema("`name` is empty"));
    }
    let (unknown, variables) = parse_unknown(fields["unknown"])?;
    let ctx = ParseContext::new(variables.clone(), Some(unknown.clone()));
    let plain = ParseContext::new(variables.clone(), None);
    let syntax = |key: &str, error| ProblemError::Syntax { key: key.to_string(), error };

    let pde = fields["pde"];
    let operator = match pde.split('=').collect::<Vec<_>>().as_slice() {
        [lhs] => parse_expr_with(lhs, &ctx).map_err(|e| syntax("pde", e))?,
        [lhs, rhs] => {
            let l = parse_expr_with(lhs, &ctx).map_err(|e| syntax("pde", e))?;
            let r = parse_expr_with(rhs, &ctx).map_err(|e| syntax("pde", e))?;
            if r.is_zero() {
                l
            } else {
                l - r
            }
        }
        _ => return Err(schema("`pde` has more than one `=`")),
    };

    let mut coefficients = Vec::new();
    for c in split_list(fields.get("coefficients").copied().unwrap_or("")) {
        if !is_identifier(c) {
            return Err(schema(format!("bad coefficient name `{c}`")));
        }
        if variables.iter().any(|v| &**v == c) || &*unknown == c {
            return Err(semantic(format!("coefficient `{c}` clashes with a variable")));
        }
        coefficients.push(name(c));
    }

    let time_var = fields["time"];
    let time_var = variables
        .iter()
        .find(|v| &***v == time_var)
        .cloned()
        .ok_or_else(|| semantic(format!("time variable `{time_var}` is not a variable of the unknown")))?;

    let ic = parse_expr_with(fields["ic"], &ctx).map_err(|e| syntax("ic", e))?;
    if ic.mentions_unknown() {
        return Err(semantic("`ic` mentions the unknown"));
    }
    if ic.contains_var(&time_var) {
        return Err(semantic("`ic` depends on the time variable"));
    }

    for p in operator.params() {
        if !coefficients.contains(&p) {
            return Err(semantic(format!("operator uses `{p}`, which is not listed under `coefficients`")));
        }
    }
    if !operator.mentions_unknown() {
        return Err(semantic("the pde does not mention the unknown"));
    }

    let mut ref_values = BTreeMap::new();
    for item in split_list(fields.get("ref").copied().unwrap_or("")) {
        let (k, v) = item
            .split_once(':')
            .ok_or_else(|| schema(format!("`ref` entries look like A:1, got `{item}`")))?;
        let k = k.trim();
        if !is_identifier(k) {
            return Err(schema(format!("bad parameter name `{k}` in `ref`")));
        }
        let v = parse_rational(v.trim()).ok_or_else(|| schema(format!("bad rational `{}` in `ref`", v.trim())))?;
        ref_values.insert(name(k), v);
    }

    let budget = match fields.get("budget") {
        Some(b) => b.parse().map_err(|_| schema(format!("bad budget `{b}`")))?,
        None => DEFAULT_BUDGET,
    };
    let max_insertions = match fields.get("max_insertions") {
        Some(b) => b.parse().map_err(|_| schema(format!("bad max_insertions `{b}`")))?,
        None => DEFAULT_MAX_INSERTIONS,
    };
    let expected = match fields.get("expected") {
        Some(e) => Some(parse_expr_with(e, &plain).map_err(|e| syntax("expected", e))?),
        None => None,
    };
    let functions = match fields.get("functions") {
        Some(f) => {
            let list: Vec<String> = split_list(f).map(str::to_string).collect();
            for f in &list {
                if !KNOWN_FUNCTIONS.contains(&f.as_str()) {
                    return Err(schema(format!("unknown function `{f}`")));
                }
            }
            if list.is_empty() {
                return Err(schema("`functions` is empty"));
            }
            Some(list)
        }
        None => None,
    };

    Ok(PdeProblem {
        name: problem_name,
        unknown,
        variables,
        operator,
        coefficients,
        time_var,
        ic,
        ref_values,
        budget,
        max_insertions,
        expected,
        functions,
    })
}

pub fn read_problem(path: &std::path::Path) -> Result<PdeProblem, ProblemError> {
    let bytes = std::fs::read(path).map_err(|e| schema(format!("cannot read {}: {e}", path.display())))?;
    parse_problem(&bytes)
}

#[derive(Clone, Debug, PartialEq)]
pub struct FreeParam {
    pub name: Name,
    /// Value used when checking the initial condition, if one was needed.
    pub reference: Option<Rational>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerificationFlags {
    pub pde_pass: bool,
    pub ic_pass: bool,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchStats {
    pub candidates_evaluated: u64,
    pub stages: usize,
    pub wall_time_ms: u64,
}

/// A verified solution, as exchanged with external checkers.
#[derive(Clone, Debug, PartialEq)]
pub struct SolutionRecord {
    pub problem: String,
    pub expression: Expr,
    pub variables: Vec<Name>,
    pub free_params: Vec<FreeParam>,
    pub resolved_params: BTreeMap<Name, Expr>,
    pub verification: VerificationFlags,
    pub stats: SearchStats,
}

#[derive(Serialize, Deserialize)]
struct ExprJson {
    text: String,
    sexp: String,
}

#[derive(Serialize, Deserialize)]
struct FreeParamJson {
    name: String,
    reference: Option<String>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RecordJson {
    problem: String,
    expression_text: String,
    expression_sexp: String,
    variables: Vec<String>,
    free_params: Vec<FreeParamJson>,
    resolved_params: BTreeMap<String, ExprJson>,
    verification: VerificationFlags,
    stats: SearchStats,
}

fn rational_text(r: &Rational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

/// Serializes a record as pretty-printed JSON. Rationals are written as
/// `"p/q"` strings; expressions carry both infix text and an s-expression.
pub fn export_solution(record: &SolutionRecord) -> Vec<u8> {
    let json = RecordJson {
        problem: record.problem.clone(),
        expression_text: record.expression.to_string(),
        expression_sexp: record.expression.to_sexp(),
        variables: record.variables.iter().map(|v| v.to_string()).collect(),
        free_params: record
            .free_params
            .iter()
            .map(|f| FreeParamJson { name: f.name.to_string(), reference: f.reference.as_ref().map(rational_text) })
            .collect(),
        resolved_params: record
            .resolved_params
            .iter()
            .map(|(k, v)| (k.to_string(), ExprJson { text: v.to_string(), sexp: v.to_sexp() }))
            .collect(),
        verification: record.verification,
        stats: record.stats,
    };
    let mut out = serde_json::to_vec_pretty(&json).expect("record serializes");
    out.push(b'\n');
    out
}

/// Reads a record written by [`export_solution`]. Expressions are rebuilt
/// from their s-expressions, so the round trip is exact.
pub fn import_solution(bytes: &[u8]) -> Result<SolutionRecord, ProblemError> {
    let json: RecordJson = serde_json::from_slice(bytes).map_err(|e| schema(format!("bad solution record: {e}")))?;
    let variables: Vec<Name> = json.variables.iter().map(|v| name(v)).collect();
    let ctx = ParseContext::new(variables.clone(), None);
    let sexp = |key: &str, s: &str| parse_sexp(s, &ctx).map_err(|error| ProblemError::Syntax { key: key.to_string(), error });
    let expression = sexp("expression_sexp", &json.expression_sexp)?;
    let mut free_params = Vec::new();
    for f in json.free_params {
        let reference = match f.reference {
            Some(r) => Some(parse_rational(&r).ok_or_else(|| schema(format!("bad rational `{r}`")))?),
            None => None,
        };
        free_params.push(FreeParam { name: name(&f.name), reference });
    }
    let mut resolved_params = BTreeMap::new();
    for (k, v) in json.resolved_params {
        resolved_params.insert(name(&k), sexp("resolved_params", &v.sexp)?);
    }
    Ok(SolutionRecord {
        problem: json.problem,
        expression,
        variables,
        free_params,
        resolved_params,
        verification: json.verification,
        stats: json.stats,
    })
}
