//! Staged subtree-insertion search.
//!
//! The search starts from the initial condition with its constants
//! lifted to parameters. Each stage activates one variable and tries to
//! wrap existing nodes as `f(node, terminal)` (or `f(node)` for unary `f`),
//! where terminals are small expressions in the active variable. A
//! candidate is accepted once it solves the PDE exactly and reproduces the
//! initial condition.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::sync::Arc;
use std::time::Instant;

use rayon::prelude::*;

use crate::expr::{name, BinaryOp, Expr, Name, PositionId, Step, UnaryOp};
use crate::parse::{parse_expr_with, ParseContext};
use crate::problem::{PdeProblem, SearchStats, SolutionRecord, VerificationFlags, FreeParam};
use crate::resolve::Assignment;
use crate::simplify::tidy;
use crate::verify::{check_initial_condition, verify_with, VerificationReport, VerifyContext};
use crate::Rational;

pub const DEFAULT_FUNCTIONS: &[&str] = &["add", "sub", "mul", "div", "exp"];
/// `{v}` is the active variable, `{coef}` each PDE coefficient, and `c`,
/// `p` stand for fresh parameters.
pub const DEFAULT_TERMINALS: &[&str] = &["{v}", "c*{v}", "{coef}*{v}", "{v}^2", "c*{v}^2", "p+{v}"];
/// Candidates carrying more fresh parameters than this are skipped.
pub const MAX_FRESH_ALIVE: usize = 2;
pub const BATCH_SIZE: usize = 256;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Function {
    Binary(BinaryOp),
    Unary(UnaryOp),
}

impl Function {
    pub fn from_name(s: &str) -> Option<Function> {
        Some(match s {
            "add" => Function::Binary(BinaryOp::Add),
            "sub" => Function::Binary(BinaryOp::Sub),
            "mul" => Function::Binary(BinaryOp::Mul),
            "div" => Function::Binary(BinaryOp::Div),
            "pow" => Function::Binary(BinaryOp::Pow),
            other => match UnaryOp::from_name(other)? {
                UnaryOp::Neg => return None,
                op => Function::Unary(op),
            },
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            Function::Binary(op) => op.name(),
            Function::Unary(op) => op.name(),
        }
    }
}

/// Which side of the new binary node holds the terminal.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Orientation {
    TerminalRight,
    TerminalLeft,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Terminal {
    pub expr: Expr,
    /// Fresh parameters appearing in `expr`.
    pub fresh: Vec<Name>,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct CandidateSubtree {
    pub position: PositionId,
    pub function: Function,
    /// `None` for unary functions.
    pub terminal: Option<Terminal>,
    pub orientation: Orientation,
}

#[derive(Clone, Debug)]
pub struct SearchConfig {
    pub functions: Vec<Function>,
    pub terminal_templates: Vec<String>,
    pub budget: u64,
    pub max_insertions: usize,
    /// Variables in activation order; defaults to the spatial variables
    /// missing from the initial condition, then time.
    pub stage_order: Option<Vec<Name>>,
    pub seed: u64,
    pub record_timing: bool,
    pub batch_size: usize,
    pub max_fresh_alive: usize,
}

impl SearchConfig {
    pub fn for_problem(problem: &PdeProblem) -> Self {
        let names: Vec<&str> = match &problem.functions {
            Some(list) => list.iter().map(String::as_str).collect(),
            None => DEFAULT_FUNCTIONS.to_vec(),
        };
        SearchConfig {
            functions: names.iter().filter_map(|n| Function::from_name(n)).collect(),
            terminal_templates: DEFAULT_TERMINALS.iter().map(|s| s.to_string()).collect(),
            budget: problem.budget,
            max_insertions: problem.max_insertions,
            stage_order: None,
            seed: 0,
            record_timing: true,
            batch_size: BATCH_SIZE,
            max_fresh_alive: MAX_FRESH_ALIVE,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum StageFailure {
    #[error("budget exhausted after {evaluated} candidates")]
    BudgetExhausted { evaluated: u64 },
    #[error("no candidate passed ({evaluated} evaluated)")]
    Exhausted { evaluated: u64 },
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SearchFailure {
    #[error("stage `{var}`: {failure}")]
    Stage { var: String, failure: StageFailure },
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("final check failed for `{0}`")]
    FinalCheck(String),
}

impl SearchFailure {
    pub fn is_budget_exhausted(&self) -> bool {
        matches!(self, SearchFailure::Stage { failure: StageFailure::BudgetExhausted { .. }, .. })
    }
}

/// Seed expression with constants turned into parameters.
#[derive(Clone, Debug, PartialEq)]
pub struct Lifted {
    pub seed: Expr,
    pub lifted: Vec<Name>,
    pub refs: BTreeMap<Name, Rational>,
}

struct NameSource<'a> {
    taken: &'a BTreeSet<Name>,
    used: BTreeSet<Name>,
}

impl NameSource<'_> {
    fn take(&mut self, start: u8) -> Name {
        let mut len = 1;
        loop {
            for c in (b'A'..=b'Z').filter(|c| *c >= start || len > 1) {
                let n = name(&(c as char).to_string().repeat(len));
                if !self.taken.contains(&n) && !self.used.contains(&n) {
                    self.used.insert(n.clone());
                    return n;
                }
            }
            len += 1;
        }
    }
}

/// Replaces numeric constants that sit in sums, products and numerators
/// with fresh parameters `B, C, ...`, and multiplies by `A` unless the
/// initial condition already has parameters or the result is already
/// scaled by a lifted parameter. `x + 1` becomes `A*(x + B)` with
/// `A = B = 1`; `exp(x/2)` becomes `A*exp(x/2)`; `0` becomes `B`.
pub fn lift_constants(ic: &Expr, taken: &BTreeSet<Name>) -> Lifted {
    fn go(e: &Expr, names: &mut NameSource, refs: &mut BTreeMap<Name, Rational>, out: &mut Vec<Name>) -> Expr {
        match e {
            Expr::Const(c) => {
                let n = names.take(b'B');
                refs.insert(n.clone(), c.clone());
                out.push(n.clone());
                Expr::Param(n)
            }
            Expr::Binary(op @ (BinaryOp::Add | BinaryOp::Sub | BinaryOp::Mul), l, r) => {
                let l = go(l, names, refs, out);
                Expr::binary(*op, l, go(r, names, refs, out))
            }
            Expr::Binary(BinaryOp::Div, l, r) => Expr::binary(BinaryOp::Div, go(l, names, refs, out), (**r).clone()),
            Expr::Unary(UnaryOp::Neg, c) => Expr::unary(UnaryOp::Neg, go(c, names, refs, out)),
            _ => e.clone(),
        }
    }
    let mut names = NameSource { taken, used: BTreeSet::new() };
    let mut refs = BTreeMap::new();
    let mut lifted = Vec::new();
    let had_params = !ic.params().is_empty();
    let body = go(ic, &mut names, &mut refs, &mut lifted);
    let is_lifted = |e: &Expr| matches!(e, Expr::Param(p) if lifted.contains(p));
    let scaled = is_lifted(&body)
        || matches!(&body, Expr::Binary(BinaryOp::Mul, l, r) if is_lifted(l) || is_lifted(r));
    if had_params || scaled {
        return Lifted { seed: body, lifted, refs };
    }
    let a = names.take(b'A');
    refs.insert(a.clone(), Rational::from_integer(1.into()));
    lifted.insert(0, a.clone());
    Lifted { seed: Expr::Param(a) * body, lifted, refs }
}

/// A letters-only name based on `base` that is not in `taken`.
pub fn fresh_name(base: &str, taken: &BTreeSet<Name>) -> Name {
    if !taken.contains(base) {
        return name(base);
    }
    let mut suffix = vec![b'a'];
    loop {
        let candidate = format!("{base}{}", String::from_utf8_lossy(&suffix));
        if !taken.contains(candidate.as_str()) {
            return name(&candidate);
        }
        // next suffix: a, b, ..., z, aa, ab, ...
        let mut i = suffix.len();
        loop {
            if i == 0 {
                suffix.insert(0, b'a');
                break;
            }
            i -= 1;
            if suffix[i] < b'z' {
                suffix[i] += 1;
                break;
            }
            suffix[i] = b'a';
        }
    }
}

/// Instantiates the terminal templates for variable `var`. Parameters in
/// a template other than PDE coefficients are fresh and renamed away from
/// `taken`.
pub fn build_stage_terminals(
    var: &Name,
    templates: &[String],
    coefficients: &[Name],
    taken: &BTreeSet<Name>,
) -> Result<Vec<Terminal>, SearchFailure> {
    let ctx = ParseContext::new(vec![var.clone()], None);
    let mut out: Vec<Terminal> = Vec::new();
    for t in templates {
        let with_var = t.replace("{v}", var);
        let texts: Vec<String> = if with_var.contains("{coef}") {
            coefficients.iter().map(|c| with_var.replace("{coef}", c)).collect()
        } else {
            vec![with_var]
        };
        for text in texts {
            let e = parse_expr_with(&text, &ctx)
                .map_err(|err| SearchFailure::Config(format!("terminal `{text}`: {err}")))?;
            let mut rename = std::collections::HashMap::new();
            let mut fresh = Vec::new();
            for p in e.params() {
                if coefficients.contains(&p) {
                    continue;
                }
                let n = fresh_name(&p, taken);
                rename.insert(p, n.clone());
                fresh.push(n);
            }
            let term = Terminal { expr: e.rename_params(&rename), fresh };
            if !out.contains(&term) {
                out.push(term);
            }
        }
    }
    Ok(out)
}

/// Every single insertion, in enumeration order: position (preorder),
/// then function, then terminal, then orientation.
pub fn assemble_pool(positions: &[PositionId], functions: &[Function], terminals: &[Terminal]) -> Vec<CandidateSubtree> {
    let mut pool = Vec::new();
    for pos in positions {
        for f in functions {
            match f {
                Function::Unary(_) => pool.push(CandidateSubtree {
                    position: pos.clone(),
                    function: *f,
                    terminal: None,
                    orientation: Orientation::TerminalRight,
                }),
                Function::Binary(_) => {
                    for t in terminals {
                        for o in [Orientation::TerminalRight, Orientation::TerminalLeft] {
                            pool.push(CandidateSubtree {
                                position: pos.clone(),
                                function: *f,
                                terminal: Some(t.clone()),
                                orientation: o,
                            });
                        }
                    }
                }
            }
        }
    }
    pool
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ExpandError {
    #[error("position {0} does not exist")]
    InvalidPosition(PositionId),
    #[error("position {0} selected twice")]
    DuplicatePosition(PositionId),
}

fn replace_at(e: &Expr, path: &[Step], f: &dyn Fn(Expr) -> Expr) -> Option<Expr> {
    let Some((step, rest)) = path.split_first() else {
        return Some(f(e.clone()));
    };
    Some(match (e, step) {
        (Expr::Unary(op, c), Step::Only) => Expr::Unary(*op, Arc::new(replace_at(c, rest, f)?)),
        (Expr::Diff(vs, c), Step::Only) => Expr::Diff(vs.clone(), Arc::new(replace_at(c, rest, f)?)),
        (Expr::Binary(op, l, r), Step::Left) => Expr::Binary(*op, Arc::new(replace_at(l, rest, f)?), r.clone()),
        (Expr::Binary(op, l, r), Step::Right) => Expr::Binary(*op, l.clone(), Arc::new(replace_at(r, rest, f)?)),
        _ => return None,
    })
}

/// Applies a set of insertions at distinct positions. Fresh parameters
/// that would be shared between insertions are renamed apart. Returns
/// the new expression and its fresh parameters.
pub fn expand(
    expr: &Expr,
    selection: &[&CandidateSubtree],
    taken: &BTreeSet<Name>,
) -> Result<(Expr, Vec<Name>), ExpandError> {
    let mut order: Vec<&CandidateSubtree> = selection.to_vec();
    for (i, a) in order.iter().enumerate() {
        if order[..i].iter().any(|b| b.position == a.position) {
            return Err(ExpandError::DuplicatePosition(a.position.clone()));
        }
    }
    // deeper positions first so that outer paths stay valid
    order.sort_by(|a, b| b.position.cmp(&a.position));
    let mut used: BTreeSet<Name> = taken.clone();
    let mut fresh_all = Vec::new();
    let mut out = expr.clone();
    for ins in order {
        let term = ins.terminal.as_ref().map(|t| {
            let mut rename = std::collections::HashMap::new();
            for p in &t.fresh {
                let n = if fresh_all.contains(p) { fresh_name(p, &used) } else { p.clone() };
                used.insert(n.clone());
                fresh_all.push(n.clone());
                rename.insert(p.clone(), n);
            }
            t.expr.rename_params(&rename)
        });
        let (function, orientation) = (ins.function, ins.orientation);
        out = replace_at(&out, &ins.position.0, &move |node| match (function, &term) {
            (Function::Unary(op), _) => Expr::unary(op, node),
            (Function::Binary(op), Some(t)) => match orientation {
                Orientation::TerminalRight => Expr::binary(op, node, t.clone()),
                Orientation::TerminalLeft => Expr::binary(op, t.clone(), node),
            },
            (Function::Binary(_), None) => node,
        })
        .ok_or_else(|| ExpandError::InvalidPosition(ins.position.clone()))?;
    }
    fresh_all.sort();
    Ok((out, fresh_all))
}

#[derive(Clone, Debug)]
pub struct StageState {
    pub index: usize,
    pub var: Name,
    pub expr: Expr,
    pub positions: Vec<PositionId>,
    pub terminals: Vec<Terminal>,
    /// The last stage checks the PDE; earlier ones only the initial condition.
    pub final_stage: bool,
    /// Names the stage must not reuse for fresh parameters.
    pub taken: BTreeSet<Name>,
}

#[derive(Clone, Debug)]
pub struct StageOutcome {
    pub expr: Expr,
    pub report: Option<VerificationReport>,
    pub evaluated: u64,
}

/// `(2|F||T|)^|P|`, saturating.
pub fn enumeration_bound(functions: usize, terminals: usize, positions: usize) -> u128 {
    let base = 2u128 * functions as u128 * terminals as u128;
    let mut acc: u128 = 1;
    for _ in 0..positions {
        acc = acc.saturating_mul(base);
    }
    acc
}

/// Exact number of distinct-position selections of up to `max_k` pool
/// entries: `sum_k C(P, k) * n^k` with `n` entries per position.
pub fn selection_count(per_position: usize, positions: usize, max_k: usize) -> u128 {
    let mut total: u128 = 0;
    let mut binom: u128 = 1;
    let mut power: u128 = 1;
    for k in 1..=max_k.min(positions) {
        binom = binom * (positions - k + 1) as u128 / k as u128;
        power = power.saturating_mul(per_position as u128);
        total = total.saturating_add(binom.saturating_mul(power));
    }
    total
}

/// Lexicographic index combinations of size `k` drawn from `n`.
struct Combinations {
    n: usize,
    idx: Vec<usize>,
    started: bool,
}

impl Combinations {
    fn new(n: usize, k: usize) -> Self {
        Combinations { n, idx: (0..k).collect(), started: false }
    }
}

impl Iterator for Combinations {
    type Item = Vec<usize>;
    fn next(&mut self) -> Option<Vec<usize>> {
        let k = self.idx.len();
        if k == 0 || k > self.n {
            return None;
        }
        if !self.started {
            self.started = true;
            return Some(self.idx.clone());
        }
        let mut i = k;
        while i > 0 {
            i -= 1;
            if self.idx[i] < self.n - k + i {
                self.idx[i] += 1;
                for j in i + 1..k {
                    self.idx[j] = self.idx[j - 1] + 1;
                }
                return Some(self.idx.clone());
            }
        }
        None
    }
}

/// Candidates of a stage in enumeration order, without duplicates and
/// without ones carrying too many fresh parameters.
pub fn stage_candidates<'a>(
    state: &'a StageState,
    pool: &'a [CandidateSubtree],
    max_insertions: usize,
    max_fresh: usize,
) -> impl Iterator<Item = (Expr, Vec<Name>)> + 'a {
    let mut seen: HashSet<Expr> = HashSet::new();
    seen.insert(state.expr.clone());
    (1..=max_insertions)
        .flat_map(move |k| Combinations::new(pool.len(), k))
        .filter_map(move |combo| {
            let sel: Vec<&CandidateSubtree> = combo.iter().map(|&i| &pool[i]).collect();
            let positions: HashSet<&PositionId> = sel.iter().map(|c| &c.position).collect();
            if positions.len() != sel.len() {
                return None;
            }
            let (e, fresh) = expand(&state.expr, &sel, &state.taken).ok()?;
            if fresh.len() > max_fresh || !seen.insert(e.clone()) {
                return None;
            }
            Some((e, fresh))
        })
}

struct Budget {
    remaining: u64,
}

fn candidate_seed(base: u64, index: u64) -> u64 {
    base ^ index.wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

fn evaluate(
    problem: &PdeProblem,
    state: &StageState,
    expr: &Expr,
    fresh: &[Name],
    refs: &BTreeMap<Name, Rational>,
    seed: u64,
) -> Option<StageOutcome> {
    if state.final_stage {
        let ctx = VerifyContext { fresh: fresh.to_vec(), refs: refs.clone(), seed, full_report: false };
        let report = verify_with(problem, expr, &ctx);
        report.passed().then(|| StageOutcome { expr: report.candidate.clone(), report: Some(report), evaluated: 0 })
    } else {
        check_initial_condition(problem, expr, refs).map(|_| StageOutcome { expr: expr.clone(), report: None, evaluated: 0 })
    }
}

fn run_stage(
    problem: &PdeProblem,
    state: &StageState,
    cfg: &SearchConfig,
    refs: &BTreeMap<Name, Rational>,
    budget: &mut Budget,
) -> Result<StageOutcome, StageFailure> {
    let mut evaluated: u64 = 0;
    // the unmodified expression is tried first
    if budget.remaining == 0 {
        return Err(StageFailure::BudgetExhausted { evaluated });
    }
    budget.remaining -= 1;
    evaluated += 1;
    if let Some(mut hit) = evaluate(problem, state, &state.expr, &[], refs, candidate_seed(cfg.seed, 0)) {
        hit.evaluated = evaluated;
        return Ok(hit);
    }

    let pool = assemble_pool(&state.positions, &cfg.functions, &state.terminals);
    let per_position = if state.positions.is_empty() { 0 } else { pool.len() / state.positions.len() };
    let law = selection_count(per_position, state.positions.len(), cfg.max_insertions);
    let mut pool_evaluated: u64 = 0;
    let mut candidates = stage_candidates(state, &pool, cfg.max_insertions, cfg.max_fresh_alive);
    let batch_size = cfg.batch_size.max(1);
    loop {
        let mut batch = Vec::with_capacity(batch_size);
        let mut exhausted = false;
        while batch.len() < batch_size {
            if budget.remaining <= batch.len() as u64 {
                break;
            }
            match candidates.next() {
                Some(c) => batch.push(c),
                None => {
                    exhausted = true;
                    break;
                }
            }
        }
        if batch.is_empty() {
            return Err(if exhausted {
                StageFailure::Exhausted { evaluated }
            } else {
                StageFailure::BudgetExhausted { evaluated }
            });
        }
        let first = evaluated;
        let results: Vec<Option<StageOutcome>> = batch
            .par_iter()
            .enumerate()
            .map(|(i, (e, fresh))| evaluate(problem, state, e, fresh, refs, candidate_seed(cfg.seed, first + i as u64)))
            .collect();
        let hit = results.into_iter().enumerate().find_map(|(i, r)| r.map(|r| (i, r)));
        let used = hit.as_ref().map_or(batch.len(), |(i, _)| i + 1) as u64;
        budget.remaining -= used;
        evaluated += used;
        pool_evaluated += used;
        assert!(u128::from(pool_evaluated) <= law, "enumeration exceeded its selection count");
        if let Some((_, mut outcome)) = hit {
            outcome.evaluated = evaluated;
            return Ok(outcome);
        }
        if exhausted {
            return Err(StageFailure::Exhausted { evaluated });
        }
    }
}

/// Activation order: spatial variables absent from the initial
/// condition, then time.
pub fn default_stage_order(problem: &PdeProblem) -> Vec<Name> {
    let in_ic = problem.ic.vars();
    let mut order: Vec<Name> = problem.spatial_vars().into_iter().filter(|v| !in_ic.contains(v)).collect();
    order.push(problem.time_var.clone());
    order
}

/// Runs one stage from an explicit state; exposed for inspection.
pub fn enumerate_stage(
    problem: &PdeProblem,
    state: &StageState,
    cfg: &SearchConfig,
    refs: &BTreeMap<Name, Rational>,
) -> Result<StageOutcome, StageFailure> {
    let mut budget = Budget { remaining: cfg.budget };
    run_stage(problem, state, cfg, refs, &mut budget)
}

/// Builds the state for activating `var` on `expr`.
pub fn stage_state(
    problem: &PdeProblem,
    cfg: &SearchConfig,
    index: usize,
    var: &Name,
    expr: &Expr,
    final_stage: bool,
) -> Result<StageState, SearchFailure> {
    let mut taken = problem.reserved_names();
    taken.extend(expr.params());
    let terminals = build_stage_terminals(var, &cfg.terminal_templates, &problem.coefficients, &taken)?;
    for t in &terminals {
        taken.extend(t.fresh.iter().cloned());
    }
    Ok(StageState {
        index,
        var: var.clone(),
        expr: expr.clone(),
        positions: crate::expr::positions(expr),
        terminals,
        final_stage,
        taken,
    })
}

/// Searches for a closed-form solution of `problem`.
pub fn solve(problem: &PdeProblem, cfg: &SearchConfig) -> Result<SolutionRecord, SearchFailure> {
    let start = Instant::now();
    if cfg.functions.is_empty() {
        return Err(SearchFailure::Config("no functions to insert".into()));
    }
    let lifted = lift_constants(&problem.ic, &problem.reserved_names());
    let mut refs = lifted.refs.clone();
    refs.extend(problem.ref_values.iter().map(|(k, v)| (k.clone(), v.clone())));

    let order = match &cfg.stage_order {
        Some(o) => {
            if o.is_empty() || o.iter().any(|v| !problem.variables.contains(v)) {
                return Err(SearchFailure::Config("stage order must list variables of the unknown".into()));
            }
            o.clone()
        }
        None => default_stage_order(problem),
    };

    let mut budget = Budget { remaining: cfg.budget };
    let mut expr = lifted.seed.clone();
    let mut total: u64 = 0;
    let mut resolved = Assignment::new();
    let mut last_report = None;
    for (i, var) in order.iter().enumerate() {
        let state = stage_state(problem, cfg, i, var, &expr, i + 1 == order.len())?;
        let outcome = run_stage(problem, &state, cfg, &refs, &mut budget).map_err(|failure| {
            SearchFailure::Stage { var: var.to_string(), failure }
        })?;
        total += outcome.evaluated;
        if let Some(r) = &outcome.report {
            resolved.extend(r.resolved.iter().map(|(k, v)| (k.clone(), tidy(v))));
        }
        expr = outcome.expr;
        last_report = outcome.report;
    }

    // end-to-end check on the displayed form
    let shown = tidy(&expr);
    let check = verify_with(
        problem,
        &shown,
        &VerifyContext { fresh: Vec::new(), refs: refs.clone(), seed: cfg.seed, full_report: true },
    );
    if !check.passed() || !check.resolved.is_empty() {
        return Err(SearchFailure::FinalCheck(shown.to_string()));
    }
    let ic_refs = if check.ic_refs.is_empty() {
        last_report.map(|r| r.ic_refs).unwrap_or_default()
    } else {
        check.ic_refs
    };
    let free_params = shown
        .params()
        .into_iter()
        .filter(|p| !problem.is_coefficient(p))
        .map(|p| FreeParam { reference: ic_refs.get(&p).or_else(|| refs.get(&p)).cloned(), name: p })
        .collect();
    let wall_time_ms = if cfg.record_timing { start.elapsed().as_millis() as u64 } else { 0 };
    Ok(SolutionRecord {
        problem: problem.name.clone(),
        expression: shown,
        variables: problem.variables.clone(),
        free_params,
        resolved_params: resolved,
        verification: VerificationFlags { pde_pass: true, ic_pass: true },
        stats: SearchStats { candidates_evaluated: total, stages: order.len(), wall_time_ms },
    })
}
