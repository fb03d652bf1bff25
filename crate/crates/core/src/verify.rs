//! Exact verification of candidates and equivalence of solution families.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::hash::{Hash, Hasher};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::calculus::residual_form;
use crate::canon::{canonicalize, to_expr};
use crate::expr::{name, Expr, Name};
use crate::poly::Gen;
use crate::problem::PdeProblem;
use crate::resolve::{solve_for, Assignment, ResolveLimits};
use crate::simplify::{certify_form, numeric_witness, sample_value, ZeroVerdict};
use crate::{RatFun, Rational};

/// Values tried, in order, for parameters of the initial condition that
/// have no reference value.
pub const IC_TRIAL_VALUES: [(i64, i64); 7] = [(0, 1), (1, 1), (-1, 1), (2, 1), (-2, 1), (1, 2), (-1, 2)];
/// At most this many unreferenced parameters are assigned trial values.
pub const MAX_IC_TRIAL_PARAMS: usize = 2;
/// Random parameter maps tried before declaring two families distinct.
pub const EQUIVALENCE_TRIALS: usize = 32;

#[derive(Clone, Debug, Default)]
pub struct VerifyContext {
    /// Parameters introduced by the search; solved for first.
    pub fresh: Vec<Name>,
    /// Reference values for parameters when checking the initial condition.
    pub refs: BTreeMap<Name, Rational>,
    pub seed: u64,
    /// Also check the initial condition when the PDE check fails.
    pub full_report: bool,
}

#[derive(Clone, Debug)]
pub struct VerificationReport {
    /// The candidate after substituting resolved parameters.
    pub candidate: Expr,
    pub residual_simplified: Expr,
    pub pde_verdict: ZeroVerdict,
    pub ic_pass: bool,
    pub resolved: Assignment,
    /// Reference values the initial-condition check relied on.
    pub ic_refs: BTreeMap<Name, Rational>,
    /// Set when the candidate could not be evaluated symbolically.
    pub error: Option<String>,
}

impl VerificationReport {
    /// 0 for an exact solution matching the initial condition, 1 otherwise.
    pub fn fitness(&self) -> u8 {
        if self.passed() {
            0
        } else {
            1
        }
    }

    pub fn passed(&self) -> bool {
        self.pde_verdict.is_certified() && self.ic_pass
    }
}

fn substitute(e: &Expr, values: &Assignment) -> Expr {
    let map: HashMap<Name, Expr> = values.iter().map(|(k, v)| (k.clone(), v.clone())).collect();
    e.substitute_params(&map)
}

fn substitute_rationals(e: &Expr, values: &BTreeMap<Name, Rational>) -> Expr {
    let map: HashMap<Name, Expr> = values.iter().map(|(k, v)| (k.clone(), Expr::Const(v.clone()))).collect();
    e.substitute_params(&map)
}

fn is_zero_difference(a: &Expr, b: &Expr) -> bool {
    matches!(canonicalize::<Rational>(&(a.clone() - b.clone())), Ok(r) if r.is_zero())
}

/// Checks `candidate(t = 0) = ic`. Tries the plain symbolic comparison,
/// then with reference values applied, then with trial values for the
/// remaining parameters. Returns the reference values used.
pub fn check_initial_condition(
    problem: &PdeProblem,
    candidate: &Expr,
    refs: &BTreeMap<Name, Rational>,
) -> Option<BTreeMap<Name, Rational>> {
    let c0 = candidate.substitute_var(&problem.time_var, &Expr::zero());
    let g = &problem.ic;
    if is_zero_difference(&c0, g) {
        return Some(BTreeMap::new());
    }
    let mentioned: BTreeSet<Name> = c0.params().union(&g.params()).cloned().collect();
    let mut used: BTreeMap<Name, Rational> =
        refs.iter().filter(|(k, _)| mentioned.contains(*k)).map(|(k, v)| (k.clone(), v.clone())).collect();
    let c0 = substitute_rationals(&c0, &used);
    let g = substitute_rationals(g, &used);
    let symbolic = g.params();
    let open: Vec<Name> = c0
        .params()
        .into_iter()
        .filter(|p| !problem.is_coefficient(p) && !symbolic.contains(p))
        .collect();
    if open.is_empty() {
        return is_zero_difference(&c0, &g).then_some(used);
    }
    if open.len() > MAX_IC_TRIAL_PARAMS {
        return None;
    }
    let trials: Vec<Rational> =
        IC_TRIAL_VALUES.iter().map(|&(n, d)| Rational::new(n.into(), d.into())).collect();
    let mut idx = vec![0usize; open.len()];
    loop {
        let assign: BTreeMap<Name, Rational> =
            open.iter().zip(&idx).map(|(p, &i)| (p.clone(), trials[i].clone())).collect();
        if is_zero_difference(&substitute_rationals(&c0, &assign), &g) {
            used.extend(assign);
            return Some(used);
        }
        // odometer over the trial values
        let mut k = 0;
        loop {
            if k == idx.len() {
                return None;
            }
            idx[k] += 1;
            if idx[k] < trials.len() {
                break;
            }
            idx[k] = 0;
            k += 1;
        }
    }
}

fn failure(problem: &PdeProblem, candidate: &Expr, msg: String) -> VerificationReport {
    VerificationReport {
        candidate: candidate.clone(),
        residual_simplified: problem.operator.clone(),
        pde_verdict: ZeroVerdict::Undecided,
        ic_pass: false,
        resolved: Assignment::new(),
        ic_refs: BTreeMap::new(),
        error: Some(msg),
    }
}

/// Parameter assignments worth checking: none if the residual already
/// vanishes, else solutions for the fresh parameters, else solutions for
/// fresh and free parameters together.
fn attempts(problem: &PdeProblem, candidate: &Expr, residual: &RatFun, fresh: &[Name]) -> Vec<Assignment> {
    if residual.is_zero() {
        return vec![Assignment::new()];
    }
    let params = candidate.params();
    let fresh: Vec<Name> = fresh.iter().filter(|p| params.contains(*p)).cloned().collect();
    let limits = ResolveLimits::default();
    if !fresh.is_empty() {
        if let Ok(s) = solve_for(residual, &fresh, Gen::is_param, &limits) {
            return s;
        }
    }
    let free: Vec<Name> =
        params.iter().filter(|p| !problem.is_coefficient(p) && !fresh.contains(*p)).cloned().collect();
    if free.is_empty() {
        return Vec::new();
    }
    let mut all = fresh;
    all.extend(free);
    solve_for(residual, &all, Gen::is_param, &limits).unwrap_or_default()
}

/// Verifies `candidate` against the PDE and the initial condition.
pub fn verify_with(problem: &PdeProblem, candidate: &Expr, ctx: &VerifyContext) -> VerificationReport {
    let r0 = match residual_form(&problem.operator, &problem.unknown, candidate) {
        Ok(r) => r,
        Err(e) => return failure(problem, candidate, e.to_string()),
    };
    let mut fallback: Option<VerificationReport> = None;
    for sol in attempts(problem, candidate, &r0, &ctx.fresh) {
        let cand = substitute(candidate, &sol);
        let r = if sol.is_empty() {
            r0.clone()
        } else {
            match residual_form(&problem.operator, &problem.unknown, &cand) {
                Ok(r) => r,
                Err(_) => continue,
            }
        };
        if !r.is_zero() {
            continue;
        }
        let ic = check_initial_condition(problem, &cand, &ctx.refs);
        let report = VerificationReport {
            candidate: cand,
            residual_simplified: Expr::zero(),
            pde_verdict: ZeroVerdict::CertifiedZero,
            ic_pass: ic.is_some(),
            resolved: sol,
            ic_refs: ic.clone().unwrap_or_default(),
            error: None,
        };
        if ic.is_some() {
            return report;
        }
        fallback.get_or_insert(report);
    }
    if let Some(report) = fallback {
        return report;
    }
    let ic_pass = ctx.full_report && check_initial_condition(problem, candidate, &ctx.refs).is_some();
    VerificationReport {
        candidate: candidate.clone(),
        residual_simplified: to_expr(&r0),
        pde_verdict: certify_form(&r0, ctx.seed),
        ic_pass,
        resolved: Assignment::new(),
        ic_refs: BTreeMap::new(),
        error: None,
    }
}

/// Verifies `candidate` using the problem's reference values. Free
/// parameters may be solved for when the residual does not vanish.
pub fn verify_candidate(problem: &PdeProblem, candidate: &Expr) -> VerificationReport {
    let ctx = VerifyContext { refs: problem.ref_values.clone(), full_report: true, ..VerifyContext::default() };
    verify_with(problem, candidate, &ctx)
}

#[derive(Clone, Debug, PartialEq)]
pub enum Equivalence {
    /// Values for the second family's parameters, in terms of the first's.
    Equivalent(Assignment),
    Distinct,
    Undecided,
}

fn fresh_name(base: &str, taken: &BTreeSet<Name>) -> Name {
    let mut n = format!("{base}q");
    while taken.contains(n.as_str()) {
        n.push('q');
    }
    name(&n)
}

const COEF_PREFIX: &str = "__k";

fn is_map_coefficient(g: &Gen) -> bool {
    matches!(g, Gen::Param(n) if n.starts_with(COEF_PREFIX))
}

struct Family {
    params: Vec<Name>,
}

fn family(e: &Expr, shared: &[Name]) -> Family {
    Family { params: e.params().into_iter().filter(|p| !shared.contains(p)).collect() }
}

/// Renames `b`'s own parameters away from `a`'s; returns the renamed
/// expression and the `renamed -> original` table.
fn separate(a: &Expr, b: &Expr, shared: &[Name]) -> (Expr, Vec<(Name, Name)>) {
    let pa: BTreeSet<Name> = a.params();
    let mut taken: BTreeSet<Name> = pa.union(&b.params()).cloned().collect();
    taken.extend(a.vars());
    taken.extend(b.vars());
    let mut rename = HashMap::new();
    let mut table = Vec::new();
    for q in family(b, shared).params {
        let new = if pa.contains(&q) { fresh_name(&q, &taken) } else { q.clone() };
        taken.insert(new.clone());
        rename.insert(q.clone(), new.clone());
        table.push((new, q));
    }
    (b.rename_params(&rename), table)
}

/// Tries `b(q -> affine(a's params)) = a`, with some of `b`'s parameters
/// optionally renamed straight to one of `a`'s (needed when they sit in
/// exponents).
fn match_direction(a: &Expr, b: &Expr, shared: &[Name]) -> Option<Assignment> {
    let pa = family(a, shared).params;
    let (b1, table) = separate(a, b, shared);
    let m = table.len();
    let choices = pa.len() + 1;
    let combos = choices.checked_pow(m as u32).unwrap_or(usize::MAX).min(256);
    let limits = ResolveLimits { max_unknowns: 24, max_degree: 2, max_branches: 256 };
    for combo in 0..combos {
        let mut pick = combo;
        let mut map: HashMap<Name, Expr> = HashMap::new();
        let mut unknowns = Vec::new();
        for (j, (q, _)) in table.iter().enumerate() {
            let choice = pick % choices;
            pick /= choices;
            if choice > 0 {
                map.insert(q.clone(), Expr::Param(pa[choice - 1].clone()));
                continue;
            }
            let k0 = name(&format!("{COEF_PREFIX}{j}_0"));
            let mut form = Expr::Param(k0.clone());
            unknowns.push(k0);
            for (i, p) in pa.iter().enumerate() {
                let k = name(&format!("{COEF_PREFIX}{j}_{}", i + 1));
                form = form + Expr::Param(k.clone()) * Expr::Param(p.clone());
                unknowns.push(k);
            }
            map.insert(q.clone(), form);
        }
        let b2 = b1.substitute_params(&map);
        let Ok(diff) = canonicalize::<Rational>(&(a.clone() - b2.clone())) else { continue };
        let sols = if diff.is_zero() {
            vec![Assignment::new()]
        } else {
            match solve_for(&diff, &unknowns, is_map_coefficient, &limits) {
                Ok(s) => s,
                Err(_) => continue,
            }
        };
        for sol in sols {
            // coefficients left free are set to 0
            let mut full: HashMap<Name, Expr> = unknowns.iter().map(|k| (k.clone(), Expr::zero())).collect();
            for (k, v) in &sol {
                let zeroed = v.map_leaves(&|e| match e {
                    Expr::Param(p) if p.starts_with(COEF_PREFIX) => Some(Expr::zero()),
                    _ => None,
                });
                full.insert(k.clone(), zeroed);
            }
            let values: Assignment = table
                .iter()
                .map(|(q, orig)| {
                    let v = map[q].substitute_params(&full);
                    let v = canonicalize::<Rational>(&v).map(|r| to_expr(&r)).unwrap_or(v);
                    (orig.clone(), v)
                })
                .collect();
            let renamed: HashMap<Name, Expr> =
                table.iter().map(|(q, orig)| (q.clone(), values[orig].clone())).collect();
            if let Ok(d) = canonicalize::<Rational>(&(a.clone() - b1.substitute_params(&renamed))) {
                if d.is_zero() {
                    return Some(values);
                }
            }
        }
    }
    None
}

fn pair_seed(a: &Expr, b: &Expr) -> u64 {
    let mut h = std::collections::hash_map::DefaultHasher::new();
    a.to_sexp().hash(&mut h);
    b.to_sexp().hash(&mut h);
    h.finish()
}

/// True when every random parameter map leaves a numeric witness.
fn separated(a: &Expr, b: &Expr, shared: &[Name]) -> bool {
    let (b1, table) = separate(a, b, shared);
    let seed = pair_seed(a, b);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for trial in 0..EQUIVALENCE_TRIALS {
        let map: HashMap<Name, Expr> = table
            .iter()
            .map(|(q, _)| {
                let v = Rational::from_float(sample_value(&mut rng)).unwrap_or_default();
                (q.clone(), Expr::Const(v))
            })
            .collect();
        let diff = a.clone() - b1.substitute_params(&map);
        if !matches!(numeric_witness(&diff, seed.wrapping_add(trial as u64)), ZeroVerdict::WitnessNonzero { .. }) {
            return false;
        }
    }
    true
}

/// Decides whether two parametric families describe the same functions.
/// `shared` lists parameters common to both (PDE coefficients).
pub fn check_equivalence(a: &Expr, b: &Expr, shared: &[Name]) -> Equivalence {
    if let Some(map) = match_direction(a, b, shared) {
        return Equivalence::Equivalent(map);
    }
    if let Some(map) = match_direction(b, a, shared) {
        // express a's parameters in terms of b's
        return Equivalence::Equivalent(map);
    }
    if separated(a, b, shared) && separated(b, a, shared) {
        Equivalence::Distinct
    } else {
        Equivalence::Undecided
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::parse_expr;
    use crate::problem::parse_problem;

    fn p(s: &str) -> Expr {
        parse_expr(s).unwrap()
    }

    const HEAT: &str = "name = heat\nunknown = u(x, t)\npde = u_t - a*u_xx = 0\ncoefficients = a\ntime = t\nic = exp(x)\n";
    const BURGERS: &str = "name = bh\nunknown = u(x, t)\npde = u_t + u*u_x - u_xx - Dxx(u_t + u*u_x) = 0\ntime = t\nic = x + 1\n";

    #[test]
    fn heat_candidates() {
        let heat = parse_problem(HEAT.as_bytes()).unwrap();
        let good = verify_candidate(&heat, &p("exp(x + a*t)"));
        assert_eq!(good.fitness(), 0);
        let bad = verify_candidate(&heat, &p("exp(x + 2*a*t)"));
        assert_eq!(bad.fitness(), 1);
        assert!(matches!(bad.pde_verdict, ZeroVerdict::WitnessNonzero { .. }));
        assert!(bad.ic_pass);
    }

    #[test]
    fn fresh_parameter_is_resolved() {
        let heat = parse_problem(HEAT.as_bytes()).unwrap();
        let ctx = VerifyContext { fresh: vec![name("c")], ..VerifyContext::default() };
        let r = verify_with(&heat, &p("exp(x + c*t)"), &ctx);
        assert!(r.passed());
        assert_eq!(r.resolved[&name("c")], p("a"));
        assert_eq!(r.candidate, p("exp(x + a*t)"));
    }

    #[test]
    fn rational_solution_with_trial_references() {
        let bh = parse_problem(BURGERS.as_bytes()).unwrap();
        let r = verify_candidate(&bh, &p("(B + x)/(A + t)"));
        assert_eq!(r.fitness(), 0);
        assert_eq!(r.ic_refs[&name("A")], Rational::from_integer(1.into()));
        assert_eq!(r.ic_refs[&name("B")], Rational::from_integer(1.into()));
    }

    #[test]
    fn undefined_candidate_fails() {
        let heat = parse_problem(HEAT.as_bytes()).unwrap();
        let r = verify_candidate(&heat, &p("x/(t - t)"));
        assert_eq!(r.fitness(), 1);
        assert!(r.error.is_some());
    }

    #[test]
    fn equivalence_examples() {
        let shared = [name("a")];
        assert!(matches!(
            check_equivalence(&p("exp(x + a*t)"), &p("exp(a*t + x)"), &shared),
            Equivalence::Equivalent(_)
        ));
        assert_eq!(check_equivalence(&p("exp(x + a*t)"), &p("x + a*t"), &shared), Equivalence::Distinct);
        match check_equivalence(&p("(B + x)/(A + t)"), &p("(x + B)/(p + t)"), &[]) {
            Equivalence::Equivalent(m) => {
                assert_eq!(m[&name("p")], p("A"));
                assert_eq!(m[&name("B")], p("B"));
            }
            other => panic!("{other:?}"),
        }
        assert!(matches!(
            check_equivalence(&p("A*exp(x/2 + t/3)"), &p("C*exp(x/2)*exp(t/3)"), &[]),
            Equivalence::Equivalent(_)
        ));
        assert!(matches!(
            check_equivalence(&p("exp(x + A*t)"), &p("exp(x + B*t)"), &[]),
            Equivalence::Equivalent(_)
        ));
    }
}
