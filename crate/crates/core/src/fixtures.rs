//! Executable fixtures: small scenes with hard checks on values and verdicts.
//!
//! Metadata (titles and parameter schemas) lives in the embedded `fixtures.json`; the
//! builders below hold the checks. Every run is deterministic given its parameters.

use crate::error::{Error, Result};
use crate::ext::ExtReal;
use crate::functionals::axioms::{axiom_check, Axiom};
use crate::functionals::{FunctionalSpec, UtilityDoc};
use crate::function::UtilityFn;
use crate::prob::{EventMask, Position};
use crate::recession::{induced_cash_additive, is_risk_functional_induced, recession};
use crate::sampling::Sampler;
use crate::sensitivity::{
    default_candidates, loss_concentration_check, risk_reduction_probe, sll_certify, sll_position, verify_insensitive, Basis,
    CertifyConfig, ConcentrationResult, DomainSpec, Method, PositionVerdict, Status, DEFAULT_MAX_EXP,
};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use std::collections::BTreeMap;
use std::sync::OnceLock;

pub const INDEX_JSON: &str = include_str!("../fixtures.json");

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ParamSchema {
    pub name: String,
    pub default: f64,
    pub min: f64,
    pub max: f64,
    #[serde(default)]
    pub min_inclusive: bool,
    #[serde(default)]
    pub max_inclusive: bool,
    #[serde(default)]
    pub integer: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl ParamSchema {
    fn admits(&self, v: f64) -> bool {
        let lo = if self.min_inclusive { v >= self.min } else { v > self.min };
        let hi = if self.max_inclusive { v <= self.max } else { v < self.max };
        lo && hi && (!self.integer || v.fract() == 0.0)
    }

    fn range(&self) -> String {
        let l = if self.min_inclusive { '[' } else { '(' };
        let r = if self.max_inclusive { ']' } else { ')' };
        format!("{l}{}, {}{r}{}", self.min, self.max, if self.integer { " (integer)" } else { "" })
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FixtureInfo {
    pub id: String,
    pub title: String,
    pub topic: String,
    pub params: Vec<ParamSchema>,
}

#[derive(Deserialize)]
struct Index {
    fixtures: Vec<FixtureInfo>,
}

/// All registered fixtures, in index order.
pub fn index() -> &'static [FixtureInfo] {
    static INDEX: OnceLock<Vec<FixtureInfo>> = OnceLock::new();
    INDEX.get_or_init(|| serde_json::from_str::<Index>(INDEX_JSON).expect("embedded fixture index parses").fixtures)
}

pub fn info(id: &str) -> Result<&'static FixtureInfo> {
    index().iter().find(|f| f.id == id).ok_or_else(|| Error::UnknownFixture(id.into()))
}

/// One named predicate with the value it was evaluated on.
#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub holds: bool,
    pub computed: Value,
    pub expected: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct FixtureReport {
    pub id: String,
    pub title: String,
    pub params: BTreeMap<String, Value>,
    pub passed: bool,
    pub first_failure: Option<String>,
    pub checks: Vec<Check>,
}

struct Params(BTreeMap<String, f64>);

impl Params {
    fn get(&self, name: &str) -> f64 {
        self.0[name]
    }
}

fn resolve(info: &FixtureInfo, overrides: &Value) -> Result<Params> {
    let given = match overrides {
        Value::Null => serde_json::Map::new(),
        Value::Object(m) => m.clone(),
        _ => return Err(Error::Parameter("fixture parameters must be a JSON object".into())),
    };
    if let Some(k) = given.keys().find(|k| !info.params.iter().any(|p| &p.name == *k)) {
        let known: Vec<_> = info.params.iter().map(|p| p.name.as_str()).collect();
        return Err(Error::Parameter(format!("fixture `{}` has no parameter `{k}` (known: {})", info.id, known.join(", "))));
    }
    let mut out = BTreeMap::new();
    for p in &info.params {
        let v = match given.get(&p.name) {
            None => p.default,
            Some(v) => v.as_f64().ok_or_else(|| Error::Parameter(format!("parameter `{}` must be a number", p.name)))?,
        };
        if !p.admits(v) {
            return Err(Error::Parameter(format!("parameter `{}` = {v} outside {}", p.name, p.range())));
        }
        out.insert(p.name.clone(), v);
    }
    Ok(Params(out))
}

fn require(cond: bool, msg: &str) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::Parameter(msg.into()))
    }
}

fn num(v: impl Into<ExtReal>) -> Value {
    serde_json::to_value(v.into()).expect("extended reals serialize")
}

#[derive(Default)]
struct Checks(Vec<Check>);

impl Checks {
    fn push(&mut self, name: &str, holds: bool, computed: Value, expected: impl Into<String>) {
        self.0.push(Check { name: name.into(), holds, computed, expected: expected.into() });
    }

    fn close(&mut self, name: &str, computed: f64, target: f64, tol: f64) {
        self.push(name, (computed - target).abs() <= tol, num(computed), format!("= {target} ± {tol:e}"));
    }

    fn exact(&mut self, name: &str, computed: f64, target: f64) {
        self.push(name, computed == target, num(computed), format!("= {target} exactly"));
    }

    fn gt(&mut self, name: &str, computed: impl Into<ExtReal>, bound: f64) {
        let c = computed.into();
        self.push(name, c > ExtReal::Finite(bound), num(c), format!("> {bound}"));
    }

    fn le(&mut self, name: &str, computed: impl Into<ExtReal>, bound: f64) {
        let c = computed.into();
        self.push(name, c <= ExtReal::Finite(bound), num(c), format!("<= {bound}"));
    }

    fn status(&mut self, name: &str, got: Status, want: Status) {
        self.push(name, got == want, json!(got), format!("{}", serde_json::to_value(want).expect("status serializes")));
    }
}

type Builder = fn(&Params, &mut Checks) -> Result<()>;

fn builder(id: &str) -> Option<Builder> {
    Some(match id {
        "var-insensitive" => var_insensitive,
        "es-insensitive" => es_insensitive,
        "entropic-sll" => entropic_sll,
        "recession-risk" => recession_risk,
        "recession-utility" => recession_utility,
        "var-reduction" => var_reduction,
        "star-utility-probe" => star_utility_probe,
        "induced-fails" => induced_fails,
        "var-sure-sensitive" => var_sure_sensitive,
        "sqrt-sshape" => sqrt_sshape,
        "pure-not-expected" => pure_not_expected,
        "es-strict-bound" => es_strict_bound,
        "concentration-counter" => concentration_counter,
        "concentration-linear" => concentration_linear,
        "power-sshape" => power_sshape,
        "oce-gap" => oce_gap,
        "oce-witness-a" => oce_witness_a,
        "oce-witness-b" => oce_witness_b,
        _ => return None,
    })
}

/// Runs one fixture. `params` is a JSON object overriding defaults (or `null`). Unknown ids
/// and parameters outside the validity region are errors; a failing check is not.
pub fn run_fixture(id: &str, params: &Value) -> Result<FixtureReport> {
    let info = info(id)?;
    let build = builder(id).ok_or_else(|| Error::UnknownFixture(id.into()))?;
    let p = resolve(info, params)?;
    let mut checks = Checks::default();
    match build(&p, &mut checks) {
        Ok(()) => {}
        Err(e @ Error::Parameter(_)) if checks.0.is_empty() => return Err(e),
        Err(e) => checks.push("evaluation", false, Value::String(e.to_string()), "no error"),
    }
    let checks = checks.0;
    let first_failure = checks.iter().find(|c| !c.holds).map(|c| format!("{}: computed {}, expected {}", c.name, c.computed, c.expected));
    let params = info
        .params
        .iter()
        .map(|s| {
            let v = p.get(&s.name);
            (s.name.clone(), if s.integer { json!(v as i64) } else { json!(v) })
        })
        .collect();
    Ok(FixtureReport { id: info.id.clone(), title: info.title.clone(), params, passed: first_failure.is_none(), first_failure, checks })
}

/// Every registered fixture at its defaults, in index order.
pub fn run_all() -> Result<Vec<FixtureReport>> {
    index().par_iter().map(|f| run_fixture(&f.id, &Value::Null)).collect()
}

// ---------------------------------------------------------------------------------------

const MAX_EXP: i32 = DEFAULT_MAX_EXP;

fn binary(p: f64, on_a: f64, off_a: f64) -> Result<Position> {
    Position::from_atoms(&[(p, on_a), (1.0 - p, off_a)])
}

fn cfg() -> CertifyConfig {
    CertifyConfig { seed: 42, trials: 40, ..Default::default() }
}

fn lambdas(ks: std::ops::RangeInclusive<i32>) -> impl Iterator<Item = f64> {
    ks.map(|k| 2f64.powi(k))
}

fn util(preset: &str) -> UtilityDoc {
    UtilityDoc::Preset { preset: preset.into() }
}

fn is_insensitive(v: &PositionVerdict, basis: Basis) -> bool {
    matches!(v, PositionVerdict::CertifiedInsensitive { basis: b, .. } if *b == basis)
}

fn var_insensitive(p: &Params, c: &mut Checks) -> Result<()> {
    let (alpha, pa) = (p.get("alpha"), p.get("p_a"));
    require(pa <= alpha, "p_a must not exceed alpha")?;
    let spec = FunctionalSpec::var(alpha)?;
    let x = binary(pa, -1.0, 0.0)?;
    c.gt("loss_probability", x.prob_negative(), 0.0);
    c.exact("var_of_minus_indicator", spec.value(&x)?.to_f64(), 0.0);
    let mut worst = 0f64;
    for l in lambdas(0..=MAX_EXP) {
        worst = worst.max(spec.value(&x.scale(l))?.to_f64().abs());
    }
    c.exact("var_along_ray_max_abs", worst, 0.0);
    let v = sll_position(&spec, &x, MAX_EXP)?;
    c.push("position_verdict", is_insensitive(&v, Basis::PositiveHomogeneity), json!(v), "certified insensitive by homogeneity");
    Ok(())
}

fn es_insensitive(p: &Params, c: &mut Checks) -> Result<()> {
    let (alpha, pa, n) = (p.get("alpha"), p.get("p_a"), p.get("n"));
    require(pa < alpha, "p_a must be below alpha")?;
    require(n >= pa / (alpha - pa) * (1.0 - 1e-12), "n must be at least p_a/(alpha - p_a)")?;
    let spec = FunctionalSpec::es(alpha)?;
    let x = binary(pa, -1.0, n)?;
    let formula = (pa - n * (alpha - pa)) / alpha;
    let es = spec.value(&x)?.to_f64();
    c.gt("loss_probability", x.prob_negative(), 0.0);
    c.close("es_matches_formula", es, formula, 1e-9);
    c.le("formula_nonpositive", formula, 0.0);
    c.le("es_nonpositive", es, 1e-12);
    let v = sll_position(&spec, &x, MAX_EXP)?;
    c.push("position_verdict", is_insensitive(&v, Basis::PositiveHomogeneity), json!(v), "certified insensitive by homogeneity");
    Ok(())
}

fn entropic_sll(p: &Params, c: &mut Checks) -> Result<()> {
    let pa = p.get("p_a");
    let eu = FunctionalSpec::expected_utility(util("exp:1"))?;
    let ent = FunctionalSpec::entropic(1.0)?;
    let y = binary(pa, 1.0, -1.0 / 3.0)?;
    let closed = 1.0 - pa * (-1f64).exp() - (1.0 - pa) * (1f64 / 3.0).exp();
    let v = eu.value(&y)?.to_f64();
    c.close("eu_closed_form", v, closed, 1e-10);
    c.gt("eu_positive_despite_loss", v, 0.0);
    c.le("entropic_negative_despite_loss", ent.value(&y)?, 0.0);
    let mut prev = f64::INFINITY;
    let mut decreasing = true;
    for l in lambdas(2..=10) {
        let e = eu.value(&y.scale(l))?.to_f64();
        decreasing &= e < prev;
        prev = e;
    }
    c.push("eu_decreasing_along_ray", decreasing, num(prev), "strictly decreasing for lambda = 2^2..2^10");
    c.le("eu_at_2^10", prev, -1e6);
    let v = sll_position(&eu, &y, MAX_EXP)?;
    c.push("eu_position_verdict", matches!(v, PositionVerdict::CertifiedSensitive { .. }), json!(v), "certified sensitive");
    let probes = [y.clone(), y.scale(2.0), y.scale(8.0), binary(0.3, -2.0, 5.0)?, binary(0.7, 1.5, -0.25)?];
    let mut dev = 0f64;
    for x in &probes {
        let r = ent.value(x)?.to_f64();
        let via_eu = (1.0 - eu.value(x)?.to_f64()).ln();
        dev = dev.max((r - via_eu).abs() / r.abs().max(1.0));
    }
    c.le("entropic_equals_log_one_minus_eu", dev, 1e-10);
    let v = sll_certify(&ent, &DomainSpec::Full, &cfg())?;
    c.push("entropic_full_verdict", v.status == Status::Sensitive && v.method == Method::TailRatio, json!([v.status, v.method]), "sensitive via tail_ratio");
    Ok(())
}

fn recession_risk(p: &Params, c: &mut Checks) -> Result<()> {
    let (alpha, pa) = (p.get("alpha"), p.get("p_a"));
    require(pa < alpha, "p_a must be below alpha")?;
    let spec = FunctionalSpec::custom("min-worst-case-var", json!({ "alpha": alpha }))?;
    let x = binary(pa, -1.0, 1.0)?;
    let mut dev = 0f64;
    for l in lambdas(-6..=12) {
        let r = spec.value(&x.scale(l))?.to_f64();
        dev = dev.max((r - l.min(1.0 - l)).abs() / l.max(1.0));
    }
    c.le("ray_equals_min_lambda_one_minus_lambda", dev, 1e-12);
    let mut worst = f64::NEG_INFINITY;
    for l in lambdas(0..=MAX_EXP) {
        worst = worst.max(spec.value(&x.scale(l))?.to_f64());
    }
    c.le("nonpositive_from_lambda_one", worst, 0.0);
    let (r1, r2) = (spec.value(&x)?.to_f64(), spec.value(&x.scale(2.0))?.to_f64());
    c.close("r_of_2x", r2, -1.0, 1e-12);
    c.close("twice_r_of_x", 2.0 * r1, 0.0, 1e-12);
    c.push("not_star_shaped", r2 < 2.0 * r1, json!([r2, 2.0 * r1]), "R(2X) < 2R(X)");
    let rec = recession(&spec, &x)?;
    c.close("recession_equals_ess_sup_neg", rec.value.to_f64(), x.ess_sup_neg(), 1e-12);
    let small = 2f64.powi(-20);
    c.close("ratio_at_small_lambda", spec.value(&x.scale(small))?.to_f64() / small, 1.0, 1e-12);
    let v = sll_position(&spec, &x, MAX_EXP)?;
    c.push("position_verdict", is_insensitive(&v, Basis::RayIdentity), json!(v), "certified insensitive by ray identity");
    // Along the pure loss -1_A the same functional is min{lambda, 1} > 0: that ray is not a witness.
    let m = binary(pa, -1.0, 0.0)?;
    let mut dev = 0f64;
    for l in lambdas(-6..=MAX_EXP) {
        dev = dev.max((spec.value(&m.scale(l))?.to_f64() - l.min(1.0)).abs());
    }
    c.le("minus_indicator_ray_is_min_lambda_one", dev, 1e-12);
    let axioms = axiom_check(&spec, 20, 42);
    c.push("axiom_check_refutes_star_shape", !axioms.get(Axiom::StarShaped).holds, json!(axioms.get(Axiom::StarShaped)), "star-shaped check fails");
    Ok(())
}

fn recession_utility(p: &Params, c: &mut Checks) -> Result<()> {
    let pa = p.get("p_a");
    let spec = FunctionalSpec::custom("max-loss-mean", Value::Null)?;
    let x = binary(pa, -1.0, 1.0)?;
    let mut dev = 0f64;
    for l in lambdas(-6..=12) {
        let u = spec.value(&x.scale(l))?.to_f64();
        dev = dev.max((u - (-l * pa).max(l * (1.0 - 2.0 * pa) - 1.0)).abs() / l.max(1.0));
    }
    c.le("ray_closed_form", dev, 1e-12);
    let l0 = 1.0 / (1.0 - 2.0 * pa);
    let k0 = l0.log2().ceil() as i32;
    let mut worst = f64::INFINITY;
    for l in lambdas(k0..=MAX_EXP) {
        worst = worst.min(spec.value(&x.scale(l))?.to_f64());
    }
    c.gt("acceptable_beyond_threshold", worst + 1e-12, 0.0);
    let (u1, u2) = (spec.value(&x)?.to_f64(), spec.value(&x.scale(2.0))?.to_f64());
    c.close("u_of_2x", u2, 1.0 - 4.0 * pa, 1e-12);
    c.close("twice_u_of_x", 2.0 * u1, -2.0 * pa, 1e-12);
    c.push("not_star_shaped", u2 > 2.0 * u1, json!([u2, 2.0 * u1]), "U(2X) > 2U(X)");
    let rec = recession(&spec, &x)?;
    c.close("recession_equals_mean_loss", rec.value.to_f64(), -pa, 1e-12);
    let v = sll_position(&spec, &x, MAX_EXP)?;
    c.push("position_verdict", is_insensitive(&v, Basis::RayIdentity), json!(v), "certified insensitive by ray identity");
    Ok(())
}

fn var_reduction(p: &Params, c: &mut Checks) -> Result<()> {
    let (alpha, pl) = (p.get("alpha"), p.get("p_loss"));
    require(pl <= alpha, "p_loss must not exceed alpha")?;
    require(alpha + pl / 2.0 < 1.0, "need alpha + p_loss/2 < 1")?;
    let spec = FunctionalSpec::var(alpha)?;
    let q = alpha - pl / 2.0;
    let space = crate::prob::FiniteSpace::new(vec![pl, q, 1.0 - pl - q])?;
    let x = Position::new(space.clone(), vec![-1.0, 1.0, 1.0])?;
    let a = EventMask::from_indices(&space, &[1])?;
    let y = Position::indicator(space, &a)?.scale(-(1.0 + x.sup_norm()));
    c.exact("var_of_y", spec.value(&y)?.to_f64(), 0.0);
    c.gt("var_of_x_plus_y", spec.value(&x.add(&y)?)?, 0.0);
    let big = binary(((1.0 + alpha) / 2.0).min(2.0 * alpha), -1.0, 1.0)?;
    c.gt("frequent_loss_needs_no_y", spec.value(&big)?, 0.0);
    let probe = risk_reduction_probe(&spec, &x, &default_candidates(&x))?;
    c.push("probe_finds_riskier_position", probe.positive, num(probe.best_gap), "> 0");
    let v = sll_position(&spec, &x, MAX_EXP)?;
    c.push("var_still_insensitive_at_x", is_insensitive(&v, Basis::PositiveHomogeneity), json!(v), "certified insensitive by homogeneity");
    Ok(())
}

fn star_utility_probe(p: &Params, c: &mut Checks) -> Result<()> {
    let (pl, pz, loss, gain) = (p.get("p_loss"), p.get("p_zero"), p.get("loss"), p.get("gain"));
    require(pl + pz < 1.0, "need p_loss + p_zero < 1")?;
    let pp = 1.0 - pl - pz;
    let mut atoms = vec![(pl, -loss)];
    if pz > 0.0 {
        atoms.push((pz, 0.0));
    }
    atoms.push((pp, gain));
    let x = Position::from_atoms(&atoms)?;
    let spec = FunctionalSpec::expected_utility(util("truncated-exp"))?;
    let (eps, norm) = (loss, x.sup_norm());
    let lead = pl * (-norm).exp() * (eps.exp() - 1.0);
    let tail = pp * (1.0 - (-norm).exp());
    let bound = |n: f64| lead - tail * (-n).exp();
    let n = ((tail / lead).ln().floor() + 1.0).max(1.0);
    c.gt("bound_positive_at_threshold", bound(n), 0.0);
    c.push("threshold_is_minimal", n == 1.0 || bound(n - 1.0) <= 0.0, num(n), "smallest n with positive bound");
    let yn = x.map(|v| norm + if v > 0.0 { n - v } else { 0.0 });
    let gap = spec.value(&yn)?.to_f64() - spec.value(&x.add(&yn)?)?.to_f64();
    c.push("utility_drop_at_least_bound", gap >= bound(n) - 1e-12, num(gap), format!(">= {}", bound(n)));
    let mut worst = f64::INFINITY;
    for l in lambdas(0..=MAX_EXP) {
        worst = worst.min(spec.value(&x.scale(l))?.to_f64());
    }
    c.push("ray_never_negative", worst >= 0.0, num(worst), ">= 0");
    let v = sll_certify(&spec, &DomainSpec::Full, &cfg())?;
    c.status("full_verdict", v.status, Status::Insensitive);
    let probe = risk_reduction_probe(&spec, &x, &default_candidates(&x))?;
    c.push("probe_finds_utility_drop", probe.positive, num(probe.best_gap), "> 0");
    Ok(())
}

fn induced_fails(p: &Params, c: &mut Checks) -> Result<()> {
    let pa = p.get("p_a");
    let spec = FunctionalSpec::custom("event-barrier", json!({ "p_a": pa }))?;
    let space = spec.fixed_space().expect("event functionals carry their space").clone();
    let x = Position::new(space.clone(), vec![0.0, -1.0])?;
    c.le("x_in_domain", x.outcomes()[0] * pa, 0.0);
    let mut all_inf = true;
    let mut dev = 0f64;
    for l in lambdas(0..=MAX_EXP) {
        all_inf &= spec.value(&x.scale(l))? == ExtReal::PosInf;
        dev = dev.max(induced_cash_additive(&spec, &x.scale(l)).to_f64().abs() / l);
    }
    c.push("r_infinite_along_ray", all_inf, json!(all_inf), "R(lambda X) = inf");
    c.le("induced_zero_along_ray", dev, 1e-9);
    let z = Position::new(space, vec![2.0, -3.0])?;
    c.close("induced_is_conditional_mean", induced_cash_additive(&spec, &z).to_f64(), -2.0, 1e-9);
    let check = is_risk_functional_induced(&spec, 50, 42)?;
    c.push("induced_is_risk_functional", check.holds, json!(check.holds), "true");
    Ok(())
}

fn var_sure_sensitive(p: &Params, c: &mut Checks) -> Result<()> {
    let (alpha, pa) = (p.get("alpha"), p.get("p_a"));
    require(pa < alpha, "p_a must be below alpha")?;
    let spec = FunctionalSpec::var(alpha)?;
    c.exact("var_of_pure_loss", spec.value(&binary(pa, -1.0, 0.0)?)?.to_f64(), 0.0);
    let sampler = Sampler::new(42);
    let mut worst = f64::INFINITY;
    for i in 0..100 {
        let x = sampler.sample(i, &DomainSpec::SureLosses)?;
        worst = worst.min(spec.value(&x)?.to_f64() + x.max());
    }
    c.push("var_at_least_minus_max_on_sure_losses", worst >= 0.0, num(worst), "VaR(X) + max X >= 0");
    for (d, want) in [(DomainSpec::SureLosses, Status::Sensitive), (DomainSpec::PureLosses, Status::Insensitive)] {
        let v = sll_certify(&spec, &d, &cfg())?;
        c.status(&format!("{}_verdict", d.name()), v.status, want);
    }
    Ok(())
}

fn sqrt_sshape(p: &Params, c: &mut Checks) -> Result<()> {
    let (a, b, pb) = (p.get("a"), p.get("b"), p.get("p"));
    let q = 0.5 - pb;
    let x = Position::from_atoms(&[(pb, -b), (q, -a), (q, a), (pb, b)])?;
    let spec = FunctionalSpec::expected_utility(util("sqrt-s"))?;
    c.close("mean_zero", x.expectation(), 0.0, 1e-12);
    let mut worst = 0f64;
    for l in lambdas(-10..=MAX_EXP) {
        worst = worst.max(spec.value(&x.scale(l))?.to_f64().abs());
    }
    c.exact("eu_along_ray_max_abs", worst, 0.0);
    for (d, want) in [(DomainSpec::PureLosses, Status::Sensitive), (DomainSpec::ExpectedLosses, Status::Insensitive)] {
        let v = sll_certify(&spec, &d, &cfg())?;
        c.status(&format!("{}_verdict", d.name()), v.status, want);
    }
    Ok(())
}

fn pure_not_expected(p: &Params, c: &mut Checks) -> Result<()> {
    let pa = p.get("p_a");
    let spec = FunctionalSpec::custom("event-weighted-mean", json!({ "p_a": pa }))?;
    let space = spec.fixed_space().expect("event functionals carry their space").clone();
    let y = Position::new(space, vec![-1.0, pa / (1.0 - pa)])?;
    let r = spec.value(&y)?.to_f64();
    c.close("r_of_y", r, -1.0, 1e-12);
    c.close("expected_loss_of_y", -y.expectation(), 0.0, 1e-12);
    let rec = recession(&spec, &y)?;
    c.close("recession_equals_value", rec.value.to_f64(), r, 1e-12);
    c.push("weak_bound_fails", rec.value.to_f64() < -y.expectation(), json!([rec.value, -y.expectation()]), "R^inf(Y) < E[-Y]");
    for (d, want) in [(DomainSpec::PureLosses, Status::Sensitive), (DomainSpec::ExpectedLosses, Status::Insensitive)] {
        let v = sll_certify(&spec, &d, &cfg())?;
        c.status(&format!("{}_verdict", d.name()), v.status, want);
    }
    let axioms = axiom_check(&spec, 50, 42);
    for ax in [Axiom::PosHomogeneous, Axiom::Convex, Axiom::CashAdditive] {
        let res = axioms.get(ax);
        c.push(&format!("axiom_{}", serde_json::to_value(ax).expect("axiom names serialize").as_str().unwrap_or("?")), res.holds, num(res.max_deviation), "holds");
    }
    Ok(())
}

fn es_strict_bound(p: &Params, c: &mut Checks) -> Result<()> {
    let (alpha, seed, trials) = (p.get("alpha"), p.get("seed") as u64, p.get("trials") as u64);
    let sampler = Sampler::new(seed);
    let (mut lower, mut upper, mut strict, mut margin, mut quad) = (f64::INFINITY, f64::INFINITY, f64::INFINITY, f64::INFINITY, 0f64);
    const GRID: usize = 20_000;
    for i in 0..trials {
        let x = sampler.nonconstant(i);
        let (es, var, mean_loss) = (x.es(alpha)?, x.var(alpha)?, -x.expectation());
        let mid = alpha * es + (1.0 - alpha) * var;
        let scale = x.sup_norm().max(1.0);
        lower = lower.min((mid - mean_loss) / scale);
        upper = upper.min((es - mid) / scale);
        strict = strict.min((mid - mean_loss).max(es - mid));
        margin = margin.min(es - mean_loss);
        // Midpoint rule for the quantile integral; each atom boundary costs at most one cell.
        let h = 1.0 / GRID as f64;
        let integral: f64 = (0..GRID).map(|j| x.var_level((j as f64 + 0.5) * h)).sum::<Result<f64>>()? * h;
        let budget = (x.max() - x.min()) * h * x.len() as f64 + 1e-12;
        quad = quad.max((integral - mean_loss).abs() / budget);
    }
    c.le("mean_quantile_integral_within_budget", quad, 1.0);
    c.gt("first_inequality", lower, -1e-12);
    c.gt("second_inequality", upper, -1e-12);
    c.gt("one_inequality_strict", strict, 0.0);
    c.gt("es_minus_expected_loss", margin, 1e-9);
    let v = sll_certify(&FunctionalSpec::es(alpha)?, &DomainSpec::ExpectedLosses, &cfg())?;
    c.push(
        "expected_verdict",
        v.status == Status::Sensitive && v.method == Method::StrictExpectationBound,
        json!([v.status, v.method]),
        "sensitive via strict_expectation_bound",
    );
    Ok(())
}

fn concentration_counter(p: &Params, c: &mut Checks) -> Result<()> {
    let pa = p.get("p_a");
    let spec = FunctionalSpec::custom("event-concentration", json!({ "p_a": pa }))?;
    let space = spec.fixed_space().expect("event functionals carry their space").clone();
    let x = Position::new(space.clone(), vec![1.0, 0.0])?;
    let ac = EventMask::from_indices(&space, &[1])?;
    let mut worst = 0f64;
    for l in lambdas(-10..=MAX_EXP) {
        worst = worst.max(spec.value(&x.minus_indicator(l, &ac)?)?.to_f64().abs());
    }
    c.exact("concentration_ray_max_abs", worst, 0.0);
    let res = loss_concentration_check(&spec, &x, &ac, &cfg())?;
    c.push("concentration_counterexample", matches!(res, ConcentrationResult::Counterexample { .. }), json!(res), "counterexample");
    let grid = [0.0, 0.5, 1.0, 3.0];
    let mut worst = f64::INFINITY;
    for &u in &grid {
        for &v in &grid {
            if u == 0.0 && v == 0.0 {
                continue;
            }
            let y = Position::new(space.clone(), vec![-u, -v])?;
            for l in lambdas(-4..=MAX_EXP) {
                let r = spec.value(&y.scale(l))?.to_f64();
                worst = worst.min(r - (l * u.max(v)).min(1.0));
            }
        }
    }
    c.push("pure_losses_bounded_below", worst >= 0.0, num(worst), "R(X) >= min{ess sup(-X), 1}");
    let z = Position::new(space, vec![0.5, -2.0])?;
    let (r1, r2) = (spec.value(&z)?.to_f64(), spec.value(&z.scale(2.0))?.to_f64());
    c.push("not_star_shaped", r2 < 2.0 * r1, json!([r2, 2.0 * r1]), "R(2Z) < 2R(Z)");
    Ok(())
}

fn concentration_linear(p: &Params, c: &mut Checks) -> Result<()> {
    let (seed, trials) = (p.get("seed") as u64, p.get("trials") as u64);
    let spec = FunctionalSpec::es(1.0)?;
    let sampler = Sampler::new(seed);
    let (mut dev, mut sensitive, mut zero_mean) = (0f64, true, 0f64);
    for i in 0..trials {
        let x = sampler.nonconstant(i);
        let a = EventMask::from_indices(x.space(), &[0])?;
        let pa = x.space().prob(&a);
        for l in [0.5, 1.0, 10.0, 1000.0] {
            let r = spec.value(&x.minus_indicator(l, &a)?)?.to_f64();
            dev = dev.max((r - (-x.expectation() + l * pa)).abs() / (l + x.sup_norm()));
        }
        sensitive &= matches!(loss_concentration_check(&spec, &x, &a, &cfg())?, ConcentrationResult::ConcentrationSensitive { .. });
        let centred = x.shift(-x.expectation());
        for l in lambdas(0..=MAX_EXP) {
            zero_mean = zero_mean.max(spec.value(&centred.scale(l))?.to_f64().abs() / (l * centred.sup_norm()));
        }
    }
    c.le("concentration_closed_form", dev, 1e-12);
    c.push("concentration_sensitive", sensitive, json!(sensitive), "every sampled (X, A)");
    c.le("zero_mean_ray_stays_at_zero", zero_mean, 1e-12);
    let v = sll_certify(&spec, &DomainSpec::ExpectedLosses, &cfg())?;
    c.status("expected_verdict", v.status, Status::Insensitive);
    Ok(())
}

fn power_sshape(p: &Params, c: &mut Checks) -> Result<()> {
    let (alpha, beta, pa) = (p.get("alpha"), p.get("beta"), p.get("p_a"));
    let u = format!("power-s:{alpha},{beta}");
    let want = if alpha < beta { Status::Sensitive } else { Status::Insensitive };
    let specs = [
        FunctionalSpec::expected_utility(util(&u))?,
        FunctionalSpec::classical_ce(util(&u))?,
        FunctionalSpec::umean_ce(util(&u))?,
    ];
    let mut statuses = Vec::new();
    for s in &specs {
        statuses.push(sll_certify(s, &DomainSpec::Full, &cfg())?.status);
    }
    c.push("eu_ce_umean_agree", statuses.iter().all(|s| *s == statuses[0]), json!(statuses), "identical verdicts");
    c.status("verdict", statuses[0], want);
    let x = binary(pa, -1.0, 1.0)?;
    let eu = &specs[0];
    if alpha < beta {
        let lstar = ((1.0 - pa) / pa).powf(1.0 / (beta - alpha));
        let (below, above) = (eu.value(&x.scale(lstar / 2.0))?, eu.value(&x.scale(lstar * 2.0))?);
        c.push("sign_change_at_threshold", below > ExtReal::ZERO && above < ExtReal::ZERO, json!([lstar, below, above]), "E_u > 0 below, < 0 above");
    } else {
        let mut worst = f64::INFINITY;
        for l in lambdas(0..=MAX_EXP) {
            worst = worst.min(eu.value(&x.scale(l))?.to_f64());
        }
        c.push("ray_stays_acceptable", worst >= 0.0, num(worst), ">= 0");
    }
    Ok(())
}

fn oce_gap(p: &Params, c: &mut Checks) -> Result<()> {
    let (alpha, beta, seed, trials) = (p.get("alpha"), p.get("beta"), p.get("seed") as u64, p.get("trials") as u64);
    let name = format!("oce-remark:{alpha},{beta}");
    let u = UtilityFn::preset(&name)?;
    let oce = FunctionalSpec::oce(util(&name))?;
    let eu = FunctionalSpec::expected_utility(util(&name))?;
    c.push("loss_gain_ratio", u.tails().loss_gain_ratio() == f64::NEG_INFINITY, num(u.tails().loss_gain_ratio()), "-inf");
    c.close("loss_slope", u.tails().slope_minus(), beta, 1e-12);
    c.close("gain_slope", u.tails().slope_plus(), 0.0, 1e-12);
    let v = sll_certify(&oce, &DomainSpec::Full, &cfg())?;
    c.push("oce_verdict", v.status == Status::Insensitive && v.certified, json!([v.status, v.certified]), "certified insensitive");
    c.status("eu_verdict", sll_certify(&eu, &DomainSpec::Full, &cfg())?.status, Status::Sensitive);
    let pa = 1.0 / (2.0 * (beta + 1.0));
    let x = binary(pa, -1.0, 1.0)?;
    let mut slack = f64::INFINITY;
    for l in lambdas(0..=20) {
        slack = slack.min(oce.value(&x.scale(l))?.to_f64() - l / (beta + 1.0));
    }
    c.gt("oce_along_witness_at_least_lower_bound", slack, -1e-9);
    let first_negative = (0..=MAX_EXP).find(|&k| eu.value(&x.scale(2f64.powi(k))).map(|v| v < ExtReal::ZERO).unwrap_or(false));
    c.push("eu_eventually_negative", first_negative.is_some(), json!(first_negative), "some k <= 40");
    let sampler = Sampler::new(seed);
    let mut worst = f64::INFINITY;
    for i in 0..trials {
        let y = sampler.raw(i);
        let o = oce.value(&y)?.to_f64();
        worst = worst.min(y.expectation() - o).min(o - eu.value(&y)?.to_f64());
    }
    c.gt("sandwich_mean_oce_eu", worst, -1e-8);
    Ok(())
}

fn oce_witness_a(p: &Params, c: &mut Checks) -> Result<()> {
    let (beta, shrink) = (p.get("beta"), p.get("shrink"));
    let name = format!("oce-remark:0.5,{beta}");
    let u = UtilityFn::preset(&name)?;
    let oce = FunctionalSpec::oce(util(&name))?;
    let pa = shrink / (2.0 * (beta + 1.0));
    let x = binary(pa, -1.0, 1.0)?;
    let (mut gap, mut floor) = (f64::INFINITY, f64::INFINITY);
    for l in lambdas(0..=20) {
        let o = oce.value(&x.scale(l))?.to_f64();
        let bound = l + pa * u.eval(-2.0 * l);
        gap = gap.min(o - bound);
        floor = floor.min(bound);
    }
    c.gt("oce_above_eta_lambda_bound", gap, -1e-9);
    c.gt("bound_nonnegative", floor, -1e-12);
    let s = verify_insensitive(&oce, &x, MAX_EXP);
    c.push("witness_reverified", s.is_some(), json!(s.map(|r| r.lambdas.len())), "r(2^k X) <= 0 from k0 <= 20 on");
    Ok(())
}

fn oce_witness_b(p: &Params, c: &mut Checks) -> Result<()> {
    let pb = p.get("p_b");
    let name = "linear-gain-quadratic-loss";
    let u = UtilityFn::preset(name)?;
    let b = u.tails().slope_plus();
    c.close("gain_slope", b, 0.5, 1e-12);
    require(pb >= 2.0 * b / 3.0, "p_b must be at least 2b/3")?;
    let oce = FunctionalSpec::oce(util(name))?;
    let x = binary(pb, 2.0 / (b * b) - 1.0, -1.0)?;
    let (mut gap, mut floor) = (f64::INFINITY, f64::INFINITY);
    for l in lambdas(0..=20) {
        let o = oce.value(&x.scale(l))?.to_f64();
        let bound = -l + pb * u.eval(l * 2.0 / (b * b));
        gap = gap.min(o - bound);
        floor = floor.min(bound);
    }
    c.gt("oce_above_eta_minus_lambda_bound", gap, -1e-9);
    c.gt("bound_nonnegative", floor, -1e-12);
    let s = verify_insensitive(&oce, &x, MAX_EXP);
    c.push("witness_reverified", s.is_some(), json!(s.map(|r| r.lambdas.len())), "r(2^k X) <= 0 from k0 <= 20 on");
    let eu = FunctionalSpec::expected_utility(util(name))?;
    c.status("eu_verdict", sll_certify(&eu, &DomainSpec::Full, &cfg())?.status, Status::Sensitive);
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn index_and_builders_agree() {
        for f in index() {
            assert!(builder(&f.id).is_some(), "{} has no builder", f.id);
            for p in &f.params {
                assert!(p.admits(p.default), "{}: default of {} outside its range", f.id, p.name);
            }
        }
        assert_eq!(index().len(), 18);
    }

    #[test]
    fn rejects_unknown_ids_and_parameters() {
        assert_eq!(run_fixture("nope", &Value::Null).unwrap_err(), Error::UnknownFixture("nope".into()));
        assert!(matches!(run_fixture("var-insensitive", &json!({"beta": 1})), Err(Error::Parameter(_))));
        assert!(matches!(run_fixture("var-insensitive", &json!({"alpha": 1.5})), Err(Error::Parameter(_))));
        assert!(matches!(run_fixture("var-insensitive", &json!({"p_a": 0.2})), Err(Error::Parameter(_))));
    }
}
