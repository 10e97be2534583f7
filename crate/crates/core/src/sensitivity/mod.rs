//! Certification and refutation of sensitivity to (large) losses, globally and on the
//! localized domains of sure, pure and expected losses.
//!
//! Sampled conclusions are labelled as such: only closed-form criteria, re-verified
//! witnesses and single-ray certificates set `certified`.

mod concentration;
mod domain;
mod position;
mod rules;

pub use concentration::{
    default_candidates, loss_concentration_check, risk_reduction_probe, ConcentrationBasis, ConcentrationResult, ProbeResult,
};
pub use domain::{DomainPredicate, DomainSpec};
pub use position::{sll_position, verify_insensitive, Basis, PositionVerdict, RaySample, DEFAULT_MAX_EXP, POS_TOL};

use crate::error::Result;
use crate::ext::ExtReal;
use crate::functionals::{FunctionalSpec, Kind, Variant};
use crate::io::position_json;
use crate::prob::Position;
use crate::recession::{recession, RecessionMode};
use crate::sampling::Sampler;
use position::is_positive;
use rayon::prelude::*;
use rules::Rule;
use serde::Serialize;
use serde_json::Value;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Sensitive,
    Insensitive,
    Inconclusive,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    /// Cash-additive star-shaped functionals on cash-stable domains: sensitive iff the
    /// recession functional is `ess sup(−X)`.
    TheoremCashAdditive,
    /// Per-ray certificates for star-shaped (or positively homogeneous) functionals.
    TheoremStarShaped,
    /// Loss tail versus gain tail of the utility or loss function.
    TailRatio,
    /// Slopes of `u` at `±∞` for optimized certainty equivalents.
    OceAsymptotic,
    /// `r(X) > E[−X]` for nonconstant `X`.
    StrictExpectationBound,
    /// `r(X) ≥ E[−X]`, which is positive on pure losses.
    ExpectationBound,
    /// `r(X) > 0` directly from the sign of the losses.
    SignBound,
    /// `r(λX) = λ r(X)` with `r(X) ≤ 0` at the witness.
    PositiveHomogeneity,
    /// Evaluation along sampled rays without a structural guarantee.
    DirectSweep,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Witness {
    /// A position with `r(λX) > 0` for all `λ > lambda`.
    Threshold { position: Value, lambda: f64 },
    /// A position with a loss and `r(λX) ≤ 0` along the listed `λ` (values in the
    /// functional's own sign).
    Counterexample { position: Value, lambdas: Vec<f64>, values: Vec<ExtReal> },
    /// What an inconclusive run looked at.
    Search { lambda_max: f64, positions_tried: usize, undecided: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Verdict {
    pub functional: String,
    pub kind: Kind,
    pub domain: String,
    pub status: Status,
    pub method: Method,
    pub certified: bool,
    pub witness: Option<Witness>,
    pub samples: usize,
    pub seed: u64,
    pub note: String,
    /// The witness as a position, for programmatic re-use.
    #[serde(skip)]
    pub witness_position: Option<Position>,
}

impl Verdict {
    fn new(spec: &FunctionalSpec, domain: &DomainSpec, seed: u64, status: Status, method: Method) -> Self {
        Verdict {
            functional: spec.label(),
            kind: spec.kind(),
            domain: domain.name(),
            status,
            method,
            certified: false,
            witness: None,
            samples: 0,
            seed,
            note: String::new(),
            witness_position: None,
        }
    }

    fn counterexample(mut self, x: &Position, ray: RaySample) -> Self {
        self.witness = Some(Witness::Counterexample { position: position_json(x), lambdas: ray.lambdas, values: ray.values });
        self.witness_position = Some(x.clone());
        self
    }

    pub fn is_sensitive(&self) -> bool {
        self.status == Status::Sensitive
    }
}

/// Sampling configuration shared by the certifiers.
#[derive(Debug, Clone)]
pub struct CertifyConfig {
    pub seed: u64,
    pub trials: usize,
    pub max_exp: i32,
}

impl Default for CertifyConfig {
    fn default() -> Self {
        CertifyConfig { seed: 42, trials: 100, max_exp: DEFAULT_MAX_EXP }
    }
}

fn sampler_for(spec: &FunctionalSpec, seed: u64) -> Sampler {
    match spec.fixed_space() {
        Some(s) => Sampler::new(seed).on_space(s.clone()),
        None => Sampler::new(seed),
    }
}

fn fits(spec: &FunctionalSpec, x: &Position) -> bool {
    spec.fixed_space().is_none_or(|s| s.probs() == x.probs())
}

/// `pre`: `X` carries a loss and lies in the domain.
fn admissible(domain: &DomainSpec, x: &Position) -> bool {
    x.has_losses() && domain.contains(x)
}

/// Decides sensitivity to large losses of `spec` on `domain`:
///
/// 1. closed-form criteria per variant (tail ratios, `ᾱ`, the infinite prefix of `g`, the
///    OCE slopes, sign and expectation bounds), with insensitivity witnesses re-verified;
/// 2. on expected losses, the strict expectation bound `r(X) > E[−X]` for positively
///    homogeneous cash-additive functionals, sampled;
/// 3. for cash-additive star-shaped functionals on cash-stable domains, `R^∞ = ess sup(−X)`
///    on sampled positions;
/// 4. per-ray decisions on sampled positions (witness hints first).
pub fn sll_certify(spec: &FunctionalSpec, domain: &DomainSpec, cfg: &CertifyConfig) -> Result<Verdict> {
    if let Variant::Negated(inner) = spec.variant() {
        let mut v = sll_certify(inner, domain, cfg)?;
        v.functional = spec.label();
        v.kind = spec.kind();
        if let Some(Witness::Counterexample { values, .. }) = &mut v.witness {
            values.iter_mut().for_each(|x| *x = x.neg());
        }
        return Ok(v);
    }
    let mut notes = Vec::new();
    match rules::rule(spec, domain) {
        Rule::Sensitive { method, note } => {
            let mut v = Verdict::new(spec, domain, cfg.seed, Status::Sensitive, method);
            v.certified = true;
            v.note = note;
            return Ok(v);
        }
        Rule::Insensitive { method, witnesses, note } => {
            for w in witnesses.iter().filter(|w| domain.contains(w)) {
                if let Some(ray) = verify_insensitive(spec, w, cfg.max_exp) {
                    let mut v = Verdict::new(spec, domain, cfg.seed, Status::Insensitive, method).counterexample(w, ray);
                    v.certified = true;
                    v.note = note;
                    return Ok(v);
                }
            }
            notes.push(format!("closed-form witnesses failed re-verification ({note})"));
        }
        Rule::Unknown => {}
    }
    let sampler = sampler_for(spec, cfg.seed);
    let flags = *spec.flags();
    if matches!(domain, DomainSpec::ExpectedLosses) && flags.pos_homogeneous && flags.cash_additive {
        return strict_expectation_bound(spec, domain, &sampler, cfg, notes);
    }
    if flags.cash_additive && flags.star_shaped && domain.cash_stable() {
        if let Some(v) = cash_additive_stage(spec, domain, &sampler, cfg, &mut notes)? {
            return Ok(v);
        }
    }
    sweep_stage(spec, domain, &sampler, cfg, notes)
}

fn strict_expectation_bound(
    spec: &FunctionalSpec,
    domain: &DomainSpec,
    sampler: &Sampler,
    cfg: &CertifyConfig,
    mut notes: Vec<String>,
) -> Result<Verdict> {
    let hints = hints(spec);
    let candidates: Vec<Position> = hints
        .into_iter()
        .chain((0..cfg.trials as u64).filter_map(|i| sampler.sample(i, domain).ok()))
        .filter(|x| !x.is_constant() && fits(spec, x))
        .collect();
    // A violation X yields the witness Y = X − E[X]: zero mean, nonconstant, r(Y) ≤ 0.
    let found: Vec<Option<Position>> = candidates
        .par_iter()
        .map(|x| {
            let r = spec.risk(x).ok()?;
            match r {
                ExtReal::Finite(v) if v - (-x.expectation()) <= 1e-9 * x.sup_norm().max(1.0) => Some(x.shift(-x.expectation())),
                _ => None,
            }
        })
        .collect();
    for y in found.into_iter().flatten() {
        if let Some(ray) = verify_insensitive(spec, &y, cfg.max_exp) {
            let mut v = Verdict::new(spec, domain, cfg.seed, Status::Insensitive, Method::StrictExpectationBound).counterexample(&y, ray);
            v.certified = true;
            v.samples = candidates.len();
            v.note = "r(X) <= E[-X] for a nonconstant X; its centred version is a zero-mean loss with nonpositive risk".into();
            return Ok(v);
        }
    }
    let mut v = Verdict::new(spec, domain, cfg.seed, Status::Sensitive, Method::StrictExpectationBound);
    v.samples = candidates.len();
    notes.push("r(X) > E[-X] on every sampled nonconstant position".into());
    v.note = notes.join("; ");
    Ok(v)
}

fn hints(spec: &FunctionalSpec) -> Vec<Position> {
    fn go(spec: &FunctionalSpec) -> Vec<Position> {
        match spec.variant() {
            Variant::Custom(c) => c.witness_hints.clone(),
            Variant::Negated(inner) => go(inner),
            _ => Vec::new(),
        }
    }
    go(spec)
}

enum CashOutcome {
    Consistent,
    Witness(Position, RaySample, bool),
    Unclear,
}

fn cash_additive_stage(
    spec: &FunctionalSpec,
    domain: &DomainSpec,
    sampler: &Sampler,
    cfg: &CertifyConfig,
    notes: &mut Vec<String>,
) -> Result<Option<Verdict>> {
    let xs: Vec<Position> = hints(spec)
        .into_iter()
        .filter(|x| admissible(domain, x) && fits(spec, x))
        .chain((0..cfg.trials as u64).filter_map(|i| sampler.sample(i, domain).ok()))
        .collect();
    let outcomes: Vec<CashOutcome> = xs
        .par_iter()
        .map(|x| {
            let Ok(est) = recession(spec, x) else { return CashOutcome::Unclear };
            let esn = x.ess_sup_neg();
            match est.risk_value(spec.kind()) {
                ExtReal::Finite(r) if esn - r > 1e-6 * esn.abs().max(1.0) => {
                    // R^∞(X + r) = 0 < ess sup(−X − r): a loss whose ray stays acceptable.
                    let y = x.shift(r);
                    let exact = matches!(est.mode, RecessionMode::Analytic | RecessionMode::NumericConverged);
                    match verify_insensitive(spec, &y, cfg.max_exp) {
                        Some(ray) if domain.contains(&y) => CashOutcome::Witness(y, ray, exact),
                        _ => CashOutcome::Unclear,
                    }
                }
                ExtReal::Finite(r) if (esn - r).abs() <= 1e-6 * esn.abs().max(1.0) => CashOutcome::Consistent,
                ExtReal::PosInf => CashOutcome::Consistent,
                _ => CashOutcome::Unclear,
            }
        })
        .collect();
    let mut unclear = 0;
    for o in outcomes {
        match o {
            CashOutcome::Witness(y, ray, exact) => {
                let mut v = Verdict::new(spec, domain, cfg.seed, Status::Insensitive, Method::TheoremCashAdditive).counterexample(&y, ray);
                v.certified = exact;
                v.samples = xs.len();
                notes.push("the recession functional falls below ess sup(-X); shifting by it gives the witness".into());
                v.note = notes.join("; ");
                return Ok(Some(v));
            }
            CashOutcome::Unclear => unclear += 1,
            CashOutcome::Consistent => {}
        }
    }
    if unclear == 0 {
        let mut v = Verdict::new(spec, domain, cfg.seed, Status::Sensitive, Method::TheoremCashAdditive);
        v.samples = xs.len();
        notes.push("recession functional equals ess sup(-X) on every sampled position".into());
        v.note = notes.join("; ");
        return Ok(Some(v));
    }
    notes.push(format!("recession comparison unclear on {unclear} of {} positions", xs.len()));
    Ok(None)
}

fn sweep_stage(spec: &FunctionalSpec, domain: &DomainSpec, sampler: &Sampler, cfg: &CertifyConfig, mut notes: Vec<String>) -> Result<Verdict> {
    let xs: Vec<Position> = hints(spec)
        .into_iter()
        .filter(|x| admissible(domain, x) && fits(spec, x))
        .chain((0..cfg.trials as u64).filter_map(|i| sampler.sample(i, domain).ok()))
        .collect();
    let verdicts: Vec<Option<PositionVerdict>> = xs.par_iter().map(|x| sll_position(spec, x, cfg.max_exp).ok()).collect();
    let method = if spec.flags().star_shaped || spec.flags().pos_homogeneous {
        Method::TheoremStarShaped
    } else {
        Method::DirectSweep
    };
    let mut undecided = 0;
    for (x, pv) in xs.iter().zip(&verdicts) {
        match pv {
            Some(PositionVerdict::CertifiedInsensitive { evidence, basis }) => {
                let mut v = Verdict::new(spec, domain, cfg.seed, Status::Insensitive, method).counterexample(x, evidence.clone());
                v.certified = true;
                v.samples = xs.len();
                notes.push(format!("ray certified insensitive by {}", serde_json::to_value(basis).expect("basis serializes")));
                v.note = notes.join("; ");
                return Ok(v);
            }
            Some(PositionVerdict::CertifiedSensitive { .. }) => {}
            _ => undecided += 1,
        }
    }
    let mut v = Verdict::new(spec, domain, cfg.seed, Status::Sensitive, method);
    v.samples = xs.len();
    if undecided > 0 || xs.is_empty() {
        v.status = Status::Inconclusive;
        v.witness = Some(Witness::Search { lambda_max: 2f64.powi(cfg.max_exp), positions_tried: xs.len(), undecided });
        notes.push("no ray could be decided for every sampled position".into());
    } else {
        // Report the slowest ray as the representative threshold.
        let (x, lambda) = xs
            .iter()
            .zip(&verdicts)
            .filter_map(|(x, pv)| match pv {
                Some(PositionVerdict::CertifiedSensitive { lambda, .. }) => Some((x, *lambda)),
                _ => None,
            })
            .fold((&xs[0], f64::NEG_INFINITY), |acc, c| if c.1 > acc.1 { c } else { acc });
        v.witness = Some(Witness::Threshold { position: position_json(x), lambda });
        notes.push("every sampled ray turns unacceptable (sampled, not a proof)".into());
    }
    v.note = notes.join("; ");
    Ok(v)
}

/// Pointwise sensitivity to losses: `P(X<0) = 0` or `r(X) > 0`.
pub fn sensitive_to_losses(spec: &FunctionalSpec, x: &Position) -> Result<bool> {
    Ok(!x.has_losses() || is_positive(spec.risk(x)?, 1.0, x))
}

#[derive(Debug, Clone, Serialize)]
pub struct BatteryReport {
    pub functional: String,
    pub seed: u64,
    pub verdicts: Vec<Verdict>,
    /// Expected-loss sensitivity implies pure-loss, which implies sure-loss sensitivity;
    /// checked among certified verdicts.
    pub ordering_consistent: bool,
}

impl BatteryReport {
    pub fn get(&self, domain: &str) -> Option<&Verdict> {
        self.verdicts.iter().find(|v| v.domain == domain)
    }
}

/// Runs [`sll_certify`] on sure, pure and expected losses and on the full space.
pub fn localized_battery(spec: &FunctionalSpec, cfg: &CertifyConfig) -> Result<BatteryReport> {
    let domains = [DomainSpec::SureLosses, DomainSpec::PureLosses, DomainSpec::ExpectedLosses, DomainSpec::Full];
    let verdicts = domains.iter().map(|d| sll_certify(spec, d, cfg)).collect::<Result<Vec<_>>>()?;
    let sens = |i: usize| verdicts[i].certified && verdicts[i].status == Status::Sensitive;
    let insens = |i: usize| verdicts[i].certified && verdicts[i].status == Status::Insensitive;
    // (larger domain sensitive) ⇒ (smaller domain not certified insensitive)
    let ordering_consistent = !(sens(3) && (insens(2) || insens(1) || insens(0)))
        && !(sens(2) && (insens(1) || insens(0)))
        && !(sens(1) && insens(0));
    Ok(BatteryReport { functional: spec.label(), seed: cfg.seed, verdicts, ordering_consistent })
}
