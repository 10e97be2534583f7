//! Risk and utility functionals: specification, validation and evaluation.

pub mod axioms;
mod ce;
pub mod custom;
mod profiles;

pub use ce::{classical_ce, entropic, expected_utility, oce, shortfall, umean_ce};
pub use custom::{CustomFunctional, RayIdentity};
pub use profiles::{AlphaProfile, Breakpoint, GProfile};

use crate::error::{Error, Result};
use crate::ext::{Evaluation, ExtReal};
use crate::function::{LossFlags, LossFn, Piece, UtilityFlags, UtilityFn};
use crate::prob::Position;
use serde::{Deserialize, Serialize};
use serde_json::Value;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    Risk,
    Utility,
}

impl Kind {
    pub fn flip(self) -> Kind {
        match self {
            Kind::Risk => Kind::Utility,
            Kind::Utility => Kind::Risk,
        }
    }
}

/// Declared axioms. `star_shaped` is positive star-shapedness for risk functionals and
/// negative star-shapedness for utility functionals; `convex` means convex for risk and
/// concave for utility. `lsc` (lower/upper semicontinuity) is recorded, never verified.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct Flags {
    pub monotone: bool,
    pub normalized: bool,
    pub cash_additive: bool,
    pub pos_homogeneous: bool,
    pub star_shaped: bool,
    pub convex: bool,
    pub lsc: bool,
}

impl Flags {
    /// Properties set here but not in `other`.
    pub fn excess_over(&self, other: &Flags) -> Vec<&'static str> {
        let pairs = [
            (self.monotone, other.monotone, "monotone"),
            (self.normalized, other.normalized, "normalized"),
            (self.cash_additive, other.cash_additive, "cash_additive"),
            (self.pos_homogeneous, other.pos_homogeneous, "pos_homogeneous"),
            (self.star_shaped, other.star_shaped, "star_shaped"),
            (self.convex, other.convex, "convex"),
            (self.lsc, other.lsc, "lsc"),
        ];
        pairs.iter().filter(|(a, b, _)| *a && !*b).map(|p| p.2).collect()
    }
}

/// A utility function given either as a named preset or as explicit pieces.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum UtilityDoc {
    Preset { preset: String },
    Pieces {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        name: Option<String>,
        pieces: Vec<Piece>,
        #[serde(default)]
        flags: UtilityFlags,
    },
}

impl UtilityDoc {
    pub fn build(&self) -> Result<UtilityFn> {
        match self {
            UtilityDoc::Preset { preset } => UtilityFn::preset(preset),
            UtilityDoc::Pieces { name, pieces, flags } => {
                UtilityFn::piecewise(name.clone().unwrap_or_else(|| "custom".into()), pieces.clone(), *flags)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum LossDoc {
    Preset { preset: String },
    Pieces {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        name: Option<String>,
        pieces: Vec<Piece>,
        #[serde(default)]
        flags: LossFlags,
    },
}

impl LossDoc {
    pub fn build(&self) -> Result<LossFn> {
        match self {
            LossDoc::Preset { preset } => {
                let (head, arg) = preset.split_once(':').unwrap_or((preset, ""));
                match head {
                    "exp" => LossFn::exponential(
                        arg.parse().map_err(|_| Error::Parameter(format!("bad loss preset `{preset}`")))?,
                    ),
                    "linear" => Ok(LossFn::linear()),
                    _ => Err(Error::Parameter(format!("unknown loss preset `{preset}` (known: exp:γ, linear)"))),
                }
            }
            LossDoc::Pieces { name, pieces, flags } => {
                LossFn::piecewise(name.clone().unwrap_or_else(|| "custom".into()), pieces.clone(), *flags)
            }
        }
    }
}

/// Serializable description of a functional; the JSON schema of specifications.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum VariantDoc {
    Var { alpha: f64 },
    Es { alpha: f64 },
    Lvar { profile: AlphaProfile },
    AdjEs { g: GProfile },
    Shortfall { loss: LossDoc },
    Entropic { gamma: f64 },
    WorstCase,
    ExpectedUtility { utility: UtilityDoc },
    ClassicalCe { utility: UtilityDoc },
    UmeanCe { utility: UtilityDoc },
    Oce { utility: UtilityDoc },
    Custom {
        name: String,
        #[serde(default)]
        params: Value,
    },
    /// `X ↦ −F(X)` for an inner functional `F`; swaps risk and utility.
    Negated { inner: Box<SpecDoc> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpecDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kind: Option<Kind>,
    pub variant: VariantDoc,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub flags: Option<Flags>,
}

#[derive(Debug, Clone)]
pub enum Variant {
    Var { alpha: f64 },
    Es { alpha: f64 },
    Lvar(AlphaProfile),
    AdjEs(GProfile),
    Shortfall(LossFn),
    Entropic { gamma: f64 },
    WorstCase,
    ExpectedUtility(UtilityFn),
    ClassicalCe(UtilityFn),
    UmeanCe(UtilityFn),
    Oce(UtilityFn),
    Custom(CustomFunctional),
    Negated(Box<FunctionalSpec>),
}

/// A validated functional together with its kind and declared axioms.
#[derive(Debug, Clone)]
pub struct FunctionalSpec {
    kind: Kind,
    variant: Variant,
    flags: Flags,
    doc: SpecDoc,
}

const BASE: Flags = Flags {
    monotone: true,
    normalized: true,
    cash_additive: false,
    pos_homogeneous: false,
    star_shaped: false,
    convex: false,
    lsc: false,
};

/// Axioms known to hold for a built-in variant.
fn canonical(variant: &Variant) -> (Kind, Flags) {
    let coherent = Flags { cash_additive: true, pos_homogeneous: true, star_shaped: true, convex: true, lsc: true, ..BASE };
    match variant {
        Variant::Var { .. } => (Kind::Risk, Flags { convex: false, ..coherent }),
        Variant::Es { .. } | Variant::WorstCase => (Kind::Risk, coherent),
        Variant::Lvar(_) => (Kind::Risk, Flags { cash_additive: true, star_shaped: true, ..BASE }),
        Variant::AdjEs(_) => (Kind::Risk, Flags { cash_additive: true, star_shaped: true, convex: true, lsc: true, ..BASE }),
        Variant::Entropic { .. } => (Kind::Risk, Flags { cash_additive: true, star_shaped: true, convex: true, lsc: true, ..BASE }),
        Variant::Shortfall(l) => {
            let f = l.flags();
            let convex = f.convex && f.normalized;
            (Kind::Risk, Flags { normalized: f.normalized, cash_additive: true, star_shaped: convex, convex, ..BASE })
        }
        Variant::ExpectedUtility(u) => {
            let f = u.flags();
            let normalized = u.eval(0.0) == 0.0;
            (
                Kind::Utility,
                Flags { normalized, convex: f.concave, star_shaped: normalized && (f.neg_star_shaped || f.concave), ..BASE },
            )
        }
        Variant::ClassicalCe(u) => (Kind::Utility, Flags { normalized: u.eval(0.0) == 0.0, ..BASE }),
        Variant::UmeanCe(u) => (Kind::Utility, Flags { normalized: u.eval(0.0) == 0.0, cash_additive: true, ..BASE }),
        Variant::Oce(u) => {
            let c = u.flags().concave;
            (Kind::Utility, Flags { cash_additive: true, convex: c, star_shaped: c, ..BASE })
        }
        Variant::Custom(c) => (c.kind, c.flags),
        Variant::Negated(inner) => (inner.kind.flip(), inner.flags),
    }
}

fn check_level(name: &str, alpha: f64, upper_closed: bool) -> Result<()> {
    let ok = alpha > 0.0 && if upper_closed { alpha <= 1.0 } else { alpha < 1.0 };
    if ok {
        Ok(())
    } else {
        Err(Error::Parameter(format!("{name} level {alpha} must lie in (0,1{}", if upper_closed { "]" } else { ")" })))
    }
}

fn require(ok: bool, msg: &str) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(Error::Parameter(msg.into()))
    }
}

impl FunctionalSpec {
    pub fn from_doc(doc: SpecDoc) -> Result<Self> {
        let variant = match &doc.variant {
            VariantDoc::Var { alpha } => {
                check_level("VaR", *alpha, false)?;
                Variant::Var { alpha: *alpha }
            }
            VariantDoc::Es { alpha } => {
                check_level("ES", *alpha, true)?;
                Variant::Es { alpha: *alpha }
            }
            VariantDoc::Lvar { profile } => {
                // Re-validate: deserialization bypasses the constructor.
                Variant::Lvar(AlphaProfile::new(profile.breakpoints().to_vec(), profile.alpha_inf())?)
            }
            VariantDoc::AdjEs { g } => Variant::AdjEs(GProfile::new(g.inf_prefix(), g.knots().to_vec())?),
            VariantDoc::Shortfall { loss } => {
                let l = loss.build()?;
                require(l.flags().positive_on_pos, "shortfall risk needs a loss function that is positive on (0,∞)")?;
                Variant::Shortfall(l)
            }
            VariantDoc::Entropic { gamma } => {
                require(*gamma > 0.0 && gamma.is_finite(), "entropic risk aversion must be positive")?;
                Variant::Entropic { gamma: *gamma }
            }
            VariantDoc::WorstCase => Variant::WorstCase,
            VariantDoc::ExpectedUtility { utility } => Variant::ExpectedUtility(utility.build()?),
            VariantDoc::ClassicalCe { utility } => {
                let u = utility.build()?;
                require(u.flags().strictly_negative_on_neg, "C_u needs u(x) < 0 for x < 0 (flag strictly_negative_on_neg)")?;
                Variant::ClassicalCe(u)
            }
            VariantDoc::UmeanCe { utility } => {
                let u = utility.build()?;
                require(u.flags().strictly_negative_on_neg, "M_u needs u(x) < 0 for x < 0 (flag strictly_negative_on_neg)")?;
                Variant::UmeanCe(u)
            }
            VariantDoc::Oce { utility } => {
                let u = utility.build()?;
                require(u.flags().below_identity, "OCE needs u(x) <= x (flag below_identity)")?;
                Variant::Oce(u)
            }
            VariantDoc::Custom { name, params } => Variant::Custom(custom::build(name, params)?),
            VariantDoc::Negated { inner } => Variant::Negated(Box::new(FunctionalSpec::from_doc((**inner).clone())?)),
        };
        let (kind, known) = canonical(&variant);
        if let Some(k) = doc.kind {
            if k != kind {
                return Err(Error::Parameter(format!("declared kind {k:?} does not match the variant, which is {kind:?}")));
            }
        }
        let flags = match doc.flags {
            None => known,
            Some(declared) => {
                let custom = matches!(variant, Variant::Custom(_));
                let excess = declared.excess_over(&known);
                if !custom && !excess.is_empty() {
                    return Err(Error::Parameter(format!("declared properties not known to hold: {}", excess.join(", "))));
                }
                declared
            }
        };
        Ok(FunctionalSpec { kind, variant, flags, doc })
    }

    fn simple(variant: VariantDoc) -> Result<Self> {
        Self::from_doc(SpecDoc { kind: None, variant, flags: None })
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let doc: SpecDoc = serde_json::from_value(v.clone()).map_err(|e| Error::Format(format!("functional spec: {e}")))?;
        Self::from_doc(doc)
    }

    pub fn to_json(&self) -> Value {
        serde_json::to_value(&self.doc).expect("spec serializes")
    }

    pub fn var(alpha: f64) -> Result<Self> {
        Self::simple(VariantDoc::Var { alpha })
    }

    pub fn es(alpha: f64) -> Result<Self> {
        Self::simple(VariantDoc::Es { alpha })
    }

    pub fn lvar(profile: AlphaProfile) -> Result<Self> {
        Self::simple(VariantDoc::Lvar { profile })
    }

    pub fn adj_es(g: GProfile) -> Result<Self> {
        Self::simple(VariantDoc::AdjEs { g })
    }

    pub fn shortfall(loss: LossDoc) -> Result<Self> {
        Self::simple(VariantDoc::Shortfall { loss })
    }

    pub fn entropic(gamma: f64) -> Result<Self> {
        Self::simple(VariantDoc::Entropic { gamma })
    }

    pub fn worst_case() -> Self {
        Self::simple(VariantDoc::WorstCase).expect("worst case is always valid")
    }

    pub fn expected_utility(u: UtilityDoc) -> Result<Self> {
        Self::simple(VariantDoc::ExpectedUtility { utility: u })
    }

    pub fn classical_ce(u: UtilityDoc) -> Result<Self> {
        Self::simple(VariantDoc::ClassicalCe { utility: u })
    }

    pub fn umean_ce(u: UtilityDoc) -> Result<Self> {
        Self::simple(VariantDoc::UmeanCe { utility: u })
    }

    pub fn oce(u: UtilityDoc) -> Result<Self> {
        Self::simple(VariantDoc::Oce { utility: u })
    }

    pub fn custom(name: &str, params: Value) -> Result<Self> {
        Self::simple(VariantDoc::Custom { name: name.into(), params })
    }

    /// A functional built in code rather than from the catalog. It serializes by name only.
    pub fn from_custom(f: CustomFunctional) -> Self {
        let doc = SpecDoc { kind: Some(f.kind), variant: VariantDoc::Custom { name: f.name.clone(), params: f.params.clone() }, flags: Some(f.flags) };
        FunctionalSpec { kind: f.kind, flags: f.flags, variant: Variant::Custom(f), doc }
    }

    /// `X ↦ −F(X)`: a risk functional becomes a utility functional and vice versa.
    pub fn negated(&self) -> Self {
        let doc = SpecDoc { kind: None, variant: VariantDoc::Negated { inner: Box::new(self.doc.clone()) }, flags: None };
        FunctionalSpec { kind: self.kind.flip(), flags: self.flags, variant: Variant::Negated(Box::new(self.clone())), doc }
    }

    /// Inline presets: `var:α`, `es:α`, `entropic:γ`, `worstcase`, `eu:<u>`, `ce:<u>`,
    /// `umean:<u>`, `oce:<u>`, `shortfall:<loss>`, `custom:<name>`; `<u>` is a utility
    /// preset such as `exp:1` or `power-s:0.3,0.5`.
    pub fn preset(s: &str) -> Result<Self> {
        let (head, rest) = s.split_once(':').unwrap_or((s, ""));
        let num = || -> Result<f64> { rest.trim().parse().map_err(|_| Error::Parameter(format!("`{s}`: expected a number after `{head}:`"))) };
        let util = || UtilityDoc::Preset { preset: rest.to_string() };
        match head {
            "var" => Self::var(num()?),
            "es" => Self::es(num()?),
            "entropic" => Self::entropic(num()?),
            "worstcase" | "worst-case" => Ok(Self::worst_case()),
            "eu" => Self::expected_utility(util()),
            "ce" => Self::classical_ce(util()),
            "umean" => Self::umean_ce(util()),
            "oce" => Self::oce(util()),
            "shortfall" => Self::shortfall(LossDoc::Preset { preset: rest.to_string() }),
            "custom" => Self::custom(rest, Value::Null),
            _ => Err(Error::Parameter(format!("unknown functional preset `{s}`"))),
        }
    }

    pub fn kind(&self) -> Kind {
        self.kind
    }

    pub fn flags(&self) -> &Flags {
        &self.flags
    }

    pub fn variant(&self) -> &Variant {
        &self.variant
    }

    pub fn doc(&self) -> &SpecDoc {
        &self.doc
    }

    /// Short human-readable label.
    pub fn label(&self) -> String {
        match &self.variant {
            Variant::Var { alpha } => format!("VaR({alpha})"),
            Variant::Es { alpha } => format!("ES({alpha})"),
            Variant::Lvar(p) => format!("LVaR(alpha_inf={})", p.alpha_inf()),
            Variant::AdjEs(g) => format!("ES^g(p={})", g.inf_prefix()),
            Variant::Shortfall(l) => format!("Shortfall({})", l.name()),
            Variant::Entropic { gamma } => format!("Entropic({gamma})"),
            Variant::WorstCase => "WorstCase".into(),
            Variant::ExpectedUtility(u) => format!("E_u({})", u.name()),
            Variant::ClassicalCe(u) => format!("C_u({})", u.name()),
            Variant::UmeanCe(u) => format!("M_u({})", u.name()),
            Variant::Oce(u) => format!("OCE({})", u.name()),
            Variant::Custom(c) => format!("custom:{}", c.name),
            Variant::Negated(inner) => format!("-{}", inner.label()),
        }
    }

    /// The space a custom functional is tied to, if any.
    pub fn fixed_space(&self) -> Option<&std::sync::Arc<crate::prob::FiniteSpace>> {
        match &self.variant {
            Variant::Custom(c) => c.space.as_ref(),
            Variant::Negated(inner) => inner.fixed_space(),
            _ => None,
        }
    }

    pub fn evaluate(&self, x: &Position) -> Result<Evaluation> {
        let exact = |v: f64| Ok(Evaluation::exact(ExtReal::Finite(v)));
        match &self.variant {
            Variant::Var { alpha } => exact(x.var(*alpha)?),
            Variant::Es { alpha } => exact(x.es(*alpha)?),
            Variant::Lvar(p) => exact(p.lvar(x)?),
            Variant::AdjEs(g) => exact(g.adj_es(x)?),
            Variant::Shortfall(l) => exact(shortfall(l, x)?),
            Variant::Entropic { gamma } => Ok(Evaluation::from_arith(entropic(*gamma, x))),
            Variant::WorstCase => exact(x.ess_sup_neg()),
            Variant::ExpectedUtility(u) => Ok(expected_utility(u, x)),
            Variant::ClassicalCe(u) => Ok(classical_ce(u, x)),
            Variant::UmeanCe(u) => Ok(umean_ce(u, x)),
            Variant::Oce(u) => oce(u, x),
            Variant::Custom(c) => Ok(Evaluation::exact(c.evaluate(x)?)),
            Variant::Negated(inner) => {
                let e = inner.evaluate(x)?;
                Ok(Evaluation { value: e.value.neg(), overflow: e.overflow })
            }
        }
    }

    pub fn value(&self, x: &Position) -> Result<ExtReal> {
        Ok(self.evaluate(x)?.value)
    }

    /// The risk view `r = R` for risk functionals and `r = −U` for utility functionals.
    /// Positive values mean "unacceptable" in both cases.
    pub fn risk(&self, x: &Position) -> Result<ExtReal> {
        let v = self.value(x)?;
        Ok(match self.kind {
            Kind::Risk => v,
            Kind::Utility => v.neg(),
        })
    }

    /// The underlying utility function of utility-based variants.
    pub fn utility(&self) -> Option<&UtilityFn> {
        match &self.variant {
            Variant::ExpectedUtility(u) | Variant::ClassicalCe(u) | Variant::UmeanCe(u) | Variant::Oce(u) => Some(u),
            _ => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn presets_and_round_trip() {
        for p in ["var:0.1", "es:0.05", "entropic:1", "worstcase", "eu:exp:1", "ce:sqrt-s", "umean:power-s:0.3,0.5", "oce:oce-remark", "shortfall:exp:2", "custom:zero"] {
            let s = FunctionalSpec::preset(p).unwrap();
            let back = FunctionalSpec::from_json(&s.to_json()).unwrap();
            assert_eq!(back.to_json(), s.to_json(), "{p}");
        }
        assert!(FunctionalSpec::preset("var:1.5").is_err());
        assert!(FunctionalSpec::preset("oce:power-s:0.3,0.5").is_err());
    }

    #[test]
    fn over_declared_flags_are_rejected() {
        let doc = json!({"variant": {"type": "var", "alpha": 0.1}, "flags": {"convex": true}});
        assert!(FunctionalSpec::from_json(&doc).is_err());
        let doc = json!({"variant": {"type": "var", "alpha": 0.1}, "flags": {"monotone": true}});
        assert!(FunctionalSpec::from_json(&doc).is_ok());
        let doc = json!({"kind": "utility", "variant": {"type": "es", "alpha": 0.1}});
        assert!(FunctionalSpec::from_json(&doc).is_err());
    }

    #[test]
    fn negation_flips_kind_and_sign() {
        let x = Position::from_atoms(&[(0.5, -1.0), (0.5, 3.0)]).unwrap();
        let es = FunctionalSpec::es(0.5).unwrap();
        let neg = es.negated();
        assert_eq!(neg.kind(), Kind::Utility);
        assert_eq!(neg.value(&x).unwrap(), es.value(&x).unwrap().neg());
        assert_eq!(neg.risk(&x).unwrap(), es.risk(&x).unwrap());
    }
}
