//! Closed-form evaluators for the sampling and finite de Finetti bounds,
//! and a verifier that checks computed divergences against them.
//!
//! Every total-variation value here is in the L1 convention (range
//! `[0, 2]`). Relative entropies are in nats.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::arith::{exp_neg_rational, falling_factorial, log_rational, ExactRational, PrecisionFloat};
use crate::divergence::{
    divergence, entropy, pinsker_check_values, DivergenceValue, Metric, PinskerCheck, RelativeEntropy,
};
use crate::error::{contract, Error, Result};
use crate::exchangeable::{empirical_mixing, iid_mixture_dist, marginal, ExchangeableModel};
use crate::urn::{hypergeom_composition, multinom_composition, CompositionDist, SequenceTypeDist, UrnComposition};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundId {
    DfGeneral,
    DfFinite,
    DfSampling,
    FreedmanUpper,
    FreedmanLower,
    ExactTvUniform,
    Stam,
    HarremoesMatus,
    JgkUrn,
    ExactKlUniform,
    GkBinary,
    GkbEntropy,
    WithOlly,
    Song,
    New1,
    New2,
    YuConverse,
}

impl BoundId {
    pub const ALL: [BoundId; 17] = [
        BoundId::DfGeneral,
        BoundId::DfFinite,
        BoundId::DfSampling,
        BoundId::FreedmanUpper,
        BoundId::FreedmanLower,
        BoundId::ExactTvUniform,
        BoundId::Stam,
        BoundId::HarremoesMatus,
        BoundId::JgkUrn,
        BoundId::ExactKlUniform,
        BoundId::GkBinary,
        BoundId::GkbEntropy,
        BoundId::WithOlly,
        BoundId::Song,
        BoundId::New1,
        BoundId::New2,
        BoundId::YuConverse,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            BoundId::DfGeneral => "df_general",
            BoundId::DfFinite => "df_finite",
            BoundId::DfSampling => "df_sampling",
            BoundId::FreedmanUpper => "freedman_upper",
            BoundId::FreedmanLower => "freedman_lower",
            BoundId::ExactTvUniform => "exact_tv_uniform",
            BoundId::Stam => "stam",
            BoundId::HarremoesMatus => "harremoes_matus",
            BoundId::JgkUrn => "jgk_urn",
            BoundId::ExactKlUniform => "exact_kl_uniform",
            BoundId::GkBinary => "gk_binary",
            BoundId::GkbEntropy => "gkb_entropy",
            BoundId::WithOlly => "with_olly",
            BoundId::Song => "song",
            BoundId::New1 => "new1",
            BoundId::New2 => "new2",
            BoundId::YuConverse => "yu_converse",
        }
    }

    pub fn metric(self) -> Metric {
        match self {
            BoundId::DfGeneral
            | BoundId::DfFinite
            | BoundId::DfSampling
            | BoundId::FreedmanUpper
            | BoundId::FreedmanLower
            | BoundId::ExactTvUniform => Metric::TvL1,
            _ => Metric::Kl,
        }
    }

    pub fn kind(self) -> BoundKind {
        match self {
            BoundId::ExactTvUniform | BoundId::ExactKlUniform => BoundKind::Exact,
            BoundId::FreedmanLower | BoundId::YuConverse => BoundKind::Lower,
            _ => BoundKind::Upper,
        }
    }
}

impl fmt::Display for BoundId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for BoundId {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        BoundId::ALL
            .into_iter()
            .find(|id| id.as_str() == s)
            .ok_or_else(|| Error::UnknownBound(s.to_string()))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundKind {
    Upper,
    Lower,
    Exact,
}

impl BoundKind {
    pub fn as_str(self) -> &'static str {
        match self {
            BoundKind::Upper => "upper",
            BoundKind::Lower => "lower",
            BoundKind::Exact => "exact",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Param {
    C,
    N,
    K,
    Urn,
    Entropy,
}

/// Registry entry describing one bound.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BoundSpec {
    pub id: BoundId,
    pub metric: Metric,
    pub kind: BoundKind,
    pub formula: &'static str,
    pub params: &'static [Param],
    pub validity: &'static str,
    pub reference: &'static str,
    #[serde(skip_serializing_if = "str::is_empty")]
    pub convention_note: &'static str,
}

const C_N_K: &[Param] = &[Param::C, Param::N, Param::K];
const N_K: &[Param] = &[Param::N, Param::K];

fn standard_specs() -> Vec<BoundSpec> {
    use BoundId::*;
    let spec = |id: BoundId,
                formula: &'static str,
                params: &'static [Param],
                validity: &'static str,
                reference: &'static str,
                convention_note: &'static str| BoundSpec {
        id,
        metric: id.metric(),
        kind: id.kind(),
        formula,
        params,
        validity,
        reference,
        convention_note,
    };
    vec![
        spec(
            DfGeneral,
            "k(k-1)/n",
            N_K,
            "1 <= k <= n",
            "Diaconis-Freedman de Finetti bound, arbitrary alphabets",
            "usually stated as k(k-1)/(2n) for the sup-over-events distance; \
             reported here in the L1 convention as k(k-1)/n",
        ),
        spec(
            DfFinite,
            "2ck/n",
            C_N_K,
            "1 <= k <= n",
            "Diaconis-Freedman de Finetti bound, alphabet of size c",
            "",
        ),
        spec(
            DfSampling,
            "2ck/n",
            C_N_K,
            "1 <= k <= n",
            "Diaconis-Freedman sampling bound, urn with c colours",
            "",
        ),
        spec(
            FreedmanUpper,
            "k(k-1)/n",
            N_K,
            "1 <= k <= n; n distinct colours",
            "Freedman birthday bound, upper side",
            "",
        ),
        spec(
            FreedmanLower,
            "2(1 - exp(-k(k-1)/(2n)))",
            N_K,
            "1 <= k <= n; n distinct colours",
            "Freedman birthday bound, lower side",
            "",
        ),
        spec(
            ExactTvUniform,
            "2(1 - n!/((n-k)! n^k))",
            N_K,
            "1 <= k <= n; n distinct colours",
            "collision-set identity for the n-colour urn",
            "",
        ),
        spec(
            Stam,
            "(c-1)k(k-1)/(2(n-1)(n-k+1))",
            C_N_K,
            "1 <= k <= n, n >= 2",
            "Stam sampling bound",
            "",
        ),
        spec(
            HarremoesMatus,
            "(c-1)(log((n-1)/(n-k)) - k/n + 1/(n-k+1))",
            C_N_K,
            "1 <= k <= n-1",
            "Harremoes-Matus sampling bound",
            "",
        ),
        spec(
            JgkUrn,
            "(c-1)/2 (log(n/(n-k)) - k/(n-1)) + k(2n+1)/(12n(n-1)(n-k)) sum_j n/l_j \
             + (1/360)(1/(n-k)^3 - 1/n^3) sum_j n^3/l_j^3",
            &[Param::Urn, Param::K],
            "1 <= k <= floor(n/2), every l_j >= 1",
            "composition-dependent sampling bound",
            "",
        ),
        spec(
            ExactKlUniform,
            "log(n^k (n-k)!/n!)",
            N_K,
            "1 <= k <= n; n distinct colours",
            "exact sampling divergence for the n-colour urn",
            "",
        ),
        spec(
            GkBinary,
            "5k^2 log(n)/(n-k)",
            &[Param::C, Param::N, Param::K],
            "c = 2, 1 <= k < n",
            "binary-alphabet de Finetti bound via conditional entropy",
            "",
        ),
        spec(
            GkbEntropy,
            "k(k-1) H(X_1)/(2(n-k-1))",
            &[Param::N, Param::K, Param::Entropy],
            "1 <= k < n-1; evaluator only, holds for a different mixing measure",
            "entropy-dependent de Finetti bound",
            "",
        ),
        spec(
            WithOlly,
            "(c-1)k(k-1)/(2(n-1)(n-k+1))",
            C_N_K,
            "1 <= k <= n, n >= 2",
            "de Finetti bound from convexity and the Stam bound",
            "",
        ),
        spec(
            Song,
            "log(n^k (n-k)!/n!) <= -log(1 - k(k-1)/(2n))",
            N_K,
            "1 <= k < n; relaxation needs k(k-1) < 2n",
            "alphabet-free de Finetti bound via the collision set",
            "",
        ),
        spec(
            New1,
            "k(k-1)/(2(n-k+1))",
            N_K,
            "1 <= k <= n",
            "alphabet-free de Finetti bound via convexity and the Stam bound with c <= n",
            "",
        ),
        spec(
            New2,
            "log(n^k (n-k)!/n!) <= -log(1 - k(k-1)/(2n))",
            N_K,
            "1 <= k <= n; relaxation needs k(k-1) < 2n",
            "alphabet-free de Finetti bound via i.i.d. index vectors and partitions",
            "",
        ),
        spec(
            YuConverse,
            "log(n^k (n-k)!/n!)",
            N_K,
            "1 <= k < n; lower bound on D(h(Q_U) || M_mu) for every mu",
            "converse for the random-permutation law",
            "",
        ),
    ]
}

/// Inputs to the evaluators. Missing inputs make a bound invalid rather
/// than raising an error.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct BoundParams {
    pub c: Option<usize>,
    pub n: Option<u64>,
    pub k: Option<u64>,
    pub urn: Option<UrnComposition>,
    /// `H(X_1)` in nats, for `gkb_entropy`.
    pub entropy: Option<PrecisionFloat>,
}

impl BoundParams {
    pub fn new(n: u64, k: u64) -> Self {
        Self {
            n: Some(n),
            k: Some(k),
            ..Self::default()
        }
    }

    pub fn with_c(mut self, c: usize) -> Self {
        self.c = Some(c);
        self
    }

    /// Also sets `c` and `n` from the urn.
    pub fn with_urn(mut self, urn: UrnComposition) -> Self {
        self.c = Some(urn.colours());
        self.n = Some(urn.size());
        self.urn = Some(urn);
        self
    }

    pub fn with_entropy(mut self, h: PrecisionFloat) -> Self {
        self.entropy = Some(h);
        self
    }
}

/// A bound value: exact when the formula is rational.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum BoundValue {
    Exact(ExactRational),
    Approx(PrecisionFloat),
}

impl BoundValue {
    pub fn lower(&self) -> ExactRational {
        match self {
            BoundValue::Exact(r) => r.clone(),
            BoundValue::Approx(p) => p.lower(),
        }
    }

    pub fn upper(&self) -> ExactRational {
        match self {
            BoundValue::Exact(r) => r.clone(),
            BoundValue::Approx(p) => p.upper(),
        }
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            BoundValue::Exact(r) => r.to_f64(),
            BoundValue::Approx(p) => p.to_f64(),
        }
    }

    pub fn error_bound_f64(&self) -> f64 {
        match self {
            BoundValue::Exact(_) => 0.0,
            BoundValue::Approx(p) => p.error_bound_f64(),
        }
    }

    fn scaled(self, factor: &ExactRational) -> Self {
        match self {
            BoundValue::Exact(r) => BoundValue::Exact(r * factor),
            BoundValue::Approx(p) => BoundValue::Approx(p.mul_rational(factor)),
        }
    }
}

impl fmt::Display for BoundValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BoundValue::Exact(r) => r.fmt(f),
            BoundValue::Approx(p) => p.fmt(f),
        }
    }
}

/// An evaluated bound.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BoundResult {
    pub id: BoundId,
    pub metric: Metric,
    pub kind: BoundKind,
    /// `None` exactly when the parameters are outside the bound's domain.
    pub value: Option<BoundValue>,
    pub reason: Option<String>,
    /// Weaker closed form that follows the main value, when it exists.
    pub relaxation: Option<BoundValue>,
    /// Sup-over-events form of a TV bound, half the L1 value.
    pub half_l1: Option<ExactRational>,
}

impl BoundResult {
    pub fn valid(&self) -> bool {
        self.value.is_some()
    }

    pub fn convention(&self) -> &'static str {
        match self.metric {
            Metric::TvL1 => "L1",
            Metric::Kl => "nats",
        }
    }

    fn invalid(id: BoundId, reason: impl Into<String>) -> Self {
        Self {
            id,
            metric: id.metric(),
            kind: id.kind(),
            value: None,
            reason: Some(reason.into()),
            relaxation: None,
            half_l1: None,
        }
    }

    fn of(id: BoundId, value: BoundValue) -> Self {
        Self {
            id,
            metric: id.metric(),
            kind: id.kind(),
            value: Some(value),
            reason: None,
            relaxation: None,
            half_l1: None,
        }
    }
}

/// The immutable table of bounds. A registry may carry per-bound scale
/// factors, which exist to exercise the verifier's failure path.
#[derive(Clone, Debug)]
pub struct BoundRegistry {
    specs: Vec<BoundSpec>,
    scales: BTreeMap<BoundId, ExactRational>,
}

impl Default for BoundRegistry {
    fn default() -> Self {
        Self::standard()
    }
}

fn r(n: u64) -> ExactRational {
    ExactRational::from(n)
}

fn q(num: u64, den: u64) -> ExactRational {
    ExactRational::from(num) / ExactRational::from(den)
}

fn log_of(x: &ExactRational, bits: u32) -> Result<PrecisionFloat> {
    log_rational(x, bits)
}

/// `n^k / (n)_k = n^k (n-k)! / n!`.
pub fn collision_ratio(n: u64, k: u64) -> ExactRational {
    ExactRational::from(n).pow(k as u32) / ExactRational::from_biguint(falling_factorial(n, k))
}

impl BoundRegistry {
    pub fn standard() -> Self {
        Self {
            specs: standard_specs(),
            scales: BTreeMap::new(),
        }
    }

    /// Copy of the registry with one bound's value multiplied by `factor`.
    pub fn with_scaled(mut self, id: BoundId, factor: ExactRational) -> Self {
        self.scales.insert(id, factor);
        self
    }

    pub fn specs(&self) -> &[BoundSpec] {
        &self.specs
    }

    pub fn spec(&self, id: BoundId) -> &BoundSpec {
        self.specs
            .iter()
            .find(|s| s.id == id)
            .expect("registry lists every bound id")
    }

    pub fn is_modified(&self) -> bool {
        !self.scales.is_empty()
    }

    pub fn evaluate(&self, id: BoundId, params: &BoundParams, min_bits: u32) -> Result<BoundResult> {
        let mut res = evaluate_raw(id, params, min_bits)?;
        if let Some(f) = self.scales.get(&id) {
            res.value = res.value.map(|v| v.scaled(f));
            res.relaxation = res.relaxation.map(|v| v.scaled(f));
            res.half_l1 = res.half_l1.map(|v| v * f);
        }
        Ok(res)
    }
}

fn evaluate_raw(id: BoundId, p: &BoundParams, bits: u32) -> Result<BoundResult> {
    use BoundId::*;
    let (Some(n), Some(k)) = (p.n, p.k) else {
        return Ok(BoundResult::invalid(id, "needs n and k"));
    };
    if k == 0 {
        return Ok(BoundResult::invalid(id, "needs k >= 1"));
    }
    if k > n {
        return Ok(BoundResult::invalid(id, format!("needs k <= n (k = {k}, n = {n})")));
    }
    let pairs = r(k * (k - 1));
    let need_c = || p.c.ok_or_else(|| "needs c".to_string());
    let value = match id {
        DfGeneral => {
            let v = &pairs / r(n);
            let mut res = BoundResult::of(id, BoundValue::Exact(v.clone()));
            res.half_l1 = Some(v / r(2));
            return Ok(res);
        }
        DfFinite | DfSampling => match need_c() {
            Ok(c) => BoundValue::Exact(q(2 * c as u64 * k, n)),
            Err(e) => return Ok(BoundResult::invalid(id, e)),
        },
        FreedmanUpper => BoundValue::Exact(&pairs / r(n)),
        FreedmanLower => {
            let e = exp_neg_rational(&(&pairs / r(2 * n)), bits)?;
            let one = PrecisionFloat::from_rational(&ExactRational::one(), e.scale());
            BoundValue::Approx(one.sub(&e).mul_rational(&r(2)))
        }
        ExactTvUniform => {
            let ratio = collision_ratio(n, k).recip()?;
            BoundValue::Exact(r(2) * (ExactRational::one() - ratio))
        }
        Stam | WithOlly => {
            let c = match need_c() {
                Ok(c) => c as u64,
                Err(e) => return Ok(BoundResult::invalid(id, e)),
            };
            if n < 2 {
                return Ok(BoundResult::invalid(id, "needs n >= 2"));
            }
            let num = r(c - 1) * &pairs;
            BoundValue::Exact(num / r(2 * (n - 1) * (n - k + 1)))
        }
        HarremoesMatus => {
            let c = match need_c() {
                Ok(c) => c as u64,
                Err(e) => return Ok(BoundResult::invalid(id, e)),
            };
            if k >= n {
                return Ok(BoundResult::invalid(id, "needs k <= n - 1"));
            }
            let log = log_of(&q(n - 1, n - k), bits)?;
            let rest = q(1, n - k + 1) - q(k, n);
            BoundValue::Approx(log.add_rational(&rest).mul_rational(&r(c - 1)))
        }
        JgkUrn => {
            let Some(urn) = &p.urn else {
                return Ok(BoundResult::invalid(id, "needs the urn composition"));
            };
            if !urn.all_colours_present() {
                return Ok(BoundResult::invalid(id, "needs every l_j >= 1"));
            }
            if 2 * k > n {
                return Ok(BoundResult::invalid(id, "needs k <= floor(n/2)"));
            }
            let c = urn.colours() as u64;
            let lead = log_of(&q(n, n - k), bits)?
                .add_rational(&-q(k, n - 1))
                .mul_rational(&q(c - 1, 2));
            let inv_sum: ExactRational = urn.counts().iter().map(|&l| q(n, l)).sum();
            let cube_sum: ExactRational = urn.counts().iter().map(|&l| q(n, l).pow(3)).sum();
            let second = q(k * (2 * n + 1), 12 * n * (n - 1) * (n - k)) * inv_sum;
            let third = (q(1, (n - k).pow(3)) - q(1, n.pow(3))) * cube_sum / r(360);
            BoundValue::Approx(lead.add_rational(&(second + third)))
        }
        ExactKlUniform | Song | New2 | YuConverse => {
            if matches!(id, Song | YuConverse) && k >= n {
                return Ok(BoundResult::invalid(id, "needs k < n"));
            }
            let main = BoundValue::Approx(log_of(&collision_ratio(n, k), bits)?);
            let mut res = BoundResult::of(id, main);
            if matches!(id, Song | New2) && k * (k - 1) < 2 * n {
                let inner = ExactRational::one() - q(k * (k - 1), 2 * n);
                res.relaxation = Some(BoundValue::Approx(log_of(&inner.recip()?, bits)?));
            }
            return Ok(res);
        }
        GkBinary => {
            if p.c != Some(2) {
                return Ok(BoundResult::invalid(id, "binary alphabets only"));
            }
            if k >= n {
                return Ok(BoundResult::invalid(id, "needs k < n"));
            }
            BoundValue::Approx(log_of(&r(n), bits)?.mul_rational(&q(5 * k * k, n - k)))
        }
        GkbEntropy => {
            let Some(h) = &p.entropy else {
                return Ok(BoundResult::invalid(id, "needs H(X_1)"));
            };
            if k + 1 >= n {
                return Ok(BoundResult::invalid(id, "needs k < n - 1"));
            }
            BoundValue::Approx(h.mul_rational(&(&pairs / r(2 * (n - k - 1)))))
        }
        New1 => BoundValue::Exact(&pairs / r(2 * (n - k + 1))),
    };
    Ok(BoundResult::of(id, value))
}

fn parse_with_metric(id: &str, allowed: impl Fn(BoundId) -> bool, what: &str) -> Result<BoundId> {
    let id: BoundId = id.parse()?;
    if !allowed(id) {
        return Err(contract(format!("`{id}` is not a {what}")));
    }
    Ok(id)
}

/// Evaluate a total-variation bound from the standard registry.
pub fn evaluate_tv_bound(id: &str, params: &BoundParams, min_bits: u32) -> Result<BoundResult> {
    let id = parse_with_metric(id, |b| b.metric() == Metric::TvL1, "total-variation bound")?;
    BoundRegistry::standard().evaluate(id, params, min_bits)
}

/// Evaluate an upper or exact relative-entropy bound.
pub fn evaluate_kl_bound(id: &str, params: &BoundParams, min_bits: u32) -> Result<BoundResult> {
    let id = parse_with_metric(
        id,
        |b| b.metric() == Metric::Kl && b.kind() != BoundKind::Lower,
        "relative-entropy upper bound",
    )?;
    BoundRegistry::standard().evaluate(id, params, min_bits)
}

/// Evaluate a relative-entropy lower bound.
pub fn evaluate_kl_lower_bound(id: &str, params: &BoundParams, min_bits: u32) -> Result<BoundResult> {
    let id = parse_with_metric(
        id,
        |b| b.metric() == Metric::Kl && b.kind() == BoundKind::Lower,
        "relative-entropy lower bound",
    )?;
    BoundRegistry::standard().evaluate(id, params, min_bits)
}

/// What a verification is run against.
#[derive(Clone, Debug)]
pub enum Subject {
    /// Hypergeometric vs multinomial draws from one urn.
    UrnPair(UrnComposition),
    /// `P_k` vs the i.i.d. mixture under the empirical mixing measure.
    Model(ExchangeableModel),
}

impl Subject {
    pub fn colours(&self) -> usize {
        match self {
            Subject::UrnPair(u) => u.colours(),
            Subject::Model(m) => m.alphabet_size(),
        }
    }

    pub fn size(&self) -> u64 {
        match self {
            Subject::UrnPair(u) => u.size(),
            Subject::Model(m) => m.length(),
        }
    }

    /// True when the compared pair is `h(Q_U)` vs `b(Q_U)`.
    pub fn is_distinct_colour_urn(&self) -> bool {
        match self {
            Subject::UrnPair(u) => u.is_distinct(),
            Subject::Model(m) => m.is_random_permutation(),
        }
    }

    /// Whether a bound is asserted for this subject, or why not.
    pub fn applicability(&self, id: BoundId) -> std::result::Result<(), &'static str> {
        use BoundId::*;
        let urn = matches!(self, Subject::UrnPair(_));
        match id {
            DfSampling | Stam | HarremoesMatus | JgkUrn if !urn => Err("applies to urn pairs"),
            DfGeneral | DfFinite | GkBinary | GkbEntropy | WithOlly | Song | New1 | New2 if urn => {
                Err("applies to exchangeable models")
            }
            FreedmanUpper | FreedmanLower | ExactTvUniform | ExactKlUniform | YuConverse
                if !self.is_distinct_colour_urn() =>
            {
                Err("applies to the n-colour uniform urn only")
            }
            GkBinary if self.colours() != 2 => Err("binary alphabets only"),
            GkbEntropy => Err("evaluator only: holds for a different mixing measure"),
            _ => Ok(()),
        }
    }

    /// Bounds worth reporting for this subject: the asserted ones plus
    /// evaluator-only bounds on the same kind of subject.
    pub fn relevant_bounds(&self) -> Vec<BoundId> {
        BoundId::ALL
            .into_iter()
            .filter(|&id| {
                self.applicability(id).is_ok() || (id == BoundId::GkbEntropy && matches!(self, Subject::Model(_)))
            })
            .collect()
    }
}

/// The two laws compared for a subject at one `k`.
#[derive(Clone, Debug)]
pub enum SubjectLaws {
    Urn(CompositionDist, CompositionDist),
    Model(SequenceTypeDist, SequenceTypeDist),
}

impl SubjectLaws {
    pub fn build(subject: &Subject, k: u64) -> Result<Self> {
        Ok(match subject {
            Subject::UrnPair(u) => SubjectLaws::Urn(hypergeom_composition(u, k)?, multinom_composition(u, k)?),
            Subject::Model(m) => SubjectLaws::Model(marginal(m, k)?, iid_mixture_dist(&empirical_mixing(m), k)?),
        })
    }

    pub fn divergence(&self, metric: Metric, min_bits: u32) -> Result<DivergenceValue> {
        match self {
            SubjectLaws::Urn(p, q) => divergence(p, q, metric, min_bits),
            SubjectLaws::Model(p, q) => divergence(p, q, metric, min_bits),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CheckOutcome {
    Pass,
    Fail,
    Skipped(String),
}

/// One (bound, divergence) comparison.
#[derive(Clone, Debug)]
pub struct CheckEntry {
    pub bound_id: BoundId,
    pub metric: Metric,
    pub kind: BoundKind,
    pub divergence: Option<DivergenceValue>,
    pub bound: Option<BoundResult>,
    pub outcome: CheckOutcome,
    /// `bound - divergence` for upper bounds, `divergence - bound` for
    /// lower bounds, `-|difference|` for exact identities.
    pub slack: Option<f64>,
    /// Divergence and bound agree within [`TIGHT_TOLERANCE`].
    pub tight: bool,
    /// Precision at which the verdict was reached.
    pub bits: u32,
}

#[derive(Clone, Debug)]
pub struct VerificationReport {
    pub k: u64,
    /// Both divergences of the subject at `k`, at the requested precision.
    pub tv: ExactRational,
    pub kl: RelativeEntropy,
    pub entries: Vec<CheckEntry>,
}

impl VerificationReport {
    pub fn all_passed(&self) -> bool {
        self.entries.iter().all(|e| e.outcome != CheckOutcome::Fail)
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckEntry> {
        self.entries.iter().filter(|e| e.outcome == CheckOutcome::Fail)
    }

    pub fn entry(&self, id: BoundId) -> Option<&CheckEntry> {
        self.entries.iter().find(|e| e.bound_id == id)
    }

    pub fn pinsker(&self) -> PinskerCheck {
        pinsker_check_values(self.tv.clone(), self.kl.clone())
    }
}

/// Agreement tolerance for tightness flags.
pub const TIGHT_TOLERANCE: f64 = 1e-12;

/// Undecided comparisons are recomputed at doubled precision this many
/// times before the verdict falls back to "equal within error".
pub const MAX_REFINEMENTS: u32 = 3;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Verdict {
    Holds,
    Violated,
    Undecided,
}

fn div_interval(d: &DivergenceValue) -> Option<(ExactRational, ExactRational)> {
    match d {
        DivergenceValue::Tv(r) => Some((r.clone(), r.clone())),
        DivergenceValue::Kl(RelativeEntropy::Finite(p)) => Some((p.lower(), p.upper())),
        DivergenceValue::Kl(RelativeEntropy::Infinite) => None,
    }
}

fn is_exact_div(d: &DivergenceValue) -> bool {
    match d {
        DivergenceValue::Tv(_) => true,
        DivergenceValue::Kl(RelativeEntropy::Finite(p)) => p.is_exact(),
        DivergenceValue::Kl(RelativeEntropy::Infinite) => false,
    }
}

fn judge(kind: BoundKind, d: &DivergenceValue, b: &BoundValue) -> Verdict {
    let Some((dlo, dhi)) = div_interval(d) else {
        return match kind {
            BoundKind::Lower => Verdict::Holds,
            _ => Verdict::Violated,
        };
    };
    let exact = is_exact_div(d) && matches!(b, BoundValue::Exact(_));
    let (blo, bhi) = (b.lower(), b.upper());
    match kind {
        BoundKind::Upper => {
            if dhi <= blo {
                Verdict::Holds
            } else if dlo > bhi {
                Verdict::Violated
            } else {
                Verdict::Undecided
            }
        }
        BoundKind::Lower => {
            if dlo >= bhi {
                Verdict::Holds
            } else if dhi < blo {
                Verdict::Violated
            } else {
                Verdict::Undecided
            }
        }
        BoundKind::Exact => {
            if exact {
                if dlo == blo {
                    Verdict::Holds
                } else {
                    Verdict::Violated
                }
            } else if dhi < blo || dlo > bhi {
                Verdict::Violated
            } else {
                // overlapping enclosures: equal within error
                Verdict::Holds
            }
        }
    }
}

fn is_tight(d: &DivergenceValue, b: &BoundValue) -> bool {
    let Some((dlo, dhi)) = div_interval(d) else {
        return false;
    };
    let gap = (dhi - b.lower()).abs().max((b.upper() - dlo).abs());
    gap.to_f64() <= TIGHT_TOLERANCE
}

fn slack_of(kind: BoundKind, d: &DivergenceValue, b: &BoundValue) -> f64 {
    let dv = d.to_f64();
    let bv = b.to_f64();
    match kind {
        BoundKind::Upper => bv - dv,
        BoundKind::Lower => dv - bv,
        BoundKind::Exact => 0.0 - (dv - bv).abs(),
    }
}

fn subject_params(subject: &Subject, laws: &SubjectLaws, k: u64, bits: u32, want_entropy: bool) -> Result<BoundParams> {
    Ok(match subject {
        Subject::UrnPair(u) => BoundParams::new(u.size(), k).with_urn(u.clone()),
        Subject::Model(m) => {
            let mut p = BoundParams::new(m.length(), k).with_c(m.alphabet_size());
            if want_entropy {
                let p1 = match laws {
                    SubjectLaws::Model(_, _) => marginal(m, 1)?,
                    SubjectLaws::Urn(..) => unreachable!("model subject has model laws"),
                };
                p = p.with_entropy(entropy(&p1, bits)?);
            }
            p
        }
    })
}

/// Compare the subject's divergences at `k` against each requested bound.
///
/// Entries come back in the order of `bound_ids`. A bound whose verdict
/// cannot be certified at `min_bits` is recomputed at doubled precision
/// (up to [`MAX_REFINEMENTS`] times); if the enclosures still overlap the
/// bound is reported as holding within error.
pub fn verify_instance(
    subject: &Subject,
    k: u64,
    bound_ids: &[BoundId],
    registry: &BoundRegistry,
    min_bits: u32,
) -> Result<VerificationReport> {
    let laws = SubjectLaws::build(subject, k)?;
    let mut cache: BTreeMap<(Metric, u32), DivergenceValue> = BTreeMap::new();
    let mut get_div = |metric: Metric, bits: u32| -> Result<DivergenceValue> {
        let key = (metric, if metric == Metric::TvL1 { 0 } else { bits });
        if let Some(d) = cache.get(&key) {
            return Ok(d.clone());
        }
        let d = laws.divergence(metric, bits)?;
        cache.insert(key, d.clone());
        Ok(d)
    };
    let DivergenceValue::Tv(tv) = get_div(Metric::TvL1, min_bits)? else {
        unreachable!("TV request yields a TV value")
    };
    let DivergenceValue::Kl(kl) = get_div(Metric::Kl, min_bits)? else {
        unreachable!("KL request yields a KL value")
    };
    let want_entropy = bound_ids.contains(&BoundId::GkbEntropy);
    let mut params = subject_params(subject, &laws, k, min_bits, want_entropy)?;

    let mut entries = Vec::with_capacity(bound_ids.len());
    for &id in bound_ids {
        let metric = id.metric();
        let kind = id.kind();
        if let Err(reason) = subject.applicability(id) {
            // still evaluate, so reports show the value
            let bound = registry.evaluate(id, &params, min_bits)?;
            entries.push(CheckEntry {
                bound_id: id,
                metric,
                kind,
                divergence: None,
                bound: Some(bound),
                outcome: CheckOutcome::Skipped(reason.to_string()),
                slack: None,
                tight: false,
                bits: min_bits,
            });
            continue;
        }
        let mut bits = min_bits;
        let mut refinements = 0;
        loop {
            let d = get_div(metric, bits)?;
            let bound = registry.evaluate(id, &params, bits)?;
            let Some(b) = bound.value.clone() else {
                let reason = bound.reason.clone().unwrap_or_default();
                entries.push(CheckEntry {
                    bound_id: id,
                    metric,
                    kind,
                    divergence: Some(d),
                    bound: Some(bound),
                    outcome: CheckOutcome::Skipped(reason),
                    slack: None,
                    tight: false,
                    bits,
                });
                break;
            };
            let verdict = judge(kind, &d, &b);
            if verdict == Verdict::Undecided && refinements < MAX_REFINEMENTS {
                refinements += 1;
                bits *= 2;
                if want_entropy {
                    params = subject_params(subject, &laws, k, bits, true)?;
                }
                continue;
            }
            let outcome = match verdict {
                Verdict::Violated => CheckOutcome::Fail,
                _ => CheckOutcome::Pass,
            };
            entries.push(CheckEntry {
                bound_id: id,
                metric,
                kind,
                slack: Some(slack_of(kind, &d, &b)),
                tight: is_tight(&d, &b),
                divergence: Some(d),
                bound: Some(bound),
                outcome,
                bits,
            });
            break;
        }
    }
    Ok(VerificationReport { k, tv, kl, entries })
}

/// Certified `a <= b` for two bound values, for the relaxation checks.
pub fn certainly_le(a: &BoundValue, b: &BoundValue) -> Option<bool> {
    match (a, b) {
        (BoundValue::Exact(x), BoundValue::Exact(y)) => Some(x <= y),
        _ => {
            if a.upper() <= b.lower() {
                Some(true)
            } else if a.lower() > b.upper() {
                Some(false)
            } else {
                None
            }
        }
    }
}

impl PartialOrd for BoundValue {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        match certainly_le(self, other)? {
            true if certainly_le(other, self) == Some(true) => Some(Ordering::Equal),
            true => Some(Ordering::Less),
            false => Some(Ordering::Greater),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::DEFAULT_MIN_BITS;
    use crate::exchangeable::{model_from_weights, model_random_permutation, MixingMeasure};

    const BITS: u32 = DEFAULT_MIN_BITS;

    fn urn(v: &[u64]) -> UrnComposition {
        UrnComposition::new(v.to_vec()).unwrap()
    }

    fn value(res: &BoundResult) -> f64 {
        res.value.as_ref().unwrap().to_f64()
    }

    fn exact(res: &BoundResult) -> ExactRational {
        match res.value.as_ref().unwrap() {
            BoundValue::Exact(r) => r.clone(),
            other => panic!("expected exact value, got {other}"),
        }
    }

    #[test]
    fn ids_round_trip_and_unknown_rejected() {
        for id in BoundId::ALL {
            assert_eq!(id.as_str().parse::<BoundId>().unwrap(), id);
        }
        assert!(matches!("nope".parse::<BoundId>(), Err(Error::UnknownBound(_))));
        assert!(evaluate_tv_bound("stam", &BoundParams::new(4, 2), BITS).is_err());
        assert!(evaluate_kl_lower_bound("new2", &BoundParams::new(4, 2), BITS).is_err());
    }

    #[test]
    fn tv_bound_examples() {
        let e = evaluate_tv_bound("exact_tv_uniform", &BoundParams::new(3, 2), BITS).unwrap();
        assert_eq!(exact(&e), ExactRational::ratio(2, 3));
        let f = evaluate_tv_bound("freedman_upper", &BoundParams::new(3, 2), BITS).unwrap();
        assert_eq!(exact(&f), ExactRational::ratio(2, 3));
        let d = evaluate_tv_bound("df_finite", &BoundParams::new(2, 2).with_c(2), BITS).unwrap();
        assert_eq!(exact(&d), ExactRational::from(4u64));
        let g = evaluate_tv_bound("df_general", &BoundParams::new(3, 2), BITS).unwrap();
        assert_eq!(exact(&g), ExactRational::ratio(2, 3));
        assert_eq!(g.half_l1, Some(ExactRational::ratio(1, 3)));
        let lo = evaluate_tv_bound("freedman_lower", &BoundParams::new(3, 2), BITS).unwrap();
        assert!((value(&lo) - 2.0 * (1.0 - (-1.0f64 / 3.0).exp())).abs() < 1e-15);
    }

    #[test]
    fn kl_bound_examples() {
        let stam = evaluate_kl_bound("stam", &BoundParams::new(4, 2).with_c(2), BITS).unwrap();
        assert_eq!(exact(&stam), ExactRational::ratio(1, 9));
        let ln2 = std::f64::consts::LN_2;
        for id in ["new2", "song", "exact_kl_uniform"] {
            let v = evaluate_kl_bound(id, &BoundParams::new(2, 2), BITS).unwrap();
            if id == "song" {
                assert!(!v.valid());
            } else {
                assert!((value(&v) - ln2).abs() < 1e-15, "{id}");
            }
        }
        let new1 = evaluate_kl_bound("new1", &BoundParams::new(3, 2), BITS).unwrap();
        assert_eq!(exact(&new1), ExactRational::ratio(1, 2));
        let hm = evaluate_kl_bound("harremoes_matus", &BoundParams::new(4, 2).with_c(2), BITS).unwrap();
        assert!((value(&hm) - ((1.5f64).ln() - 0.5 + 1.0 / 3.0)).abs() < 1e-15);
        assert!((value(&hm) - 0.238799).abs() < 1e-6);
        let jgk = evaluate_kl_bound("jgk_urn", &BoundParams::new(4, 2).with_urn(urn(&[2, 2])), BITS).unwrap();
        let expected =
            0.5 * (2f64.ln() - 2.0 / 3.0) + 18.0 / 288.0 * 4.0 + (1.0 / 360.0) * (1.0 / 8.0 - 1.0 / 64.0) * 16.0;
        assert!((value(&jgk) - expected).abs() < 1e-15);
        assert!((value(&jgk) - 0.268101).abs() < 1e-6);
    }

    #[test]
    fn kl_lower_bound_examples() {
        let v = evaluate_kl_lower_bound("yu_converse", &BoundParams::new(3, 2), BITS).unwrap();
        assert!((value(&v) - 1.5f64.ln()).abs() < 1e-15);
        let v = evaluate_kl_lower_bound("yu_converse", &BoundParams::new(2, 1), BITS).unwrap();
        assert!(value(&v).abs() < 1e-20);
        let v = evaluate_kl_lower_bound("yu_converse", &BoundParams::new(4, 2), BITS).unwrap();
        assert!((value(&v) - (4.0f64 / 3.0).ln()).abs() < 1e-15);
        assert!((value(&v) - 0.28768).abs() < 1e-5);
    }

    #[test]
    fn validity_domains() {
        let p = |n, k| BoundParams::new(n, k).with_c(3);
        assert!(!evaluate_kl_bound("harremoes_matus", &p(5, 5), BITS).unwrap().valid());
        assert!(evaluate_kl_bound("harremoes_matus", &p(5, 4), BITS).unwrap().valid());
        let odd = BoundParams::new(7, 3).with_urn(urn(&[3, 2, 2]));
        assert!(evaluate_kl_bound("jgk_urn", &odd, BITS).unwrap().valid());
        let odd = BoundParams::new(7, 4).with_urn(urn(&[3, 2, 2]));
        assert!(!evaluate_kl_bound("jgk_urn", &odd, BITS).unwrap().valid());
        let empty_colour = BoundParams::new(4, 2).with_urn(urn(&[4, 0]));
        assert!(!evaluate_kl_bound("jgk_urn", &empty_colour, BITS).unwrap().valid());
        assert!(!evaluate_kl_bound("gk_binary", &p(5, 2), BITS).unwrap().valid());
        assert!(!evaluate_kl_bound("stam", &p(3, 4), BITS).unwrap().valid());
        assert!(!evaluate_kl_bound("gkb_entropy", &p(5, 2), BITS).unwrap().valid());
        let h = log_rational(&ExactRational::from(2u64), BITS).unwrap();
        let gkb = evaluate_kl_bound("gkb_entropy", &BoundParams::new(5, 2).with_entropy(h), BITS).unwrap();
        assert!((value(&gkb) - 2.0 * std::f64::consts::LN_2 / 4.0).abs() < 1e-15);
    }

    #[test]
    fn relaxation_dominates_main_form() {
        for n in 2..40u64 {
            for k in 1..=n {
                let res = evaluate_kl_bound("new2", &BoundParams::new(n, k), BITS).unwrap();
                match &res.relaxation {
                    Some(relaxed) => {
                        assert!(k * (k - 1) < 2 * n);
                        assert_ne!(certainly_le(res.value.as_ref().unwrap(), relaxed), Some(false));
                    }
                    None => assert!(k * (k - 1) >= 2 * n),
                }
            }
        }
    }

    #[test]
    fn verify_permutation_model() {
        let subject = Subject::Model(model_random_permutation(3).unwrap());
        let ids = [
            BoundId::New1,
            BoundId::New2,
            BoundId::ExactKlUniform,
            BoundId::YuConverse,
        ];
        let report = verify_instance(&subject, 2, &ids, &BoundRegistry::standard(), BITS).unwrap();
        assert!(report.all_passed());
        for e in &report.entries {
            assert_eq!(e.outcome, CheckOutcome::Pass, "{:?}", e.bound_id);
        }
        assert!(report.entry(BoundId::New2).unwrap().tight);
        assert!(report.entry(BoundId::YuConverse).unwrap().tight);
        assert!(!report.entry(BoundId::New1).unwrap().tight);
    }

    #[test]
    fn verify_urn_pair() {
        let subject = Subject::UrnPair(urn(&[2, 2]));
        let ids = [BoundId::Stam, BoundId::HarremoesMatus, BoundId::JgkUrn, BoundId::New1];
        let report = verify_instance(&subject, 2, &ids, &BoundRegistry::standard(), BITS).unwrap();
        assert!(report.all_passed());
        for id in [BoundId::Stam, BoundId::HarremoesMatus, BoundId::JgkUrn] {
            let e = report.entry(id).unwrap();
            assert_eq!(e.outcome, CheckOutcome::Pass);
            assert!((e.divergence.as_ref().unwrap().to_f64() - 0.056633).abs() < 1e-6);
        }
        assert!(matches!(
            report.entry(BoundId::New1).unwrap().outcome,
            CheckOutcome::Skipped(_)
        ));
    }

    #[test]
    fn verify_pair_model() {
        let model = model_from_weights(2, 2, MixingMeasure::point(urn(&[1, 1]))).unwrap();
        let subject = Subject::Model(model);
        let ids = [BoundId::DfFinite, BoundId::New2];
        let report = verify_instance(&subject, 2, &ids, &BoundRegistry::standard(), BITS).unwrap();
        assert!(report.all_passed());
        let df = report.entry(BoundId::DfFinite).unwrap();
        assert_eq!(df.divergence, Some(DivergenceValue::Tv(ExactRational::one())));
        let new2 = report.entry(BoundId::New2).unwrap();
        assert!(new2.tight);
        assert_eq!(new2.outcome, CheckOutcome::Pass);
    }

    #[test]
    fn corrupted_registry_fails() {
        let reg = BoundRegistry::standard().with_scaled(BoundId::Stam, ExactRational::ratio(1, 100));
        let subject = Subject::UrnPair(urn(&[2, 2]));
        let report = verify_instance(&subject, 2, &[BoundId::Stam], &reg, BITS).unwrap();
        assert!(!report.all_passed());
        assert_eq!(report.failures().next().unwrap().bound_id, BoundId::Stam);
    }

    #[test]
    fn infinite_divergence_fails_upper_bounds() {
        let d = DivergenceValue::Kl(RelativeEntropy::Infinite);
        let b = BoundValue::Exact(ExactRational::one());
        assert_eq!(judge(BoundKind::Upper, &d, &b), Verdict::Violated);
        assert_eq!(judge(BoundKind::Lower, &d, &b), Verdict::Holds);
    }

    #[test]
    fn registry_lists_every_id_once() {
        let reg = BoundRegistry::standard();
        assert_eq!(reg.specs().len(), BoundId::ALL.len());
        for id in BoundId::ALL {
            assert_eq!(reg.spec(id).metric, id.metric());
        }
    }
}
