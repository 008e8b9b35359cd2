//! The verification suite: enumerated grids of urns and exchangeable
//! models, checked against every applicable bound.
//!
//! Each criterion runs independently and reports its own check count,
//! per-bound tallies and failure witnesses. Criterion 8 (Pinsker) is
//! assembled from the divergence pairs computed by the others.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

use rayon::prelude::*;

use crate::arith::{falling_factorial, ExactRational, DEFAULT_MIN_BITS};
use crate::bounds::{verify_instance, BoundId, BoundRegistry, CheckEntry, CheckOutcome, Subject, VerificationReport};
use crate::divergence::{kl_terms, total_variation, DivergenceValue};
use crate::error::{Error, Result};
use crate::exchangeable::{
    empirical_mixing, iid_mixture_dist, marginal, model_from_weights, model_random_permutation, random_models,
    ExchangeableModel, MixingMeasure, SUITE_SEED,
};
use crate::urn::{
    enumerate_compositions, hypergeom_composition, hypergeom_sequence, multinom_composition, multinom_sequence,
    UrnComposition,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Scope {
    Fast,
    Full,
}

impl Scope {
    pub fn as_str(self) -> &'static str {
        match self {
            Scope::Fast => "fast",
            Scope::Full => "full",
        }
    }
}

impl fmt::Display for Scope {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Scope {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "fast" => Ok(Scope::Fast),
            "full" => Ok(Scope::Full),
            other => Err(Error::Parse(format!("unknown scope `{other}` (expected fast or full)"))),
        }
    }
}

/// Grid sizes for one scope.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Grid {
    /// Largest `n` for the `n`-colour uniform urn.
    pub uniform_max_n: u64,
    /// Largest colour count and urn size for the general urn grid.
    pub urn_max_c: usize,
    pub urn_max_n: u64,
    /// Random models: count, largest alphabet and length.
    pub models: usize,
    pub model_max_c: usize,
    pub model_max_n: u64,
    /// Extra binary models for the binary-alphabet bound.
    pub binary_models: usize,
    /// Largest `n` for the permutation-model tightness checks.
    pub permutation_max_n: u64,
}

impl Grid {
    pub fn for_scope(scope: Scope) -> Self {
        match scope {
            Scope::Full => Grid {
                uniform_max_n: 8,
                urn_max_c: 4,
                urn_max_n: 10,
                models: 200,
                model_max_c: 3,
                model_max_n: 10,
                binary_models: 100,
                permutation_max_n: 8,
            },
            Scope::Fast => Grid {
                uniform_max_n: 8,
                urn_max_c: 3,
                urn_max_n: 8,
                models: 50,
                model_max_c: 3,
                model_max_n: 8,
                binary_models: 25,
                permutation_max_n: 7,
            },
        }
    }
}

#[derive(Clone, Debug)]
pub struct SuiteConfig {
    pub scope: Scope,
    pub grid: Grid,
    pub seed: u64,
    pub min_bits: u32,
    pub registry: BoundRegistry,
}

impl SuiteConfig {
    pub fn new(scope: Scope) -> Self {
        Self {
            scope,
            grid: Grid::for_scope(scope),
            seed: SUITE_SEED,
            min_bits: DEFAULT_MIN_BITS,
            registry: BoundRegistry::standard(),
        }
    }

    pub fn with_registry(mut self, registry: BoundRegistry) -> Self {
        self.registry = registry;
        self
    }

    pub fn with_min_bits(mut self, bits: u32) -> Self {
        self.min_bits = bits;
        self
    }

    /// The random models of criteria 5, 7 and 10.
    pub fn models(&self) -> Vec<ExchangeableModel> {
        random_models(
            self.seed,
            self.grid.models,
            self.grid.model_max_c,
            self.grid.model_max_n,
        )
    }

    /// Binary models for criterion 9: the binary members of [`Self::models`]
    /// followed by a dedicated binary family.
    pub fn binary_models(&self) -> Vec<ExchangeableModel> {
        let mut out: Vec<_> = self.models().into_iter().filter(|m| m.alphabet_size() == 2).collect();
        out.extend(random_models(
            self.seed ^ 0xb1,
            self.grid.binary_models,
            2,
            self.grid.model_max_n,
        ));
        out
    }
}

/// A failed check with enough context to reproduce it.
#[derive(Clone, Debug, PartialEq)]
pub struct Witness {
    pub criterion: u8,
    pub bound_id: Option<BoundId>,
    pub subject: String,
    pub k: u64,
    pub detail: String,
}

impl fmt::Display for Witness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}] ", self.criterion)?;
        if let Some(id) = self.bound_id {
            write!(f, "{id} ")?;
        }
        write!(f, "failed on {} at k={}: {}", self.subject, self.k, self.detail)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct BoundTally {
    pub checked: u64,
    pub passed: u64,
    pub failed: u64,
    pub skipped: u64,
    pub tight: u64,
}

impl BoundTally {
    fn merge(&mut self, other: &BoundTally) {
        self.checked += other.checked;
        self.passed += other.passed;
        self.failed += other.failed;
        self.skipped += other.skipped;
        self.tight += other.tight;
    }
}

#[derive(Clone, Debug)]
pub struct CriterionReport {
    pub number: u8,
    pub name: &'static str,
    pub checks: u64,
    pub failures: Vec<Witness>,
    pub tallies: BTreeMap<BoundId, BoundTally>,
    /// Pinsker checks on the divergence pairs computed here.
    pub pinsker_checks: u64,
    pub pinsker_failures: Vec<Witness>,
    pub elapsed: Duration,
}

impl CriterionReport {
    fn new(number: u8, name: &'static str) -> Self {
        Self {
            number,
            name,
            checks: 0,
            failures: Vec::new(),
            tallies: BTreeMap::new(),
            pinsker_checks: 0,
            pinsker_failures: Vec::new(),
            elapsed: Duration::ZERO,
        }
    }

    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }

    fn check(&mut self, ok: bool, witness: impl FnOnce() -> Witness) {
        self.checks += 1;
        if !ok {
            self.failures.push(witness());
        }
    }

    fn witness(&self, bound_id: Option<BoundId>, subject: &str, k: u64, detail: impl Into<String>) -> Witness {
        Witness {
            criterion: self.number,
            bound_id,
            subject: subject.to_string(),
            k,
            detail: detail.into(),
        }
    }

    /// Fold one verification report in: every non-skipped entry is a check.
    fn absorb(&mut self, subject: &str, report: &VerificationReport) {
        for e in &report.entries {
            let tally = self.tallies.entry(e.bound_id).or_default();
            match &e.outcome {
                CheckOutcome::Skipped(_) => {
                    tally.skipped += 1;
                    continue;
                }
                CheckOutcome::Pass => {
                    tally.checked += 1;
                    tally.passed += 1;
                }
                CheckOutcome::Fail => {
                    tally.checked += 1;
                    tally.failed += 1;
                }
            }
            if e.tight {
                tally.tight += 1;
            }
            let ok = e.outcome == CheckOutcome::Pass;
            let detail = describe_entry(e);
            let w = self.witness(Some(e.bound_id), subject, report.k, detail);
            self.check(ok, || w);
        }
        self.pinsker(subject, report);
    }

    fn pinsker(&mut self, subject: &str, report: &VerificationReport) {
        let p = report.pinsker();
        self.pinsker_checks += 1;
        if !p.holds {
            let detail = format!("tv={} > sqrt(2 kl)={:.14e}", p.tv, p.sqrt_two_kl);
            self.pinsker_failures
                .push(self.witness(None, subject, report.k, detail));
        }
    }
}

fn describe_entry(e: &CheckEntry) -> String {
    let d = e.divergence.as_ref().map(fmt_div).unwrap_or_else(|| "-".into());
    let b = e
        .bound
        .as_ref()
        .and_then(|b| b.value.as_ref())
        .map(|v| v.to_string())
        .unwrap_or_else(|| "-".into());
    format!("{} divergence {d} vs {} bound {b}", e.metric, e.kind.as_str())
}

fn fmt_div(d: &DivergenceValue) -> String {
    match d {
        DivergenceValue::Tv(r) => r.to_string(),
        DivergenceValue::Kl(k) => k.to_string(),
    }
}

#[derive(Clone, Debug)]
pub struct SuiteReport {
    pub scope: Scope,
    pub seed: u64,
    pub min_bits: u32,
    pub criteria: Vec<CriterionReport>,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.criteria.iter().all(CriterionReport::passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Witness> {
        self.criteria.iter().flat_map(|c| c.failures.iter())
    }

    pub fn total_checks(&self) -> u64 {
        self.criteria.iter().map(|c| c.checks).sum()
    }

    /// Per-bound counts summed over all criteria.
    pub fn tallies(&self) -> BTreeMap<BoundId, BoundTally> {
        let mut out: BTreeMap<BoundId, BoundTally> = BTreeMap::new();
        for c in &self.criteria {
            for (id, t) in &c.tallies {
                out.entry(*id).or_default().merge(t);
            }
        }
        out
    }
}

/// Every urn with `1 <= c <= max_c` colours and `1 <= n <= max_n` balls,
/// empty colours included, in (c, n, descending composition) order.
pub fn urn_grid(max_c: usize, max_n: u64) -> Vec<UrnComposition> {
    let mut out = Vec::new();
    for c in 1..=max_c {
        for n in 1..=max_n {
            for s in enumerate_compositions(c, n, None).expect("c >= 1") {
                out.push(UrnComposition::new(s.counts().to_vec()).expect("n >= 1"));
            }
        }
    }
    out
}

fn urn_instances(urns: &[UrnComposition]) -> Vec<(Subject, u64)> {
    urns.iter()
        .flat_map(|u| (1..=u.size()).map(move |k| (Subject::UrnPair(u.clone()), k)))
        .collect()
}

fn model_instances(models: &[ExchangeableModel]) -> Vec<(Subject, u64)> {
    models
        .iter()
        .flat_map(|m| (1..=m.length()).map(move |k| (Subject::Model(m.clone()), k)))
        .collect()
}

fn subject_label(s: &Subject) -> String {
    match s {
        Subject::UrnPair(u) => format!("urn{u}"),
        Subject::Model(m) => m.to_string(),
    }
}

/// Verify every instance (in parallel) and return reports in input order.
fn verify_all(
    instances: &[(Subject, u64)],
    ids: &[BoundId],
    cfg: &SuiteConfig,
) -> Result<Vec<(String, VerificationReport)>> {
    instances
        .par_iter()
        .map(|(s, k)| {
            Ok((
                subject_label(s),
                verify_instance(s, *k, ids, &cfg.registry, cfg.min_bits)?,
            ))
        })
        .collect()
}

fn timed(
    number: u8,
    name: &'static str,
    body: impl FnOnce(&mut CriterionReport) -> Result<()>,
) -> Result<CriterionReport> {
    let start = Instant::now();
    let mut rep = CriterionReport::new(number, name);
    body(&mut rep)?;
    rep.elapsed = start.elapsed();
    Ok(rep)
}

fn uniform_urns(max_n: u64) -> Vec<UrnComposition> {
    (1..=max_n)
        .map(|n| UrnComposition::distinct(n).expect("n >= 1"))
        .collect()
}

/// Criterion 1: for the `n`-colour urn, TV equals `2(1 - n!/((n-k)! n^k))` exactly.
pub fn criterion_exact_tv(cfg: &SuiteConfig) -> Result<CriterionReport> {
    timed(1, "exact TV identity for the n-colour urn", |rep| {
        let inst = urn_instances(&uniform_urns(cfg.grid.uniform_max_n));
        for (label, report) in verify_all(&inst, &[BoundId::ExactTvUniform], cfg)? {
            rep.absorb(&label, &report);
        }
        Ok(())
    })
}

/// Criterion 2: Freedman's sandwich on the same grid.
pub fn criterion_freedman(cfg: &SuiteConfig) -> Result<CriterionReport> {
    timed(2, "Freedman sandwich for the n-colour urn", |rep| {
        let inst = urn_instances(&uniform_urns(cfg.grid.uniform_max_n));
        let ids = [BoundId::FreedmanLower, BoundId::FreedmanUpper, BoundId::ExactKlUniform];
        for (label, report) in verify_all(&inst, &ids, cfg)? {
            rep.absorb(&label, &report);
        }
        Ok(())
    })
}

/// Criterion 3: sequence-level and composition-level relative entropies have the
/// same terms: equal weights and identical exact log-arguments.
pub fn criterion_stam_equivalence(cfg: &SuiteConfig) -> Result<CriterionReport> {
    timed(3, "sequence/composition KL equivalence", |rep| {
        let urns = urn_grid(cfg.grid.urn_max_c, cfg.grid.urn_max_n);
        let inst: Vec<(UrnComposition, u64)> = urns
            .iter()
            .flat_map(|u| (1..=u.size()).map(move |k| (u.clone(), k)))
            .collect();
        let results: Vec<Result<Option<String>>> = inst
            .par_iter()
            .map(|(u, k)| {
                let (h, b) = (hypergeom_composition(u, *k)?, multinom_composition(u, *k)?);
                let (hs, bs) = (hypergeom_sequence(u, *k)?, multinom_sequence(u, *k)?);
                let comp_terms = kl_terms(&h, &b)?;
                let seq_terms = kl_terms(&hs, &bs)?;
                if comp_terms != seq_terms {
                    return Ok(Some("KL term multisets differ".to_string()));
                }
                if total_variation(&h, &b)? != total_variation(&hs, &bs)? {
                    return Ok(Some("TV differs between levels".to_string()));
                }
                Ok(None)
            })
            .collect();
        for ((u, k), res) in inst.iter().zip(results) {
            let bad = res?;
            let w = rep.witness(None, &format!("urn{u}"), *k, bad.clone().unwrap_or_default());
            rep.check(bad.is_none(), || w);
        }
        Ok(())
    })
}

/// Criterion 4: the urn-level relative-entropy bounds on the general urn grid.
pub fn criterion_sampling_bounds(cfg: &SuiteConfig) -> Result<CriterionReport> {
    timed(4, "KL sampling bounds on the urn grid", |rep| {
        let inst = urn_instances(&urn_grid(cfg.grid.urn_max_c, cfg.grid.urn_max_n));
        let ids = [
            BoundId::Stam,
            BoundId::HarremoesMatus,
            BoundId::JgkUrn,
            BoundId::DfSampling,
        ];
        for (label, report) in verify_all(&inst, &ids, cfg)? {
            rep.absorb(&label, &report);
        }
        Ok(())
    })
}

const DF_KL_IDS: [BoundId; 7] = [
    BoundId::New1,
    BoundId::New2,
    BoundId::WithOlly,
    BoundId::Song,
    BoundId::ExactKlUniform,
    BoundId::YuConverse,
    BoundId::GkbEntropy,
];

const DF_TV_IDS: [BoundId; 5] = [
    BoundId::DfFinite,
    BoundId::DfGeneral,
    BoundId::FreedmanUpper,
    BoundId::FreedmanLower,
    BoundId::ExactTvUniform,
];

/// Criterion 5: de Finetti relative-entropy bounds on the random models.
pub fn criterion_definetti_kl(cfg: &SuiteConfig) -> Result<CriterionReport> {
    timed(5, "de Finetti KL bounds on random models", |rep| {
        let inst = model_instances(&cfg.models());
        for (label, report) in verify_all(&inst, &DF_KL_IDS, cfg)? {
            rep.absorb(&label, &report);
        }
        Ok(())
    })
}

/// Criterion 6, tightness: the pair model and permutation models meet the
/// collision-set bound with equality, and their TV gap is exact.
pub fn criterion_tightness(cfg: &SuiteConfig) -> Result<CriterionReport> {
    timed(6, "tightness instances", |rep| {
        let pair_urn = UrnComposition::new(vec![1, 1])?;
        let pair = model_from_weights(2, 2, MixingMeasure::point(pair_urn))?;
        let mut inst = vec![(Subject::Model(pair), 2u64)];
        for n in 3..=cfg.grid.permutation_max_n {
            for k in 2..n {
                inst.push((Subject::Model(model_random_permutation(n)?), k));
            }
        }
        let ids = [
            BoundId::New2,
            BoundId::YuConverse,
            BoundId::ExactKlUniform,
            BoundId::ExactTvUniform,
        ];
        for (label, report) in verify_all(&inst, &ids, cfg)? {
            rep.absorb(&label, &report);
            for id in [BoundId::New2, BoundId::YuConverse] {
                let Some(e) = report.entry(id) else { continue };
                if e.outcome == CheckOutcome::Fail || matches!(e.outcome, CheckOutcome::Skipped(_)) {
                    continue;
                }
                let w = rep.witness(Some(id), &label, report.k, "gap does not meet the bound with equality");
                rep.check(e.tight, || w);
            }
        }
        Ok(())
    })
}

/// Criterion 7: de Finetti TV bounds on the random models.
pub fn criterion_definetti_tv(cfg: &SuiteConfig) -> Result<CriterionReport> {
    timed(7, "de Finetti TV bounds on random models", |rep| {
        let inst = model_instances(&cfg.models());
        for (label, report) in verify_all(&inst, &DF_TV_IDS, cfg)? {
            rep.absorb(&label, &report);
        }
        Ok(())
    })
}

/// Criterion 8: Pinsker on every pair computed by the other criteria.
pub fn criterion_pinsker(others: &[CriterionReport]) -> CriterionReport {
    let mut rep = CriterionReport::new(8, "Pinsker on every computed pair");
    for c in others {
        rep.checks += c.pinsker_checks;
        rep.failures.extend(c.pinsker_failures.iter().cloned().map(|mut w| {
            w.criterion = 8;
            w
        }));
    }
    rep
}

/// Criterion 9: the binary-alphabet bound on binary random models.
pub fn criterion_binary(cfg: &SuiteConfig) -> Result<CriterionReport> {
    timed(9, "binary-alphabet bound", |rep| {
        let inst: Vec<_> = model_instances(&cfg.binary_models())
            .into_iter()
            .filter(|(s, k)| *k < s.size())
            .collect();
        for (label, report) in verify_all(&inst, &[BoundId::GkBinary], cfg)? {
            rep.absorb(&label, &report);
        }
        Ok(())
    })
}

/// Criterion 10: per class `s`: `M_k(s) >= (n)_k / n^k * P_k(s)`, exactly.
pub fn criterion_index_vectors(cfg: &SuiteConfig) -> Result<CriterionReport> {
    timed(10, "index-vector domination of the i.i.d. mixture", |rep| {
        let models = cfg.models();
        let inst: Vec<(&ExchangeableModel, u64)> = models
            .iter()
            .flat_map(|m| (1..=m.length()).map(move |k| (m, k)))
            .collect();
        let results: Vec<Result<(u64, Vec<String>)>> =
            inst.par_iter().map(|(m, k)| index_vector_check(m, *k)).collect();
        for ((m, k), res) in inst.iter().zip(results) {
            let (checked, bad) = res?;
            rep.checks += checked - bad.len() as u64;
            for detail in bad {
                let w = rep.witness(None, &m.to_string(), *k, detail);
                rep.check(false, || w);
            }
        }
        Ok(())
    })
}

/// Checks one `(model, k)`; returns the number of classes checked and a
/// description of each violation.
pub fn index_vector_check(model: &ExchangeableModel, k: u64) -> Result<(u64, Vec<String>)> {
    let n = model.length();
    let factor = ExactRational::from_biguint(falling_factorial(n, k)) / ExactRational::from(n).pow(k as u32);
    let pk = marginal(model, k)?;
    let mk = iid_mixture_dist(&empirical_mixing(model), k)?;
    let mut checked = 0;
    let mut bad = Vec::new();
    for (s, _) in pk.iter() {
        checked += 1;
        let lhs = mk.class_mass(s);
        let rhs = &factor * pk.class_mass(s);
        if lhs < rhs {
            bad.push(format!("class {s}: M_k = {lhs} < {rhs}"));
        }
    }
    Ok((checked, bad))
}

/// Run criteria 1-10 in order.
pub fn run_suite(cfg: &SuiteConfig) -> Result<SuiteReport> {
    let mut criteria = vec![
        criterion_exact_tv(cfg)?,
        criterion_freedman(cfg)?,
        criterion_stam_equivalence(cfg)?,
        criterion_sampling_bounds(cfg)?,
        criterion_definetti_kl(cfg)?,
        criterion_tightness(cfg)?,
        criterion_definetti_tv(cfg)?,
    ];
    let pinsker = criterion_pinsker(&criteria);
    criteria.push(pinsker);
    criteria.push(criterion_binary(cfg)?);
    criteria.push(criterion_index_vectors(cfg)?);
    Ok(SuiteReport {
        scope: cfg.scope,
        seed: cfg.seed,
        min_bits: cfg.min_bits,
        criteria,
    })
}
