//! Finite exchangeable laws as mixtures over type classes.
//!
//! An exchangeable law on `S^n` draws an n-type `Q` from its type weights
//! and then a uniformly random sequence of type `Q`. The first `k`
//! coordinates are therefore a mixture of draws without replacement from
//! the urns `nQ`, and the i.i.d. mixture under the same weights is the
//! corresponding mixture of draws with replacement.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigUint;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::arith::{falling_factorial, multinomial_coeff, ExactRational};
use crate::divergence::{divergence, DivergenceValue, Metric};
use crate::error::{contract, domain, Result};
use crate::urn::{enumerate_compositions, product_power, DrawComposition, SequenceTypeDist, UrnComposition};

/// Seed of the pseudo-random model family used by the verification suites.
pub const SUITE_SEED: u64 = 0x00de_f1e7_7120_2025;

/// A finitely supported law over n-types, each given by its urn `nQ`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct MixingMeasure {
    colours: usize,
    urn_size: u64,
    atoms: BTreeMap<UrnComposition, ExactRational>,
}

impl MixingMeasure {
    /// Zero-weight atoms are dropped after validation.
    pub fn new(atoms: impl IntoIterator<Item = (UrnComposition, ExactRational)>) -> Result<Self> {
        let mut map = BTreeMap::new();
        let mut shape: Option<(usize, u64)> = None;
        let mut total = ExactRational::zero();
        for (urn, w) in atoms {
            let this = (urn.colours(), urn.size());
            match shape {
                None => shape = Some(this),
                Some(s) if s != this => {
                    return Err(contract(format!(
                        "type {urn} has (c={}, n={}), expected (c={}, n={})",
                        this.0, this.1, s.0, s.1
                    )))
                }
                _ => {}
            }
            if w.is_negative() {
                return Err(contract(format!("negative weight {w} on type {urn}")));
            }
            total += &w;
            if map.insert(urn.clone(), w).is_some() {
                return Err(contract(format!("type {urn} listed twice")));
            }
        }
        let (colours, urn_size) = shape.ok_or_else(|| contract("type_weights is empty"))?;
        if !total.is_one() {
            return Err(contract(format!("type_weights sum ≠ 1 (they sum to {total})")));
        }
        map.retain(|_, w| !w.is_zero());
        Ok(Self {
            colours,
            urn_size,
            atoms: map,
        })
    }

    pub fn point(urn: UrnComposition) -> Self {
        Self::new([(urn, ExactRational::one())]).expect("a point mass is a valid mixing measure")
    }

    pub fn colours(&self) -> usize {
        self.colours
    }

    pub fn urn_size(&self) -> u64 {
        self.urn_size
    }

    pub fn weight(&self, urn: &UrnComposition) -> ExactRational {
        self.atoms.get(urn).cloned().unwrap_or_else(ExactRational::zero)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&UrnComposition, &ExactRational)> {
        self.atoms.iter()
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    /// The mean measure `sum_Q w(Q) Q`.
    pub fn mean(&self) -> Vec<ExactRational> {
        let mut m = vec![ExactRational::zero(); self.colours];
        for (urn, w) in &self.atoms {
            for (mj, q) in m.iter_mut().zip(urn.frequencies()) {
                *mj += &(w * &q);
            }
        }
        m
    }
}

/// An exchangeable law on `{0, .., c-1}^n` in type-mixture form.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct ExchangeableModel {
    weights: MixingMeasure,
}

impl ExchangeableModel {
    pub fn alphabet_size(&self) -> usize {
        self.weights.colours()
    }

    pub fn length(&self) -> u64 {
        self.weights.urn_size()
    }

    pub fn type_weights(&self) -> &MixingMeasure {
        &self.weights
    }

    /// True when the model is a uniformly random permutation of `n`
    /// distinct symbols.
    pub fn is_random_permutation(&self) -> bool {
        self.weights.len() == 1
            && self.weights.iter().all(|(u, _)| u.is_distinct())
            && self.alphabet_size() as u64 == self.length()
    }

    /// Probability of one full sequence.
    pub fn sequence_prob(&self, seq: &[usize]) -> Result<ExactRational> {
        marginal(self, self.length())?.sequence_prob(seq)
    }
}

impl fmt::Display for ExchangeableModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "model(c={}, n={};", self.alphabet_size(), self.length())?;
        for (i, (u, w)) in self.weights.iter().enumerate() {
            let sep = if i == 0 { " " } else { ", " };
            write!(f, "{sep}{u}:{w}")?;
        }
        f.write_str(")")
    }
}

pub fn model_from_weights(c: usize, n: u64, weights: MixingMeasure) -> Result<ExchangeableModel> {
    if weights.colours() != c || weights.urn_size() != n {
        return Err(contract(format!(
            "type weights are over (c={}, n={}), model declares (c={c}, n={n})",
            weights.colours(),
            weights.urn_size()
        )));
    }
    Ok(ExchangeableModel { weights })
}

/// A uniformly random ordering of `n` distinct symbols.
pub fn model_random_permutation(n: u64) -> Result<ExchangeableModel> {
    if n == 0 {
        return Err(domain("permutation model needs n >= 1"));
    }
    let urn = UrnComposition::distinct(n)?;
    Ok(ExchangeableModel {
        weights: MixingMeasure::point(urn),
    })
}

/// The law of `n` i.i.d. draws from a finite mixture of product laws,
/// collapsed onto type classes.
pub fn model_iid_mixture(components: &[(Vec<ExactRational>, ExactRational)], n: u64) -> Result<ExchangeableModel> {
    let c = components
        .first()
        .map(|(p, _)| p.len())
        .ok_or_else(|| contract("i.i.d. mixture needs at least one component"))?;
    if c == 0 || n == 0 {
        return Err(contract("i.i.d. mixture needs c >= 1 and n >= 1"));
    }
    let mut total = ExactRational::zero();
    for (p, w) in components {
        if p.len() != c {
            return Err(contract("components have different alphabet sizes"));
        }
        if p.iter().any(ExactRational::is_negative) || !p.iter().sum::<ExactRational>().is_one() {
            return Err(contract("component is not a probability vector"));
        }
        if w.is_negative() {
            return Err(contract(format!("negative component weight {w}")));
        }
        total += w;
    }
    if !total.is_one() {
        return Err(contract(format!("component weights sum to {total} ≠ 1")));
    }
    let atoms = enumerate_compositions(c, n, None)?.into_iter().map(|s| {
        let class = ExactRational::from(s.class_size());
        let w: ExactRational = components
            .iter()
            .map(|(p, cw)| cw * &class * product_power(p, &s))
            .sum();
        (UrnComposition::new(s.counts().to_vec()).expect("n >= 1"), w)
    });
    let weights = MixingMeasure::new(atoms)?;
    Ok(ExchangeableModel { weights })
}

/// Build a model from an explicit joint p.m.f. on `S^n`, checking that it
/// is constant on every type class. Sequences not listed have mass zero.
pub fn model_from_joint_pmf(
    c: usize,
    n: u64,
    pmf: impl IntoIterator<Item = (Vec<usize>, ExactRational)>,
) -> Result<ExchangeableModel> {
    let mut classes: BTreeMap<DrawComposition, (ExactRational, BigUint)> = BTreeMap::new();
    let mut seen = std::collections::BTreeSet::new();
    for (seq, p) in pmf {
        if seq.len() as u64 != n || seq.iter().any(|&x| x >= c) {
            return Err(contract(format!("sequence {seq:?} is not in S^n")));
        }
        if !seen.insert(seq.clone()) {
            return Err(contract(format!("sequence {seq:?} listed twice")));
        }
        let mut counts = vec![0u64; c];
        for &x in &seq {
            counts[x] += 1;
        }
        let entry = classes
            .entry(DrawComposition::new(counts))
            .or_insert_with(|| (p.clone(), BigUint::from(0u32)));
        if entry.0 != p {
            return Err(contract(format!(
                "not exchangeable: sequence {seq:?} has mass {p}, its class has {}",
                entry.0
            )));
        }
        entry.1 += 1u32;
    }
    let mut atoms = Vec::new();
    for (s, (p, listed)) in classes {
        let size = multinomial_coeff(n, s.counts())?;
        if !p.is_zero() && listed != size {
            return Err(contract(format!(
                "not exchangeable: class {s} has {listed} of {size} sequences with mass {p}"
            )));
        }
        atoms.push((
            UrnComposition::new(s.counts().to_vec())?,
            p * ExactRational::from_biguint(size),
        ));
    }
    model_from_weights(c, n, MixingMeasure::new(atoms)?)
}

/// Law `P_k` of the first `k` coordinates, a mixture of sequence-level
/// hypergeometric laws.
pub fn marginal(model: &ExchangeableModel, k: u64) -> Result<SequenceTypeDist> {
    let n = model.length();
    if k == 0 || k > n {
        return Err(domain(format!("marginal needs 1 <= k <= n = {n}, got k = {k}")));
    }
    let c = model.alphabet_size();
    let draws_total = ExactRational::from_biguint(falling_factorial(n, k));
    let entries = enumerate_compositions(c, k, None)?.into_iter().map(|s| {
        let p: ExactRational = model
            .weights
            .iter()
            .map(|(urn, w)| {
                let ways = urn
                    .counts()
                    .iter()
                    .zip(s.counts())
                    .fold(BigUint::from(1u32), |acc, (&l, &x)| acc * falling_factorial(l, x));
                w * ExactRational::from_biguint(ways)
            })
            .sum::<ExactRational>()
            / &draws_total;
        (s, p)
    });
    SequenceTypeDist::new(c, k, entries)
}

/// The law of the empirical measure, which is exactly the type weights.
pub fn empirical_mixing(model: &ExchangeableModel) -> MixingMeasure {
    model.weights.clone()
}

/// The i.i.d. mixture `M_{k, mu}`: `sum_Q mu(Q) prod_j Q(j)^{s_j}` per sequence.
pub fn iid_mixture_dist(mu: &MixingMeasure, k: u64) -> Result<SequenceTypeDist> {
    if k == 0 {
        return Err(domain("i.i.d. mixture needs k >= 1"));
    }
    let freqs: Vec<(Vec<ExactRational>, &ExactRational)> = mu.iter().map(|(u, w)| (u.frequencies(), w)).collect();
    let entries = enumerate_compositions(mu.colours(), k, None)?.into_iter().map(|s| {
        let p: ExactRational = freqs.iter().map(|(q, w)| *w * product_power(q, &s)).sum();
        (s, p)
    });
    SequenceTypeDist::new(mu.colours(), k, entries)
}

/// Divergence between `P_k` and the i.i.d. mixture under the empirical
/// mixing measure.
pub fn definetti_gap(model: &ExchangeableModel, k: u64, metric: Metric, min_bits: u32) -> Result<DivergenceValue> {
    let pk = marginal(model, k)?;
    let mk = iid_mixture_dist(&empirical_mixing(model), k)?;
    divergence(&pk, &mk, metric, min_bits)
}

/// Draw a model with `c` colours and length `n`: a handful of distinct
/// types with small positive integer weights, normalized.
pub fn random_model<R: Rng>(rng: &mut R, c: usize, n: u64) -> Result<ExchangeableModel> {
    let mut types = enumerate_compositions(c, n, None)?;
    types.shuffle(rng);
    let support = rng.gen_range(1..=types.len().min(6));
    let raw: Vec<u64> = (0..support).map(|_| rng.gen_range(1..=20)).collect();
    let total: u64 = raw.iter().sum();
    let atoms = types.into_iter().take(support).zip(raw).map(|(s, w)| {
        (
            UrnComposition::new(s.counts().to_vec()).expect("n >= 1"),
            ExactRational::ratio(w as i64, total as i64),
        )
    });
    model_from_weights(c, n, MixingMeasure::new(atoms)?)
}

/// One random model with the given shape, reproducible from `seed`.
pub fn random_model_seeded(seed: u64, c: usize, n: u64) -> Result<ExchangeableModel> {
    if c == 0 || n == 0 {
        return Err(domain("random models need c >= 1 and n >= 1"));
    }
    random_model(&mut ChaCha8Rng::seed_from_u64(seed), c, n)
}

/// `count` models with `2 <= c <= max_c` and `2 <= n <= max_n`, reproducible
/// from `seed`.
pub fn random_models(seed: u64, count: usize, max_c: usize, max_n: u64) -> Vec<ExchangeableModel> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let c = rng.gen_range(2..=max_c.max(2));
            let n = rng.gen_range(2..=max_n.max(2));
            random_model(&mut rng, c, n).expect("valid random model parameters")
        })
        .collect()
}

/// Serialized model: `{"alphabet_size", "n", "type_weights": [{"counts", "weight"}]}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelFile {
    pub alphabet_size: usize,
    pub n: u64,
    pub type_weights: Vec<TypeWeight>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TypeWeight {
    pub counts: Vec<u64>,
    pub weight: ExactRational,
}

impl TryFrom<ModelFile> for ExchangeableModel {
    type Error = crate::Error;

    fn try_from(file: ModelFile) -> Result<Self> {
        let mut atoms = Vec::with_capacity(file.type_weights.len());
        for tw in file.type_weights {
            if tw.counts.len() != file.alphabet_size {
                return Err(contract(format!(
                    "type {:?} has {} counts, alphabet_size is {}",
                    tw.counts,
                    tw.counts.len(),
                    file.alphabet_size
                )));
            }
            if tw.counts.iter().sum::<u64>() != file.n {
                return Err(contract(format!("type {:?} does not sum to n = {}", tw.counts, file.n)));
            }
            atoms.push((UrnComposition::new(tw.counts)?, tw.weight));
        }
        model_from_weights(file.alphabet_size, file.n, MixingMeasure::new(atoms)?)
    }
}

impl From<&ExchangeableModel> for ModelFile {
    fn from(model: &ExchangeableModel) -> Self {
        ModelFile {
            alphabet_size: model.alphabet_size(),
            n: model.length(),
            type_weights: model
                .weights
                .iter()
                .map(|(u, w)| TypeWeight {
                    counts: u.counts().to_vec(),
                    weight: w.clone(),
                })
                .collect(),
        }
    }
}
