//! Total variation (L1 convention), relative entropy and partition
//! coarsening for finite laws stored by type class.
//!
//! A law is seen through [`DiscreteLaw`]: each stored outcome stands for
//! `multiplicity` underlying points that all carry the same `mass`. For a
//! composition-level law the multiplicity is one; for a sequence-level law
//! it is the size of the type class. Sums over the underlying space are
//! therefore sums over stored outcomes weighted by multiplicity, and no law
//! on `S^k` is ever materialized.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_bigint::BigInt;
use serde::{Deserialize, Serialize};

use crate::arith::{log_rational, ExactRational, PrecisionFloat, GUARD_BITS};
use crate::error::{contract, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Metric {
    /// Total variation with the factor 2: the L1 distance, in `[0, 2]`.
    #[serde(rename = "tv")]
    TvL1,
    #[serde(rename = "kl")]
    Kl,
}

impl Metric {
    pub fn as_str(self) -> &'static str {
        match self {
            Metric::TvL1 => "tv",
            Metric::Kl => "kl",
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Metric {
    type Err = crate::Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "tv" | "tv_l1" | "l1" => Ok(Metric::TvL1),
            "kl" | "relative_entropy" => Ok(Metric::Kl),
            other => Err(crate::Error::Parse(format!("unknown metric `{other}`"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LawLevel {
    Composition,
    Sequence,
    Cells,
}

/// What two laws must agree on before they can be compared.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct LawShape {
    pub level: LawLevel,
    pub colours: usize,
    pub draws: u64,
}

pub trait DiscreteLaw {
    type Outcome: Ord + Clone + fmt::Debug;

    fn shape(&self) -> LawShape;
    /// Mass of one underlying point represented by `o`.
    fn mass(&self, o: &Self::Outcome) -> ExactRational;
    /// Number of underlying points represented by `o`.
    fn multiplicity(&self, o: &Self::Outcome) -> BigInt;
    /// Outcomes of positive mass.
    fn support(&self) -> Vec<&Self::Outcome>;

    /// Total mass of the points represented by `o`.
    fn outcome_mass(&self, o: &Self::Outcome) -> ExactRational {
        self.mass(o) * ExactRational::from(self.multiplicity(o))
    }
}

fn check_shapes<L: DiscreteLaw>(p: &L, q: &L) -> Result<()> {
    if p.shape() != q.shape() {
        return Err(contract(format!(
            "laws are not comparable: {:?} vs {:?}",
            p.shape(),
            q.shape()
        )));
    }
    Ok(())
}

fn union_support<'a, L: DiscreteLaw>(p: &'a L, q: &'a L) -> BTreeSet<&'a L::Outcome> {
    p.support().into_iter().chain(q.support()).collect()
}

/// `sum |p - q|` over the underlying space, exactly.
pub fn total_variation<L: DiscreteLaw>(p: &L, q: &L) -> Result<ExactRational> {
    check_shapes(p, q)?;
    Ok(union_support(p, q)
        .into_iter()
        .map(|o| (p.mass(o) - q.mass(o)).abs() * ExactRational::from(p.multiplicity(o)))
        .sum())
}

/// One summand `weight * log(ratio)` of a relative entropy, grouped by
/// stored outcome. `ratio` is `None` where `q` vanishes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KlTerm<O> {
    pub outcome: O,
    pub weight: ExactRational,
    pub ratio: Option<ExactRational>,
}

/// The terms of `D(p || q)`: for each outcome with `p > 0`, its total
/// `p`-mass and the exact pointwise ratio `p / q`.
pub fn kl_terms<L: DiscreteLaw>(p: &L, q: &L) -> Result<Vec<KlTerm<L::Outcome>>> {
    check_shapes(p, q)?;
    Ok(p.support()
        .into_iter()
        .map(|o| {
            let pm = p.mass(o);
            let qm = q.mass(o);
            let ratio = if qm.is_zero() { None } else { Some(&pm / &qm) };
            KlTerm {
                outcome: o.clone(),
                weight: p.outcome_mass(o),
                ratio,
            }
        })
        .collect())
}

/// Relative entropy in nats, or `Infinite` when `p` is not absolutely
/// continuous with respect to `q`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RelativeEntropy {
    Finite(PrecisionFloat),
    Infinite,
}

impl RelativeEntropy {
    pub fn finite(&self) -> Option<&PrecisionFloat> {
        match self {
            RelativeEntropy::Finite(v) => Some(v),
            RelativeEntropy::Infinite => None,
        }
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, RelativeEntropy::Infinite)
    }

    pub fn to_f64(&self) -> f64 {
        self.finite().map_or(f64::INFINITY, PrecisionFloat::to_f64)
    }

    pub fn error_bound_f64(&self) -> f64 {
        self.finite().map_or(0.0, PrecisionFloat::error_bound_f64)
    }
}

impl fmt::Display for RelativeEntropy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RelativeEntropy::Finite(v) => v.fmt(f),
            RelativeEntropy::Infinite => f.write_str("inf"),
        }
    }
}

pub fn relative_entropy_from_terms<O>(terms: &[KlTerm<O>], min_bits: u32) -> Result<RelativeEntropy> {
    let mut acc = PrecisionFloat::zero(min_bits + GUARD_BITS);
    for t in terms {
        let Some(ratio) = &t.ratio else {
            return Ok(RelativeEntropy::Infinite);
        };
        acc = acc.add(&log_rational(ratio, min_bits)?.mul_rational(&t.weight));
    }
    Ok(RelativeEntropy::Finite(acc))
}

/// `D(p || q) = sum_{p > 0} p log(p / q)`, natural log.
pub fn relative_entropy<L: DiscreteLaw>(p: &L, q: &L, min_bits: u32) -> Result<RelativeEntropy> {
    relative_entropy_from_terms(&kl_terms(p, q)?, min_bits)
}

/// Shannon entropy `-sum p log p` of a law, in nats.
pub fn entropy<L: DiscreteLaw>(p: &L, min_bits: u32) -> Result<PrecisionFloat> {
    let mut acc = PrecisionFloat::zero(min_bits + GUARD_BITS);
    for o in p.support() {
        let inv = p.mass(o).recip()?;
        acc = acc.add(&log_rational(&inv, min_bits)?.mul_rational(&p.outcome_mass(o)));
    }
    Ok(acc)
}

/// Either divergence, tagged by metric.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum DivergenceValue {
    Tv(ExactRational),
    Kl(RelativeEntropy),
}

impl DivergenceValue {
    pub fn metric(&self) -> Metric {
        match self {
            DivergenceValue::Tv(_) => Metric::TvL1,
            DivergenceValue::Kl(_) => Metric::Kl,
        }
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, DivergenceValue::Kl(RelativeEntropy::Infinite))
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            DivergenceValue::Tv(r) => r.to_f64(),
            DivergenceValue::Kl(k) => k.to_f64(),
        }
    }

    pub fn error_bound_f64(&self) -> f64 {
        match self {
            DivergenceValue::Tv(_) => 0.0,
            DivergenceValue::Kl(k) => k.error_bound_f64(),
        }
    }
}

pub fn divergence<L: DiscreteLaw>(p: &L, q: &L, metric: Metric, min_bits: u32) -> Result<DivergenceValue> {
    Ok(match metric {
        Metric::TvL1 => DivergenceValue::Tv(total_variation(p, q)?),
        Metric::Kl => DivergenceValue::Kl(relative_entropy(p, q, min_bits)?),
    })
}

/// Outcome of checking `TV <= sqrt(2 KL)`.
#[derive(Clone, Debug)]
pub struct PinskerCheck {
    pub tv: ExactRational,
    pub kl: RelativeEntropy,
    /// `sqrt(2 KL)` for display; the verdict does not use it.
    pub sqrt_two_kl: f64,
    /// Certified: `TV^2 <= 2 * (upper end of the KL enclosure)`.
    pub holds: bool,
}

pub fn pinsker_check_values(tv: ExactRational, kl: RelativeEntropy) -> PinskerCheck {
    let (sqrt_two_kl, holds) = match &kl {
        RelativeEntropy::Infinite => (f64::INFINITY, true),
        RelativeEntropy::Finite(v) => {
            let two_upper = v.upper() * ExactRational::from(2u64);
            ((2.0 * v.to_f64()).max(0.0).sqrt(), &tv * &tv <= two_upper)
        }
    };
    PinskerCheck {
        tv,
        kl,
        sqrt_two_kl,
        holds,
    }
}

pub fn pinsker_slack<L: DiscreteLaw>(p: &L, q: &L, min_bits: u32) -> Result<PinskerCheck> {
    let tv = total_variation(p, q)?;
    let kl = relative_entropy(p, q, min_bits)?;
    Ok(pinsker_check_values(tv, kl))
}

/// A law on the cells of a partition.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CellDist {
    masses: Vec<ExactRational>,
    cells: Vec<usize>,
}

impl CellDist {
    pub fn masses(&self) -> &[ExactRational] {
        &self.masses
    }
}

impl DiscreteLaw for CellDist {
    type Outcome = usize;

    fn shape(&self) -> LawShape {
        LawShape {
            level: LawLevel::Cells,
            colours: self.masses.len(),
            draws: 0,
        }
    }

    fn mass(&self, o: &usize) -> ExactRational {
        self.masses.get(*o).cloned().unwrap_or_else(ExactRational::zero)
    }

    fn multiplicity(&self, _o: &usize) -> BigInt {
        BigInt::from(1)
    }

    fn support(&self) -> Vec<&usize> {
        self.cells.iter().filter(|&&i| !self.masses[i].is_zero()).collect()
    }
}

fn cell_index<O: Ord + Clone + fmt::Debug>(partition: &[Vec<O>]) -> Result<BTreeMap<O, usize>> {
    let mut index = BTreeMap::new();
    for (i, cell) in partition.iter().enumerate() {
        for o in cell {
            if index.insert(o.clone(), i).is_some() {
                return Err(contract(format!("outcome {o:?} appears in two cells")));
            }
        }
    }
    Ok(index)
}

fn coarsen_with<L: DiscreteLaw>(p: &L, cells: usize, index: &BTreeMap<L::Outcome, usize>) -> Result<CellDist> {
    let mut masses = vec![ExactRational::zero(); cells];
    for o in p.support() {
        let i = index
            .get(o)
            .ok_or_else(|| contract(format!("outcome {o:?} is not covered by the partition")))?;
        masses[*i] += &p.outcome_mass(o);
    }
    Ok(CellDist {
        masses,
        cells: (0..cells).collect(),
    })
}

/// Sum a law's mass over each cell of a partition of its outcomes.
pub fn coarsen<L: DiscreteLaw>(p: &L, partition: &[Vec<L::Outcome>]) -> Result<CellDist> {
    let index = cell_index(partition)?;
    coarsen_with(p, partition.len(), &index)
}

/// Coarsen two comparable laws with one partition covering both supports.
pub fn coarsen_pair<L: DiscreteLaw>(p: &L, q: &L, partition: &[Vec<L::Outcome>]) -> Result<(CellDist, CellDist)> {
    check_shapes(p, q)?;
    let index = cell_index(partition)?;
    Ok((
        coarsen_with(p, partition.len(), &index)?,
        coarsen_with(q, partition.len(), &index)?,
    ))
}
