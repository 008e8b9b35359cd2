//! Laws of drawing `k` balls from a `c`-colour urn with and without
//! replacement, at composition level (counts per colour) and at sequence
//! level (probability of one ordered draw of a given composition).

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use serde::{Deserialize, Serialize};

use crate::arith::{binomial, falling_factorial, multinomial_coeff, ExactRational};
use crate::divergence::{DiscreteLaw, LawLevel, LawShape};
use crate::error::{contract, domain, Result};

/// Ball counts `(l_1, ..., l_c)` of an urn holding `n = sum l_j >= 1` balls.
/// Empty colours are allowed.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<u64>", into = "Vec<u64>")]
pub struct UrnComposition {
    counts: Vec<u64>,
}

impl UrnComposition {
    pub fn new(counts: Vec<u64>) -> Result<Self> {
        if counts.is_empty() {
            return Err(contract("urn needs at least one colour"));
        }
        if counts.iter().sum::<u64>() == 0 {
            return Err(contract("urn needs at least one ball"));
        }
        Ok(Self { counts })
    }

    /// The urn with `n` balls of `n` distinct colours.
    pub fn distinct(n: u64) -> Result<Self> {
        Self::new(vec![1; n as usize])
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn colours(&self) -> usize {
        self.counts.len()
    }

    pub fn size(&self) -> u64 {
        self.counts.iter().sum()
    }

    /// The n-type `Q(j) = l_j / n`.
    pub fn frequencies(&self) -> Vec<ExactRational> {
        let n = self.size() as i64;
        self.counts.iter().map(|&l| ExactRational::ratio(l as i64, n)).collect()
    }

    /// True for the urn `(1, 1, ..., 1)`.
    pub fn is_distinct(&self) -> bool {
        self.counts.iter().all(|&l| l == 1)
    }

    pub fn all_colours_present(&self) -> bool {
        self.counts.iter().all(|&l| l > 0)
    }
}

impl TryFrom<Vec<u64>> for UrnComposition {
    type Error = crate::error::Error;
    fn try_from(value: Vec<u64>) -> Result<Self> {
        Self::new(value)
    }
}

impl From<UrnComposition> for Vec<u64> {
    fn from(value: UrnComposition) -> Self {
        value.counts
    }
}

impl Ord for UrnComposition {
    fn cmp(&self, other: &Self) -> Ordering {
        descending(&self.counts, &other.counts)
    }
}

impl PartialOrd for UrnComposition {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for UrnComposition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_counts(f, &self.counts)
    }
}

impl fmt::Debug for UrnComposition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "urn")?;
        write_counts(f, &self.counts)
    }
}

/// Colour counts `(s_1, ..., s_c)` of a draw of `k = sum s_j` balls.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct DrawComposition {
    counts: Vec<u64>,
}

impl DrawComposition {
    pub fn new(counts: Vec<u64>) -> Self {
        Self { counts }
    }

    pub fn zero(colours: usize) -> Self {
        Self {
            counts: vec![0; colours],
        }
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn colours(&self) -> usize {
        self.counts.len()
    }

    pub fn draws(&self) -> u64 {
        self.counts.iter().sum()
    }

    /// Number of ordered sequences with this composition.
    pub fn class_size(&self) -> BigInt {
        multinomial_coeff(self.draws(), &self.counts)
            .expect("parts sum to k by construction")
            .into()
    }

    /// The composition with one more ball of colour `j`.
    pub fn plus_one(&self, j: usize) -> Self {
        let mut counts = self.counts.clone();
        counts[j] += 1;
        Self { counts }
    }
}

impl From<Vec<u64>> for DrawComposition {
    fn from(counts: Vec<u64>) -> Self {
        Self { counts }
    }
}

impl Ord for DrawComposition {
    fn cmp(&self, other: &Self) -> Ordering {
        descending(&self.counts, &other.counts)
    }
}

impl PartialOrd for DrawComposition {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for DrawComposition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_counts(f, &self.counts)
    }
}

impl fmt::Debug for DrawComposition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_counts(f, &self.counts)
    }
}

// Compositions order as (k,0,..,0) first and (0,..,0,k) last.
fn descending(a: &[u64], b: &[u64]) -> Ordering {
    b.len().cmp(&a.len()).then_with(|| b.cmp(a))
}

fn write_counts(f: &mut fmt::Formatter<'_>, counts: &[u64]) -> fmt::Result {
    write!(f, "(")?;
    for (i, c) in counts.iter().enumerate() {
        if i > 0 {
            write!(f, ",")?;
        }
        write!(f, "{c}")?;
    }
    write!(f, ")")
}

/// All compositions of `k` into `c` parts, optionally capped part-wise,
/// in descending lexicographic order.
pub fn enumerate_compositions(c: usize, k: u64, caps: Option<&UrnComposition>) -> Result<Vec<DrawComposition>> {
    if c == 0 {
        return Err(contract("compositions need at least one part"));
    }
    if let Some(caps) = caps {
        if caps.colours() != c {
            return Err(contract(format!("caps have {} parts, expected {c}", caps.colours())));
        }
    }
    let caps: Vec<u64> = match caps {
        Some(u) => u.counts().to_vec(),
        None => vec![k; c],
    };
    // suffix capacity, to prune dead branches
    let mut room = vec![0u64; c + 1];
    for j in (0..c).rev() {
        room[j] = room[j + 1].saturating_add(caps[j]);
    }
    let mut out = Vec::new();
    let mut current = vec![0u64; c];
    fill(0, k, &caps, &room, &mut current, &mut out);
    Ok(out)
}

fn fill(j: usize, left: u64, caps: &[u64], room: &[u64], current: &mut Vec<u64>, out: &mut Vec<DrawComposition>) {
    if j + 1 == current.len() {
        if left <= caps[j] {
            current[j] = left;
            out.push(DrawComposition::new(current.clone()));
        }
        return;
    }
    let hi = left.min(caps[j]);
    let lo = left.saturating_sub(room[j + 1]);
    if lo > hi {
        return;
    }
    for s in (lo..=hi).rev() {
        current[j] = s;
        fill(j + 1, left - s, caps, room, current, out);
    }
}

/// A law on the compositions of `k` draws from a `c`-colour urn of size `n`.
/// Only outcomes of positive probability are stored.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct CompositionDist {
    colours: usize,
    urn_size: u64,
    draws: u64,
    entries: BTreeMap<DrawComposition, ExactRational>,
}

impl CompositionDist {
    /// Validates shape, nonnegativity and exact normalization.
    pub fn new(
        colours: usize,
        urn_size: u64,
        draws: u64,
        entries: impl IntoIterator<Item = (DrawComposition, ExactRational)>,
    ) -> Result<Self> {
        let mut map = BTreeMap::new();
        let mut total = ExactRational::zero();
        for (s, p) in entries {
            check_key(&s, colours, draws)?;
            if p.is_negative() {
                return Err(contract(format!("negative probability {p} at {s}")));
            }
            total += &p;
            if !p.is_zero() && map.insert(s.clone(), p).is_some() {
                return Err(contract(format!("duplicate composition {s}")));
            }
        }
        if !total.is_one() {
            return Err(contract(format!("probabilities sum to {total}, not 1")));
        }
        Ok(Self {
            colours,
            urn_size,
            draws,
            entries: map,
        })
    }

    pub fn colours(&self) -> usize {
        self.colours
    }

    pub fn urn_size(&self) -> u64 {
        self.urn_size
    }

    pub fn draws(&self) -> u64 {
        self.draws
    }

    pub fn prob(&self, s: &DrawComposition) -> ExactRational {
        self.entries.get(s).cloned().unwrap_or_else(ExactRational::zero)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&DrawComposition, &ExactRational)> {
        self.entries.iter()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// An exchangeable law on `S^k`, stored as the probability of any single
/// sequence of each composition.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct SequenceTypeDist {
    colours: usize,
    draws: u64,
    per_sequence: BTreeMap<DrawComposition, ExactRational>,
}

impl SequenceTypeDist {
    /// Validates that class masses `class_size(s) * p(s)` sum to one.
    pub fn new(
        colours: usize,
        draws: u64,
        per_sequence: impl IntoIterator<Item = (DrawComposition, ExactRational)>,
    ) -> Result<Self> {
        let mut map = BTreeMap::new();
        let mut total = ExactRational::zero();
        for (s, p) in per_sequence {
            check_key(&s, colours, draws)?;
            if p.is_negative() {
                return Err(contract(format!("negative probability {p} at {s}")));
            }
            total += &(&p * ExactRational::from(s.class_size()));
            if !p.is_zero() && map.insert(s.clone(), p).is_some() {
                return Err(contract(format!("duplicate composition {s}")));
            }
        }
        if !total.is_one() {
            return Err(contract(format!("class masses sum to {total}, not 1")));
        }
        Ok(Self {
            colours,
            draws,
            per_sequence: map,
        })
    }

    pub fn colours(&self) -> usize {
        self.colours
    }

    pub fn draws(&self) -> u64 {
        self.draws
    }

    /// Probability of one particular sequence with composition `s`.
    pub fn per_sequence(&self, s: &DrawComposition) -> ExactRational {
        self.per_sequence.get(s).cloned().unwrap_or_else(ExactRational::zero)
    }

    /// Total probability of the type class of `s`.
    pub fn class_mass(&self, s: &DrawComposition) -> ExactRational {
        self.per_sequence(s) * ExactRational::from(s.class_size())
    }

    /// Probability of an explicit sequence of colour indices.
    pub fn sequence_prob(&self, seq: &[usize]) -> Result<ExactRational> {
        if seq.len() as u64 != self.draws {
            return Err(contract(format!(
                "sequence of length {}, expected {}",
                seq.len(),
                self.draws
            )));
        }
        let mut counts = vec![0u64; self.colours];
        for &x in seq {
            if x >= self.colours {
                return Err(contract(format!("colour {x} outside alphabet")));
            }
            counts[x] += 1;
        }
        Ok(self.per_sequence(&DrawComposition::new(counts)))
    }

    pub fn iter(&self) -> impl Iterator<Item = (&DrawComposition, &ExactRational)> {
        self.per_sequence.iter()
    }

    /// The law of the first `k - 1` coordinates.
    pub fn drop_last(&self) -> Result<Self> {
        if self.draws == 0 {
            return Err(domain("cannot marginalize an empty sequence"));
        }
        let k = self.draws - 1;
        let entries = enumerate_compositions(self.colours, k, None)?.into_iter().map(|s| {
            let p: ExactRational = (0..self.colours).map(|j| self.per_sequence(&s.plus_one(j))).sum();
            (s, p)
        });
        Self::new(self.colours, k, entries)
    }

    /// Composition-level law induced by the sequence law.
    pub fn to_composition_level(&self, urn_size: u64) -> CompositionDist {
        let entries = self.per_sequence.keys().map(|s| (s.clone(), self.class_mass(s)));
        CompositionDist::new(self.colours, urn_size, self.draws, entries)
            .expect("class masses of a valid sequence law sum to one")
    }
}

fn check_key(s: &DrawComposition, colours: usize, draws: u64) -> Result<()> {
    if s.colours() != colours || s.draws() != draws {
        return Err(contract(format!(
            "composition {s} does not match (c={colours}, k={draws})"
        )));
    }
    Ok(())
}

/// Multivariate hypergeometric law `H(l, n, k; s)`.
pub fn hypergeom_composition(urn: &UrnComposition, k: u64) -> Result<CompositionDist> {
    let n = urn.size();
    if k > n {
        return Err(domain(format!("cannot draw {k} balls from an urn of {n}")));
    }
    let total = ExactRational::from_biguint(binomial(n, k));
    let entries = enumerate_compositions(urn.colours(), k, Some(urn))?
        .into_iter()
        .map(|s| {
            let ways = urn
                .counts()
                .iter()
                .zip(s.counts())
                .fold(num_bigint::BigUint::from(1u32), |acc, (&l, &x)| acc * binomial(l, x));
            (s, ExactRational::from_biguint(ways) / &total)
        });
    CompositionDist::new(urn.colours(), n, k, entries)
}

/// Multinomial law `B(l, n, k; s)` of `k` draws with replacement.
pub fn multinom_composition(urn: &UrnComposition, k: u64) -> Result<CompositionDist> {
    let n = urn.size();
    let freq = urn.frequencies();
    let caps = UrnComposition {
        counts: urn.counts().iter().map(|&l| if l > 0 { k } else { 0 }).collect(),
    };
    let entries = enumerate_compositions(urn.colours(), k, Some(&caps))?
        .into_iter()
        .map(|s| {
            let p = product_power(&freq, &s) * ExactRational::from(s.class_size());
            (s, p)
        });
    CompositionDist::new(urn.colours(), n, k, entries)
}

/// Sequence-level hypergeometric law via falling factorials:
/// `prod_j (l_j)_(s_j) / (n)_k`.
pub fn hypergeom_sequence(urn: &UrnComposition, k: u64) -> Result<SequenceTypeDist> {
    let n = urn.size();
    if k > n {
        return Err(domain(format!("cannot draw {k} balls from an urn of {n}")));
    }
    let total = ExactRational::from_biguint(falling_factorial(n, k));
    let entries = enumerate_compositions(urn.colours(), k, Some(urn))?
        .into_iter()
        .map(|s| {
            let ways = urn
                .counts()
                .iter()
                .zip(s.counts())
                .fold(num_bigint::BigUint::from(1u32), |acc, (&l, &x)| {
                    acc * falling_factorial(l, x)
                });
            (s, ExactRational::from_biguint(ways) / &total)
        });
    SequenceTypeDist::new(urn.colours(), k, entries)
}

/// Sequence-level product law `prod_j (l_j / n)^(s_j)`.
pub fn multinom_sequence(urn: &UrnComposition, k: u64) -> Result<SequenceTypeDist> {
    let freq = urn.frequencies();
    let entries = enumerate_compositions(urn.colours(), k, None)?.into_iter().map(|s| {
        let p = product_power(&freq, &s);
        (s, p)
    });
    SequenceTypeDist::new(urn.colours(), k, entries)
}

/// `prod_j q_j^(s_j)`.
pub fn product_power(q: &[ExactRational], s: &DrawComposition) -> ExactRational {
    q.iter().zip(s.counts()).map(|(p, &e)| p.pow(e as u32)).product()
}

/// Divide each composition's mass by its class size.
pub fn to_sequence_level(dist: &CompositionDist) -> SequenceTypeDist {
    let entries = dist
        .iter()
        .map(|(s, p)| (s.clone(), p / ExactRational::from(s.class_size())));
    SequenceTypeDist::new(dist.colours(), dist.draws(), entries)
        .expect("per-sequence masses of a valid composition law sum to one")
}

/// The urn `l_j = n Q(j)` of an n-type.
pub fn urn_from_ntype(q: &[ExactRational], n: u64) -> Result<UrnComposition> {
    if n == 0 {
        return Err(domain("n-type needs n >= 1"));
    }
    let total: ExactRational = q.iter().sum();
    if !total.is_one() {
        return Err(domain(format!("type sums to {total}, not 1")));
    }
    let n_big = ExactRational::from(n);
    let mut counts = Vec::with_capacity(q.len());
    for (j, p) in q.iter().enumerate() {
        if p.is_negative() {
            return Err(domain(format!("negative mass {p} at colour {j}")));
        }
        let scaled = p * &n_big;
        if !scaled.denom().is_one_big() {
            return Err(domain(format!("n*Q({j}) = {scaled} is not an integer")));
        }
        counts.push(u64::try_from(scaled.numer()).map_err(|_| domain("count overflow"))?);
    }
    UrnComposition::new(counts)
}

trait IsOneBig {
    fn is_one_big(&self) -> bool;
}

impl IsOneBig for BigInt {
    fn is_one_big(&self) -> bool {
        num_traits::One::is_one(self)
    }
}

impl DiscreteLaw for CompositionDist {
    type Outcome = DrawComposition;

    fn shape(&self) -> LawShape {
        LawShape {
            level: LawLevel::Composition,
            colours: self.colours,
            draws: self.draws,
        }
    }

    fn mass(&self, o: &DrawComposition) -> ExactRational {
        self.prob(o)
    }

    fn multiplicity(&self, _o: &DrawComposition) -> BigInt {
        BigInt::from(1)
    }

    fn support(&self) -> Vec<&DrawComposition> {
        self.entries.keys().collect()
    }
}

impl DiscreteLaw for SequenceTypeDist {
    type Outcome = DrawComposition;

    fn shape(&self) -> LawShape {
        LawShape {
            level: LawLevel::Sequence,
            colours: self.colours,
            draws: self.draws,
        }
    }

    fn mass(&self, o: &DrawComposition) -> ExactRational {
        self.per_sequence(o)
    }

    fn multiplicity(&self, o: &DrawComposition) -> BigInt {
        o.class_size()
    }

    fn support(&self) -> Vec<&DrawComposition> {
        self.per_sequence.keys().collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn comp(v: &[u64]) -> DrawComposition {
        DrawComposition::new(v.to_vec())
    }

    fn urn(v: &[u64]) -> UrnComposition {
        UrnComposition::new(v.to_vec()).unwrap()
    }

    fn r(n: i64, d: i64) -> ExactRational {
        ExactRational::ratio(n, d)
    }

    #[test]
    fn enumeration_examples() {
        let all = enumerate_compositions(2, 2, None).unwrap();
        assert_eq!(all, vec![comp(&[2, 0]), comp(&[1, 1]), comp(&[0, 2])]);
        let capped = enumerate_compositions(2, 2, Some(&urn(&[1, 1]))).unwrap();
        assert_eq!(capped, vec![comp(&[1, 1])]);
        let three = enumerate_compositions(3, 2, None).unwrap();
        assert_eq!(three.len() as u64, 6);
        assert_eq!(binomial(2 + 3 - 1, 3 - 1), num_bigint::BigUint::from(6u32));
    }

    #[test]
    fn enumeration_edge_cases() {
        assert!(enumerate_compositions(0, 1, None).is_err());
        assert!(enumerate_compositions(2, 1, Some(&urn(&[1, 1, 1]))).is_err());
        assert!(enumerate_compositions(2, 5, Some(&urn(&[1, 1]))).unwrap().is_empty());
        assert_eq!(enumerate_compositions(3, 0, None).unwrap(), vec![comp(&[0, 0, 0])]);
    }

    #[test]
    fn enumeration_count_matches_stars_and_bars() {
        for c in 1..5usize {
            for k in 0..8u64 {
                let got = enumerate_compositions(c, k, None).unwrap().len();
                assert_eq!(num_bigint::BigUint::from(got), binomial(k + c as u64 - 1, c as u64 - 1));
            }
        }
    }

    #[test]
    fn enumeration_order_is_sorted() {
        let all = enumerate_compositions(3, 4, None).unwrap();
        let mut sorted = all.clone();
        sorted.sort();
        assert_eq!(all, sorted);
    }

    #[test]
    fn hypergeom_two_two() {
        let h = hypergeom_composition(&urn(&[2, 2]), 2).unwrap();
        assert_eq!(h.prob(&comp(&[2, 0])), r(1, 6));
        assert_eq!(h.prob(&comp(&[1, 1])), r(2, 3));
        assert_eq!(h.prob(&comp(&[0, 2])), r(1, 6));
    }

    #[test]
    fn hypergeom_trivial_draws() {
        let u = urn(&[3, 0, 2]);
        let h0 = hypergeom_composition(&u, 0).unwrap();
        assert_eq!(h0.prob(&comp(&[0, 0, 0])), ExactRational::one());
        let hn = hypergeom_composition(&u, 5).unwrap();
        assert_eq!(hn.prob(&comp(&[3, 0, 2])), ExactRational::one());
        assert!(hypergeom_composition(&u, 6).is_err());
    }

    #[test]
    fn multinom_examples() {
        let b = multinom_composition(&urn(&[2, 2]), 2).unwrap();
        assert_eq!(b.prob(&comp(&[2, 0])), r(1, 4));
        assert_eq!(b.prob(&comp(&[1, 1])), r(1, 2));
        assert_eq!(b.prob(&comp(&[0, 2])), r(1, 4));
        let single = multinom_composition(&urn(&[5, 0]), 3).unwrap();
        assert_eq!(single.len(), 1);
        assert_eq!(single.prob(&comp(&[3, 0])), ExactRational::one());
        let empty = multinom_composition(&urn(&[1, 2]), 0).unwrap();
        assert_eq!(empty.prob(&comp(&[0, 0])), ExactRational::one());
    }

    #[test]
    fn sequence_level_examples() {
        let u = urn(&[1, 1, 1]);
        let h = to_sequence_level(&hypergeom_composition(&u, 2).unwrap());
        for s in [comp(&[1, 1, 0]), comp(&[1, 0, 1]), comp(&[0, 1, 1])] {
            assert_eq!(h.per_sequence(&s), r(1, 6));
        }
        assert!(h.per_sequence(&comp(&[2, 0, 0])).is_zero());
        let b = to_sequence_level(&multinom_composition(&u, 2).unwrap());
        for s in enumerate_compositions(3, 2, None).unwrap() {
            assert_eq!(b.per_sequence(&s), r(1, 9));
        }
        let point = to_sequence_level(&hypergeom_composition(&u, 0).unwrap());
        assert_eq!(point.sequence_prob(&[]).unwrap(), ExactRational::one());
    }

    #[test]
    fn direct_sequence_routes_agree() {
        for counts in [vec![2, 2], vec![3, 0, 1], vec![1, 1, 1, 1], vec![4, 1, 2]] {
            let u = urn(&counts);
            for k in 0..=u.size() {
                let via_h = to_sequence_level(&hypergeom_composition(&u, k).unwrap());
                assert_eq!(via_h, hypergeom_sequence(&u, k).unwrap());
                let via_b = to_sequence_level(&multinom_composition(&u, k).unwrap());
                assert_eq!(via_b, multinom_sequence(&u, k).unwrap());
            }
        }
    }

    #[test]
    fn single_draw_laws_coincide() {
        let u = urn(&[3, 1, 4]);
        assert_eq!(
            hypergeom_composition(&u, 1).unwrap().iter().collect::<Vec<_>>(),
            multinom_composition(&u, 1).unwrap().iter().collect::<Vec<_>>()
        );
    }

    #[test]
    fn ntype_conversion() {
        assert_eq!(urn_from_ntype(&[r(1, 2), r(1, 2)], 4).unwrap(), urn(&[2, 2]));
        assert_eq!(urn_from_ntype(&[r(1, 3), r(2, 3)], 3).unwrap(), urn(&[1, 2]));
        assert!(matches!(
            urn_from_ntype(&[r(1, 2), r(1, 2)], 3),
            Err(crate::Error::Domain(_))
        ));
        assert!(urn_from_ntype(&[r(1, 2), r(1, 3)], 6).is_err());
    }

    #[test]
    fn drop_last_of_product_law() {
        let u = urn(&[1, 2]);
        let b3 = multinom_sequence(&u, 3).unwrap();
        assert_eq!(b3.drop_last().unwrap(), multinom_sequence(&u, 2).unwrap());
    }

    #[test]
    fn invalid_dists_rejected() {
        let half = r(1, 2);
        assert!(CompositionDist::new(2, 2, 1, vec![(comp(&[1, 0]), half.clone())]).is_err());
        assert!(CompositionDist::new(2, 2, 1, vec![(comp(&[2, 0]), ExactRational::one())]).is_err());
        assert!(SequenceTypeDist::new(2, 2, vec![(comp(&[1, 1]), half)]).is_ok());
    }

    #[test]
    fn urn_validation() {
        assert!(UrnComposition::new(vec![]).is_err());
        assert!(UrnComposition::new(vec![0, 0]).is_err());
        let u: UrnComposition = serde_json_like(&[2, 0, 1]);
        assert_eq!(u.size(), 3);
    }

    fn serde_json_like(v: &[u64]) -> UrnComposition {
        UrnComposition::try_from(v.to_vec()).unwrap()
    }
}
