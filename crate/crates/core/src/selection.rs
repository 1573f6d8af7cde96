//! Key-selection strategies and the expected search-cost model.
//!
//! Ties always break to the smallest parameter id. Every random choice draws
//! from the selector's own seeded ChaCha stream.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{CostError, SelectionError, TableError};
use crate::index::IndexModel;
use crate::param::{ParamId, ParamSet};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum StrategyKind {
    Original,
    MinCount,
    MaxCount,
    Random,
    Designated,
    LeastUsed,
}

impl StrategyKind {
    pub const ALL: [StrategyKind; 6] = [
        StrategyKind::Original,
        StrategyKind::MinCount,
        StrategyKind::MaxCount,
        StrategyKind::Random,
        StrategyKind::Designated,
        StrategyKind::LeastUsed,
    ];

    pub fn name(self) -> &'static str {
        match self {
            StrategyKind::Original => "original",
            StrategyKind::MinCount => "min-count",
            StrategyKind::MaxCount => "max-count",
            StrategyKind::Random => "random",
            StrategyKind::Designated => "designated",
            StrategyKind::LeastUsed => "least-used",
        }
    }

    /// Designated and least-used choose a key from the service alone.
    pub fn needs_index(self) -> bool {
        !matches!(self, StrategyKind::Designated | StrategyKind::LeastUsed)
    }
}

impl fmt::Display for StrategyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl core::str::FromStr for StrategyKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        StrategyKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| alloc::format!("unknown strategy `{s}`"))
    }
}

/// Which appearing probabilities a least-used selector ranks inputs by.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ProbabilitySource {
    /// Probability of a parameter appearing in retrieval requests.
    #[default]
    RequestDistribution,
    /// Probability of a parameter appearing in service inputs.
    InputDistribution,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TableSource {
    Theoretical,
    Empirical,
}

/// Per-parameter appearing probabilities over a universe `0..q`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbabilityTable {
    probs: Vec<f64>,
    source: TableSource,
}

impl ProbabilityTable {
    /// Tolerance on the total of a theoretical table.
    pub const SUM_TOLERANCE: f64 = 1e-9;

    pub fn uniform(q: u32) -> Self {
        ProbabilityTable {
            probs: alloc::vec![1.0 / f64::from(q.max(1)); q as usize],
            source: TableSource::Theoretical,
        }
    }

    /// Dense table, `probs[i]` being the probability of parameter `i`.
    pub fn from_dense(probs: Vec<f64>, source: TableSource) -> Result<Self, TableError> {
        for (i, &p) in probs.iter().enumerate() {
            if !(0.0..=1.0).contains(&p) {
                return Err(TableError::OutOfRange {
                    param: ParamId(i as u32),
                    value: p,
                });
            }
        }
        if source == TableSource::Theoretical {
            let total: f64 = probs.iter().sum();
            if (total - 1.0).abs() > Self::SUM_TOLERANCE {
                return Err(TableError::NotNormalized(total));
            }
        }
        Ok(ProbabilityTable { probs, source })
    }

    /// Sparse entries that must cover every parameter of `0..q`.
    pub fn from_entries(
        q: u32,
        entries: impl IntoIterator<Item = (ParamId, f64)>,
        source: TableSource,
    ) -> Result<Self, TableError> {
        let mut probs: Vec<Option<f64>> = alloc::vec![None; q as usize];
        for (p, v) in entries {
            let slot = probs
                .get_mut(p.index())
                .ok_or(TableError::OutsideUniverse { param: p, q })?;
            *slot = Some(v);
        }
        let dense = probs
            .into_iter()
            .enumerate()
            .map(|(i, v)| v.ok_or(TableError::Uncovered(ParamId(i as u32))))
            .collect::<Result<Vec<_>, _>>()?;
        Self::from_dense(dense, source)
    }

    /// Relative frequency of each parameter across a request log. An empty log
    /// yields the uniform table.
    pub fn from_request_log<'a>(q: u32, requests: impl IntoIterator<Item = &'a ParamSet>) -> Self {
        let mut counts = alloc::vec![0u64; q as usize];
        let mut total = 0u64;
        for r in requests {
            for p in r.iter() {
                if let Some(c) = counts.get_mut(p.index()) {
                    *c += 1;
                    total += 1;
                }
            }
        }
        if total == 0 {
            let mut t = Self::uniform(q);
            t.source = TableSource::Empirical;
            return t;
        }
        ProbabilityTable {
            probs: counts.iter().map(|&c| c as f64 / total as f64).collect(),
            source: TableSource::Empirical,
        }
    }

    pub fn get(&self, p: ParamId) -> Option<f64> {
        self.probs.get(p.index()).copied()
    }

    pub fn universe(&self) -> u32 {
        self.probs.len() as u32
    }

    pub fn source(&self) -> TableSource {
        self.source
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.probs
    }

    pub fn iter(&self) -> impl Iterator<Item = (ParamId, f64)> + '_ {
        self.probs.iter().enumerate().map(|(i, &p)| (ParamId(i as u32), p))
    }
}

/// A chosen key and the number of input-similar classes examined globally
/// while choosing it.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Selection {
    pub key: ParamId,
    pub global_scans: u64,
}

impl Selection {
    fn local(key: ParamId) -> Self {
        Selection { key, global_scans: 0 }
    }
}

fn random_input(inputs: &ParamSet, rng: &mut impl Rng) -> ParamId {
    let i = rng.gen_range(0..inputs.len() as u32) as usize;
    inputs.nth(i).expect("non-empty inputs")
}

/// Reuse the key of an existing input-similar class with exactly these inputs.
fn exact_inputs_reuse(inputs: &ParamSet, index: &IndexModel) -> (Option<ParamId>, u64) {
    let scan = index.scan_for_inputs(inputs);
    (scan.found.map(|(_, k)| k), scan.examined)
}

/// Size units used by the original method's bound: input-similar classes, or
/// services in primary mode.
fn population(index: &IndexModel) -> u64 {
    if index.mode().has_input_classes() {
        index.input_class_count() as u64
    } else {
        index.len() as u64
    }
}

/// Original method: keep key classes near `sqrt(m)` in size.
pub fn select_key_original(inputs: &ParamSet, index: &IndexModel, rng: &mut impl Rng) -> Selection {
    let (reuse, scanned) = exact_inputs_reuse(inputs, index);
    if let Some(key) = reuse {
        return Selection {
            key,
            global_scans: scanned,
        };
    }
    let m = population(index);
    // size < sqrt(m)  <=>  size^2 < m  for non-negative integers
    let best = inputs
        .iter()
        .filter_map(|p| index.find_key_class(p).map(|kc| (p, kc.size() as u64)))
        .filter(|&(_, size)| size * size < m)
        .fold(None::<(ParamId, u64)>, |best, cand| match best {
            Some(b) if b.1 >= cand.1 => Some(b),
            _ => Some(cand),
        });
    let key = match best {
        Some((key, _)) => key,
        None => random_input(inputs, rng),
    };
    Selection {
        key,
        global_scans: scanned,
    }
}

/// Minimum key count method: reuse the smallest existing key class among the inputs.
pub fn select_key_min_count(inputs: &ParamSet, index: &IndexModel, rng: &mut impl Rng) -> Selection {
    let (reuse, scanned) = exact_inputs_reuse(inputs, index);
    if let Some(key) = reuse {
        return Selection {
            key,
            global_scans: scanned,
        };
    }
    let smallest = inputs
        .iter()
        .filter_map(|p| index.find_key_class(p).map(|kc| (p, kc.size())))
        .fold(None::<(ParamId, usize)>, |best, cand| match best {
            Some(b) if b.1 <= cand.1 => Some(b),
            _ => Some(cand),
        });
    let key = match smallest {
        Some((key, _)) => key,
        None => random_input(inputs, rng),
    };
    Selection {
        key,
        global_scans: scanned,
    }
}

/// Maximum key count method: prefer an input that is not yet anyone's key.
pub fn select_key_max_count(inputs: &ParamSet, index: &IndexModel, rng: &mut impl Rng) -> Selection {
    let (reuse, scanned) = exact_inputs_reuse(inputs, index);
    if let Some(key) = reuse {
        return Selection {
            key,
            global_scans: scanned,
        };
    }
    let key = inputs
        .iter()
        .find(|&p| index.find_key_class(p).is_none())
        .unwrap_or_else(|| random_input(inputs, rng));
    Selection {
        key,
        global_scans: scanned,
    }
}

pub fn select_key_random(inputs: &ParamSet, index: &IndexModel, rng: &mut impl Rng) -> Selection {
    let (reuse, scanned) = exact_inputs_reuse(inputs, index);
    let key = reuse.unwrap_or_else(|| random_input(inputs, rng));
    Selection {
        key,
        global_scans: scanned,
    }
}

/// Designated method: the `(sum of ids mod |inputs|)`-th input in id order.
pub fn select_key_designated(inputs: &ParamSet) -> ParamId {
    let sum: u64 = inputs.iter().map(|p| u64::from(p.0)).sum();
    let i = (sum % inputs.len() as u64) as usize;
    inputs.nth(i).expect("non-empty inputs")
}

/// Least-used method: the input with the smallest appearing probability.
pub fn select_key_least_used(inputs: &ParamSet, table: &ProbabilityTable) -> Result<ParamId, SelectionError> {
    let mut best: Option<(ParamId, f64)> = None;
    for p in inputs.iter() {
        let prob = table.get(p).ok_or(SelectionError::MissingEntry(p))?;
        // strict `<` keeps the earlier (smaller) id on ties
        if best.is_none_or(|(_, b)| prob < b) {
            best = Some((p, prob));
        }
    }
    best.map(|(p, _)| p).ok_or(SelectionError::MissingTable)
}

/// A configured key-selection strategy.
#[derive(Debug, Clone)]
pub struct KeySelector {
    kind: StrategyKind,
    rng: ChaCha8Rng,
    table: Option<ProbabilityTable>,
    source: ProbabilitySource,
}

impl KeySelector {
    /// Any strategy other than least-used, with its random stream seeded from `seed`.
    pub fn new(kind: StrategyKind, seed: u64) -> Self {
        KeySelector {
            kind,
            rng: ChaCha8Rng::seed_from_u64(seed),
            table: None,
            source: ProbabilitySource::default(),
        }
    }

    pub fn least_used(table: ProbabilityTable, source: ProbabilitySource) -> Self {
        KeySelector {
            kind: StrategyKind::LeastUsed,
            rng: ChaCha8Rng::seed_from_u64(0),
            table: Some(table),
            source,
        }
    }

    /// Attaches (or replaces) the probability table.
    pub fn with_table(mut self, table: ProbabilityTable, source: ProbabilitySource) -> Self {
        self.table = Some(table);
        self.source = source;
        self
    }

    pub fn kind(&self) -> StrategyKind {
        self.kind
    }

    pub fn source(&self) -> ProbabilitySource {
        self.source
    }

    pub fn table(&self) -> Option<&ProbabilityTable> {
        self.table.as_ref()
    }

    /// Fails early for a least-used selector with no table.
    pub fn validate(&self) -> Result<(), SelectionError> {
        if self.kind == StrategyKind::LeastUsed && self.table.is_none() {
            return Err(SelectionError::MissingTable);
        }
        Ok(())
    }

    pub fn select(&mut self, inputs: &ParamSet, index: &IndexModel) -> Result<Selection, SelectionError> {
        Ok(match self.kind {
            StrategyKind::Original => select_key_original(inputs, index, &mut self.rng),
            StrategyKind::MinCount => select_key_min_count(inputs, index, &mut self.rng),
            StrategyKind::MaxCount => select_key_max_count(inputs, index, &mut self.rng),
            StrategyKind::Random => select_key_random(inputs, index, &mut self.rng),
            StrategyKind::Designated => Selection::local(select_key_designated(inputs)),
            StrategyKind::LeastUsed => {
                let table = self.table.as_ref().ok_or(SelectionError::MissingTable)?;
                Selection::local(select_key_least_used(inputs, table)?)
            }
        })
    }
}

/// Expected number of classes searched, `sum(p_i * x_i)`.
pub fn expected_search_cost(sizes: &[f64], probs: &[f64]) -> Result<f64, CostError> {
    if sizes.len() != probs.len() {
        return Err(CostError::LengthMismatch {
            sizes: sizes.len(),
            probs: probs.len(),
        });
    }
    for (index, &value) in sizes.iter().enumerate() {
        if !value.is_finite() || value < 0.0 {
            return Err(CostError::InvalidValue { index, value });
        }
    }
    for (index, &value) in probs.iter().enumerate() {
        if !(0.0..=1.0).contains(&value) {
            return Err(CostError::InvalidValue { index, value });
        }
    }
    let total: f64 = probs.iter().sum();
    if (total - 1.0).abs() > ProbabilityTable::SUM_TOLERANCE {
        return Err(CostError::NotNormalized(total));
    }
    Ok(sizes.iter().zip(probs).map(|(x, p)| x * p).sum())
}

/// Pairs the largest sizes with the smallest probabilities, which minimises
/// [`expected_search_cost`] over all pairings.
pub fn reversed_pairing(sizes: &[f64], probs: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let mut xs = sizes.to_vec();
    let mut ps = probs.to_vec();
    xs.sort_by(|a, b| b.total_cmp(a));
    ps.sort_by(|a, b| a.total_cmp(b));
    (xs, ps)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::index::IndexMode;
    use crate::service::Service;

    fn set(ids: &[u32]) -> ParamSet {
        ParamSet::from_ids(ids.iter().copied())
    }

    fn svc(id: u64, ins: &[u32]) -> Service {
        Service::new(id, ins.iter().copied(), [999]).unwrap()
    }

    /// Index with key classes of the requested sizes, each member an
    /// input-similar class with distinct inputs {key, 100 + n}.
    fn index_with_sizes(mode: IndexMode, sizes: &[(u32, usize)], filler: usize) -> IndexModel {
        let mut idx = IndexModel::new(mode);
        let mut next = 0u64;
        for &(key, size) in sizes {
            for _ in 0..size {
                idx.insert_with_key(svc(next, &[key, 100 + next as u32]), ParamId(key))
                    .unwrap();
                next += 1;
            }
        }
        for _ in 0..filler {
            let p = 100 + next as u32;
            idx.insert_with_key(svc(next, &[p]), ParamId(p)).unwrap();
            next += 1;
        }
        idx
    }

    fn rng() -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(7)
    }

    #[test]
    fn original_reuses_exact_inputs() {
        let mut idx = IndexModel::new(IndexMode::Partial);
        idx.insert_with_key(svc(0, &[1, 2]), ParamId(1)).unwrap();
        let s = select_key_original(&set(&[1, 2]), &idx, &mut rng());
        assert_eq!(s.key, ParamId(1));
        assert_eq!(s.global_scans, 1);
    }

    #[test]
    fn original_falls_back_to_random_on_empty_index() {
        let idx = IndexModel::new(IndexMode::Full);
        let inputs = set(&[1, 2, 3]);
        let a = select_key_original(&inputs, &idx, &mut rng());
        let b = select_key_original(&inputs, &idx, &mut rng());
        assert!(inputs.contains(a.key));
        assert_eq!(a, b);
        assert_eq!(a.global_scans, 0);
    }

    #[test]
    fn original_picks_biggest_class_under_sqrt_bound() {
        // key 1 (a) has 2 classes, key 2 (b) has 5, 9 fillers: m = 16.
        let idx = index_with_sizes(IndexMode::Partial, &[(1, 2), (2, 5)], 9);
        assert_eq!(idx.input_class_count(), 16);
        let s = select_key_original(&set(&[1, 2]), &idx, &mut rng());
        assert_eq!(s.key, ParamId(1));
        assert_eq!(s.global_scans, 16);
        // with m = 36 both classes are admissible and b is bigger
        let idx = index_with_sizes(IndexMode::Partial, &[(1, 2), (2, 5)], 29);
        assert_eq!(select_key_original(&set(&[1, 2]), &idx, &mut rng()).key, ParamId(2));
    }

    #[test]
    fn min_count_prefers_smallest_class() {
        let idx = index_with_sizes(IndexMode::Partial, &[(1, 5), (2, 2)], 0);
        assert_eq!(select_key_min_count(&set(&[1, 2, 3]), &idx, &mut rng()).key, ParamId(2));
        // tie breaks to the smaller id
        let idx = index_with_sizes(IndexMode::Partial, &[(4, 2), (2, 2)], 0);
        assert_eq!(select_key_min_count(&set(&[2, 3, 4]), &idx, &mut rng()).key, ParamId(2));
    }

    #[test]
    fn min_count_random_fallback_and_reuse_precedence() {
        let idx = index_with_sizes(IndexMode::Full, &[(1, 3)], 0);
        let k = select_key_min_count(&set(&[50, 51]), &idx, &mut rng()).key;
        assert!([ParamId(50), ParamId(51)].contains(&k));

        // key 3 is the bigger class, but {3,7,8} already lives under it
        let mut idx = index_with_sizes(IndexMode::Full, &[(3, 3), (7, 1)], 0);
        idx.insert_with_key(svc(500, &[3, 7, 8]), ParamId(3)).unwrap();
        assert_eq!(select_key_min_count(&set(&[3, 7, 8]), &idx, &mut rng()).key, ParamId(3));
        assert_eq!(select_key_min_count(&set(&[3, 7, 9]), &idx, &mut rng()).key, ParamId(7));
    }

    #[test]
    fn max_count_prefers_unused_input() {
        let idx = index_with_sizes(IndexMode::Partial, &[(1, 1)], 0);
        assert_eq!(select_key_max_count(&set(&[1, 2]), &idx, &mut rng()).key, ParamId(2));

        let idx = index_with_sizes(IndexMode::Partial, &[(1, 1), (2, 1)], 0);
        let k = select_key_max_count(&set(&[1, 2]), &idx, &mut rng()).key;
        assert!([ParamId(1), ParamId(2)].contains(&k));

        let mut idx = IndexModel::new(IndexMode::Partial);
        idx.insert_with_key(svc(0, &[1, 2]), ParamId(1)).unwrap();
        assert_eq!(select_key_max_count(&set(&[1, 2]), &idx, &mut rng()).key, ParamId(1));
    }

    #[test]
    fn random_singleton_and_reuse() {
        let idx = IndexModel::new(IndexMode::Partial);
        assert_eq!(select_key_random(&set(&[4]), &idx, &mut rng()).key, ParamId(4));
        let mut idx = IndexModel::new(IndexMode::Partial);
        idx.insert_with_key(svc(0, &[1, 2]), ParamId(2)).unwrap();
        assert_eq!(select_key_random(&set(&[1, 2]), &idx, &mut rng()).key, ParamId(2));
    }

    #[test]
    fn random_is_uniform_over_inputs() {
        let idx = IndexModel::new(IndexMode::Partial);
        let inputs = set(&[0, 1, 2, 3]);
        let mut r = rng();
        let mut counts = [0u32; 4];
        for _ in 0..10_000 {
            counts[select_key_random(&inputs, &idx, &mut r).key.index()] += 1;
        }
        for c in counts {
            let freq = f64::from(c) / 10_000.0;
            assert!((freq - 0.25).abs() <= 0.02, "{counts:?}");
        }
    }

    #[test]
    fn designated_arithmetic() {
        assert_eq!(select_key_designated(&set(&[3, 5, 7])), ParamId(3));
        assert_eq!(select_key_designated(&set(&[2])), ParamId(2));
        assert_eq!(select_key_designated(&set(&[1, 2, 3, 4])), ParamId(3));
    }

    #[test]
    fn least_used_argmin_and_ties() {
        let t = ProbabilityTable::from_dense(alloc::vec![0.5, 0.1, 0.4], TableSource::Theoretical).unwrap();
        assert_eq!(select_key_least_used(&set(&[0, 1, 2]), &t).unwrap(), ParamId(1));
        let t = ProbabilityTable::from_dense(alloc::vec![0.2, 0.2, 0.6], TableSource::Theoretical).unwrap();
        assert_eq!(select_key_least_used(&set(&[0, 1]), &t).unwrap(), ParamId(0));
        assert_eq!(
            select_key_least_used(&set(&[0, 5]), &t),
            Err(SelectionError::MissingEntry(ParamId(5)))
        );
    }

    #[test]
    fn least_used_avoids_frequent_parameter() {
        // a=0, b=1, c=2 under the log {{a,b},{a,c},{a}}
        let log = [set(&[0, 1]), set(&[0, 2]), set(&[0])];
        let t = ProbabilityTable::from_request_log(3, log.iter());
        for inputs in [set(&[0, 1]), set(&[0, 2]), set(&[0, 1, 2])] {
            assert_ne!(select_key_least_used(&inputs, &t).unwrap(), ParamId(0));
        }
    }

    #[test]
    fn least_used_without_table_is_a_configuration_error() {
        let mut sel = KeySelector::new(StrategyKind::LeastUsed, 1);
        assert_eq!(sel.validate(), Err(SelectionError::MissingTable));
        let idx = IndexModel::new(IndexMode::Primary);
        assert_eq!(sel.select(&set(&[1]), &idx), Err(SelectionError::MissingTable));
    }

    #[test]
    fn table_validation() {
        assert!(matches!(
            ProbabilityTable::from_dense(alloc::vec![0.5, 0.4], TableSource::Theoretical),
            Err(TableError::NotNormalized(_))
        ));
        assert!(ProbabilityTable::from_dense(alloc::vec![0.5, 0.4], TableSource::Empirical).is_ok());
        assert!(matches!(
            ProbabilityTable::from_dense(alloc::vec![1.5], TableSource::Empirical),
            Err(TableError::OutOfRange { .. })
        ));
        assert_eq!(
            ProbabilityTable::from_entries(3, [(ParamId(0), 0.5), (ParamId(2), 0.5)], TableSource::Theoretical),
            Err(TableError::Uncovered(ParamId(1)))
        );
        assert_eq!(
            ProbabilityTable::from_entries(1, [(ParamId(4), 1.0)], TableSource::Theoretical),
            Err(TableError::OutsideUniverse {
                param: ParamId(4),
                q: 1
            })
        );
    }

    #[test]
    fn cost_examples() {
        assert!((expected_search_cost(&[3.0, 2.0, 1.0], &[0.2, 0.3, 0.5]).unwrap() - 1.7).abs() < 1e-12);
        assert!((expected_search_cost(&[4.0; 3], &[0.1, 0.6, 0.3]).unwrap() - 4.0).abs() < 1e-12);
        assert_eq!(expected_search_cost(&[7.0, 1.0, 2.0], &[1.0, 0.0, 0.0]).unwrap(), 7.0);
        assert!(matches!(
            expected_search_cost(&[1.0], &[0.5, 0.5]),
            Err(CostError::LengthMismatch { .. })
        ));
        assert!(matches!(
            expected_search_cost(&[1.0, 1.0], &[0.5, 0.6]),
            Err(CostError::NotNormalized(_))
        ));
        assert!(matches!(
            expected_search_cost(&[-1.0], &[1.0]),
            Err(CostError::InvalidValue { .. })
        ));
    }

    #[test]
    fn primary_mode_never_scans() {
        let mut idx = IndexModel::new(IndexMode::Primary);
        idx.insert_with_key(svc(0, &[1, 2]), ParamId(1)).unwrap();
        for kind in StrategyKind::ALL {
            let mut sel = KeySelector::new(kind, 3)
                .with_table(ProbabilityTable::uniform(1000), ProbabilitySource::RequestDistribution);
            let s = sel.select(&set(&[1, 2]), &idx).unwrap();
            assert_eq!(s.global_scans, 0, "{kind}");
        }
    }
}
