//! Per-configuration outcome counts computed from the all-enabled campaign.
//!
//! Disabling an assertion deletes its windows from the timeline: every
//! cell inside them ceases to exist and later cells shift left. A remaining
//! cell counts as detected iff one of its recorded detectors is still
//! enabled; otherwise it takes the final outcome recorded for it.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::campaign::{CampaignResult, FaultRecord};
use crate::config::Configuration;
use crate::error::{Error, Result};
use crate::interp::{CellClass, Outcome};

/// Largest assertion count for which all `2^N` configurations are enumerated.
pub const EXHAUSTIVE_LIMIT: usize = 20;

/// Fault-space cell counts per class, plus the variant's runtime.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Counts {
    pub sdc: u64,
    pub detected: u64,
    pub benign: u64,
    pub trap: u64,
    pub timeout: u64,
    pub runtime: u64,
    pub area: u64,
}

pub type PredictedCounts = Counts;
pub type TrueCounts = Counts;

impl Counts {
    pub fn add(&mut self, class: CellClass, cells: u64) {
        match class {
            CellClass::Sdc => self.sdc += cells,
            CellClass::Detected => self.detected += cells,
            CellClass::Benign => self.benign += cells,
            CellClass::Trap => self.trap += cells,
            CellClass::Timeout => self.timeout += cells,
        }
    }

    pub fn get(&self, class: CellClass) -> u64 {
        match class {
            CellClass::Sdc => self.sdc,
            CellClass::Detected => self.detected,
            CellClass::Benign => self.benign,
            CellClass::Trap => self.trap,
            CellClass::Timeout => self.timeout,
        }
    }

    /// Sum over all classes; equals `area` for every well-formed result.
    pub fn classified(&self) -> u64 {
        self.sdc + self.detected + self.benign + self.trap + self.timeout
    }

    pub fn report(&self, config: &Configuration, source: Option<&str>) -> Report {
        Report {
            config: config.to_string(),
            counts: ClassCounts {
                sdc: self.sdc,
                detected: self.detected,
                benign: self.benign,
                trap: self.trap,
                timeout: self.timeout,
            },
            runtime: self.runtime,
            area: self.area,
            source: source.map(str::to_string),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassCounts {
    pub sdc: u64,
    pub detected: u64,
    pub benign: u64,
    pub trap: u64,
    pub timeout: u64,
}

/// JSON shape of prediction and oracle reports.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Report {
    pub config: String,
    pub counts: ClassCounts,
    pub runtime: u64,
    pub area: u64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub source: Option<String>,
}

/// Sorted, disjoint half-open intervals with prefix sums for overlap queries.
#[derive(Debug, Clone, Default)]
pub(crate) struct IntervalSet {
    spans: Vec<(u64, u64)>,
    /// `before[i]` = total length of `spans[..i]`.
    before: Vec<u64>,
}

impl IntervalSet {
    pub(crate) fn new(mut spans: Vec<(u64, u64)>) -> Self {
        spans.sort_unstable();
        let mut before = Vec::with_capacity(spans.len() + 1);
        let mut acc = 0;
        before.push(0);
        for &(lo, hi) in &spans {
            acc += hi - lo;
            before.push(acc);
        }
        IntervalSet { spans, before }
    }

    pub(crate) fn total(&self) -> u64 {
        *self.before.last().unwrap_or(&0)
    }

    /// Covered length below `x`.
    pub(crate) fn covered_below(&self, x: u64) -> u64 {
        let i = self.spans.partition_point(|&(lo, _)| lo < x);
        if i == 0 {
            return 0;
        }
        let (lo, hi) = self.spans[i - 1];
        self.before[i - 1] + hi.min(x) - lo
    }

    pub(crate) fn overlap(&self, lo: u64, hi: u64) -> u64 {
        self.covered_below(hi) - self.covered_below(lo)
    }

    pub(crate) fn spans(&self) -> &[(u64, u64)] {
        &self.spans
    }
}

/// Times removed from the all-enabled timeline under `c`: every window of
/// every disabled assertion, sorted.
pub fn excluded_times(campaign: &CampaignResult, c: &Configuration) -> Result<Vec<(u64, u64)>> {
    c.ensure_len(campaign.n_assertions())?;
    Ok(exclusion(campaign, c).spans().to_vec())
}

pub(crate) fn exclusion(campaign: &CampaignResult, c: &Configuration) -> IntervalSet {
    IntervalSet::new(
        campaign.assertions.iter().filter(|a| !c.is_enabled(a.index)).flat_map(|a| a.windows.iter().copied()).collect(),
    )
}

/// Class of a record's cells under `c`.
pub fn classify(record: &FaultRecord, c: &Configuration) -> CellClass {
    if record.detectors.iter().any(|d| c.is_enabled(d.assertion)) {
        CellClass::Detected
    } else {
        record.outcome.into()
    }
}

/// Per-class cell counts and runtime of the variant compiled with `c`.
pub fn predict(campaign: &CampaignResult, c: &Configuration) -> Result<PredictedCounts> {
    c.ensure_len(campaign.n_assertions())?;
    let excluded = exclusion(campaign, c);
    let mut counts = Counts::default();
    for r in &campaign.records {
        let cells = r.weight() - excluded.overlap(r.lo, r.hi);
        if cells > 0 {
            counts.add(classify(r, c), cells);
        }
    }
    counts.runtime = campaign.total_steps - excluded.total();
    counts.area = counts.runtime * campaign.total_bits;
    Ok(counts)
}

/// Predictions for all `2^N` configurations.
pub fn predict_all(campaign: &CampaignResult) -> Result<BTreeMap<Configuration, PredictedCounts>> {
    predict_all_up_to(campaign, EXHAUSTIVE_LIMIT)
}

pub fn predict_all_up_to(campaign: &CampaignResult, limit: usize) -> Result<BTreeMap<Configuration, PredictedCounts>> {
    let n = campaign.n_assertions();
    if n > limit {
        return Err(Error::TooManyAssertions { n, limit });
    }
    let predictor = Predictor::new(campaign);
    Ok(Configuration::enumerate(n)
        .map(|c| {
            let counts = predictor.predict_unchecked(&c);
            (c, counts)
        })
        .collect())
}

/// Records folded by (outcome, detector set) so that a prediction costs
/// O(groups × N) regardless of the number of records or cells.
#[derive(Debug, Clone)]
pub struct Predictor {
    n: usize,
    total_steps: u64,
    total_bits: u64,
    /// Total window length per assertion.
    window_len: Vec<u64>,
    groups: Vec<Group>,
}

#[derive(Debug, Clone)]
struct Group {
    outcome: Outcome,
    detectors: Vec<usize>,
    weight: u64,
    /// Cells of this group inside each assertion's windows.
    overlap: Vec<u64>,
}

impl Predictor {
    pub fn new(campaign: &CampaignResult) -> Self {
        let n = campaign.n_assertions();
        let windows: Vec<IntervalSet> =
            campaign.assertions.iter().map(|a| IntervalSet::new(a.windows.clone())).collect();
        let mut index: HashMap<(Outcome, Vec<usize>), usize> = HashMap::new();
        let mut groups: Vec<Group> = Vec::new();
        for r in &campaign.records {
            let mut detectors: Vec<usize> = r.detectors.iter().map(|d| d.assertion).collect();
            detectors.sort_unstable();
            let g = *index.entry((r.outcome, detectors.clone())).or_insert_with(|| {
                groups.push(Group { outcome: r.outcome, detectors, weight: 0, overlap: vec![0; n] });
                groups.len() - 1
            });
            let group = &mut groups[g];
            group.weight += r.weight();
            for (a, w) in windows.iter().enumerate() {
                group.overlap[a] += w.overlap(r.lo, r.hi);
            }
        }
        Predictor {
            n,
            total_steps: campaign.total_steps,
            total_bits: campaign.total_bits,
            window_len: windows.iter().map(IntervalSet::total).collect(),
            groups,
        }
    }

    pub fn n_assertions(&self) -> usize {
        self.n
    }

    pub fn predict(&self, c: &Configuration) -> Result<PredictedCounts> {
        c.ensure_len(self.n)?;
        Ok(self.predict_unchecked(c))
    }

    fn predict_unchecked(&self, c: &Configuration) -> PredictedCounts {
        let disabled: Vec<usize> = (0..self.n).filter(|&i| !c.is_enabled(i)).collect();
        let mut counts = Counts::default();
        for g in &self.groups {
            let removed: u64 = disabled.iter().map(|&a| g.overlap[a]).sum();
            let class =
                if g.detectors.iter().any(|&a| c.is_enabled(a)) { CellClass::Detected } else { g.outcome.into() };
            counts.add(class, g.weight - removed);
        }
        counts.runtime = self.total_steps - disabled.iter().map(|&a| self.window_len[a]).sum::<u64>();
        counts.area = counts.runtime * self.total_bits;
        counts
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::campaign::{run_discovery, CampaignOptions};
    use crate::lang::parse;
    use proptest::prelude::*;

    const P0: &str = "var x : 8 = 5\nassert a1 : x == 5\noutput x\n";
    const P1: &str =
        "var a : 8 = 3\nvar b : 8 = 7\na = a + 1\nassert A1 : a == 4\nassert A2 cost 2 : a == 4\noutput a\noutput b\n";

    fn campaign(src: &str) -> CampaignResult {
        run_discovery(&parse(src).unwrap(), &CampaignOptions::default()).unwrap()
    }

    fn cfg(s: &str) -> Configuration {
        s.parse().unwrap()
    }

    #[test]
    fn p1_excluded_times() {
        let c = campaign(P1);
        assert_eq!(excluded_times(&c, &cfg("11")).unwrap(), vec![]);
        assert_eq!(excluded_times(&c, &cfg("01")).unwrap(), vec![(3, 4)]);
        assert_eq!(excluded_times(&c, &cfg("00")).unwrap(), vec![(3, 4), (4, 6)]);
        assert!(matches!(excluded_times(&c, &cfg("1")), Err(Error::ConfigLength { expected: 2, got: 1 })));
    }

    #[test]
    fn p1_table() {
        let c = campaign(P1);
        let sdc: Vec<_> = ["11", "01", "10", "00"].iter().map(|s| predict(&c, &cfg(s)).unwrap()).collect();
        assert_eq!(sdc.iter().map(|p| p.sdc).collect::<Vec<_>>(), vec![56, 48, 40, 48]);
        assert_eq!(sdc.iter().map(|p| p.runtime).collect::<Vec<_>>(), vec![8, 7, 6, 5]);
        assert_eq!(sdc[0], Counts { sdc: 56, detected: 40, benign: 32, trap: 0, timeout: 0, runtime: 8, area: 128 });
    }

    #[test]
    fn p0_table() {
        let c = campaign(P0);
        assert_eq!(
            predict(&c, &cfg("1")).unwrap(),
            Counts { sdc: 8, detected: 8, benign: 8, runtime: 3, area: 24, ..Default::default() }
        );
        // Area identity forces sdc + benign = 2 × 8 here.
        assert_eq!(
            predict(&c, &cfg("0")).unwrap(),
            Counts { sdc: 8, benign: 8, runtime: 2, area: 16, ..Default::default() }
        );
    }

    #[test]
    fn all_enabled_matches_measured_sdc() {
        let c = campaign(P1);
        let measured: u64 = c
            .records
            .iter()
            .filter(|r| r.outcome == Outcome::Sdc && r.detectors.is_empty())
            .map(FaultRecord::weight)
            .sum();
        assert_eq!(predict(&c, &cfg("11")).unwrap().sdc, measured);
    }

    #[test]
    fn predict_all_sizes() {
        assert_eq!(predict_all(&campaign(P1)).unwrap().len(), 4);
        assert_eq!(predict_all(&campaign(P0)).unwrap().len(), 2);
        let none = campaign("var x : 8 = 1\noutput x");
        let all = predict_all(&none).unwrap();
        assert_eq!(all.len(), 1);
        let only = all[&cfg("")];
        assert_eq!(only.sdc, 8);
        assert_eq!(only.benign, 8);
        assert!(matches!(predict_all_up_to(&campaign(P1), 1), Err(Error::TooManyAssertions { n: 2, limit: 1 })));
    }

    #[test]
    fn interval_set_overlap() {
        let s = IntervalSet::new(vec![(10, 12), (3, 5)]);
        assert_eq!(s.total(), 4);
        assert_eq!(s.overlap(0, 20), 4);
        assert_eq!(s.overlap(4, 11), 2);
        assert_eq!(s.overlap(5, 10), 0);
        assert_eq!(s.overlap(3, 4), 1);
        assert_eq!(IntervalSet::default().overlap(0, 9), 0);
    }

    proptest! {
        #[test]
        fn interval_overlap_matches_enumeration(
            raw in proptest::collection::vec((0u64..60, 1u64..6), 0..8),
            lo in 0u64..70,
            len in 0u64..30,
        ) {
            // Make the spans disjoint by laying them out left to right.
            let mut spans = Vec::new();
            let mut cursor = 0;
            for (gap, width) in raw {
                let start = cursor + gap % 7;
                spans.push((start, start + width));
                cursor = start + width;
            }
            let set = IntervalSet::new(spans.clone());
            let hi = lo + len;
            let brute = (lo..hi).filter(|&t| spans.iter().any(|&(a, b)| a <= t && t < b)).count() as u64;
            prop_assert_eq!(set.overlap(lo, hi), brute);
        }
    }
}
