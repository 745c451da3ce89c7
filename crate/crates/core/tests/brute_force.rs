mod common;

use std::collections::HashMap;

use common::*;
use detox_core::campaign::Origin;
use detox_core::interp::{CellClass, Outcome};
use detox_core::predict::Counts;
use detox_core::{ground_truth, predict, run_discovery, CampaignOptions, Configuration};

fn small_corpus() -> Vec<&'static str> {
    CORPUS.iter().copied().filter(|n| area(&program(n)) <= 2000).collect()
}

#[test]
fn small_corpus_is_not_empty() {
    assert_eq!(small_corpus(), ["p0", "p1", "sort3", "trap_timeout"]);
}

#[test]
fn every_coordinate_matches_its_record() {
    for name in small_corpus() {
        let p = program(name);
        let campaign = run_discovery(&p, &CampaignOptions::default()).unwrap();
        let mut covering = HashMap::new();
        for (i, r) in campaign.records.iter().enumerate() {
            for t in r.lo..r.hi {
                assert!(covering.insert((t, r.bit), i).is_none(), "{name}: ({t},{}) covered twice", r.bit);
            }
        }
        for (t, bit, result) in inject_everywhere(&p) {
            let r = &campaign.records[covering[&(t, bit)]];
            match r.origin {
                Origin::Experiment => {
                    assert_eq!(result.detectors, r.detectors, "{name}: detectors at ({t},{bit})");
                    assert_eq!(result.outcome, Some(r.outcome), "{name}: outcome at ({t},{bit})");
                }
                Origin::PrunedBenign => {
                    assert!(result.detectors.is_empty(), "{name}: pruned ({t},{bit}) was detected");
                    assert_eq!(result.outcome, Some(Outcome::Benign), "{name}: pruned ({t},{bit})");
                }
            }
        }
    }
}

#[test]
fn pruned_totals_equal_exhaustive_totals() {
    for name in small_corpus() {
        let p = program(name);
        let campaign = run_discovery(&p, &CampaignOptions::default()).unwrap();
        let mut pruned: HashMap<(Vec<usize>, Outcome), u64> = HashMap::new();
        for r in &campaign.records {
            let key = (r.detectors.iter().map(|d| d.assertion).collect(), r.outcome);
            *pruned.entry(key).or_default() += r.weight();
        }
        let mut full: HashMap<(Vec<usize>, Outcome), u64> = HashMap::new();
        for (_, _, r) in inject_everywhere(&p) {
            let key = (r.detectors.iter().map(|d| d.assertion).collect(), r.outcome.unwrap());
            *full.entry(key).or_default() += 1;
        }
        assert_eq!(pruned, full, "{name}");
    }
}

#[test]
fn oracle_matches_unpruned_injection() {
    for name in small_corpus() {
        let p = program(name);
        for c in Configuration::enumerate(p.n_assertions()) {
            let truth = ground_truth(&p, &c, &CampaignOptions::default()).unwrap();
            assert_eq!(truth, brute_force_truth(&p, &c), "{name} {c}");
        }
    }
}

#[test]
fn p1_table_from_brute_force() {
    let p = program("p1");
    let expected = [("11", 56, 8), ("01", 48, 7), ("10", 40, 6), ("00", 48, 5)];
    let campaign = run_discovery(&p, &CampaignOptions::default()).unwrap();
    for (bits, sdc, runtime) in expected {
        let c: Configuration = bits.parse().unwrap();
        let truth = brute_force_truth(&p, &c);
        assert_eq!((truth.sdc, truth.runtime), (sdc, runtime), "{bits}");
        assert_eq!(predict(&campaign, &c).unwrap(), truth, "{bits}");
    }
}

#[test]
fn p0_counts_from_brute_force() {
    let p = program("p0");
    let one = brute_force_truth(&p, &"1".parse().unwrap());
    assert_eq!(one, Counts { sdc: 8, detected: 8, benign: 8, trap: 0, timeout: 0, runtime: 3, area: 24 });
    let zero = brute_force_truth(&p, &"0".parse().unwrap());
    assert_eq!(zero, Counts { sdc: 8, detected: 0, benign: 8, trap: 0, timeout: 0, runtime: 2, area: 16 });
}

#[test]
fn trap_and_timeout_workload_exercises_every_class() {
    let p = program("trap_timeout");
    let truth = brute_force_truth(&p, &Configuration::all_enabled(p.n_assertions()));
    for class in cell_classes() {
        assert!(truth.get(class) > 0, "{class:?} never occurs");
    }
    assert!(truth.get(CellClass::Trap) > 0 && truth.get(CellClass::Timeout) > 0);
}
