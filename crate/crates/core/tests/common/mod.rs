#![allow(dead_code)]

use std::path::PathBuf;

use detox_core::interp::{CellClass, ExperimentResult, Mode, DEFAULT_TIMEOUT_FACTOR};
use detox_core::predict::Counts;
use detox_core::{golden_run, oracle, parse, run_experiment, Configuration, Program};

pub const CORPUS: [&str; 6] = ["p0", "p1", "sort3", "trap_timeout", "sort10", "mixed8"];

pub fn workload_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("workloads").join(format!("{name}.dtx"))
}

pub fn source(name: &str) -> String {
    std::fs::read_to_string(workload_path(name)).unwrap()
}

pub fn program(name: &str) -> Program {
    parse(&source(name)).unwrap()
}

pub fn area(p: &Program) -> u64 {
    let g = golden_run(p).unwrap();
    g.total_steps * g.total_bits()
}

/// Discovery result of every single coordinate, without any pruning.
pub fn inject_everywhere(p: &Program) -> Vec<(u64, u64, ExperimentResult)> {
    let g = golden_run(p).unwrap();
    let mut out = Vec::new();
    for bit in 0..g.total_bits() {
        for t in 0..g.total_steps {
            let r = run_experiment(p, t, bit, &Mode::Discovery, DEFAULT_TIMEOUT_FACTOR).unwrap();
            out.push((t, bit, r));
        }
    }
    out
}

/// Ground truth for `c` by injecting every coordinate of the stripped variant.
pub fn brute_force_truth(p: &Program, c: &Configuration) -> Counts {
    let variant = oracle::strip(p, c).unwrap().program;
    let g = golden_run(&variant).unwrap();
    let mode = Mode::Deployment(Configuration::all_enabled(variant.n_assertions()));
    let mut counts = Counts { runtime: g.total_steps, area: g.total_steps * g.total_bits(), ..Counts::default() };
    for bit in 0..g.total_bits() {
        for t in 0..g.total_steps {
            let r = run_experiment(&variant, t, bit, &mode, DEFAULT_TIMEOUT_FACTOR).unwrap();
            counts.add(r.class(), 1);
        }
    }
    counts
}

pub fn cell_classes() -> [CellClass; 5] {
    [CellClass::Sdc, CellClass::Detected, CellClass::Benign, CellClass::Trap, CellClass::Timeout]
}
