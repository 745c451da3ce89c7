//! Ground truth: build the variant with disabled assertions removed and run
//! a full deployment-mode campaign on it.

use crate::campaign::{execute_classes, CampaignOptions};
use crate::config::Configuration;
use crate::error::Result;
use crate::faultspace::build_classes;
use crate::interp::{CellClass, Injector, Mode};
use crate::lang::{Program, Stmt};
use crate::predict::{Counts, TrueCounts};

/// A workload variant and, for each of its assertions, the index of the
/// same assertion in the original program.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Variant {
    pub program: Program,
    pub original_index: Vec<usize>,
}

/// Removes every `assert` statement that `c` disables. Declarations and
/// all other statements are kept, so the memory layout is unchanged.
pub fn strip(p: &Program, c: &Configuration) -> Result<Variant> {
    c.ensure_len(p.n_assertions())?;
    let original_index: Vec<usize> = (0..p.n_assertions()).filter(|&i| c.is_enabled(i)).collect();
    let mut renumber = vec![None; p.n_assertions()];
    for (new, &old) in original_index.iter().enumerate() {
        renumber[old] = Some(new);
    }

    fn filter(stmts: &[Stmt], renumber: &[Option<usize>]) -> Vec<Stmt> {
        stmts
            .iter()
            .filter_map(|s| match s {
                Stmt::Assert { index } => renumber[*index].map(|index| Stmt::Assert { index }),
                Stmt::If { cond, then_branch, else_branch } => Some(Stmt::If {
                    cond: cond.clone(),
                    then_branch: filter(then_branch, renumber),
                    else_branch: filter(else_branch, renumber),
                }),
                Stmt::While { cond, body } => Some(Stmt::While { cond: cond.clone(), body: filter(body, renumber) }),
                other => Some(other.clone()),
            })
            .collect()
    }

    let program = Program {
        vars: p.vars.clone(),
        body: filter(&p.body, &renumber),
        assertions: original_index.iter().map(|&i| p.assertions[i].clone()).collect(),
    };
    Ok(Variant { program, original_index })
}

/// Outcome counts of the variant `strip(p, c)` measured by injection.
pub fn ground_truth(p: &Program, c: &Configuration, opts: &CampaignOptions) -> Result<TrueCounts> {
    let variant = strip(p, c)?;
    let mode = Mode::Deployment(Configuration::all_enabled(variant.program.n_assertions()));
    let injector = Injector::new(&variant.program, &mode, opts.timeout_factor)?;
    let golden = injector.golden();
    let classes = build_classes(golden);
    let results = execute_classes(&injector, &classes, opts.jobs)?;

    let mut counts = Counts::default();
    for (class, result) in classes.iter().zip(&results) {
        let cell = result.as_ref().map_or(CellClass::Benign, |r| r.class());
        counts.add(cell, class.weight());
    }
    counts.runtime = golden.total_steps;
    counts.area = golden.total_steps * golden.total_bits();
    Ok(counts)
}
