//! Def/use compression of the time × memory-bit fault space.
//!
//! Injection times between two consecutive accesses of a bit are
//! equivalent: the flip stays latent until the next access. If that access
//! reads the bit, one experiment at the access step stands for the whole
//! interval; if it overwrites the bit, the interval is benign without
//! running anything. Flips after the last access never matter.

use crate::interp::GoldenTrace;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ClassKind {
    /// Inject once at `rep_t`, the reading access that closes the interval.
    Experiment {
        rep_t: u64,
    },
    PrunedBenign,
}

/// Injection times `[lo, hi)` on `bit` that all yield the same result.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct FaultClass {
    pub bit: u64,
    pub lo: u64,
    pub hi: u64,
    pub kind: ClassKind,
}

impl FaultClass {
    pub fn weight(&self) -> u64 {
        self.hi - self.lo
    }

    pub fn rep_t(&self) -> Option<u64> {
        match self.kind {
            ClassKind::Experiment { rep_t } => Some(rep_t),
            ClassKind::PrunedBenign => None,
        }
    }
}

/// Equivalence classes of every bit, sorted by `(bit, lo)`. Per bit, the
/// classes partition `[0, T)`.
pub fn build_classes(trace: &GoldenTrace) -> Vec<FaultClass> {
    let map = &trace.memory_map;
    let mut per_slot: Vec<Vec<(u64, bool)>> = vec![Vec::new(); map.slots.len()];
    for a in &trace.accesses {
        per_slot[a.slot].push((a.t, a.mode.reads()));
    }

    let mut classes = Vec::new();
    for (slot, accesses) in per_slot.iter().enumerate() {
        let mut template = Vec::with_capacity(accesses.len() + 1);
        let mut lo = 0;
        for &(t, reads) in accesses {
            let kind = if reads { ClassKind::Experiment { rep_t: t } } else { ClassKind::PrunedBenign };
            template.push((lo, t + 1, kind));
            lo = t + 1;
        }
        if lo < trace.total_steps {
            template.push((lo, trace.total_steps, ClassKind::PrunedBenign));
        }
        for bit in map.slot_bits(slot) {
            classes.extend(template.iter().map(|&(lo, hi, kind)| FaultClass { bit, lo, hi, kind }));
        }
    }
    classes
}

/// Number of fault-space cells: `T × total_bits`.
pub fn total_area(trace: &GoldenTrace) -> u64 {
    trace.total_steps * trace.total_bits()
}
