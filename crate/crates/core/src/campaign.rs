//! The single all-assertions-enabled discovery campaign and its result file.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::faultspace::{build_classes, FaultClass};
use crate::interp::{Detection, ExperimentResult, Injector, Mode, Outcome, DEFAULT_TIMEOUT_FACTOR};
use crate::lang::Program;

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Origin {
    #[serde(rename = "E")]
    Experiment,
    #[serde(rename = "P")]
    PrunedBenign,
}

/// Result of one fault class, covering injection times `[lo, hi)` on `bit`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FaultRecord {
    pub bit: u64,
    pub lo: u64,
    pub hi: u64,
    pub rep_t: Option<u64>,
    pub detectors: Vec<Detection>,
    pub outcome: Outcome,
    pub origin: Origin,
}

impl FaultRecord {
    pub fn weight(&self) -> u64 {
        self.hi - self.lo
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AssertionSummary {
    pub index: usize,
    pub id: String,
    /// Half-open `[t_start, t_end)` of each dynamic instance, in order.
    pub windows: Vec<(u64, u64)>,
}

/// Placement of one variable on the bit axis.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VariableSummary {
    pub name: String,
    pub offset: u64,
    pub width: u32,
    pub length: usize,
}

impl VariableSummary {
    pub fn bits(&self) -> u64 {
        self.width as u64 * self.length as u64
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CampaignResult {
    pub program_digest: String,
    pub total_steps: u64,
    pub workload_steps: u64,
    pub total_bits: u64,
    pub assertions: Vec<AssertionSummary>,
    pub variables: Vec<VariableSummary>,
    /// Sorted by `(bit, lo)`.
    pub records: Vec<FaultRecord>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CampaignOptions {
    pub timeout_factor: f64,
    /// Worker threads; 0 lets the pool pick.
    pub jobs: usize,
}

impl Default for CampaignOptions {
    fn default() -> Self {
        CampaignOptions { timeout_factor: DEFAULT_TIMEOUT_FACTOR, jobs: 0 }
    }
}

/// Runs every experiment class in `classes`, in parallel, returning results
/// in input order. Pruned classes yield `None`.
pub(crate) fn execute_classes(
    injector: &Injector<'_>,
    classes: &[FaultClass],
    jobs: usize,
) -> Result<Vec<Option<ExperimentResult>>> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::InvalidParam(format!("thread pool: {e}")))?;
    pool.install(|| classes.par_iter().map(|c| c.rep_t().map(|t| injector.inject(t, c.bit)).transpose()).collect())
}

/// Discovery-mode campaign over the all-enabled program: one record per
/// def/use class.
pub fn run_discovery(p: &Program, opts: &CampaignOptions) -> Result<CampaignResult> {
    let injector = Injector::new(p, &Mode::Discovery, opts.timeout_factor)?;
    let golden = injector.golden();
    let classes = build_classes(golden);
    let results = execute_classes(&injector, &classes, opts.jobs)?;

    let records = classes
        .iter()
        .zip(results)
        .map(|(c, r)| match r {
            Some(r) => FaultRecord {
                bit: c.bit,
                lo: c.lo,
                hi: c.hi,
                rep_t: c.rep_t(),
                detectors: r.detectors,
                outcome: r.outcome.expect("discovery runs always complete"),
                origin: Origin::Experiment,
            },
            None => FaultRecord {
                bit: c.bit,
                lo: c.lo,
                hi: c.hi,
                rep_t: None,
                detectors: Vec::new(),
                outcome: Outcome::Benign,
                origin: Origin::PrunedBenign,
            },
        })
        .collect();

    let assertions = p
        .assertions
        .iter()
        .enumerate()
        .map(|(index, a)| AssertionSummary {
            index,
            id: a.id.clone(),
            windows: golden.windows_of(index).map(|w| (w.t_start, w.t_end)).collect(),
        })
        .collect();

    let mut offset = 0;
    let variables = p
        .vars
        .iter()
        .map(|v| {
            let s = VariableSummary { name: v.name.clone(), offset, width: v.width.bits(), length: v.len() };
            offset += s.bits();
            s
        })
        .collect();

    Ok(CampaignResult {
        program_digest: p.digest(),
        total_steps: golden.total_steps,
        workload_steps: golden.workload_steps,
        total_bits: golden.total_bits(),
        assertions,
        variables,
        records,
    })
}

impl CampaignResult {
    pub fn n_assertions(&self) -> usize {
        self.assertions.len()
    }

    pub fn area(&self) -> u64 {
        self.total_steps * self.total_bits
    }

    pub fn check_digest(&self, p: &Program) -> Result<()> {
        let expected = p.digest();
        if expected == self.program_digest {
            Ok(())
        } else {
            Err(Error::DigestMismatch { expected, found: self.program_digest.clone() })
        }
    }

    pub fn to_jsonl(&self) -> String {
        let mut out = Vec::new();
        self.write_jsonl(&mut out).expect("writing to a Vec cannot fail");
        String::from_utf8(out).expect("serde_json emits UTF-8")
    }

    pub fn write_jsonl<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        let header = HeaderLine {
            format_version: FORMAT_VERSION,
            program_digest: self.program_digest.clone(),
            total_steps: self.total_steps,
            workload_steps: self.workload_steps,
            total_bits: self.total_bits,
            assertions: self
                .assertions
                .iter()
                .map(|a| AssertionLine { index: a.index, id: a.id.clone(), windows: a.windows.clone() })
                .collect(),
            variables: self.variables.clone(),
        };
        serde_json::to_writer(&mut w, &header)?;
        w.write_all(b"\n")?;
        for r in &self.records {
            let line = RecordLine {
                bit: r.bit,
                lo: r.lo,
                hi: r.hi,
                rep_t: r.rep_t,
                detectors: r.detectors.iter().map(|d| (d.assertion, d.step)).collect(),
                outcome: r.outcome,
                origin: r.origin,
            };
            serde_json::to_writer(&mut w, &line)?;
            w.write_all(b"\n")?;
        }
        w.flush()
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let w = BufWriter::new(File::create(path)?);
        self.write_jsonl(w)?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<CampaignResult> {
        Self::read_jsonl(BufReader::new(File::open(path)?))
    }

    pub fn from_jsonl(text: &str) -> Result<CampaignResult> {
        Self::read_jsonl(text.as_bytes())
    }

    pub fn read_jsonl<R: BufRead>(r: R) -> Result<CampaignResult> {
        let malformed = |line: usize, message: String| Error::Malformed { line, message };
        let mut lines = r.lines().enumerate();

        let header: HeaderLine = match lines.next() {
            Some((_, line)) => serde_json::from_str(&line?).map_err(|e| malformed(1, e.to_string()))?,
            None => return Err(malformed(1, "empty file".into())),
        };
        if header.format_version != FORMAT_VERSION {
            return Err(malformed(1, format!("unsupported format_version {}", header.format_version)));
        }
        let n = header.assertions.len();
        for (i, a) in header.assertions.iter().enumerate() {
            if a.index != i {
                return Err(malformed(1, format!("assertion {} listed at position {i}", a.index)));
            }
            if a.windows.iter().any(|&(s, e)| s >= e || e > header.total_steps) {
                return Err(malformed(1, format!("assertion `{}` has an invalid window", a.id)));
            }
        }

        let mut records = Vec::new();
        for (i, line) in lines {
            let line = line?;
            let lineno = i + 1;
            if line.trim().is_empty() {
                continue;
            }
            let rec: RecordLine = serde_json::from_str(&line).map_err(|e| malformed(lineno, e.to_string()))?;
            if rec.lo >= rec.hi || rec.hi > header.total_steps || rec.bit >= header.total_bits {
                return Err(malformed(lineno, "record interval or bit out of range".into()));
            }
            if rec.detectors.iter().any(|&(a, _)| a >= n) {
                return Err(malformed(lineno, "detector index out of range".into()));
            }
            if rec.origin == Origin::PrunedBenign && (!rec.detectors.is_empty() || rec.outcome != Outcome::Benign) {
                return Err(malformed(lineno, "pruned record must be benign without detectors".into()));
            }
            if let Some(prev) = records.last() {
                let prev: &FaultRecord = prev;
                if (prev.bit, prev.lo) >= (rec.bit, rec.lo) {
                    return Err(malformed(lineno, "records not sorted by (bit, lo)".into()));
                }
            }
            records.push(FaultRecord {
                bit: rec.bit,
                lo: rec.lo,
                hi: rec.hi,
                rep_t: rec.rep_t,
                detectors: rec.detectors.into_iter().map(|(assertion, step)| Detection { assertion, step }).collect(),
                outcome: rec.outcome,
                origin: rec.origin,
            });
        }

        let covered: u64 = records.iter().map(FaultRecord::weight).sum();
        let area = header.total_steps * header.total_bits;
        if covered != area {
            return Err(malformed(
                records.len() + 1,
                format!("records cover {covered} cells but the fault space has {area} (truncated file?)"),
            ));
        }

        Ok(CampaignResult {
            program_digest: header.program_digest,
            total_steps: header.total_steps,
            workload_steps: header.workload_steps,
            total_bits: header.total_bits,
            assertions: header
                .assertions
                .into_iter()
                .map(|a| AssertionSummary { index: a.index, id: a.id, windows: a.windows })
                .collect(),
            variables: header.variables,
            records,
        })
    }
}

#[derive(Serialize, Deserialize)]
struct HeaderLine {
    format_version: u32,
    program_digest: String,
    #[serde(rename = "T")]
    total_steps: u64,
    workload_steps: u64,
    total_bits: u64,
    assertions: Vec<AssertionLine>,
    #[serde(default)]
    variables: Vec<VariableSummary>,
}

#[derive(Serialize, Deserialize)]
struct AssertionLine {
    index: usize,
    id: String,
    windows: Vec<(u64, u64)>,
}

#[derive(Serialize, Deserialize)]
struct RecordLine {
    bit: u64,
    lo: u64,
    hi: u64,
    rep_t: Option<u64>,
    detectors: Vec<(usize, u64)>,
    outcome: Outcome,
    origin: Origin,
}
