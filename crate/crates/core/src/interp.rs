//! Step-counted execution over a bit-addressable memory.
//!
//! Every variable declaration, assignment, output, `if`/`while` condition
//! evaluation and assertion occupies one or more time steps. A statement
//! of cost `k` performs its reads and writes on its last step; the earlier
//! `k - 1` steps only consume time. A fault flips one memory bit
//! immediately before the step at its injection time.

use std::collections::hash_map::DefaultHasher;
use std::hash::{Hash, Hasher};

use serde::{Deserialize, Serialize};

use crate::config::Configuration;
use crate::error::{Error, GoldenError, Result, Trap};
use crate::lang::{BinOp, Expr, LValue, Program, Stmt, UnOp, VarId};

pub const DEFAULT_TIMEOUT_FACTOR: f64 = 10.0;
/// Absolute bound on golden-run length.
pub const DEFAULT_STEP_LIMIT: u64 = 50_000_000;

/// One variable (or array element) in memory.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Slot {
    pub var: VarId,
    pub name: String,
    /// Element index for arrays, `None` for scalars.
    pub element: Option<usize>,
    pub bit_offset: u64,
    pub width: u32,
}

/// Declaration-ordered, densely packed layout of all program variables.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MemoryMap {
    pub total_bits: u64,
    pub slots: Vec<Slot>,
    var_base: Vec<usize>,
}

impl MemoryMap {
    pub fn new(p: &Program) -> Self {
        let mut slots = Vec::new();
        let mut var_base = Vec::with_capacity(p.vars.len());
        let mut offset = 0u64;
        for (var, decl) in p.vars.iter().enumerate() {
            var_base.push(slots.len());
            for e in 0..decl.len() {
                slots.push(Slot {
                    var,
                    name: decl.name.clone(),
                    element: decl.is_array().then_some(e),
                    bit_offset: offset,
                    width: decl.width.bits(),
                });
                offset += decl.width.bits() as u64;
            }
        }
        MemoryMap { total_bits: offset, slots, var_base }
    }

    /// Slot holding `bit`, and the bit's position inside that slot.
    pub fn locate(&self, bit: u64) -> Option<(usize, u32)> {
        if bit >= self.total_bits {
            return None;
        }
        let slot = self.slots.partition_point(|s| s.bit_offset <= bit) - 1;
        Some((slot, (bit - self.slots[slot].bit_offset) as u32))
    }

    pub fn first_slot(&self, var: VarId) -> usize {
        self.var_base[var]
    }

    pub fn slot_bits(&self, slot: usize) -> std::ops::Range<u64> {
        let s = &self.slots[slot];
        s.bit_offset..s.bit_offset + s.width as u64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum AccessMode {
    R,
    W,
    RW,
}

impl AccessMode {
    /// Whether the access observes the value present before the step.
    pub fn reads(self) -> bool {
        !matches!(self, AccessMode::W)
    }
}

/// All bits of `slot` accessed at step `t`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Access {
    pub t: u64,
    pub slot: usize,
    pub mode: AccessMode,
}

/// One dynamic execution of an assertion, occupying `[t_start, t_end)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct AssertionWindow {
    pub assertion: usize,
    pub instance: u64,
    pub t_start: u64,
    pub t_end: u64,
}

impl AssertionWindow {
    pub fn duration(&self) -> u64 {
        self.t_end - self.t_start
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GoldenTrace {
    pub total_steps: u64,
    pub workload_steps: u64,
    /// Ordered by `t`, then slot.
    pub accesses: Vec<Access>,
    /// Ordered by `t_start`.
    pub windows: Vec<AssertionWindow>,
    pub outputs: Vec<u32>,
    pub memory_map: MemoryMap,
}

impl GoldenTrace {
    /// The access log expanded to individual bits: `(t, bit, mode)`.
    pub fn bit_accesses(&self) -> impl Iterator<Item = (u64, u64, AccessMode)> + '_ {
        self.accesses.iter().flat_map(move |a| self.memory_map.slot_bits(a.slot).map(move |b| (a.t, b, a.mode)))
    }

    pub fn total_bits(&self) -> u64 {
        self.memory_map.total_bits
    }

    pub fn windows_of(&self, assertion: usize) -> impl Iterator<Item = &AssertionWindow> {
        self.windows.iter().filter(move |w| w.assertion == assertion)
    }
}

/// An assertion that observed a violated predicate, at the step its
/// predicate was evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Detection {
    pub assertion: usize,
    pub step: u64,
}

/// Final outcome of a run that was not ended by a detector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Outcome {
    Benign,
    Sdc,
    Trap,
    Timeout,
}

impl Outcome {
    pub fn as_str(self) -> &'static str {
        match self {
            Outcome::Benign => "BENIGN",
            Outcome::Sdc => "SDC",
            Outcome::Trap => "TRAP",
            Outcome::Timeout => "TIMEOUT",
        }
    }
}

/// How a fault-space cell is classified under some configuration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CellClass {
    Sdc,
    Detected,
    Benign,
    Trap,
    Timeout,
}

impl From<Outcome> for CellClass {
    fn from(o: Outcome) -> Self {
        match o {
            Outcome::Benign => CellClass::Benign,
            Outcome::Sdc => CellClass::Sdc,
            Outcome::Trap => CellClass::Trap,
            Outcome::Timeout => CellClass::Timeout,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ExperimentResult {
    /// First failure of each assertion, in trigger order.
    pub detectors: Vec<Detection>,
    /// `None` when a deployment-mode detector ended the run.
    pub outcome: Option<Outcome>,
}

impl ExperimentResult {
    pub fn class(&self) -> CellClass {
        match self.outcome {
            None => CellClass::Detected,
            Some(o) => o.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Mode {
    /// Every assertion runs; failures are recorded and execution continues.
    Discovery,
    /// Only enabled assertions run; the first failure ends the run.
    Deployment(Configuration),
}

pub fn golden_run(p: &Program) -> Result<GoldenTrace, GoldenError> {
    golden_run_with(p, &vec![true; p.n_assertions()], DEFAULT_STEP_LIMIT)
}

/// Golden run executing only the assertions marked in `executes`.
pub fn golden_run_with(p: &Program, executes: &[bool], step_limit: u64) -> Result<GoldenTrace, GoldenError> {
    let map = MemoryMap::new(p);
    let mut m = Machine::new(p, &map, executes);
    m.step_limit = step_limit;
    m.golden = true;
    m.log = Some(Log::default());
    match m.run() {
        Ok(()) => {}
        Err(Halt::Trap(trap, step)) => return Err(GoldenError::Trap { step, trap }),
        Err(Halt::StepLimit) => return Err(GoldenError::StepLimit { limit: step_limit }),
        Err(Halt::GoldenAssertion(i, step)) => {
            return Err(GoldenError::AssertionFailed { id: p.assertions[i].id.clone(), step })
        }
        Err(Halt::Timeout) | Err(Halt::Detected) => unreachable!("golden run has no budget and no detector abort"),
    }
    let log = m.log.take().unwrap_or_default();
    let (total_steps, workload_steps, outputs) = (m.now, m.workload_steps, std::mem::take(&mut m.outputs));
    drop(m);
    Ok(GoldenTrace {
        total_steps,
        workload_steps,
        accesses: log.accesses,
        windows: log.windows,
        outputs,
        memory_map: map,
    })
}

/// Runs one experiment. Prefer [`Injector`] when injecting many faults into
/// the same program, since it computes the golden run once.
pub fn run_experiment(p: &Program, t: u64, bit: u64, mode: &Mode, timeout_factor: f64) -> Result<ExperimentResult> {
    Injector::new(p, mode, timeout_factor)?.inject(t, bit)
}

/// Fault injector bound to one program, mode and timeout budget.
#[derive(Debug, Clone)]
pub struct Injector<'p> {
    program: &'p Program,
    executes: Vec<bool>,
    abort_on_detect: bool,
    golden: GoldenTrace,
    budget: u64,
}

impl<'p> Injector<'p> {
    pub fn new(program: &'p Program, mode: &Mode, timeout_factor: f64) -> Result<Self> {
        if !(timeout_factor.is_finite() && timeout_factor >= 1.0) {
            return Err(Error::InvalidParam(format!("timeout factor must be >= 1, got {timeout_factor}")));
        }
        let (executes, abort_on_detect) = match mode {
            Mode::Discovery => (vec![true; program.n_assertions()], false),
            Mode::Deployment(c) => {
                c.ensure_len(program.n_assertions())?;
                (c.bits().to_vec(), true)
            }
        };
        let golden = golden_run_with(program, &executes, DEFAULT_STEP_LIMIT)?;
        let budget = (timeout_factor * golden.workload_steps as f64).floor() as u64;
        Ok(Injector { program, executes, abort_on_detect, golden, budget })
    }

    pub fn golden(&self) -> &GoldenTrace {
        &self.golden
    }

    /// Maximum number of workload (non-assertion) steps a faulty run may take.
    pub fn workload_budget(&self) -> u64 {
        self.budget
    }

    pub fn inject(&self, t: u64, bit: u64) -> Result<ExperimentResult> {
        self.execute(t, bit, false).map(|(r, _)| r)
    }

    /// Like [`inject`](Self::inject), also returning a digest of workload
    /// memory after every workload statement.
    pub fn inject_with_states(&self, t: u64, bit: u64) -> Result<(ExperimentResult, Vec<u64>)> {
        self.execute(t, bit, true)
    }

    fn execute(&self, t: u64, bit: u64, record_states: bool) -> Result<(ExperimentResult, Vec<u64>)> {
        let map = &self.golden.memory_map;
        let located = map.locate(bit).filter(|_| t < self.golden.total_steps);
        let Some((slot, offset)) = located else {
            return Err(Error::CoordinateOutOfRange { t, bit, steps: self.golden.total_steps, bits: map.total_bits });
        };
        let mut m = Machine::new(self.program, map, &self.executes);
        m.abort_on_detect = self.abort_on_detect;
        m.fault = Some(Fault { t, slot, mask: 1 << offset });
        m.workload_budget = self.budget;
        if record_states {
            m.states = Some(Vec::new());
        }
        let outcome = match m.run() {
            Ok(()) if m.outputs == self.golden.outputs => Some(Outcome::Benign),
            Ok(()) => Some(Outcome::Sdc),
            Err(Halt::Trap(..)) => Some(Outcome::Trap),
            Err(Halt::Timeout) => Some(Outcome::Timeout),
            Err(Halt::Detected) => None,
            Err(Halt::StepLimit) | Err(Halt::GoldenAssertion(..)) => {
                unreachable!("faulty runs are bounded by the workload budget")
            }
        };
        Ok((ExperimentResult { detectors: m.detectors, outcome }, m.states.unwrap_or_default()))
    }
}

#[derive(Debug, Clone, Copy)]
struct Fault {
    t: u64,
    slot: usize,
    mask: u32,
}

#[derive(Debug)]
enum Halt {
    Trap(Trap, u64),
    Timeout,
    StepLimit,
    Detected,
    GoldenAssertion(usize, u64),
}

#[derive(Debug, Default)]
struct Log {
    accesses: Vec<Access>,
    windows: Vec<AssertionWindow>,
    reads: Vec<usize>,
    writes: Vec<usize>,
}

struct Machine<'a> {
    prog: &'a Program,
    map: &'a MemoryMap,
    masks: Vec<u32>,
    mem: Vec<u32>,
    now: u64,
    workload_steps: u64,
    workload_budget: u64,
    step_limit: u64,
    executes: &'a [bool],
    abort_on_detect: bool,
    golden: bool,
    fault: Option<Fault>,
    detectors: Vec<Detection>,
    outputs: Vec<u32>,
    instances: Vec<u64>,
    log: Option<Log>,
    states: Option<Vec<u64>>,
}

impl<'a> Machine<'a> {
    fn new(prog: &'a Program, map: &'a MemoryMap, executes: &'a [bool]) -> Self {
        let masks = map.slots.iter().map(|s| if s.width == 32 { u32::MAX } else { (1 << s.width) - 1 }).collect();
        Machine {
            prog,
            map,
            masks,
            mem: vec![0; map.slots.len()],
            now: 0,
            workload_steps: 0,
            workload_budget: u64::MAX,
            step_limit: u64::MAX,
            executes,
            abort_on_detect: false,
            golden: false,
            fault: None,
            detectors: Vec::new(),
            outputs: Vec::new(),
            instances: vec![0; prog.n_assertions()],
            log: None,
            states: None,
        }
    }

    fn run(&mut self) -> Result<(), Halt> {
        for (var, decl) in self.prog.vars.iter().enumerate() {
            let t = self.advance(1, true)?;
            let base = self.map.first_slot(var);
            for (e, &v) in decl.init.iter().enumerate() {
                self.store(base + e, v);
            }
            self.flush(t);
            self.record_state();
        }
        self.block(&self.prog.body)
    }

    /// Consumes `cost` steps and returns the step on which the effect happens.
    fn advance(&mut self, cost: u32, workload: bool) -> Result<u64, Halt> {
        let cost = cost as u64;
        if workload {
            self.workload_steps += cost;
            if self.workload_steps > self.workload_budget {
                return Err(Halt::Timeout);
            }
        }
        if self.now + cost > self.step_limit {
            return Err(Halt::StepLimit);
        }
        if let Some(f) = self.fault {
            if f.t >= self.now && f.t < self.now + cost {
                self.mem[f.slot] ^= f.mask;
            }
        }
        self.now += cost;
        Ok(self.now - 1)
    }

    fn flush(&mut self, t: u64) {
        let Some(log) = self.log.as_mut() else { return };
        log.reads.sort_unstable();
        log.reads.dedup();
        log.writes.sort_unstable();
        log.writes.dedup();
        let (mut r, mut w) = (0, 0);
        while r < log.reads.len() || w < log.writes.len() {
            let next_r = log.reads.get(r).copied().unwrap_or(usize::MAX);
            let next_w = log.writes.get(w).copied().unwrap_or(usize::MAX);
            let (slot, mode) = match next_r.cmp(&next_w) {
                std::cmp::Ordering::Less => {
                    r += 1;
                    (next_r, AccessMode::R)
                }
                std::cmp::Ordering::Greater => {
                    w += 1;
                    (next_w, AccessMode::W)
                }
                std::cmp::Ordering::Equal => {
                    r += 1;
                    w += 1;
                    (next_r, AccessMode::RW)
                }
            };
            log.accesses.push(Access { t, slot, mode });
        }
        log.reads.clear();
        log.writes.clear();
    }

    fn record_state(&mut self) {
        if let Some(states) = self.states.as_mut() {
            let mut h = DefaultHasher::new();
            self.mem.hash(&mut h);
            states.push(h.finish());
        }
    }

    fn load(&mut self, slot: usize) -> u32 {
        if let Some(log) = self.log.as_mut() {
            log.reads.push(slot);
        }
        self.mem[slot]
    }

    fn store(&mut self, slot: usize, value: u32) {
        if let Some(log) = self.log.as_mut() {
            log.writes.push(slot);
        }
        self.mem[slot] = value & self.masks[slot];
    }

    fn elem_slot(&self, var: VarId, index: u32) -> Result<usize, Trap> {
        let len = self.prog.vars[var].len();
        if (index as usize) < len {
            Ok(self.map.first_slot(var) + index as usize)
        } else {
            Err(Trap::IndexOutOfBounds { index, len })
        }
    }

    fn eval(&mut self, e: &Expr) -> Result<u32, Trap> {
        Ok(match e {
            Expr::Const(c) => *c,
            Expr::Var(v) => self.load(self.map.first_slot(*v)),
            Expr::Elem(v, i) => {
                let idx = self.eval(i)?;
                let slot = self.elem_slot(*v, idx)?;
                self.load(slot)
            }
            Expr::Unary(UnOp::Not, inner) => (self.eval(inner)? == 0) as u32,
            Expr::Binary(BinOp::And, l, r) => (self.eval(l)? != 0 && self.eval(r)? != 0) as u32,
            Expr::Binary(BinOp::Or, l, r) => (self.eval(l)? != 0 || self.eval(r)? != 0) as u32,
            Expr::Binary(op, l, r) => {
                let a = self.eval(l)?;
                let b = self.eval(r)?;
                match op {
                    BinOp::Add => a.wrapping_add(b),
                    BinOp::Sub => a.wrapping_sub(b),
                    BinOp::Mul => a.wrapping_mul(b),
                    BinOp::Div => a.checked_div(b).ok_or(Trap::DivisionByZero)?,
                    BinOp::Mod => a.checked_rem(b).ok_or(Trap::DivisionByZero)?,
                    BinOp::Eq => (a == b) as u32,
                    BinOp::Ne => (a != b) as u32,
                    BinOp::Lt => (a < b) as u32,
                    BinOp::Le => (a <= b) as u32,
                    BinOp::Gt => (a > b) as u32,
                    BinOp::Ge => (a >= b) as u32,
                    BinOp::And | BinOp::Or => unreachable!(),
                }
            }
        })
    }

    fn assign(&mut self, target: &LValue, value: &Expr) -> Result<(), Trap> {
        let v = self.eval(value)?;
        let slot = match target {
            LValue::Var(var) => self.map.first_slot(*var),
            LValue::Elem(var, index) => {
                let idx = self.eval(index)?;
                self.elem_slot(*var, idx)?
            }
        };
        self.store(slot, v);
        Ok(())
    }

    /// Evaluates a condition on its own workload step.
    fn condition(&mut self, cond: &Expr) -> Result<bool, Halt> {
        let t = self.advance(1, true)?;
        let r = self.eval(cond);
        self.flush(t);
        self.record_state();
        r.map(|v| v != 0).map_err(|trap| Halt::Trap(trap, t))
    }

    fn block(&mut self, stmts: &'a [Stmt]) -> Result<(), Halt> {
        stmts.iter().try_for_each(|s| self.stmt(s))
    }

    fn stmt(&mut self, s: &'a Stmt) -> Result<(), Halt> {
        match s {
            Stmt::Assign { target, value, cost } => {
                let t = self.advance(*cost, true)?;
                let r = self.assign(target, value);
                self.flush(t);
                self.record_state();
                r.map_err(|trap| Halt::Trap(trap, t))
            }
            Stmt::Output { value, cost } => {
                let t = self.advance(*cost, true)?;
                let r = self.eval(value);
                self.flush(t);
                self.record_state();
                self.outputs.push(r.map_err(|trap| Halt::Trap(trap, t))?);
                Ok(())
            }
            Stmt::If { cond, then_branch, else_branch } => {
                if self.condition(cond)? {
                    self.block(then_branch)
                } else {
                    self.block(else_branch)
                }
            }
            Stmt::While { cond, body } => {
                while self.condition(cond)? {
                    self.block(body)?;
                }
                Ok(())
            }
            Stmt::Assert { index } => self.assertion(*index),
        }
    }

    fn assertion(&mut self, index: usize) -> Result<(), Halt> {
        if !self.executes[index] {
            return Ok(());
        }
        let decl = &self.prog.assertions[index];
        let t_start = self.now;
        let t = self.advance(decl.cost, false)?;
        // A predicate that cannot be evaluated counts as violated.
        let holds = matches!(self.eval(&decl.predicate), Ok(v) if v != 0);
        self.flush(t);
        if let Some(log) = self.log.as_mut() {
            log.windows.push(AssertionWindow {
                assertion: index,
                instance: self.instances[index],
                t_start,
                t_end: t + 1,
            });
        }
        self.instances[index] += 1;
        if holds {
            return Ok(());
        }
        if self.golden {
            return Err(Halt::GoldenAssertion(index, t));
        }
        if !self.detectors.iter().any(|d| d.assertion == index) {
            self.detectors.push(Detection { assertion: index, step: t });
        }
        if self.abort_on_detect {
            return Err(Halt::Detected);
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lang::parse;

    const P0: &str = "var x : 8 = 5\nassert a1 : x == 5\noutput x\n";
    const P1: &str =
        "var a : 8 = 3\nvar b : 8 = 7\na = a + 1\nassert A1 : a == 4\nassert A2 cost 2 : a == 4\noutput a\noutput b\n";

    fn acc(t: u64, slot: usize, mode: AccessMode) -> Access {
        Access { t, slot, mode }
    }

    #[test]
    fn golden_p0() {
        let g = golden_run(&parse(P0).unwrap()).unwrap();
        assert_eq!(g.total_steps, 3);
        assert_eq!(g.workload_steps, 2);
        assert_eq!(g.windows, vec![AssertionWindow { assertion: 0, instance: 0, t_start: 1, t_end: 2 }]);
        assert_eq!(g.accesses, vec![acc(0, 0, AccessMode::W), acc(1, 0, AccessMode::R), acc(2, 0, AccessMode::R)]);
        assert_eq!(g.outputs, vec![5]);
        assert_eq!(g.bit_accesses().count(), 24);
    }

    #[test]
    fn golden_p1() {
        let g = golden_run(&parse(P1).unwrap()).unwrap();
        assert_eq!(g.total_steps, 8);
        assert_eq!(g.workload_steps, 5);
        let spans: Vec<_> = g.windows.iter().map(|w| (w.assertion, w.t_start, w.t_end)).collect();
        assert_eq!(spans, vec![(0, 3, 4), (1, 4, 6)]);
        assert_eq!(g.outputs, vec![4, 7]);
        assert!(g.accesses.contains(&acc(2, 0, AccessMode::RW)));
        assert!(g.accesses.contains(&acc(5, 0, AccessMode::R)));
        assert!(!g.accesses.iter().any(|a| a.t == 4));
        let window_total: u64 = g.windows.iter().map(AssertionWindow::duration).sum();
        assert_eq!(g.workload_steps, g.total_steps - window_total);
    }

    #[test]
    fn memory_layout_is_dense() {
        let p = parse("var a : 8 = 0\narray xs : 16 [3] = 0\nvar c : 32 = 0").unwrap();
        let m = MemoryMap::new(&p);
        assert_eq!(m.total_bits, 8 + 48 + 32);
        let offsets: Vec<_> = m.slots.iter().map(|s| (s.bit_offset, s.width, s.element)).collect();
        assert_eq!(offsets, vec![(0, 8, None), (8, 16, Some(0)), (24, 16, Some(1)), (40, 16, Some(2)), (56, 32, None)]);
        assert_eq!(m.locate(0), Some((0, 0)));
        assert_eq!(m.locate(27), Some((2, 3)));
        assert_eq!(m.locate(87), Some((4, 31)));
        assert_eq!(m.locate(88), None);
    }

    #[test]
    fn p0_experiments() {
        let p = parse(P0).unwrap();
        for bit in 0..8 {
            let r = run_experiment(&p, 1, bit, &Mode::Discovery, 10.0).unwrap();
            assert_eq!(r.detectors, vec![Detection { assertion: 0, step: 1 }]);
            assert_eq!(r.outcome, Some(Outcome::Sdc));
            let r = run_experiment(&p, 0, bit, &Mode::Discovery, 10.0).unwrap();
            assert!(r.detectors.is_empty());
            assert_eq!(r.outcome, Some(Outcome::Benign));
        }
    }

    #[test]
    fn p1_flip_before_increment() {
        let p = parse(P1).unwrap();
        for bit in 0..8 {
            let r = run_experiment(&p, 2, bit, &Mode::Discovery, 10.0).unwrap();
            assert_eq!(r.detectors, vec![Detection { assertion: 0, step: 3 }, Detection { assertion: 1, step: 5 }]);
            assert_eq!(r.outcome, Some(Outcome::Sdc));
        }
    }

    #[test]
    fn deployment_aborts_on_first_enabled_detector() {
        let p = parse(P1).unwrap();
        let r = run_experiment(&p, 2, 0, &Mode::Deployment("11".parse().unwrap()), 10.0).unwrap();
        assert_eq!(r.detectors, vec![Detection { assertion: 0, step: 3 }]);
        assert_eq!(r.class(), CellClass::Detected);
        // A1 disabled: its window vanishes, A2 now evaluates at step 4.
        let r = run_experiment(&p, 2, 0, &Mode::Deployment("01".parse().unwrap()), 10.0).unwrap();
        assert_eq!(r.detectors, vec![Detection { assertion: 1, step: 4 }]);
        let r = run_experiment(&p, 2, 0, &Mode::Deployment("00".parse().unwrap()), 10.0).unwrap();
        assert_eq!(r.class(), CellClass::Sdc);
    }

    #[test]
    fn coordinates_are_checked() {
        let p = parse(P0).unwrap();
        assert!(matches!(run_experiment(&p, 3, 0, &Mode::Discovery, 10.0), Err(Error::CoordinateOutOfRange { .. })));
        assert!(matches!(run_experiment(&p, 0, 8, &Mode::Discovery, 10.0), Err(Error::CoordinateOutOfRange { .. })));
        assert!(matches!(
            run_experiment(&p, 0, 0, &Mode::Deployment("11".parse().unwrap()), 10.0),
            Err(Error::ConfigLength { .. })
        ));
        assert!(run_experiment(&p, 0, 0, &Mode::Discovery, 0.5).is_err());
    }

    #[test]
    fn wraparound_and_traps() {
        let p = parse("var x : 8 = 250\nvar d : 8 = 0\nx = x + 10\noutput x").unwrap();
        assert_eq!(golden_run(&p).unwrap().outputs, vec![4]);
        let p = parse("var x : 8 = 1\nvar d : 8 = 0\nx = x / d").unwrap();
        assert!(matches!(golden_run(&p), Err(GoldenError::Trap { step: 2, trap: Trap::DivisionByZero })));
        let p = parse("array xs : 8 [2] = 0\nvar i : 8 = 2\noutput xs[i]").unwrap();
        assert!(matches!(golden_run(&p), Err(GoldenError::Trap { trap: Trap::IndexOutOfBounds { .. }, .. })));
    }

    #[test]
    fn failing_golden_assertion_rejected() {
        let p = parse("var x : 8 = 1\nassert nope : x == 2").unwrap();
        assert!(matches!(golden_run(&p), Err(GoldenError::AssertionFailed { .. })));
    }

    #[test]
    fn golden_step_bound() {
        let p = parse("var x : 8 = 1\nwhile x { x = 1 }").unwrap();
        assert!(matches!(golden_run_with(&p, &[], 1000), Err(GoldenError::StepLimit { limit: 1000 })));
    }

    #[test]
    fn timeout_counts_workload_steps_only() {
        // Flipping bit 4 of n makes the loop run 16 extra iterations.
        let src = "var i : 8 = 0\nvar n : 8 = 2\nwhile i != n { assert chk cost 5 : i < 100\n i = i + 1 }\noutput i";
        let p = parse(src).unwrap();
        let inj = Injector::new(&p, &Mode::Discovery, 2.0).unwrap();
        assert_eq!(inj.golden().workload_steps, 2 + 3 + 2 + 1);
        assert_eq!(inj.workload_budget(), 16);
        let r = inj.inject(2, 8 + 4).unwrap();
        assert_eq!(r.outcome, Some(Outcome::Timeout));
    }

    #[test]
    fn predicate_error_counts_as_detection() {
        let src = "array xs : 8 [2] = 1\nvar i : 8 = 0\nassert in_range : xs[i] == 1\noutput 0";
        let p = parse(src).unwrap();
        let r = run_experiment(&p, 2, 16 + 3, &Mode::Discovery, 10.0).unwrap();
        assert_eq!(r.detectors.len(), 1);
        assert_eq!(r.outcome, Some(Outcome::Benign));
    }
}
