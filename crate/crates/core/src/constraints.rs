//! Constraint-aware simulation patterns: cone of influence of the
//! constraints, filtered random simulation, and SAT-based sampling of
//! constraint-satisfying stimuli.

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::aiger::{AigNetwork, LatchInit, Trace, VarKind};
use crate::sat::{Lit, SolveResult};
use crate::sim::{initial_state, Simulator};
use crate::unroll::{NodeRef, SourceKind, Unroller};

/// Transitive fan-in of all constraint roots, closed over latch next-state
/// edges.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoiSet {
    mask: Vec<bool>,
}

impl CoiSet {
    pub fn contains(&self, var: u32) -> bool {
        self.mask.get(var as usize).copied().unwrap_or(false)
    }

    pub fn mask(&self) -> &[bool] {
        &self.mask
    }

    pub fn vars(&self) -> impl Iterator<Item = u32> + '_ {
        self.mask.iter().enumerate().filter(|(_, &m)| m).map(|(v, _)| v as u32)
    }

    pub fn len(&self) -> usize {
        self.mask.iter().filter(|&&m| m).count()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

pub fn compute_coi(net: &AigNetwork) -> CoiSet {
    let mut mask = vec![false; net.maxvar() as usize + 1];
    let mut work: Vec<u32> = net.constraints().iter().map(|l| l.var()).collect();
    while let Some(v) = work.pop() {
        if v == 0 || mask[v as usize] {
            continue;
        }
        mask[v as usize] = true;
        match net.kind(v) {
            VarKind::And(i) => {
                let g = net.ands()[i];
                work.push(g.in0.var());
                work.push(g.in1.var());
            }
            VarKind::Latch(i) => work.push(net.latches()[i].next.var()),
            _ => {}
        }
    }
    CoiSet { mask }
}

/// Accepted stimulus columns over a fixed number of frames. Each column is
/// a [`Trace`] with one input row per frame.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PatternBatch {
    frames: usize,
    columns: Vec<Trace>,
}

impl PatternBatch {
    pub fn new(frames: usize) -> PatternBatch {
        PatternBatch { frames, columns: Vec::new() }
    }

    pub fn frames(&self) -> usize {
        self.frames
    }

    pub fn width(&self) -> usize {
        self.columns.len()
    }

    pub fn columns(&self) -> &[Trace] {
        &self.columns
    }

    pub fn push(&mut self, column: Trace) {
        debug_assert_eq!(column.inputs.len(), self.frames);
        self.columns.push(column);
    }

    fn words(&self, words: usize, bit: impl Fn(&Trace) -> bool) -> Vec<u64> {
        let n = self.columns.len();
        (0..words)
            .map(|w| {
                (0..64).fold(0u64, |acc, b| {
                    let c = &self.columns[(w * 64 + b) % n];
                    acc | (bit(c) as u64) << b
                })
            })
            .collect()
    }

    /// Simulation words for input `i` at `frame`, cycling the columns.
    pub fn input_words(&self, frame: usize, i: usize, words: usize) -> Vec<u64> {
        self.words(words, |c| c.inputs[frame][i])
    }

    /// Simulation words for the initial value of latch `i`.
    pub fn latch_words(&self, i: usize, words: usize) -> Vec<u64> {
        self.words(words, |c| c.init[i])
    }
}

/// Whether every constraint holds at every frame of `trace`.
pub fn satisfies_constraints(net: &AigNetwork, trace: &Trace) -> bool {
    let mut sim = Simulator::new(net, trace.init.clone());
    trace.inputs.iter().all(|row| {
        sim.step(row);
        net.constraints().iter().all(|&c| sim.lit(c))
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum ConstraintMode {
    Off,
    Filter,
    Sample,
    Auto,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PatternOptions {
    pub mode: ConstraintMode,
    pub min_patterns: usize,
    pub max_rounds: usize,
    /// Columns requested per sampling session.
    pub sample_count: usize,
}

impl Default for PatternOptions {
    fn default() -> Self {
        PatternOptions {
            mode: ConstraintMode::Auto,
            min_patterns: 64,
            max_rounds: 4,
            sample_count: 64,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FilterOutcome {
    pub batch: PatternBatch,
    /// Random columns simulated in total.
    pub generated: usize,
    /// Fewer than the requested minimum survived.
    pub escalate: bool,
}

/// Random simulation over `frames` frames, keeping the columns under which
/// every constraint holds at every frame. Runs rounds of `64 * words`
/// columns until the batch holds `64 * words` columns or `max_rounds` is
/// reached. Only the constraint cone is simulated.
pub fn filter_patterns(
    net: &AigNetwork,
    coi: &CoiSet,
    frames: usize,
    words: usize,
    min_patterns: usize,
    max_rounds: usize,
    rng: &mut ChaCha8Rng,
) -> FilterOutcome {
    let capacity = 64 * words;
    let mut batch = PatternBatch::new(frames);
    let mut generated = 0;
    for _ in 0..max_rounds {
        if batch.width() >= capacity {
            break;
        }
        for _ in 0..words {
            let init: Vec<u64> = initial_state(net, |_| rng.gen());
            let rows: Vec<Vec<u64>> =
                (0..frames).map(|_| (0..net.inputs().len()).map(|_| rng.gen()).collect()).collect();
            let mut sim = Simulator::new(net, init.clone()).with_mask(coi.mask());
            let mut alive = !0u64;
            for row in &rows {
                sim.step(row);
                for &c in net.constraints() {
                    alive &= sim.lit(c);
                }
            }
            generated += 64;
            for b in 0..64 {
                if alive >> b & 1 == 0 || batch.width() >= capacity {
                    continue;
                }
                let bit = |w: u64| w >> b & 1 == 1;
                batch.push(Trace {
                    init: init.iter().map(|&w| bit(w)).collect(),
                    inputs: rows.iter().map(|r| r.iter().map(|&w| bit(w)).collect()).collect(),
                });
            }
        }
    }
    let escalate = batch.width() < min_patterns;
    FilterOutcome { batch, generated, escalate }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SampleOutcome {
    pub batch: PatternBatch,
    /// The constraints have no solution over the sampled frames.
    pub unsat: bool,
    pub solver_calls: u64,
    /// Activation variables and guarded clauses added to the solver.
    pub aux_vars: u64,
    pub aux_clauses: u64,
}

/// Draws up to `count` distinct constraint-satisfying columns over the
/// frames already unrolled, using the unroller's solver. Blocking clauses
/// are guarded by an activation literal that is retired at the end.
pub fn sample_patterns(u: &mut Unroller<'_>, coi: &CoiSet, count: usize) -> SampleOutcome {
    let net = u.net();
    let frames = u.num_frames();
    let mut out = SampleOutcome {
        batch: PatternBatch::new(frames),
        unsat: false,
        solver_calls: 0,
        aux_vars: 0,
        aux_clauses: 0,
    };
    if frames == 0 || count == 0 {
        return out;
    }
    let mut base = Vec::new();
    for k in 0..frames {
        for &c in u.frames().constraints(k) {
            match c {
                NodeRef::True => {}
                NodeRef::False => {
                    out.unsat = true;
                    return out;
                }
                NodeRef::Lit(l) => base.push(l),
            }
        }
    }
    let act = u.aux_var();
    out.aux_vars += 1;
    base.push(act);

    let sources: Vec<_> = u.sources().iter().copied().filter(|s| s.frame < frames).collect();
    let source_var = |s: &crate::unroll::Source| match s.kind {
        SourceKind::Input(i) => net.inputs()[i].var(),
        SourceKind::Latch(i) => net.latches()[i].state.var(),
    };
    let coi_lits: Vec<Lit> =
        sources.iter().filter(|s| coi.contains(source_var(s))).map(|s| s.var.positive()).collect();

    while out.batch.width() < count {
        let mut assumptions = base.clone();
        if let Some(&l) = coi_lits.choose(u.rng_mut()) {
            let neg = u.rng_mut().gen::<bool>();
            assumptions.push(if neg { !l } else { l });
        }
        out.solver_calls += 1;
        let mut r = u.solver_mut().solve(&assumptions);
        if r == SolveResult::Unsat && assumptions.len() > base.len() {
            out.solver_calls += 1;
            r = u.solver_mut().solve(&base);
        }
        if r != SolveResult::Sat {
            out.unsat = out.batch.width() == 0;
            break;
        }
        let model = |l: Lit| u.solver().model_value(l).unwrap_or(false);
        let mut init: Vec<bool> = net.latches().iter().map(|l| l.init == LatchInit::One).collect();
        let mut inputs = vec![vec![false; net.inputs().len()]; frames];
        let mut values = Vec::with_capacity(sources.len());
        for s in &sources {
            let v = if coi.contains(source_var(s)) { Some(model(s.var.positive())) } else { None };
            values.push(v);
        }
        let block: Vec<Lit> = std::iter::once(!act)
            .chain(
                sources
                    .iter()
                    .zip(&values)
                    .filter_map(|(s, v)| v.map(|v| s.var.lit(v))),
            )
            .collect();
        for (s, v) in sources.iter().zip(values) {
            let v = v.unwrap_or_else(|| u.rng_mut().gen());
            match s.kind {
                SourceKind::Input(i) => inputs[s.frame][i] = v,
                SourceKind::Latch(i) => init[i] = v,
            }
        }
        out.batch.push(Trace { init, inputs });
        u.solver_mut().add_clause(&block).expect("allocated literals");
        out.aux_clauses += 1;
    }
    u.solver_mut().add_clause(&[!act]).expect("allocated literal");
    out.aux_clauses += 1;
    out
}
