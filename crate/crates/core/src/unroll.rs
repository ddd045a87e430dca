//! Time-frame expansion. Every AND gate of every frame goes through trivial
//! simplification, structural hashing and functional reduction before a
//! fresh solver variable is spent on it.

use std::ops::Not;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::aiger::{AigLiteral, AigNetwork, LatchInit};
use crate::constraints::PatternBatch;
use crate::fraig::{check_equiv, EquivVerdict, SimState};
use crate::sat::{Lit, Solver, SolverError, Var};
use crate::simplify::{trivial_simplify, StrashKey, StrashTable};

/// An unrolled node: a constant or a solver literal.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NodeRef {
    False,
    True,
    Lit(Lit),
}

impl NodeRef {
    pub fn lit(self) -> Option<Lit> {
        match self {
            NodeRef::Lit(l) => Some(l),
            _ => None,
        }
    }

    pub fn is_const(self) -> bool {
        !matches!(self, NodeRef::Lit(_))
    }

    pub fn complement_if(self, c: bool) -> NodeRef {
        if c {
            !self
        } else {
            self
        }
    }
}

impl Not for NodeRef {
    type Output = NodeRef;

    fn not(self) -> NodeRef {
        match self {
            NodeRef::False => NodeRef::True,
            NodeRef::True => NodeRef::False,
            NodeRef::Lit(l) => NodeRef::Lit(!l),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum UnrollError {
    #[error("variable {var} has no node at frame {frame}")]
    Unresolved { frame: usize, var: u32 },
    #[error(transparent)]
    Solver(#[from] SolverError),
}

/// Where a solver source variable came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SourceKind {
    Input(usize),
    /// An uninitialized latch at frame 0.
    Latch(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Source {
    pub var: Var,
    pub frame: usize,
    pub kind: SourceKind,
}

/// (frame, AIG variable) to node, plus per-frame root nodes.
#[derive(Debug, Clone, Default)]
pub struct FrameMap {
    nodes: Vec<Vec<Option<NodeRef>>>,
    inputs: Vec<Vec<NodeRef>>,
    latches: Vec<Vec<NodeRef>>,
    bads: Vec<Vec<NodeRef>>,
    constraints: Vec<Vec<NodeRef>>,
}

impl FrameMap {
    pub fn num_frames(&self) -> usize {
        self.nodes.len()
    }

    pub fn resolve(&self, k: usize, lit: AigLiteral) -> Result<NodeRef, UnrollError> {
        if lit.var() == 0 {
            return Ok(NodeRef::False.complement_if(lit.is_complemented()));
        }
        self.nodes
            .get(k)
            .and_then(|f| f.get(lit.var() as usize).copied().flatten())
            .map(|n| n.complement_if(lit.is_complemented()))
            .ok_or(UnrollError::Unresolved { frame: k, var: lit.var() })
    }

    pub fn inputs(&self, k: usize) -> &[NodeRef] {
        &self.inputs[k]
    }

    pub fn latches(&self, k: usize) -> &[NodeRef] {
        &self.latches[k]
    }

    pub fn bads(&self, k: usize) -> &[NodeRef] {
        &self.bads[k]
    }

    pub fn constraints(&self, k: usize) -> &[NodeRef] {
        &self.constraints[k]
    }

    fn bind(&mut self, k: usize, var: u32, node: NodeRef) {
        self.nodes[k][var as usize] = Some(node);
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReduceOptions {
    /// Master switch; off means plain Tseitin encoding of every gate.
    pub reduce: bool,
    /// Functional (simulation + SAT) stage.
    pub functional: bool,
    pub same_phase_only: bool,
    pub ec_limit: usize,
    pub sim_words: usize,
    pub refine_batch: usize,
    /// Conflict budget per equivalence query.
    pub equiv_conflicts: Option<u64>,
    pub seed: u64,
}

impl Default for ReduceOptions {
    fn default() -> Self {
        ReduceOptions {
            reduce: true,
            functional: true,
            same_phase_only: false,
            ec_limit: 8,
            sim_words: 4,
            refine_batch: 64,
            equiv_conflicts: Some(1000),
            seed: 0x5eed_f4a1_6b3c,
        }
    }
}

/// How each AND gate of one frame was resolved, plus equivalence query
/// counts.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct FrameCounts {
    pub trivial: u64,
    pub structural: u64,
    pub functional: u64,
    pub fresh: u64,
    pub equiv_calls: u64,
    pub equiv_proved: u64,
    pub equiv_refuted: u64,
    pub equiv_skipped: u64,
}

impl FrameCounts {
    pub fn merges(&self) -> u64 {
        self.trivial + self.structural + self.functional
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FrameSummary {
    pub frame: usize,
    pub bads: Vec<NodeRef>,
    pub constraints: Vec<NodeRef>,
    pub counts: FrameCounts,
    pub fraig_time: Duration,
}

/// A functional merge: gate `aig_var` at `frame` was rebound to `rep`.
/// `constraint_frames` frames of constraints were asserted when it was
/// proved.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MergeRecord {
    pub frame: usize,
    pub aig_var: u32,
    pub rep: NodeRef,
    pub constraint_frames: usize,
}

/// The reduction context: solver, frame map, strash table and simulation
/// state, shared across all frames of one run.
pub struct Unroller<'a> {
    net: &'a AigNetwork,
    opts: ReduceOptions,
    solver: Solver,
    frames: FrameMap,
    strash: StrashTable,
    sim: SimState,
    rng: ChaCha8Rng,
    const_true: Option<Lit>,
    sources: Vec<Source>,
    origins: Vec<Option<(usize, u32)>>,
    merges: Vec<MergeRecord>,
    constraint_frames: usize,
    patterns: Option<PatternBatch>,
    counts: FrameCounts,
    fraig_time: Duration,
}

impl<'a> Unroller<'a> {
    pub fn new(net: &'a AigNetwork, opts: ReduceOptions) -> Unroller<'a> {
        let sim = SimState::new(opts.sim_words, opts.ec_limit, opts.refine_batch);
        let rng = ChaCha8Rng::seed_from_u64(opts.seed);
        Unroller {
            net,
            opts,
            solver: Solver::new(),
            frames: FrameMap::default(),
            strash: StrashTable::new(),
            sim,
            rng,
            const_true: None,
            sources: Vec::new(),
            origins: vec![None],
            merges: Vec::new(),
            constraint_frames: 0,
            patterns: None,
            counts: FrameCounts::default(),
            fraig_time: Duration::ZERO,
        }
    }

    pub fn net(&self) -> &'a AigNetwork {
        self.net
    }

    pub fn options(&self) -> &ReduceOptions {
        &self.opts
    }

    pub fn solver(&self) -> &Solver {
        &self.solver
    }

    pub fn solver_mut(&mut self) -> &mut Solver {
        &mut self.solver
    }

    pub fn frames(&self) -> &FrameMap {
        &self.frames
    }

    pub fn num_frames(&self) -> usize {
        self.frames.num_frames()
    }

    pub fn sim(&self) -> &SimState {
        &self.sim
    }

    pub fn rng_mut(&mut self) -> &mut ChaCha8Rng {
        &mut self.rng
    }

    pub fn sources(&self) -> &[Source] {
        &self.sources
    }

    pub fn merges(&self) -> &[MergeRecord] {
        &self.merges
    }

    pub fn constraint_frames(&self) -> usize {
        self.constraint_frames
    }

    /// The (frame, AIG variable) a solver variable was allocated for.
    pub fn origin(&self, var: Var) -> Option<(usize, u32)> {
        self.origins.get(var.index() as usize).copied().flatten()
    }

    pub fn resolve_literal(&self, k: usize, lit: AigLiteral) -> Result<NodeRef, UnrollError> {
        self.frames.resolve(k, lit)
    }

    fn new_var(&mut self, origin: Option<(usize, u32)>) -> Lit {
        let l = self.solver.new_var();
        let i = l.var().index() as usize;
        if self.origins.len() <= i {
            self.origins.resize(i + 1, None);
        }
        self.origins[i] = origin;
        l
    }

    fn const_lit(&mut self, n: NodeRef) -> Result<Lit, UnrollError> {
        let t = match self.const_true {
            Some(t) => t,
            None => {
                let t = self.new_var(None);
                self.solver.add_clause(&[t])?;
                self.const_true = Some(t);
                t
            }
        };
        Ok(match n {
            NodeRef::True => t,
            NodeRef::False => !t,
            NodeRef::Lit(l) => l,
        })
    }

    fn tseitin(&mut self, g: Lit, a: Lit, b: Lit) -> Result<(), UnrollError> {
        self.solver.add_clause(&[!g, a])?;
        self.solver.add_clause(&[!g, b])?;
        self.solver.add_clause(&[g, !a, !b])?;
        Ok(())
    }

    fn source_words(&mut self, frame: usize, kind: SourceKind) -> Vec<u64> {
        let w = self.opts.sim_words;
        match &self.patterns {
            Some(p) if frame < p.frames() && p.width() > 0 => match kind {
                SourceKind::Input(i) => p.input_words(frame, i, w),
                SourceKind::Latch(i) => p.latch_words(i, w),
            },
            _ => (0..w).map(|_| self.rng.gen()).collect(),
        }
    }

    fn new_source(&mut self, frame: usize, aig_var: u32, kind: SourceKind) -> NodeRef {
        let l = self.new_var(Some((frame, aig_var)));
        self.sources.push(Source { var: l.var(), frame, kind });
        if self.opts.reduce && self.opts.functional {
            let words = self.source_words(frame, kind);
            self.sim.add_source(l.var(), &words);
            self.sim.register(l.var());
        }
        NodeRef::Lit(l)
    }

    /// Unrolls the next frame.
    pub fn unroll_frame(&mut self) -> Result<FrameSummary, UnrollError> {
        let k = self.frames.num_frames();
        let net = self.net;
        self.counts = FrameCounts::default();
        self.fraig_time = Duration::ZERO;
        if self.opts.reduce && self.opts.functional {
            let t = Instant::now();
            self.sim.flush(&mut self.rng);
            self.fraig_time += t.elapsed();
        }

        let mut latches = Vec::with_capacity(net.latches().len());
        for (i, l) in net.latches().iter().enumerate() {
            let n = if k == 0 {
                match l.init {
                    LatchInit::Zero => NodeRef::False,
                    LatchInit::One => NodeRef::True,
                    LatchInit::Uninitialized => {
                        self.new_source(0, l.state.var(), SourceKind::Latch(i))
                    }
                }
            } else {
                self.frames.resolve(k - 1, l.next)?
            };
            latches.push(n);
        }
        let inputs: Vec<NodeRef> = net
            .inputs()
            .iter()
            .enumerate()
            .map(|(i, l)| self.new_source(k, l.var(), SourceKind::Input(i)))
            .collect();

        let mut nodes = vec![None; net.maxvar() as usize + 1];
        nodes[0] = Some(NodeRef::False);
        for (l, &n) in net.inputs().iter().zip(&inputs) {
            nodes[l.var() as usize] = Some(n);
        }
        for (l, &n) in net.latches().iter().zip(&latches) {
            nodes[l.state.var() as usize] = Some(n);
        }
        self.frames.nodes.push(nodes);
        self.frames.inputs.push(inputs);
        self.frames.latches.push(latches);

        for g in net.ands() {
            let a = self.frames.resolve(k, g.in0)?;
            let b = self.frames.resolve(k, g.in1)?;
            let n = self.reduce_and(k, g.out.var(), a, b)?;
            self.frames.bind(k, g.out.var(), n);
        }

        let bads = net.bads().iter().map(|&l| self.frames.resolve(k, l)).collect::<Result<Vec<_>, _>>()?;
        let constraints =
            net.constraints().iter().map(|&l| self.frames.resolve(k, l)).collect::<Result<Vec<_>, _>>()?;
        self.frames.bads.push(bads.clone());
        self.frames.constraints.push(constraints.clone());
        Ok(FrameSummary {
            frame: k,
            bads,
            constraints,
            counts: self.counts,
            fraig_time: self.fraig_time,
        })
    }

    /// Adds the constraints of frame `k` as unit clauses.
    pub fn assert_constraints(&mut self, k: usize) -> Result<(), UnrollError> {
        assert_eq!(k, self.constraint_frames, "constraints are asserted frame by frame");
        for i in 0..self.frames.constraints[k].len() {
            match self.frames.constraints[k][i] {
                NodeRef::True => {}
                NodeRef::False => self.solver.add_clause(&[])?,
                NodeRef::Lit(l) => self.solver.add_clause(&[l])?,
            }
        }
        self.constraint_frames = k + 1;
        Ok(())
    }

    fn fresh(&mut self, frame: usize, aig_var: u32, a: NodeRef, b: NodeRef) -> Result<NodeRef, UnrollError> {
        let (a, b) = (self.const_lit(a)?, self.const_lit(b)?);
        let g = self.new_var(Some((frame, aig_var)));
        self.tseitin(g, a, b)?;
        self.counts.fresh += 1;
        Ok(NodeRef::Lit(g))
    }

    fn reduce_and(&mut self, frame: usize, aig_var: u32, a: NodeRef, b: NodeRef) -> Result<NodeRef, UnrollError> {
        if !self.opts.reduce {
            return self.fresh(frame, aig_var, a, b);
        }
        if let Some(n) = trivial_simplify(a, b) {
            self.counts.trivial += 1;
            return Ok(n);
        }
        let key = StrashKey::from_refs(a, b).expect("constants are simplified away");
        if let Some(n) = self.strash.get(key) {
            self.counts.structural += 1;
            return Ok(n);
        }
        let n = if self.opts.functional {
            let t = Instant::now();
            let n = self.functional(frame, aig_var, a, b);
            self.fraig_time += t.elapsed();
            n?
        } else {
            self.fresh(frame, aig_var, a, b)?
        };
        self.strash.insert(key, n);
        Ok(n)
    }

    fn functional(&mut self, frame: usize, aig_var: u32, a: NodeRef, b: NodeRef) -> Result<NodeRef, UnrollError> {
        let g = self.new_var(Some((frame, aig_var)));
        self.tseitin(g, a.lit().unwrap(), b.lit().unwrap())?;
        self.sim.add_gate(g.var(), a, b);
        let lookup = self.sim.find_candidates(g.var());
        if lookup.limited {
            self.counts.equiv_skipped += 1;
        }
        for cand in lookup.candidates {
            if self.opts.same_phase_only && !cand.same_phase {
                continue;
            }
            let verdict =
                check_equiv(&mut self.solver, g, cand, self.opts.equiv_conflicts, &mut self.counts.equiv_calls);
            match verdict {
                EquivVerdict::Equivalent => {
                    self.counts.equiv_proved += 1;
                    return Ok(self.merge(frame, aig_var, g.var(), cand.target()));
                }
                EquivVerdict::Counterexample => {
                    self.counts.equiv_refuted += 1;
                    let solver = &self.solver;
                    self.sim.refine(|v| solver.model_value(v.positive()).unwrap_or(false), &mut self.rng);
                }
                EquivVerdict::Unknown => self.counts.equiv_skipped += 1,
            }
        }
        self.sim.register(g.var());
        self.counts.fresh += 1;
        Ok(NodeRef::Lit(g))
    }

    /// Retires the tentative variable of a proved gate and records the
    /// merge. The caller binds the gate to `rep`.
    fn merge(&mut self, frame: usize, aig_var: u32, tentative: Var, rep: NodeRef) -> NodeRef {
        self.sim.retire(tentative);
        self.merges.push(MergeRecord {
            frame,
            aig_var,
            rep,
            constraint_frames: self.constraint_frames,
        });
        self.counts.functional += 1;
        rep
    }

    /// Sets simulation words of all sources from `batch` (cycling its
    /// columns) and keeps it for frames unrolled later.
    pub fn apply_patterns(&mut self, batch: PatternBatch) {
        if !(self.opts.reduce && self.opts.functional) || batch.width() == 0 {
            return;
        }
        self.sim.flush(&mut self.rng);
        let w = self.opts.sim_words;
        for s in &self.sources {
            if s.frame >= batch.frames() {
                continue;
            }
            let words = match s.kind {
                SourceKind::Input(i) => batch.input_words(s.frame, i, w),
                SourceKind::Latch(i) => batch.latch_words(i, w),
            };
            self.sim.set_source_words(s.var, &words);
        }
        self.sim.resimulate();
        self.patterns = Some(batch);
    }

    /// Allocates an auxiliary solver variable (activation literals).
    pub fn aux_var(&mut self) -> Lit {
        self.new_var(None)
    }
}
