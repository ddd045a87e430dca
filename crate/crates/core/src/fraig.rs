//! Functional reduction: bit-parallel simulation signatures, equivalence
//! classes of candidate nodes, SAT equivalence checks, and
//! counterexample-driven refinement of the simulation patterns.

use std::collections::HashMap;

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::sat::{Lit, SolveResult, Solver, Var};
use crate::unroll::NodeRef;

/// Simulation values of one node: bit `i` of word `w` is the node's value
/// under pattern `64 * w + i`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SimVector {
    words: Vec<u64>,
}

impl SimVector {
    pub fn zeros(words: usize) -> SimVector {
        SimVector { words: vec![0; words] }
    }

    pub fn ones(words: usize) -> SimVector {
        SimVector { words: vec![!0; words] }
    }

    pub fn from_words(words: Vec<u64>) -> SimVector {
        SimVector { words }
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn complement_if(&self, c: bool) -> SimVector {
        let mask = if c { !0 } else { 0 };
        SimVector {
            words: self.words.iter().map(|w| w ^ mask).collect(),
        }
    }

    /// Value under pattern 0, which decides the phase.
    pub fn phase(&self) -> bool {
        self.words.first().is_some_and(|w| w & 1 == 1)
    }

    /// The vector complemented so that pattern 0 reads 0, plus the phase.
    pub fn normalized(&self) -> (SimVector, bool) {
        let p = self.phase();
        (self.complement_if(p), p)
    }

    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn bit(&self, pattern: usize) -> bool {
        self.words[pattern / 64] >> (pattern % 64) & 1 == 1
    }
}

/// Bitwise AND of two vectors with input complements applied.
pub fn sim_gate(a: &SimVector, a_neg: bool, b: &SimVector, b_neg: bool) -> SimVector {
    assert_eq!(a.len(), b.len(), "simulation widths differ");
    let (ma, mb) = (if a_neg { !0 } else { 0 }, if b_neg { !0 } else { 0 });
    SimVector {
        words: a.words.iter().zip(&b.words).map(|(x, y)| (x ^ ma) & (y ^ mb)).collect(),
    }
}

/// Phase-normalized digest of a vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Signature {
    pub digest: u64,
    pub phase: bool,
}

impl Signature {
    pub fn of(v: &SimVector) -> Signature {
        let phase = v.phase();
        let mask = if phase { !0u64 } else { 0 };
        let mut h: u64 = 0x9e37_79b9_7f4a_7c15;
        for &w in &v.words {
            h ^= w ^ mask;
            h = h.wrapping_mul(0xff51_afd7_ed55_8ccd);
            h ^= h >> 33;
        }
        Signature { digest: h, phase }
    }
}

/// An equivalence candidate: `n == node` when `same_phase`, else
/// `n == !node`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Candidate {
    pub node: NodeRef,
    pub same_phase: bool,
}

impl Candidate {
    /// The node `n` would be rebound to.
    pub fn target(self) -> NodeRef {
        if self.same_phase {
            self.node
        } else {
            !self.node
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CandidateLookup {
    pub candidates: Vec<Candidate>,
    /// The matching class was full, so the node counts as unique.
    pub limited: bool,
}

#[derive(Debug, Clone)]
struct EquivClass {
    normalized: SimVector,
    members: Vec<(Var, bool)>,
}

/// Classes of nodes with equal phase-normalized simulation vectors.
#[derive(Debug, Clone)]
pub struct EquivClassTable {
    limit: usize,
    buckets: HashMap<u64, Vec<usize>>,
    classes: Vec<EquivClass>,
}

impl EquivClassTable {
    pub fn new(limit: usize) -> EquivClassTable {
        EquivClassTable {
            limit,
            buckets: HashMap::new(),
            classes: Vec::new(),
        }
    }

    pub fn limit(&self) -> usize {
        self.limit
    }

    pub fn clear(&mut self) {
        self.buckets.clear();
        self.classes.clear();
    }

    fn class_of(&self, sig: Signature, normalized: &SimVector) -> Option<usize> {
        self.buckets
            .get(&sig.digest)?
            .iter()
            .copied()
            .find(|&c| self.classes[c].normalized == *normalized)
    }

    /// Candidates for a node with vector `vec`, oldest member first. A
    /// vector that normalizes to zero is first offered the matching
    /// constant; that offer does not count against the class limit.
    pub fn find_candidates(&self, vec: &SimVector) -> CandidateLookup {
        let sig = Signature::of(vec);
        let (normalized, phase) = vec.normalized();
        let mut out = CandidateLookup::default();
        let class = self.class_of(sig, &normalized);
        if normalized.is_zero() {
            out.candidates.push(Candidate {
                node: NodeRef::False,
                same_phase: !phase,
            });
        }
        if let Some(c) = class {
            if self.classes[c].members.len() >= self.limit {
                out.limited = true;
                return out;
            }
            for &(m, mp) in &self.classes[c].members {
                out.candidates.push(Candidate {
                    node: NodeRef::Lit(m.positive()),
                    same_phase: mp == phase,
                });
            }
        }
        out
    }

    /// Adds `var` to its class unless the class is full. Returns whether it
    /// was added.
    pub fn register(&mut self, var: Var, vec: &SimVector) -> bool {
        let sig = Signature::of(vec);
        let (normalized, phase) = vec.normalized();
        match self.class_of(sig, &normalized) {
            Some(c) => {
                let class = &mut self.classes[c];
                if class.members.len() >= self.limit {
                    return false;
                }
                debug_assert!(class.members.iter().all(|&(m, _)| m != var));
                class.members.push((var, phase));
            }
            None => {
                self.classes.push(EquivClass {
                    normalized,
                    members: vec![(var, phase)],
                });
                self.buckets.entry(sig.digest).or_default().push(self.classes.len() - 1);
            }
        }
        true
    }

    pub fn num_classes(&self) -> usize {
        self.classes.len()
    }

    /// Members of the class `vec` falls in.
    pub fn members_of(&self, vec: &SimVector) -> Vec<(Var, bool)> {
        let (normalized, _) = vec.normalized();
        self.class_of(Signature::of(vec), &normalized)
            .map(|c| self.classes[c].members.clone())
            .unwrap_or_default()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EquivVerdict {
    Equivalent,
    /// The solver holds a model distinguishing the two nodes.
    Counterexample,
    /// The conflict budget ran out.
    Unknown,
}

/// Proves or refutes `n == candidate.target()`. Both `n` and the candidate
/// must already be encoded. `calls` is incremented once per solver query.
pub fn check_equiv(
    solver: &mut Solver,
    n: Lit,
    candidate: Candidate,
    conflict_limit: Option<u64>,
    calls: &mut u64,
) -> EquivVerdict {
    let queries: Vec<Vec<Lit>> = match candidate.target() {
        NodeRef::False => vec![vec![n]],
        NodeRef::True => vec![vec![!n]],
        NodeRef::Lit(q) if q == n => vec![],
        NodeRef::Lit(q) => vec![vec![n, !q], vec![!n, q]],
    };
    for assumptions in queries {
        *calls += 1;
        match solver.solve_limited(&assumptions, conflict_limit) {
            SolveResult::Unsat => {}
            SolveResult::Sat => return EquivVerdict::Counterexample,
            SolveResult::Unknown => return EquivVerdict::Unknown,
        }
    }
    EquivVerdict::Equivalent
}

/// How a solver variable gets its simulation vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum VarDef {
    /// Not simulated (auxiliary solver variables).
    None,
    /// A frame input or uninitialized latch; index into the source list.
    Source(usize),
    And(NodeRef, NodeRef),
    /// Encoded, then merged away; never referenced again.
    Retired,
}

/// Simulation vectors for every unroller variable plus the class table.
#[derive(Debug, Clone)]
pub struct SimState {
    words: usize,
    sims: Vec<u64>,
    defs: Vec<VarDef>,
    sources: Vec<Var>,
    registered: Vec<Var>,
    classes: EquivClassTable,
    pending: Vec<u64>,
    pending_count: usize,
    refine_batch: usize,
    refine_slot: usize,
    refinements: u64,
}

impl SimState {
    pub fn new(words: usize, ec_limit: usize, refine_batch: usize) -> SimState {
        assert!(words > 0, "at least one simulation word");
        assert!((1..=64).contains(&refine_batch), "refinement batch fits one word");
        SimState {
            words,
            sims: vec![0; words],
            defs: vec![VarDef::None],
            sources: Vec::new(),
            registered: Vec::new(),
            classes: EquivClassTable::new(ec_limit),
            pending: Vec::new(),
            pending_count: 0,
            refine_batch,
            refine_slot: 0,
            refinements: 0,
        }
    }

    pub fn words(&self) -> usize {
        self.words
    }

    pub fn classes(&self) -> &EquivClassTable {
        &self.classes
    }

    /// Number of refinement columns taken from counterexamples so far.
    pub fn refinements(&self) -> u64 {
        self.refinements
    }

    fn grow(&mut self, var: Var) {
        let n = var.index() as usize + 1;
        if self.defs.len() < n {
            self.defs.resize(n, VarDef::None);
            self.sims.resize(n * self.words, 0);
        }
    }

    fn slot(&self, var: Var) -> &[u64] {
        let i = var.index() as usize * self.words;
        &self.sims[i..i + self.words]
    }

    fn slot_mut(&mut self, var: Var) -> &mut [u64] {
        let i = var.index() as usize * self.words;
        &mut self.sims[i..i + self.words]
    }

    pub fn vector(&self, node: NodeRef) -> SimVector {
        match node {
            NodeRef::False => SimVector::zeros(self.words),
            NodeRef::True => SimVector::ones(self.words),
            NodeRef::Lit(l) => {
                let v = SimVector::from_words(self.slot(l.var()).to_vec());
                v.complement_if(l.is_negated())
            }
        }
    }

    pub(crate) fn def(&self, var: Var) -> VarDef {
        self.defs.get(var.index() as usize).copied().unwrap_or(VarDef::None)
    }

    /// Registers a new source variable with the given words, returning its
    /// source index.
    pub fn add_source(&mut self, var: Var, words: &[u64]) -> usize {
        assert_eq!(words.len(), self.words);
        self.grow(var);
        let idx = self.sources.len();
        self.sources.push(var);
        self.pending.push(0);
        self.defs[var.index() as usize] = VarDef::Source(idx);
        self.slot_mut(var).copy_from_slice(words);
        idx
    }

    pub fn sources(&self) -> &[Var] {
        &self.sources
    }

    /// Overwrites a source's words; takes effect on the next
    /// [`SimState::resimulate`].
    pub fn set_source_words(&mut self, var: Var, words: &[u64]) {
        debug_assert!(matches!(self.def(var), VarDef::Source(_)));
        self.slot_mut(var).copy_from_slice(words);
    }

    /// Defines `var` as `a AND b` and returns its vector.
    pub fn add_gate(&mut self, var: Var, a: NodeRef, b: NodeRef) -> SimVector {
        self.grow(var);
        self.defs[var.index() as usize] = VarDef::And(a, b);
        let v = self.eval(a, b);
        self.slot_mut(var).copy_from_slice(v.words());
        v
    }

    fn eval(&self, a: NodeRef, b: NodeRef) -> SimVector {
        let (va, vb) = (self.vector(a), self.vector(b));
        sim_gate(&va, false, &vb, false)
    }

    pub fn retire(&mut self, var: Var) {
        self.defs[var.index() as usize] = VarDef::Retired;
    }

    pub fn find_candidates(&self, var: Var) -> CandidateLookup {
        self.classes.find_candidates(&self.vector(NodeRef::Lit(var.positive())))
    }

    /// Makes `var` a class member for later nodes (subject to the class
    /// size limit).
    pub fn register(&mut self, var: Var) {
        self.registered.push(var);
        let v = self.vector(NodeRef::Lit(var.positive()));
        self.classes.register(var, &v);
    }

    /// Queues one pattern column read from a distinguishing model. Flushes
    /// once a full batch is pending. Returns whether a flush happened.
    pub fn refine(&mut self, model: impl Fn(Var) -> bool, rng: &mut ChaCha8Rng) -> bool {
        let bit = 1u64 << self.pending_count;
        for (i, &s) in self.sources.iter().enumerate() {
            if model(s) {
                self.pending[i] |= bit;
            }
        }
        self.pending_count += 1;
        self.refinements += 1;
        if self.pending_count >= self.refine_batch {
            self.flush(rng);
            true
        } else {
            false
        }
    }

    pub fn pending_patterns(&self) -> usize {
        self.pending_count
    }

    /// Writes pending refinement columns into the next word slot (unused
    /// bits random), re-simulates and rebuilds the classes.
    pub fn flush(&mut self, rng: &mut ChaCha8Rng) {
        if self.pending_count == 0 {
            return;
        }
        let keep = if self.pending_count >= 64 {
            !0
        } else {
            (1u64 << self.pending_count) - 1
        };
        let slot = self.refine_slot % self.words;
        self.refine_slot += 1;
        for i in 0..self.sources.len() {
            let s = self.sources[i];
            let word = (self.pending[i] & keep) | (rng.gen::<u64>() & !keep);
            self.slot_mut(s)[slot] = word;
            self.pending[i] = 0;
        }
        self.pending_count = 0;
        self.resimulate();
    }

    /// Recomputes every gate vector from the sources and rebuilds the
    /// class table in registration order.
    pub fn resimulate(&mut self) {
        for v in 1..self.defs.len() {
            if let VarDef::And(a, b) = self.defs[v] {
                let vec = self.eval(a, b);
                let var = Var::from_index(v as u32);
                self.slot_mut(var).copy_from_slice(vec.words());
            }
        }
        self.classes.clear();
        for i in 0..self.registered.len() {
            let var = self.registered[i];
            let v = self.vector(NodeRef::Lit(var.positive()));
            self.classes.register(var, &v);
        }
    }
}
