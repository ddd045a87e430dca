//! The bounded model checking loop.

use std::time::{Duration, Instant};

use crate::aiger::{AigNetwork, Counterexample, LatchInit, Trace, WitnessError};
use crate::constraints::{
    compute_coi, filter_patterns, sample_patterns, CoiSet, ConstraintMode, PatternBatch, PatternOptions,
};
use crate::sat::SolveResult;
use crate::sim::Simulator;
use crate::stats::{BoundStats, RunStats};
use crate::unroll::{NodeRef, ReduceOptions, UnrollError, Unroller};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BmcOptions {
    pub max_bound: usize,
    pub reduce: ReduceOptions,
    pub patterns: PatternOptions,
    pub time_limit: Option<Duration>,
}

impl Default for BmcOptions {
    fn default() -> Self {
        BmcOptions {
            max_bound: 100,
            reduce: ReduceOptions::default(),
            patterns: PatternOptions::default(),
            time_limit: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BmcOutcome {
    /// No bad state within bounds `0..=upto`.
    Safe { upto: usize },
    Unsafe(Counterexample),
    /// A resource limit stopped the run while checking `bound`.
    Limit { bound: usize },
}

impl BmcOutcome {
    pub fn unsafe_bound(&self) -> Option<usize> {
        match self {
            BmcOutcome::Unsafe(c) => Some(c.bound),
            _ => None,
        }
    }
}

/// A BMC session: one unroller and one solver for all bounds.
pub struct Bmc<'a> {
    net: &'a AigNetwork,
    opts: BmcOptions,
    unroller: Unroller<'a>,
    coi: CoiSet,
    stats: RunStats,
    deadline: Option<Instant>,
}

impl<'a> Bmc<'a> {
    pub fn new(net: &'a AigNetwork, opts: BmcOptions) -> Bmc<'a> {
        let mut unroller = Unroller::new(net, opts.reduce.clone());
        let deadline = opts.time_limit.map(|t| Instant::now() + t);
        unroller.solver_mut().set_deadline(deadline);
        Bmc {
            net,
            coi: compute_coi(net),
            opts,
            unroller,
            stats: RunStats::default(),
            deadline,
        }
    }

    pub fn unroller(&self) -> &Unroller<'a> {
        &self.unroller
    }

    pub fn stats(&self) -> &RunStats {
        &self.stats
    }

    pub fn into_stats(self) -> RunStats {
        self.stats
    }

    /// Unrolls frame 0 and checks the initial states.
    pub fn check_initial(&mut self) -> Result<Option<BmcOutcome>, UnrollError> {
        assert_eq!(self.unroller.num_frames(), 0, "initial check comes first");
        self.check_bound()
    }

    /// Runs bounds until a violation, `max_bound`, or a limit.
    pub fn run(&mut self) -> Result<BmcOutcome, UnrollError> {
        while self.unroller.num_frames() <= self.opts.max_bound {
            if let Some(out) = self.check_bound()? {
                return Ok(out);
            }
        }
        Ok(BmcOutcome::Safe { upto: self.opts.max_bound })
    }

    fn out_of_time(&self) -> bool {
        self.deadline.is_some_and(|d| Instant::now() >= d)
    }

    fn patterns(&mut self, k: usize, row: &mut BoundStats) -> Option<PatternBatch> {
        let popts = &self.opts.patterns;
        let functional = self.opts.reduce.reduce && self.opts.reduce.functional;
        if !functional || self.net.constraints().is_empty() || popts.mode == ConstraintMode::Off {
            return None;
        }
        let words = self.opts.reduce.sim_words;
        let (min, rounds, count, mode) = (popts.min_patterns, popts.max_rounds, popts.sample_count, popts.mode);
        let mut filtered = None;
        if matches!(mode, ConstraintMode::Filter | ConstraintMode::Auto) {
            let out = filter_patterns(self.net, &self.coi, k + 1, words, min, rounds, self.unroller.rng_mut());
            let escalate = out.escalate;
            filtered = Some(out.batch);
            if mode == ConstraintMode::Filter || !escalate {
                return filtered;
            }
        }
        // sampling covers the frames already encoded
        if k == 0 {
            return filtered;
        }
        let out = sample_patterns(&mut self.unroller, &self.coi, count);
        row.sampling_vars += out.aux_vars;
        row.sampling_clauses += out.aux_clauses;
        match filtered {
            Some(f) if f.width() >= out.batch.width() => Some(f),
            _ => Some(out.batch),
        }
    }

    fn check_bound(&mut self) -> Result<Option<BmcOutcome>, UnrollError> {
        let k = self.unroller.num_frames();
        if self.out_of_time() {
            return Ok(Some(BmcOutcome::Limit { bound: k }));
        }
        let mut row = BoundStats { bound: k, ..BoundStats::default() };

        let t = Instant::now();
        if let Some(batch) = self.patterns(k, &mut row) {
            row.patterns = batch.width();
            self.unroller.apply_patterns(batch);
        }
        let t_patterns = t.elapsed();

        let t = Instant::now();
        let (v0, c0) = (self.unroller.solver().num_vars(), self.unroller.solver().num_clauses());
        let summary = self.unroller.unroll_frame()?;
        self.unroller.assert_constraints(k)?;
        row.new_vars = (self.unroller.solver().num_vars() - v0) as u64;
        row.new_clauses = (self.unroller.solver().num_clauses() - c0) as u64;
        row.counts = summary.counts;
        row.t_fraig = t_patterns + summary.fraig_time;
        row.t_unroll = t.elapsed().saturating_sub(summary.fraig_time);

        let t = Instant::now();
        let mut verdict = None;
        for (i, &bad) in summary.bads.iter().enumerate() {
            let assumptions = match bad {
                NodeRef::False => {
                    row.reduced_away += 1;
                    continue;
                }
                NodeRef::True => vec![],
                NodeRef::Lit(l) => vec![l],
            };
            row.property_calls += 1;
            match self.unroller.solver_mut().solve(&assumptions) {
                SolveResult::Unsat => {}
                SolveResult::Sat => {
                    verdict = Some(BmcOutcome::Unsafe(Counterexample {
                        bound: k,
                        bad_index: i,
                        trace: self.extract_witness(k),
                    }));
                    break;
                }
                SolveResult::Unknown => {
                    verdict = Some(BmcOutcome::Limit { bound: k });
                    break;
                }
            }
        }
        row.t_property = t.elapsed();
        self.stats.bounds.push(row);
        Ok(verdict)
    }

    /// Reads the stimulus of the current model over frames `0..=k`.
    pub fn extract_witness(&self, k: usize) -> Trace {
        let solver = self.unroller.solver();
        let frames = self.unroller.frames();
        let value = |n: NodeRef| match n {
            NodeRef::False => false,
            NodeRef::True => true,
            NodeRef::Lit(l) => solver.model_value(l).unwrap_or(false),
        };
        let init = self
            .net
            .latches()
            .iter()
            .zip(frames.latches(0))
            .map(|(l, &n)| match l.init {
                LatchInit::Zero => false,
                LatchInit::One => true,
                LatchInit::Uninitialized => value(n),
            })
            .collect();
        let inputs = (0..=k).map(|f| frames.inputs(f).iter().map(|&n| value(n)).collect()).collect();
        Trace { init, inputs }
    }
}

/// Convenience wrapper: a fresh session run to completion.
pub fn run(net: &AigNetwork, opts: BmcOptions) -> Result<(BmcOutcome, RunStats), UnrollError> {
    let mut bmc = Bmc::new(net, opts);
    let out = bmc.run()?;
    Ok((out, bmc.into_stats()))
}

/// Per-frame values of the bad and constraint literals under a trace.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Replay {
    pub bads: Vec<Vec<bool>>,
    pub constraints: Vec<Vec<bool>>,
}

/// Simulates `trace` on `net` with the reference simulator. Reset latches
/// start from their reset value whatever the trace says.
pub fn replay_trace(net: &AigNetwork, trace: &Trace) -> Result<Replay, WitnessError> {
    let width = |what, expected: usize, found: usize| {
        if expected == found {
            Ok(())
        } else {
            Err(WitnessError::Width { what, expected, found })
        }
    };
    width("latch", net.latches().len(), trace.init.len())?;
    for row in &trace.inputs {
        width("input", net.inputs().len(), row.len())?;
    }
    let init = crate::sim::initial_state(net, |i| trace.init[i]);
    let mut sim = Simulator::new(net, init);
    let mut out = Replay { bads: Vec::new(), constraints: Vec::new() };
    for row in &trace.inputs {
        sim.step(row);
        out.bads.push(net.bads().iter().map(|&l| sim.lit(l)).collect());
        out.constraints.push(net.constraints().iter().map(|&l| sim.lit(l)).collect());
    }
    Ok(out)
}

/// The counterexample drives its bad literal to 1 at its bound with every
/// constraint true at every frame.
pub fn validate_counterexample(net: &AigNetwork, cex: &Counterexample) -> bool {
    if cex.trace.inputs.len() != cex.bound + 1 || cex.bad_index >= net.bads().len() {
        return false;
    }
    match replay_trace(net, &cex.trace) {
        Ok(r) => r.bads[cex.bound][cex.bad_index] && r.constraints.iter().all(|f| f.iter().all(|&c| c)),
        Err(_) => false,
    }
}
