//! End-to-end acceptance checks. Each test writes one PASS/FAIL line to
//! stderr (uncaptured) and fails on any violation.

use std::collections::HashSet;
use std::io::Write;
use std::sync::OnceLock;

use fraig_bmc::aiger::{parse_witness, write_witness, AigNetwork, Counterexample, LatchInit, Trace};
use fraig_bmc::bmc::{validate_counterexample, Bmc, BmcOptions, BmcOutcome};
use fraig_bmc::constraints::{
    compute_coi, filter_patterns, sample_patterns, satisfies_constraints, ConstraintMode, PatternOptions,
};
use fraig_bmc::sat::{Lit, SolveResult, Solver};
use fraig_bmc::sim::Simulator;
use fraig_bmc::stats::RunStats;
use fraig_bmc::testgen::{bfs_oracle, constraint_tightness, generate, ConstraintSpec, Family, GenSpec};
use fraig_bmc::unroll::{NodeRef, ReduceOptions, Unroller};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const MAX_BOUND: usize = 10;

fn report(name: &str, ok: bool, detail: &str) {
    let status = if ok { "PASS" } else { "FAIL" };
    let _ = writeln!(std::io::stderr(), "{status} {name}: {detail}");
}

fn corpus_spec(i: u64) -> GenSpec {
    let mut rng = ChaCha8Rng::seed_from_u64(0xacce_0000 + i);
    let seed = rng.gen();
    match i % 10 {
        0..=5 => GenSpec {
            seed,
            family: Family::Random,
            gates: rng.gen_range(1..=30),
            latches: rng.gen_range(0..=8),
            inputs: rng.gen_range(0..=4),
            constraint: match i % 6 {
                2 => ConstraintSpec::Cube(1),
                3 => ConstraintSpec::Cube(2),
                4 => ConstraintSpec::Gate,
                _ => ConstraintSpec::None,
            },
        },
        6 => GenSpec {
            seed,
            family: Family::SelfMiter,
            gates: rng.gen_range(3..=8),
            latches: rng.gen_range(0..=4),
            inputs: rng.gen_range(1..=4),
            constraint: ConstraintSpec::None,
        },
        7 => GenSpec {
            seed,
            family: Family::Shadow,
            gates: rng.gen_range(3..=8),
            latches: rng.gen_range(0..=4),
            inputs: rng.gen_range(1..=3),
            constraint: ConstraintSpec::None,
        },
        8 => GenSpec {
            seed,
            family: Family::RetimedPair,
            gates: rng.gen_range(1..=12),
            latches: 0,
            inputs: rng.gen_range(1..=4),
            constraint: if i % 20 == 8 { ConstraintSpec::Gate } else { ConstraintSpec::None },
        },
        _ => GenSpec {
            seed,
            family: Family::Counter,
            gates: 0,
            latches: rng.gen_range(2..=4),
            inputs: 0,
            constraint: ConstraintSpec::None,
        },
    }
}

/// A corpus circuit within the oracle budget: at most 30 gates, 8 latches
/// and 4 inputs.
fn corpus_net(i: u64) -> AigNetwork {
    let mut spec = corpus_spec(i);
    loop {
        let net = generate(&spec);
        if net.ands().len() <= 30 && net.latches().len() <= 8 && net.inputs().len() <= 4 {
            return net;
        }
        assert!(spec.gates > 1, "generator cannot fit the budget");
        spec.gates -= 1;
    }
}

struct RunRecord {
    outcome: BmcOutcome,
    stats: RunStats,
    witness: Option<String>,
    /// (merge frame, merged var, representative origin + complement or
    /// constant, constraint frames) for merges small enough to enumerate.
    merges: Vec<MergeCheck>,
    functional_merges: usize,
}

#[derive(Clone, Copy)]
struct MergeCheck {
    frame: usize,
    var: u32,
    rep: Rep,
    constraint_frames: usize,
}

#[derive(Clone, Copy)]
enum Rep {
    Const(bool),
    Node { frame: usize, var: u32, negated: bool },
}

fn run_one(net: &AigNetwork, reduce: bool) -> RunRecord {
    let opts = BmcOptions {
        max_bound: MAX_BOUND,
        reduce: ReduceOptions { reduce, ..ReduceOptions::default() },
        ..BmcOptions::default()
    };
    let mut bmc = Bmc::new(net, opts);
    let outcome = bmc.run().expect("run");
    let u = bmc.unroller();
    let merges = u
        .merges()
        .iter()
        .map(|m| MergeCheck {
            frame: m.frame,
            var: m.aig_var,
            rep: match m.rep {
                NodeRef::False => Rep::Const(false),
                NodeRef::True => Rep::Const(true),
                NodeRef::Lit(l) => {
                    let (frame, var) = u.origin(l.var()).expect("representative has an origin");
                    Rep::Node { frame, var, negated: l.is_negated() }
                }
            },
            constraint_frames: m.constraint_frames,
        })
        .collect::<Vec<_>>();
    let witness = match &outcome {
        BmcOutcome::Unsafe(c) => Some(write_witness(c, net)),
        _ => None,
    };
    RunRecord {
        outcome,
        functional_merges: merges.len(),
        merges,
        stats: bmc.stats().clone(),
        witness,
    }
}

struct CorpusRun {
    net: AigNetwork,
    oracle: Option<usize>,
    fraig: RunRecord,
    plain: RunRecord,
}

fn corpus() -> &'static [CorpusRun] {
    static CORPUS: OnceLock<Vec<CorpusRun>> = OnceLock::new();
    CORPUS.get_or_init(|| {
        (0..500)
            .map(|i| {
                let net = corpus_net(i);
                let oracle = bfs_oracle(&net, MAX_BOUND).expect("oracle budget");
                let fraig = run_one(&net, true);
                let plain = run_one(&net, false);
                CorpusRun { net, oracle, fraig, plain }
            })
            .collect()
    })
}

fn verdict(o: &BmcOutcome) -> Option<usize> {
    match o {
        BmcOutcome::Unsafe(c) => Some(c.bound),
        BmcOutcome::Safe { upto } => {
            assert_eq!(*upto, MAX_BOUND);
            None
        }
        BmcOutcome::Limit { .. } => panic!("no limits are configured"),
    }
}

#[test]
fn verdicts_match_explicit_state_oracle() {
    let runs = corpus();
    let mut bad = Vec::new();
    let mut unsafe_count = 0;
    for (i, r) in runs.iter().enumerate() {
        let (a, b) = (verdict(&r.fraig.outcome), verdict(&r.plain.outcome));
        unsafe_count += r.oracle.is_some() as usize;
        if a != r.oracle || b != r.oracle {
            bad.push(format!("#{i}: oracle {:?} fraig {a:?} plain {b:?}", r.oracle));
        }
    }
    report(
        "verdict agreement (reduced, unreduced, BFS)",
        bad.is_empty(),
        &format!("{} circuits, {} unsafe, {} disagreements", runs.len(), unsafe_count, bad.len()),
    );
    assert!(bad.is_empty(), "{bad:?}");
}

/// Per-frame values of every AIG variable under a trace.
fn simulate_all(net: &AigNetwork, trace: &Trace) -> Vec<Vec<bool>> {
    let init = fraig_bmc::sim::initial_state(net, |i| trace.init[i]);
    let mut sim = Simulator::new(net, init);
    trace
        .inputs
        .iter()
        .map(|row| {
            sim.step(row);
            sim.values().to_vec()
        })
        .collect()
}

fn uninit_latches(net: &AigNetwork) -> Vec<usize> {
    (0..net.latches().len()).filter(|&i| net.latches()[i].init == LatchInit::Uninitialized).collect()
}

/// Exhaustively checks one merge. Returns the number of free bits used, or
/// `None` when the instance is too large to enumerate.
fn check_merge(net: &AigNetwork, m: &MergeCheck) -> Option<Result<usize, String>> {
    let uninit = uninit_latches(net);
    let ni = net.inputs().len();
    let frames = m.frame + 1;
    let bits = ni * frames + uninit.len();
    if bits > 12 {
        return None;
    }
    for a in 0..1u32 << bits {
        let mut init = vec![false; net.latches().len()];
        for (j, &l) in uninit.iter().enumerate() {
            init[l] = a >> j & 1 == 1;
        }
        let off = uninit.len();
        let inputs = (0..frames).map(|f| (0..ni).map(|i| a >> (off + f * ni + i) & 1 == 1).collect()).collect();
        let vals = simulate_all(net, &Trace { init, inputs });
        let ok_constraints =
            (0..m.constraint_frames.min(frames)).all(|f| net.constraints().iter().all(|&c| vals[f][c.var() as usize] != c.is_complemented()));
        if !ok_constraints {
            continue;
        }
        let lhs = vals[m.frame][m.var as usize];
        let rhs = match m.rep {
            Rep::Const(c) => c,
            Rep::Node { frame, var, negated } => vals[frame][var as usize] != negated,
        };
        if lhs != rhs {
            return Some(Err(format!("frame {} var {} differs under assignment {a:#b}", m.frame, m.var)));
        }
    }
    Some(Ok(bits))
}

#[test]
fn functional_merges_are_sound() {
    let runs = corpus();
    let mut checked = 0;
    let mut total = 0;
    let mut violations = Vec::new();
    for (i, r) in runs.iter().enumerate() {
        total += r.fraig.functional_merges;
        for m in &r.fraig.merges {
            match check_merge(&r.net, m) {
                None => {}
                Some(Ok(_)) => checked += 1,
                Some(Err(e)) => violations.push(format!("#{i}: {e}")),
            }
        }
    }
    for (i, net) in miters().iter().enumerate().take(10) {
        let r = run_one(net, true);
        total += r.functional_merges;
        for m in &r.merges {
            match check_merge(net, m) {
                None => {}
                Some(Ok(_)) => checked += 1,
                Some(Err(e)) => violations.push(format!("miter #{i}: {e}")),
            }
        }
    }
    report(
        "merge soundness",
        violations.is_empty() && checked > 0,
        &format!("{checked} of {total} functional merges enumerated, {} violations", violations.len()),
    );
    assert!(violations.is_empty(), "{violations:?}");
    assert!(checked > 0, "no merge was small enough to check");
}

fn witness_ok(net: &AigNetwork, cex: &Counterexample, text: &str) -> Result<(), String> {
    if !validate_counterexample(net, cex) {
        return Err("replay does not reach bad with constraints held".into());
    }
    let back = parse_witness(text).map_err(|e| e.to_string())?;
    back.check_shape(net).map_err(|e| e.to_string())?;
    if back != *cex {
        return Err("witness text does not round-trip".into());
    }
    Ok(())
}

#[test]
fn witnesses_replay() {
    let runs = corpus();
    let mut n = 0;
    let mut bad = Vec::new();
    for (i, r) in runs.iter().enumerate() {
        for rec in [&r.fraig, &r.plain] {
            if let (BmcOutcome::Unsafe(cex), Some(text)) = (&rec.outcome, &rec.witness) {
                n += 1;
                if let Err(e) = witness_ok(&r.net, cex, text) {
                    bad.push(format!("#{i}: {e}"));
                }
            }
        }
    }
    for (i, net) in constrained_nets().iter().enumerate() {
        for mode in [ConstraintMode::Filter, ConstraintMode::Sample] {
            let (out, _) = run_mode(net, mode);
            if let BmcOutcome::Unsafe(cex) = &out {
                n += 1;
                if let Err(e) = witness_ok(net, cex, &write_witness(cex, net)) {
                    bad.push(format!("constrained #{i} {mode:?}: {e}"));
                }
            }
        }
    }
    report("witness validity", bad.is_empty() && n > 0, &format!("{n} witnesses, {} invalid", bad.len()));
    assert!(bad.is_empty(), "{bad:?}");
}

fn miters() -> &'static [AigNetwork] {
    static MITERS: OnceLock<Vec<AigNetwork>> = OnceLock::new();
    MITERS.get_or_init(|| {
        (0..50u64)
            .map(|i| {
                let mut rng = ChaCha8Rng::seed_from_u64(0x3173_0000 + i);
                let spec = GenSpec {
                    seed: rng.gen(),
                    family: Family::SelfMiter,
                    gates: rng.gen_range(50..=200),
                    latches: rng.gen_range(2..=8),
                    inputs: rng.gen_range(2..=8),
                    constraint: ConstraintSpec::None,
                };
                generate(&spec)
            })
            .collect()
    })
}

#[test]
fn self_miters_reduce() {
    const BOUND: usize = 8;
    let mut worst: f64 = 0.0;
    let mut calls = 0;
    let mut failures = Vec::new();
    for (i, net) in miters().iter().enumerate() {
        let run = |reduce| {
            let opts = BmcOptions {
                max_bound: BOUND,
                reduce: ReduceOptions { reduce, ..ReduceOptions::default() },
                ..BmcOptions::default()
            };
            let mut bmc = Bmc::new(net, opts);
            let out = bmc.run().unwrap();
            (out, bmc.stats().clone())
        };
        let (out_on, on) = run(true);
        let (out_off, off) = run(false);
        if out_on != (BmcOutcome::Safe { upto: BOUND }) || out_off != out_on {
            failures.push(format!("#{i}: outcomes {out_on:?} / {out_off:?}"));
        }
        calls += on.property_calls();
        if on.bounds.iter().any(|b| b.reduced_away != 1) {
            failures.push(format!("#{i}: a bad literal was not reduced to false"));
        }
        for (a, b) in on.bounds.iter().zip(&off.bounds) {
            let ratio = a.new_vars as f64 / b.new_vars as f64;
            worst = worst.max(ratio);
            if ratio > 0.6 {
                failures.push(format!("#{i} bound {}: {} vs {} vars", a.bound, a.new_vars, b.new_vars));
            }
        }
    }
    report(
        "self-miter reduction",
        failures.is_empty() && calls == 0,
        &format!("50 miters to bound {BOUND}, worst per-frame var ratio {worst:.3}, {calls} property calls"),
    );
    assert!(failures.is_empty(), "{failures:?}");
    assert_eq!(calls, 0);
}

#[test]
fn reduction_never_adds_variables() {
    let mut frames = 0;
    let mut bad = Vec::new();
    let mut check = |name: String, on: &RunStats, off: &RunStats| {
        assert_eq!(on.bounds.len(), off.bounds.len(), "{name}: runs stopped at different bounds");
        for (a, b) in on.bounds.iter().zip(&off.bounds) {
            frames += 1;
            if a.new_vars > b.new_vars {
                bad.push(format!("{name} bound {}: {} > {}", a.bound, a.new_vars, b.new_vars));
            }
        }
    };
    for (i, r) in corpus().iter().enumerate() {
        check(format!("#{i}"), &r.fraig.stats, &r.plain.stats);
    }
    for (i, net) in miters().iter().enumerate().take(10) {
        let (on, off) = (run_one(net, true), run_one(net, false));
        check(format!("miter #{i}"), &on.stats, &off.stats);
    }
    report("monotone reduction", bad.is_empty(), &format!("{frames} frames, {} violations", bad.len()));
    assert!(bad.is_empty(), "{bad:?}");
}

fn constrained_nets() -> Vec<AigNetwork> {
    let mut nets = Vec::new();
    for (j, m) in [1usize, 2, 4, 8].into_iter().enumerate() {
        for s in 0..4u64 {
            nets.push(generate(&GenSpec {
                seed: 0x6000 + 16 * j as u64 + s,
                family: Family::Random,
                gates: 20,
                latches: 4,
                inputs: 8,
                constraint: ConstraintSpec::Cube(m),
            }));
        }
    }
    for s in 0..6u64 {
        nets.push(generate(&GenSpec {
            seed: 0x7000 + s,
            family: Family::Random,
            gates: 24,
            latches: 4,
            inputs: 4,
            constraint: ConstraintSpec::Gate,
        }));
    }
    nets
}

fn run_mode(net: &AigNetwork, mode: ConstraintMode) -> (BmcOutcome, RunStats) {
    let opts = BmcOptions {
        max_bound: 6,
        patterns: PatternOptions { mode, ..PatternOptions::default() },
        ..BmcOptions::default()
    };
    let mut bmc = Bmc::new(net, opts);
    let out = bmc.run().unwrap();
    (out, bmc.stats().clone())
}

#[test]
fn constraint_patterns_comply() {
    let mut failures = Vec::new();
    let mut filtered = 0;
    let mut sampled = 0;
    let mut rng = ChaCha8Rng::seed_from_u64(0xf11);
    for (i, net) in constrained_nets().iter().enumerate() {
        let coi = compute_coi(net);
        let tight = constraint_tightness(net);

        // survivor rate at one frame, no capacity cap
        let out = filter_patterns(net, &coi, 1, 64, 0, 1, &mut rng);
        let n = out.generated as f64;
        let sigma = (n * tight * (1.0 - tight)).sqrt();
        let got = out.batch.width() as f64;
        if (got - n * tight).abs() > 3.0 * sigma + 1e-9 {
            failures.push(format!("#{i}: {got} survivors of {n}, tightness {tight}"));
        }
        for frames in 1..=3 {
            let out = filter_patterns(net, &coi, frames, 4, 64, 4, &mut rng);
            filtered += out.batch.width();
            if !out.batch.columns().iter().all(|c| satisfies_constraints(net, c)) {
                failures.push(format!("#{i}: filtered column violates constraints"));
            }
        }

        let mut u = Unroller::new(net, ReduceOptions::default());
        for k in 0..3 {
            u.unroll_frame().unwrap();
            u.assert_constraints(k).unwrap();
        }
        let out = sample_patterns(&mut u, &coi, 64);
        sampled += out.batch.width();
        if !out.batch.columns().iter().all(|c| satisfies_constraints(net, c)) {
            failures.push(format!("#{i}: sampled column violates constraints"));
        }
        let project = |c: &Trace| -> Vec<bool> {
            let mut key = Vec::new();
            for (l, latch) in net.latches().iter().enumerate() {
                if latch.init == LatchInit::Uninitialized && coi.contains(latch.state.var()) {
                    key.push(c.init[l]);
                }
            }
            for row in &c.inputs {
                for (j, inp) in net.inputs().iter().enumerate() {
                    if coi.contains(inp.var()) {
                        key.push(row[j]);
                    }
                }
            }
            key
        };
        let distinct: HashSet<Vec<bool>> = out.batch.columns().iter().map(project).collect();
        if distinct.len() != out.batch.width() {
            failures.push(format!("#{i}: sampled columns repeat on the constraint cone"));
        }

        // the full loop in both modes still agrees with the oracle
        let oracle = bfs_oracle(net, 6).unwrap();
        for mode in [ConstraintMode::Filter, ConstraintMode::Sample] {
            let (o, _) = run_mode(net, mode);
            if o.unsafe_bound() != oracle {
                failures.push(format!("#{i} {mode:?}: {o:?} vs oracle {oracle:?}"));
            }
        }
    }
    report(
        "constraint compliance",
        failures.is_empty(),
        &format!("{filtered} filtered and {sampled} sampled columns, {} violations", failures.len()),
    );
    assert!(failures.is_empty(), "{failures:?}");
}

fn enumerate_sat(nvars: u32, clauses: &[(u32, u32)]) -> bool {
    // each clause as (positive mask, negative mask)
    (0..1u32 << nvars).any(|a| clauses.iter().all(|&(p, n)| a & p != 0 || !a & n != 0))
}

fn pigeonhole(s: &mut Solver, pigeons: usize, holes: usize) {
    let v: Vec<Vec<Lit>> = (0..pigeons).map(|_| (0..holes).map(|_| s.new_var()).collect()).collect();
    for row in &v {
        s.add_clause(row).unwrap();
    }
    for h in 0..holes {
        for a in 0..pigeons {
            for b in a + 1..pigeons {
                s.add_clause(&[!v[a][h], !v[b][h]]).unwrap();
            }
        }
    }
}

#[test]
fn sat_backend_matches_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5a7);
    let mut mismatches = 0;
    let mut sat = 0;
    for _ in 0..1000 {
        let nvars = rng.gen_range(1..=20u32);
        // around the 3-SAT threshold so both answers are common
        let nclauses = rng.gen_range(1..=(5 * nvars as usize).min(80));
        let mut s = Solver::new();
        let vars: Vec<Lit> = (0..nvars).map(|_| s.new_var()).collect();
        let mut masks = Vec::new();
        for _ in 0..nclauses {
            let len = if rng.gen_bool(0.1) { 1 } else { rng.gen_range(2..=3) };
            let (mut p, mut n) = (0u32, 0u32);
            let mut clause = Vec::new();
            for _ in 0..len {
                let v = rng.gen_range(0..nvars);
                let neg: bool = rng.gen();
                if neg {
                    n |= 1 << v;
                } else {
                    p |= 1 << v;
                }
                clause.push(vars[v as usize].var().lit(neg));
            }
            masks.push((p, n));
            s.add_clause(&clause).unwrap();
        }
        let expected = enumerate_sat(nvars, &masks);
        let got = s.solve(&[]);
        sat += expected as usize;
        let agree = match got {
            SolveResult::Sat => {
                expected
                    && masks.iter().all(|&(p, n)| {
                        (0..nvars).any(|v| {
                            let val = s.model_value(vars[v as usize]).unwrap();
                            (p >> v & 1 == 1 && val) || (n >> v & 1 == 1 && !val)
                        })
                    })
            }
            SolveResult::Unsat => !expected,
            SolveResult::Unknown => false,
        };
        mismatches += !agree as usize;
    }
    let mut php = Vec::new();
    for (p, h) in [(4, 3), (5, 4)] {
        let mut s = Solver::new();
        pigeonhole(&mut s, p, h);
        php.push(s.solve(&[]) == SolveResult::Unsat);
    }
    let ok = mismatches == 0 && php.iter().all(|&x| x);
    report(
        "SAT backend vs enumeration",
        ok,
        &format!("1000 instances ({sat} sat), {mismatches} mismatches, PHP(4,3)/PHP(5,4) unsat: {php:?}"),
    );
    assert!(ok);
}

#[test]
fn runs_are_deterministic() {
    let runs = corpus();
    let mut diffs = Vec::new();
    for (i, r) in runs.iter().enumerate() {
        let again = run_one(&r.net, true);
        if again.stats.to_csv(false) != r.fraig.stats.to_csv(false) || again.witness != r.fraig.witness {
            diffs.push(i);
        }
    }
    for (i, net) in constrained_nets().iter().enumerate() {
        for mode in [ConstraintMode::Filter, ConstraintMode::Sample, ConstraintMode::Auto] {
            let (a, sa) = run_mode(net, mode);
            let (b, sb) = run_mode(net, mode);
            if a != b || sa.to_csv(false) != sb.to_csv(false) {
                diffs.push(1000 + i);
            }
        }
    }
    report(
        "determinism",
        diffs.is_empty(),
        &format!("{} corpus runs repeated, {} differ", runs.len(), diffs.len()),
    );
    assert!(diffs.is_empty(), "{diffs:?}");
}

#[test]
fn stats_account_for_every_gate() {
    let mut rows = 0;
    let mut bad = Vec::new();
    let mut check = |name: &str, net: &AigNetwork, stats: &RunStats| {
        for b in &stats.bounds {
            rows += 1;
            if b.counts.merges() + b.counts.fresh != net.ands().len() as u64 {
                bad.push(format!("{name} bound {}", b.bound));
            }
        }
    };
    for (i, r) in corpus().iter().enumerate() {
        check(&format!("#{i}"), &r.net, &r.fraig.stats);
        check(&format!("#{i} plain"), &r.net, &r.plain.stats);
    }
    for (i, net) in miters().iter().enumerate().take(10) {
        check(&format!("miter #{i}"), net, &run_one(net, true).stats);
    }
    report("merge accounting", bad.is_empty(), &format!("{rows} bound rows, {} mismatches", bad.len()));
    assert!(bad.is_empty(), "{bad:?}");
}
