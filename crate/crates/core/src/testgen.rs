//! Seeded circuit generators and an explicit-state reachability oracle.
//!
//! Families: random AIGs, counters, self-miters (two copies of one design
//! on shared inputs, outputs compared by XOR), shadow copies (one input of
//! the copy replaced) and retimed pairs (a register moved across a logic
//! cone). Any family can carry an invariant constraint.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::aiger::{AigBuilder, AigLiteral, AigNetwork, LatchInit};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Family {
    Random,
    Counter,
    SelfMiter,
    Shadow,
    RetimedPair,
}

/// An optional invariant constraint added on top of a family.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConstraintSpec {
    None,
    /// Conjunction of `m` input literals: holds for a `2^-m` fraction of
    /// input assignments.
    Cube(usize),
    /// A randomly chosen internal signal.
    Gate,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GenSpec {
    pub seed: u64,
    pub family: Family,
    pub gates: usize,
    pub latches: usize,
    pub inputs: usize,
    pub constraint: ConstraintSpec,
}

impl GenSpec {
    pub fn new(family: Family, seed: u64) -> GenSpec {
        GenSpec {
            seed,
            family,
            gates: 30,
            latches: 8,
            inputs: 4,
            constraint: ConstraintSpec::None,
        }
    }
}

pub fn generate(spec: &GenSpec) -> AigNetwork {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    match spec.family {
        Family::Random => random_circuit(&mut rng, spec),
        Family::Counter => {
            let bits = spec.latches.clamp(1, 16);
            let target = rng.gen_range(0..1u32 << bits);
            counter(bits, target)
        }
        Family::SelfMiter => miter(&mut rng, spec, false),
        Family::Shadow => miter(&mut rng, spec, true),
        Family::RetimedPair => retimed_pair(&mut rng, spec),
    }
}

fn pick(rng: &mut ChaCha8Rng, pool: &[AigLiteral]) -> AigLiteral {
    let l = *pool.choose(rng).expect("non-empty signal pool");
    l.complement_if(rng.gen())
}

fn add_constraint(rng: &mut ChaCha8Rng, b: &mut AigBuilder, spec: ConstraintSpec, inputs: &[AigLiteral], pool: &[AigLiteral]) {
    match spec {
        ConstraintSpec::None => {}
        ConstraintSpec::Cube(m) => {
            let mut chosen = inputs.to_vec();
            chosen.shuffle(rng);
            let mut c = AigLiteral::TRUE;
            for &l in chosen.iter().take(m) {
                let l = l.complement_if(rng.gen());
                c = if c == AigLiteral::TRUE { l } else { b.and(c, l) };
            }
            b.constraint(c);
        }
        ConstraintSpec::Gate => {
            let c = pick(rng, pool);
            b.constraint(c);
        }
    }
}

fn random_init(rng: &mut ChaCha8Rng) -> LatchInit {
    match rng.gen_range(0..5) {
        0 => LatchInit::Uninitialized,
        1 | 2 => LatchInit::One,
        _ => LatchInit::Zero,
    }
}

fn random_circuit(rng: &mut ChaCha8Rng, spec: &GenSpec) -> AigNetwork {
    let mut b = AigBuilder::new();
    let inputs: Vec<_> = (0..spec.inputs).map(|_| b.input()).collect();
    let latches: Vec<_> = (0..spec.latches).map(|_| b.latch(random_init(rng))).collect();
    let mut pool: Vec<AigLiteral> = inputs.iter().chain(&latches).copied().collect();
    if pool.is_empty() {
        pool.push(AigLiteral::TRUE);
    }
    let mut gates = Vec::new();
    for _ in 0..spec.gates {
        let x = pick(rng, &pool);
        let y = pick(rng, &pool);
        let g = b.and(x, y);
        gates.push(g);
        pool.push(g);
    }
    for &l in &latches {
        let n = pick(rng, &pool);
        b.set_next(l, n);
    }
    // favor late signals for the property so it depends on real logic
    let late = &pool[pool.len() - pool.len().min(6)..];
    let bad = pick(rng, late);
    b.bad(bad);
    add_constraint(rng, &mut b, spec.constraint, &inputs, &pool);
    b.build()
}

/// A `bits`-wide counter starting at 0, incremented every cycle; the bad
/// literal is `count == target`.
pub fn counter(bits: usize, target: u32) -> AigNetwork {
    let mut b = AigBuilder::new();
    let ls: Vec<_> = (0..bits).map(|_| b.latch(LatchInit::Zero)).collect();
    let mut carry = AigLiteral::TRUE;
    for &l in &ls {
        let n = if carry == AigLiteral::TRUE { !l } else { b.xor(l, carry) };
        carry = if carry == AigLiteral::TRUE { l } else { b.and(l, carry) };
        b.set_next(l, n);
    }
    let mut eq = AigLiteral::TRUE;
    for (i, &l) in ls.iter().enumerate() {
        let bit = l.complement_if(target >> i & 1 == 0);
        eq = if eq == AigLiteral::TRUE { bit } else { b.and(eq, bit) };
    }
    b.bad(eq);
    b.build()
}

/// One copy of a design: gate descriptions over abstract signal indices so
/// the same design can be instantiated twice.
struct Design {
    /// Gate `i` is signal `base + i`; fan-ins index the signal list.
    gates: Vec<((usize, bool), (usize, bool))>,
    inits: Vec<LatchInit>,
    /// Next-state signal per latch.
    next: Vec<(usize, bool)>,
    outputs: Vec<(usize, bool)>,
}

fn random_design(rng: &mut ChaCha8Rng, inputs: usize, latches: usize, gates: usize, reset_only: bool) -> Design {
    let base = inputs + latches;
    let mut d = Design { gates: Vec::new(), inits: Vec::new(), next: Vec::new(), outputs: Vec::new() };
    for _ in 0..latches {
        d.inits.push(if reset_only {
            if rng.gen() {
                LatchInit::One
            } else {
                LatchInit::Zero
            }
        } else {
            random_init(rng)
        });
    }
    for i in 0..gates {
        let n = base + i;
        // prefer recent signals to get depth
        let src = |rng: &mut ChaCha8Rng| {
            let s = if n > 8 && rng.gen_bool(0.6) { rng.gen_range(n - 8..n) } else { rng.gen_range(0..n) };
            (s, rng.gen())
        };
        let a = src(rng);
        let b = src(rng);
        d.gates.push((a, b));
    }
    let total = base + gates;
    for _ in 0..latches {
        d.next.push((rng.gen_range(0..total), rng.gen()));
    }
    let outs = 3.min(total);
    for i in 0..outs {
        d.outputs.push((total - 1 - i, rng.gen()));
    }
    d
}

/// Instantiates `d` on the given input signals. `rewrite` restructures
/// some gates `(p & q) & r` as `(p & r) & q` so the copy is equal in
/// function but not in structure.
fn instantiate(
    b: &mut AigBuilder,
    d: &Design,
    inputs: &[AigLiteral],
    latches: &[AigLiteral],
    rewrite: Option<&mut ChaCha8Rng>,
) -> Vec<AigLiteral> {
    let mut sig: Vec<AigLiteral> = inputs.iter().chain(latches).copied().collect();
    let base = sig.len();
    let mut rng = rewrite;
    for &((a, an), (c, cn)) in &d.gates {
        let x = sig[a].complement_if(an);
        let y = sig[c].complement_if(cn);
        let mut g = None;
        if let Some(r) = rng.as_deref_mut() {
            // a non-complemented fan-in that is itself a gate of this copy
            if a >= base && !an && r.gen_bool(0.3) {
                let ((p, pn), (q, qn)) = d.gates[a - base];
                let (p, q) = (sig[p].complement_if(pn), sig[q].complement_if(qn));
                let t = b.and(p, y);
                g = Some(b.and(t, q));
            }
        }
        sig.push(g.unwrap_or_else(|| b.and(x, y)));
    }
    sig
}

fn miter(rng: &mut ChaCha8Rng, spec: &GenSpec, shadow: bool) -> AigNetwork {
    let ni = spec.inputs.max(1);
    let d = random_design(rng, ni, spec.latches, spec.gates.max(1), !shadow);
    let mut b = AigBuilder::new();
    let inputs: Vec<_> = (0..ni).map(|_| b.input()).collect();
    let secret = if shadow { Some(b.input()) } else { None };
    let l1: Vec<_> = d.inits.iter().map(|&i| b.latch(i)).collect();
    let l2: Vec<_> = d.inits.iter().map(|&i| b.latch(i)).collect();
    let mut inputs2 = inputs.clone();
    if let Some(s) = secret {
        let i = rng.gen_range(0..ni);
        inputs2[i] = s;
    }
    let s1 = instantiate(&mut b, &d, &inputs, &l1, None);
    let s2 = instantiate(&mut b, &d, &inputs2, &l2, if shadow { None } else { Some(rng) });
    for (i, &(n, neg)) in d.next.iter().enumerate() {
        b.set_next(l1[i], s1[n].complement_if(neg));
        b.set_next(l2[i], s2[n].complement_if(neg));
    }
    let mut diff = AigLiteral::FALSE;
    for &(o, neg) in &d.outputs {
        let x = b.xor(s1[o].complement_if(neg), s2[o].complement_if(neg));
        diff = if diff == AigLiteral::FALSE { x } else { b.or(diff, x) };
    }
    b.bad(diff);
    let mut crng = ChaCha8Rng::seed_from_u64(spec.seed ^ 0xc0);
    add_constraint(&mut crng, &mut b, spec.constraint, &inputs, &s1);
    b.build()
}

/// Design A registers `f(inputs)`; design B registers the inputs and
/// computes `f` afterwards. The reset of A's register is `f(0, .., 0)`, so
/// both designs produce the same output sequence.
fn retimed_pair(rng: &mut ChaCha8Rng, spec: &GenSpec) -> AigNetwork {
    let ni = spec.inputs.max(1);
    let d = random_design(rng, ni, 0, spec.gates.max(1), true);
    let out = d.outputs[0];
    let reset = {
        let mut v = vec![false; ni];
        for &((a, an), (c, cn)) in &d.gates {
            let x = v[a] != an;
            let y = v[c] != cn;
            v.push(x && y);
        }
        v[out.0] != out.1
    };
    let mut b = AigBuilder::new();
    let inputs: Vec<_> = (0..ni).map(|_| b.input()).collect();
    let ra = b.latch(if reset { LatchInit::One } else { LatchInit::Zero });
    let rb: Vec<_> = (0..ni).map(|_| b.latch(LatchInit::Zero)).collect();
    let sa = instantiate(&mut b, &d, &inputs, &[], None);
    let sb = instantiate(&mut b, &d, &rb, &[], None);
    b.set_next(ra, sa[out.0].complement_if(out.1));
    for (&r, &i) in rb.iter().zip(&inputs) {
        b.set_next(r, i);
    }
    let x = b.xor(ra, sb[out.0].complement_if(out.1));
    b.bad(x);
    add_constraint(rng, &mut b, spec.constraint, &inputs, &sa);
    b.build()
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OracleError {
    #[error("{latches} latches and {inputs} inputs exceed the explicit-state budget")]
    TooLarge { latches: usize, inputs: usize },
}

/// Values of every variable for one concrete state and input assignment.
/// Written directly against the network so it shares nothing with the
/// simulator or the unroller.
fn evaluate(net: &AigNetwork, state: u32, inputs: u32) -> Vec<bool> {
    let mut v = vec![false; net.maxvar() as usize + 1];
    for (i, l) in net.inputs().iter().enumerate() {
        v[l.var() as usize] = inputs >> i & 1 == 1;
    }
    for (i, l) in net.latches().iter().enumerate() {
        v[l.state.var() as usize] = state >> i & 1 == 1;
    }
    let read = |v: &[bool], l: AigLiteral| v[l.var() as usize] != l.is_complemented();
    for g in net.ands() {
        v[g.out.var() as usize] = read(&v, g.in0) && read(&v, g.in1);
    }
    v
}

fn read(v: &[bool], l: AigLiteral) -> bool {
    v[l.var() as usize] != l.is_complemented()
}

/// All initial states, enumerating uninitialized latches.
fn initial_states(net: &AigNetwork) -> BTreeSet<u32> {
    let mut states = BTreeSet::from([0u32]);
    for (i, l) in net.latches().iter().enumerate() {
        let bit = 1u32 << i;
        states = match l.init {
            LatchInit::Zero => states,
            LatchInit::One => states.into_iter().map(|s| s | bit).collect(),
            LatchInit::Uninitialized => states.into_iter().flat_map(|s| [s, s | bit]).collect(),
        };
    }
    states
}

/// First bound `k <= max_bound` at which some constraint-respecting path of
/// exactly `k` transitions reaches a state and input where a bad literal is
/// 1, or `None` if there is none.
pub fn bfs_oracle(net: &AigNetwork, max_bound: usize) -> Result<Option<usize>, OracleError> {
    let (nl, ni) = (net.latches().len(), net.inputs().len());
    if nl > 16 || ni > 12 {
        return Err(OracleError::TooLarge { latches: nl, inputs: ni });
    }
    let mut layer = initial_states(net);
    for k in 0..=max_bound {
        let mut next = BTreeSet::new();
        for &s in &layer {
            for inp in 0..1u32 << ni {
                let v = evaluate(net, s, inp);
                if !net.constraints().iter().all(|&c| read(&v, c)) {
                    continue;
                }
                if net.bads().iter().any(|&b| read(&v, b)) {
                    return Ok(Some(k));
                }
                let t = net
                    .latches()
                    .iter()
                    .enumerate()
                    .fold(0u32, |acc, (i, l)| acc | (read(&v, l.next) as u32) << i);
                next.insert(t);
            }
        }
        if next.is_empty() {
            break;
        }
        layer = next;
    }
    Ok(None)
}

/// Fraction of (initial state, input) assignments at frame 0 under which
/// every constraint holds.
pub fn constraint_tightness(net: &AigNetwork) -> f64 {
    let ni = net.inputs().len();
    assert!(ni <= 20, "enumeration budget");
    let states = initial_states(net);
    let mut good = 0u64;
    for &s in &states {
        for inp in 0..1u32 << ni {
            let v = evaluate(net, s, inp);
            good += net.constraints().iter().all(|&c| read(&v, c)) as u64;
        }
    }
    good as f64 / (states.len() as f64 * (1u64 << ni) as f64)
}
