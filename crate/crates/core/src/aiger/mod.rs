//! AIGER circuits: literals, the validated network, a builder for
//! canonically numbered networks, and the witness format.

mod parse;
mod witness;
mod write;

use std::fmt;
use std::ops::Not;

use thiserror::Error;

pub use parse::{parse, parse_with, ParseError, ParseOptions};
pub use witness::{parse_witness, write_witness, Counterexample, Trace, WitnessError};
pub use write::{write_ascii, write_binary};

/// An AIGER literal, `2 * var + complement`. `0` is constant false and `1`
/// constant true.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct AigLiteral(pub u32);

impl AigLiteral {
    pub const FALSE: AigLiteral = AigLiteral(0);
    pub const TRUE: AigLiteral = AigLiteral(1);

    pub fn new(var: u32, complemented: bool) -> AigLiteral {
        AigLiteral(var << 1 | complemented as u32)
    }

    pub fn var(self) -> u32 {
        self.0 >> 1
    }

    pub fn is_complemented(self) -> bool {
        self.0 & 1 == 1
    }

    pub fn is_constant(self) -> bool {
        self.0 < 2
    }

    /// The non-complemented literal of the same variable.
    pub fn regular(self) -> AigLiteral {
        AigLiteral(self.0 & !1)
    }

    pub fn complement_if(self, c: bool) -> AigLiteral {
        AigLiteral(self.0 ^ c as u32)
    }
}

impl Not for AigLiteral {
    type Output = AigLiteral;

    fn not(self) -> AigLiteral {
        AigLiteral(self.0 ^ 1)
    }
}

impl fmt::Display for AigLiteral {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LatchInit {
    Zero,
    One,
    Uninitialized,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Latch {
    pub state: AigLiteral,
    pub next: AigLiteral,
    pub init: LatchInit,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct AndGate {
    pub out: AigLiteral,
    pub in0: AigLiteral,
    pub in1: AigLiteral,
}

/// What a variable is declared as.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VarKind {
    Constant,
    Input(usize),
    Latch(usize),
    And(usize),
    Unused,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AigError {
    #[error("literal {lit} exceeds maximum variable index {maxvar}")]
    LiteralOutOfRange { lit: u32, maxvar: u32 },
    #[error("variable {0} is declared more than once")]
    Redeclared(u32),
    #[error("{role} literal {lit} must be a non-complemented, non-constant variable")]
    BadDefinition { role: &'static str, lit: u32 },
    #[error("literal {0} refers to an undeclared variable")]
    Undeclared(u32),
    #[error("combinational cycle through variable {0}")]
    Cycle(u32),
    #[error("binary AIGER requires canonical numbering: {0}")]
    NotCanonical(String),
}

/// A validated AIG with latches, bad-state properties, invariant constraints
/// and outputs. The `ands` list is kept in topological order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AigNetwork {
    maxvar: u32,
    inputs: Vec<AigLiteral>,
    latches: Vec<Latch>,
    ands: Vec<AndGate>,
    bads: Vec<AigLiteral>,
    constraints: Vec<AigLiteral>,
    outputs: Vec<AigLiteral>,
    bads_from_outputs: bool,
    kinds: Vec<VarKind>,
}

impl AigNetwork {
    /// Validates the parts and sorts `ands` topologically (stable with
    /// respect to the given order).
    pub fn new(
        maxvar: u32,
        inputs: Vec<AigLiteral>,
        latches: Vec<Latch>,
        ands: Vec<AndGate>,
        bads: Vec<AigLiteral>,
        constraints: Vec<AigLiteral>,
        outputs: Vec<AigLiteral>,
    ) -> Result<AigNetwork, AigError> {
        let mut kinds = vec![VarKind::Unused; maxvar as usize + 1];
        kinds[0] = VarKind::Constant;
        let in_range = |lit: AigLiteral| -> Result<(), AigError> {
            if lit.var() > maxvar {
                Err(AigError::LiteralOutOfRange { lit: lit.0, maxvar })
            } else {
                Ok(())
            }
        };
        let declare = |kinds: &mut Vec<VarKind>, lit: AigLiteral, role: &'static str, kind: VarKind| {
            in_range(lit)?;
            if lit.is_complemented() || lit.is_constant() {
                return Err(AigError::BadDefinition { role, lit: lit.0 });
            }
            let slot = &mut kinds[lit.var() as usize];
            if *slot != VarKind::Unused {
                return Err(AigError::Redeclared(lit.var()));
            }
            *slot = kind;
            Ok(())
        };
        for (i, &l) in inputs.iter().enumerate() {
            declare(&mut kinds, l, "input", VarKind::Input(i))?;
        }
        for (i, l) in latches.iter().enumerate() {
            declare(&mut kinds, l.state, "latch", VarKind::Latch(i))?;
        }
        for g in &ands {
            // index fixed up after sorting
            declare(&mut kinds, g.out, "AND gate", VarKind::And(0))?;
        }
        let check_use = |kinds: &Vec<VarKind>, lit: AigLiteral| -> Result<(), AigError> {
            in_range(lit)?;
            if kinds[lit.var() as usize] == VarKind::Unused {
                Err(AigError::Undeclared(lit.0))
            } else {
                Ok(())
            }
        };
        for g in &ands {
            check_use(&kinds, g.in0)?;
            check_use(&kinds, g.in1)?;
        }
        for l in &latches {
            check_use(&kinds, l.next)?;
        }
        for &l in bads.iter().chain(&constraints).chain(&outputs) {
            check_use(&kinds, l)?;
        }

        let ands = topo_sort(&ands, &kinds)?;
        for (i, g) in ands.iter().enumerate() {
            kinds[g.out.var() as usize] = VarKind::And(i);
        }
        Ok(AigNetwork {
            maxvar,
            inputs,
            latches,
            ands,
            bads,
            constraints,
            outputs,
            bads_from_outputs: false,
            kinds,
        })
    }

    /// Adopts the outputs as bad-state properties when there are none
    /// (legacy AIGER convention). Returns whether adoption happened.
    pub fn adopt_outputs_as_bads(&mut self) -> bool {
        if self.bads.is_empty() && !self.outputs.is_empty() {
            self.bads = self.outputs.clone();
            self.bads_from_outputs = true;
            true
        } else {
            false
        }
    }

    pub fn maxvar(&self) -> u32 {
        self.maxvar
    }

    pub fn inputs(&self) -> &[AigLiteral] {
        &self.inputs
    }

    pub fn latches(&self) -> &[Latch] {
        &self.latches
    }

    pub fn ands(&self) -> &[AndGate] {
        &self.ands
    }

    pub fn bads(&self) -> &[AigLiteral] {
        &self.bads
    }

    pub fn constraints(&self) -> &[AigLiteral] {
        &self.constraints
    }

    pub fn outputs(&self) -> &[AigLiteral] {
        &self.outputs
    }

    /// True when the bad list was adopted from the outputs at parse time.
    pub fn bads_from_outputs(&self) -> bool {
        self.bads_from_outputs
    }

    pub fn kind(&self, var: u32) -> VarKind {
        self.kinds.get(var as usize).copied().unwrap_or(VarKind::Unused)
    }

    /// Number of latches without a reset value.
    pub fn num_uninitialized(&self) -> usize {
        self.latches
            .iter()
            .filter(|l| l.init == LatchInit::Uninitialized)
            .count()
    }

    /// Whether variables are numbered inputs, then latches, then gates, each
    /// gate satisfying `out > in0 >= in1`, as binary AIGER requires.
    pub fn is_canonical(&self) -> bool {
        let ni = self.inputs.len() as u32;
        let nl = self.latches.len() as u32;
        self.maxvar == ni + nl + self.ands.len() as u32
            && self.inputs.iter().enumerate().all(|(i, l)| l.var() == i as u32 + 1)
            && self
                .latches
                .iter()
                .enumerate()
                .all(|(i, l)| l.state.var() == ni + i as u32 + 1)
            && self.ands.iter().enumerate().all(|(i, g)| {
                g.out.var() == ni + nl + i as u32 + 1 && g.out.0 > g.in0.0 && g.in0.0 >= g.in1.0
            })
    }
}

fn topo_sort(ands: &[AndGate], kinds: &[VarKind]) -> Result<Vec<AndGate>, AigError> {
    let mut gate_of = vec![usize::MAX; kinds.len()];
    for (i, g) in ands.iter().enumerate() {
        gate_of[g.out.var() as usize] = i;
    }
    // 0 = unvisited, 1 = on stack, 2 = done
    let mut state = vec![0u8; ands.len()];
    let mut order = Vec::with_capacity(ands.len());
    for root in 0..ands.len() {
        if state[root] != 0 {
            continue;
        }
        let mut stack = vec![(root, 0u8)];
        state[root] = 1;
        while let Some(top) = stack.len().checked_sub(1) {
            let (g, child) = stack[top];
            if child < 2 {
                stack[top].1 += 1;
                let lit = if child == 0 { ands[g].in0 } else { ands[g].in1 };
                let dep = gate_of[lit.var() as usize];
                if dep != usize::MAX {
                    match state[dep] {
                        0 => {
                            state[dep] = 1;
                            stack.push((dep, 0));
                        }
                        1 => return Err(AigError::Cycle(lit.var())),
                        _ => {}
                    }
                }
            } else {
                state[g] = 2;
                order.push(ands[g]);
                stack.pop();
            }
        }
    }
    Ok(order)
}

/// Builds canonically numbered networks: inputs and latches must be created
/// before the first AND gate.
#[derive(Debug, Default, Clone)]
pub struct AigBuilder {
    inputs: Vec<AigLiteral>,
    latches: Vec<Latch>,
    ands: Vec<AndGate>,
    bads: Vec<AigLiteral>,
    constraints: Vec<AigLiteral>,
    outputs: Vec<AigLiteral>,
}

impl AigBuilder {
    pub fn new() -> AigBuilder {
        AigBuilder::default()
    }

    fn next_var(&self) -> u32 {
        (self.inputs.len() + self.latches.len() + self.ands.len()) as u32 + 1
    }

    pub fn input(&mut self) -> AigLiteral {
        assert!(
            self.ands.is_empty() && self.latches.is_empty(),
            "inputs must precede latches and gates"
        );
        let l = AigLiteral::new(self.next_var(), false);
        self.inputs.push(l);
        l
    }

    /// Creates a latch whose next-state function is set later with
    /// [`AigBuilder::set_next`]; it defaults to holding constant false.
    pub fn latch(&mut self, init: LatchInit) -> AigLiteral {
        assert!(self.ands.is_empty(), "latches must precede gates");
        let l = AigLiteral::new(self.next_var(), false);
        self.latches.push(Latch {
            state: l,
            next: AigLiteral::FALSE,
            init,
        });
        l
    }

    pub fn set_next(&mut self, latch: AigLiteral, next: AigLiteral) {
        let l = self
            .latches
            .iter_mut()
            .find(|l| l.state == latch)
            .expect("not a latch of this builder");
        l.next = next;
    }

    /// Adds an AND gate without any simplification.
    pub fn and(&mut self, a: AigLiteral, b: AigLiteral) -> AigLiteral {
        let out = AigLiteral::new(self.next_var(), false);
        let (in0, in1) = if a >= b { (a, b) } else { (b, a) };
        self.ands.push(AndGate { out, in0, in1 });
        out
    }

    pub fn or(&mut self, a: AigLiteral, b: AigLiteral) -> AigLiteral {
        !self.and(!a, !b)
    }

    pub fn xor(&mut self, a: AigLiteral, b: AigLiteral) -> AigLiteral {
        let p = self.and(a, !b);
        let q = self.and(!a, b);
        self.or(p, q)
    }

    pub fn num_inputs(&self) -> usize {
        self.inputs.len()
    }

    pub fn num_ands(&self) -> usize {
        self.ands.len()
    }

    pub fn bad(&mut self, l: AigLiteral) {
        self.bads.push(l);
    }

    pub fn constraint(&mut self, l: AigLiteral) {
        self.constraints.push(l);
    }

    pub fn output(&mut self, l: AigLiteral) {
        self.outputs.push(l);
    }

    pub fn build(self) -> AigNetwork {
        let maxvar = self.next_var() - 1;
        AigNetwork::new(
            maxvar,
            self.inputs,
            self.latches,
            self.ands,
            self.bads,
            self.constraints,
            self.outputs,
        )
        .expect("builder produces well-formed networks")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn literal_encoding() {
        let l = AigLiteral::new(5, true);
        assert_eq!(l.0, 11);
        assert_eq!(l.var(), 5);
        assert!(l.is_complemented());
        assert_eq!((!l).0, 10);
        assert!(AigLiteral::TRUE.is_constant());
    }

    #[test]
    fn out_of_order_gates_are_sorted() {
        let g2 = AndGate { out: AigLiteral(8), in0: AigLiteral(6), in1: AigLiteral(2) };
        let g1 = AndGate { out: AigLiteral(6), in0: AigLiteral(4), in1: AigLiteral(2) };
        let net = AigNetwork::new(
            4,
            vec![AigLiteral(2), AigLiteral(4)],
            vec![],
            vec![g2, g1],
            vec![AigLiteral(8)],
            vec![],
            vec![],
        )
        .unwrap();
        assert_eq!(net.ands(), &[g1, g2]);
        assert_eq!(net.kind(3), VarKind::And(0));
        assert_eq!(net.kind(4), VarKind::And(1));
    }

    #[test]
    fn cycle_rejected() {
        let a = AndGate { out: AigLiteral(4), in0: AigLiteral(6), in1: AigLiteral(2) };
        let b = AndGate { out: AigLiteral(6), in0: AigLiteral(4), in1: AigLiteral(2) };
        let err = AigNetwork::new(3, vec![AigLiteral(2)], vec![], vec![a, b], vec![], vec![], vec![]);
        assert!(matches!(err, Err(AigError::Cycle(_))));
    }

    #[test]
    fn redeclaration_and_undeclared_rejected() {
        let r = AigNetwork::new(1, vec![AigLiteral(2), AigLiteral(2)], vec![], vec![], vec![], vec![], vec![]);
        assert_eq!(r, Err(AigError::Redeclared(1)));
        let r = AigNetwork::new(2, vec![AigLiteral(2)], vec![], vec![], vec![AigLiteral(4)], vec![], vec![]);
        assert_eq!(r, Err(AigError::Undeclared(4)));
        let r = AigNetwork::new(1, vec![AigLiteral(3)], vec![], vec![], vec![], vec![], vec![]);
        assert!(matches!(r, Err(AigError::BadDefinition { .. })));
    }

    #[test]
    fn builder_is_canonical() {
        let mut b = AigBuilder::new();
        let x = b.input();
        let y = b.input();
        let l = b.latch(LatchInit::Zero);
        let g = b.xor(x, y);
        b.set_next(l, g);
        b.bad(l);
        let net = b.build();
        assert!(net.is_canonical());
        assert_eq!(net.ands().len(), 3);
    }
}
