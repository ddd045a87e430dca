//! Reference multi-frame AIG simulation over plain booleans or 64-pattern
//! words. Independent of the unroller and the solver.

use crate::aiger::{AigLiteral, AigNetwork, LatchInit};

pub trait Word: Copy + PartialEq + std::fmt::Debug {
    const ZERO: Self;
    const ONES: Self;
    fn and(self, other: Self) -> Self;
    fn not(self) -> Self;
}

impl Word for bool {
    const ZERO: bool = false;
    const ONES: bool = true;

    fn and(self, other: bool) -> bool {
        self && other
    }

    fn not(self) -> bool {
        !self
    }
}

impl Word for u64 {
    const ZERO: u64 = 0;
    const ONES: u64 = !0;

    fn and(self, other: u64) -> u64 {
        self & other
    }

    fn not(self) -> u64 {
        !self
    }
}

/// Initial latch values: reset constants, and `uninit(i)` for latch `i`
/// when it has no reset value.
pub fn initial_state<W: Word>(net: &AigNetwork, mut uninit: impl FnMut(usize) -> W) -> Vec<W> {
    net.latches()
        .iter()
        .enumerate()
        .map(|(i, l)| match l.init {
            LatchInit::Zero => W::ZERO,
            LatchInit::One => W::ONES,
            LatchInit::Uninitialized => uninit(i),
        })
        .collect()
}

/// Steps a network frame by frame.
#[derive(Debug, Clone)]
pub struct Simulator<'a, W: Word> {
    net: &'a AigNetwork,
    state: Vec<W>,
    values: Vec<W>,
    mask: Option<&'a [bool]>,
}

impl<'a, W: Word> Simulator<'a, W> {
    pub fn new(net: &'a AigNetwork, init: Vec<W>) -> Self {
        assert_eq!(init.len(), net.latches().len(), "one initial value per latch");
        Simulator {
            net,
            state: init,
            values: vec![W::ZERO; net.maxvar() as usize + 1],
            mask: None,
        }
    }

    /// Restricts evaluation to variables with `mask[var]` set; others read
    /// as zero.
    pub fn with_mask(mut self, mask: &'a [bool]) -> Self {
        self.mask = Some(mask);
        self
    }

    fn live(&self, var: u32) -> bool {
        self.mask.is_none_or(|m| m[var as usize])
    }

    pub fn lit(&self, l: AigLiteral) -> W {
        let v = self.values[l.var() as usize];
        if l.is_complemented() {
            v.not()
        } else {
            v
        }
    }

    /// Evaluates one frame with the given input values and advances the
    /// latches. Frame values stay readable through [`Simulator::lit`] until
    /// the next step.
    pub fn step(&mut self, inputs: &[W]) {
        assert_eq!(inputs.len(), self.net.inputs().len(), "one value per input");
        let net = self.net;
        for (l, &v) in net.inputs().iter().zip(inputs) {
            self.values[l.var() as usize] = v;
        }
        for (l, &v) in net.latches().iter().zip(&self.state) {
            self.values[l.state.var() as usize] = v;
        }
        for g in net.ands() {
            if self.live(g.out.var()) {
                self.values[g.out.var() as usize] = self.lit(g.in0).and(self.lit(g.in1));
            }
        }
        for (i, l) in net.latches().iter().enumerate() {
            if self.live(l.state.var()) {
                self.state[i] = self.lit(l.next);
            }
        }
    }

    /// Per-variable values of the last evaluated frame.
    pub fn values(&self) -> &[W] {
        &self.values
    }
}
