//! Constant propagation and trivial AND rules, plus the structural hash
//! table shared across all frames.

use std::collections::HashMap;

use crate::sat::Lit;
use crate::unroll::NodeRef;

/// Resolves `a AND b` without new logic when one of the trivial rules
/// applies, in order: a false input, a true input, identical inputs,
/// complementary inputs.
pub fn trivial_simplify(a: NodeRef, b: NodeRef) -> Option<NodeRef> {
    use NodeRef::{False, True};
    match (a, b) {
        (False, _) | (_, False) => Some(False),
        (True, other) | (other, True) => Some(other),
        (x, y) if x == y => Some(x),
        (x, y) if x == !y => Some(False),
        _ => None,
    }
}

/// Canonical fan-in pair of a gate over solver literals, smaller literal
/// code first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct StrashKey(Lit, Lit);

impl StrashKey {
    pub fn new(a: Lit, b: Lit) -> StrashKey {
        if a <= b {
            StrashKey(a, b)
        } else {
            StrashKey(b, a)
        }
    }

    /// `None` when either side is a constant; constants never reach the
    /// hash table.
    pub fn from_refs(a: NodeRef, b: NodeRef) -> Option<StrashKey> {
        Some(StrashKey::new(a.lit()?, b.lit()?))
    }

    pub fn lits(self) -> (Lit, Lit) {
        (self.0, self.1)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StrashLookup {
    Found(NodeRef),
    Inserted,
}

#[derive(Debug, Default, Clone)]
pub struct StrashTable {
    map: HashMap<StrashKey, NodeRef>,
}

impl StrashTable {
    pub fn new() -> StrashTable {
        StrashTable::default()
    }

    pub fn get(&self, key: StrashKey) -> Option<NodeRef> {
        self.map.get(&key).copied()
    }

    /// Returns the registered representative for `key`, or registers `node`
    /// under it.
    pub fn lookup_or_insert(&mut self, key: StrashKey, node: NodeRef) -> StrashLookup {
        match self.map.entry(key) {
            std::collections::hash_map::Entry::Occupied(e) => StrashLookup::Found(*e.get()),
            std::collections::hash_map::Entry::Vacant(e) => {
                e.insert(node);
                StrashLookup::Inserted
            }
        }
    }

    /// Registers or rebinds `key`.
    pub fn insert(&mut self, key: StrashKey, node: NodeRef) {
        self.map.insert(key, node);
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sat::Solver;
    use proptest::prelude::*;

    fn lits() -> (Lit, Lit) {
        let mut s = Solver::new();
        (s.new_var(), s.new_var())
    }

    #[test]
    fn rule_table() {
        let (x, _) = lits();
        let x = NodeRef::Lit(x);
        assert_eq!(trivial_simplify(NodeRef::False, x), Some(NodeRef::False));
        assert_eq!(trivial_simplify(x, NodeRef::False), Some(NodeRef::False));
        assert_eq!(trivial_simplify(NodeRef::True, NodeRef::True), Some(NodeRef::True));
        assert_eq!(trivial_simplify(NodeRef::True, x), Some(x));
        assert_eq!(trivial_simplify(x, x), Some(x));
    }

    #[test]
    fn complementary_inputs() {
        let (x, _) = lits();
        assert_eq!(trivial_simplify(NodeRef::Lit(x), NodeRef::Lit(!x)), Some(NodeRef::False));
    }

    #[test]
    fn distinct_vars_not_simplified() {
        let (x, y) = lits();
        assert_eq!(trivial_simplify(NodeRef::Lit(x), NodeRef::Lit(!y)), None);
    }

    #[test]
    fn strash_commutes() {
        let (a, b) = lits();
        let mut t = StrashTable::new();
        let g = NodeRef::Lit(a);
        assert_eq!(t.lookup_or_insert(StrashKey::new(a, b), g), StrashLookup::Inserted);
        assert_eq!(t.lookup_or_insert(StrashKey::new(b, a), NodeRef::True), StrashLookup::Found(g));
    }

    #[test]
    fn distinct_keys_do_not_collide() {
        let (a, b) = lits();
        let mut t = StrashTable::new();
        let keys = [
            StrashKey::new(a, b),
            StrashKey::new(!a, b),
            StrashKey::new(a, !b),
            StrashKey::new(!a, !b),
        ];
        for k in keys {
            assert_eq!(t.lookup_or_insert(k, NodeRef::Lit(a)), StrashLookup::Inserted);
        }
        assert_eq!(t.len(), 4);
        assert_eq!(StrashKey::from_refs(NodeRef::True, NodeRef::Lit(a)), None);
    }

    fn node_strategy() -> impl Strategy<Value = NodeRef> {
        // two solver variables: 1 and 2
        let mut s = Solver::new();
        let (x, y) = (s.new_var(), s.new_var());
        prop_oneof![
            Just(NodeRef::False),
            Just(NodeRef::True),
            Just(NodeRef::Lit(x)),
            Just(NodeRef::Lit(!x)),
            Just(NodeRef::Lit(y)),
            Just(NodeRef::Lit(!y)),
        ]
    }

    fn eval(n: NodeRef, x: bool, y: bool) -> bool {
        match n {
            NodeRef::False => false,
            NodeRef::True => true,
            NodeRef::Lit(l) => (if l.var().index() == 1 { x } else { y }) != l.is_negated(),
        }
    }

    proptest! {
        #[test]
        fn rules_are_sound(a in node_strategy(), b in node_strategy()) {
            if let Some(r) = trivial_simplify(a, b) {
                for m in 0..4 {
                    let (x, y) = (m & 1 == 1, m & 2 == 2);
                    prop_assert_eq!(eval(r, x, y), eval(a, x, y) && eval(b, x, y));
                }
                // idempotence: the result is a constant or no longer simplifiable against itself
                let again = trivial_simplify(r, r);
                prop_assert!(again == Some(r));
            }
        }
    }
}
