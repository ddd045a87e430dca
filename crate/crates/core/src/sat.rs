//! Incremental CDCL SAT solver.
//!
//! Two-watched-literal propagation, first-UIP learning with local clause
//! minimization, VSIDS branching, geometric restarts and phase saving.
//! Clauses added through [`Solver::add_clause`] are permanent; learned
//! clauses are garbage collected internally. Queries are made under
//! assumptions, which is how callers retire groups of clauses (activation
//! literals) and check properties without committing them.

use std::fmt;
use std::io::{self, Write};
use std::ops::Not;
use std::time::Instant;

use thiserror::Error;

/// A solver variable. Indices start at 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Var(u32);

impl Var {
    /// Wraps a raw index. Index 0 is reserved.
    pub fn from_index(index: u32) -> Var {
        assert!(index > 0, "solver variables start at 1");
        Var(index)
    }

    pub fn index(self) -> u32 {
        self.0
    }

    pub fn lit(self, negated: bool) -> Lit {
        Lit::new(self, negated)
    }

    pub fn positive(self) -> Lit {
        Lit::new(self, false)
    }
}

/// A literal: a variable plus a negation flag, packed as `2 * var + negated`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Lit(u32);

impl Lit {
    pub fn new(var: Var, negated: bool) -> Lit {
        Lit(var.0 << 1 | negated as u32)
    }

    pub fn var(self) -> Var {
        Var(self.0 >> 1)
    }

    pub fn is_negated(self) -> bool {
        self.0 & 1 == 1
    }

    /// The packed encoding, `2 * var + negated`.
    pub fn code(self) -> u32 {
        self.0
    }

    /// Signed DIMACS form.
    pub fn to_dimacs(self) -> i64 {
        let v = self.var().0 as i64;
        if self.is_negated() {
            -v
        } else {
            v
        }
    }

    fn idx(self) -> usize {
        self.0 as usize
    }
}

impl Not for Lit {
    type Output = Lit;

    fn not(self) -> Lit {
        Lit(self.0 ^ 1)
    }
}

impl fmt::Display for Lit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_dimacs())
    }
}

/// Verdict of a query.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveResult {
    /// A model is available through [`Solver::model_value`].
    Sat,
    Unsat,
    /// A conflict budget or deadline was exhausted first.
    Unknown,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SolverError {
    #[error("no model available: last query was not satisfiable")]
    NoModel,
    #[error("variable {0} was never allocated")]
    UnknownVar(u32),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum LBool {
    True,
    False,
    Undef,
}

impl LBool {
    fn from_bool(b: bool) -> LBool {
        if b {
            LBool::True
        } else {
            LBool::False
        }
    }
}

type ClauseRef = u32;

#[derive(Debug, Clone)]
struct Clause {
    lits: Vec<Lit>,
    learnt: bool,
    activity: f64,
}

#[derive(Debug, Clone, Copy)]
struct Watcher {
    cref: ClauseRef,
    blocker: Lit,
}

/// Binary max-heap over variables ordered by activity.
#[derive(Debug, Default)]
struct VarHeap {
    heap: Vec<u32>,
    // position + 1 of each var in `heap`, 0 when absent
    pos: Vec<usize>,
}

impl VarHeap {
    fn grow(&mut self, nvars: usize) {
        if self.pos.len() < nvars + 1 {
            self.pos.resize(nvars + 1, 0);
        }
    }

    fn contains(&self, v: u32) -> bool {
        self.pos[v as usize] != 0
    }

    fn is_empty(&self) -> bool {
        self.heap.is_empty()
    }

    fn insert(&mut self, v: u32, act: &[f64]) {
        if self.contains(v) {
            return;
        }
        self.heap.push(v);
        let i = self.heap.len() - 1;
        self.pos[v as usize] = i + 1;
        self.sift_up(i, act);
    }

    fn bumped(&mut self, v: u32, act: &[f64]) {
        if self.contains(v) {
            let i = self.pos[v as usize] - 1;
            self.sift_up(i, act);
        }
    }

    fn pop(&mut self, act: &[f64]) -> Option<u32> {
        if self.heap.is_empty() {
            return None;
        }
        let top = self.heap.swap_remove(0);
        self.pos[top as usize] = 0;
        if !self.heap.is_empty() {
            self.pos[self.heap[0] as usize] = 1;
            self.sift_down(0, act);
        }
        Some(top)
    }

    fn sift_up(&mut self, mut i: usize, act: &[f64]) {
        let v = self.heap[i];
        while i > 0 {
            let parent = (i - 1) / 2;
            let p = self.heap[parent];
            if act[p as usize] >= act[v as usize] {
                break;
            }
            self.heap[i] = p;
            self.pos[p as usize] = i + 1;
            i = parent;
        }
        self.heap[i] = v;
        self.pos[v as usize] = i + 1;
    }

    fn sift_down(&mut self, mut i: usize, act: &[f64]) {
        let v = self.heap[i];
        let n = self.heap.len();
        loop {
            let l = 2 * i + 1;
            if l >= n {
                break;
            }
            let r = l + 1;
            let c = if r < n && act[self.heap[r] as usize] > act[self.heap[l] as usize] {
                r
            } else {
                l
            };
            let cv = self.heap[c];
            if act[cv as usize] <= act[v as usize] {
                break;
            }
            self.heap[i] = cv;
            self.pos[cv as usize] = i + 1;
            i = c;
        }
        self.heap[i] = v;
        self.pos[v as usize] = i + 1;
    }
}

/// Cumulative solver counters.
#[derive(Debug, Default, Clone, Copy, PartialEq, Eq)]
pub struct SolverStats {
    pub solves: u64,
    pub conflicts: u64,
    pub decisions: u64,
    pub propagations: u64,
}

const VAR_DECAY: f64 = 0.95;
const CLAUSE_DECAY: f64 = 0.999;
const RESTART_FIRST: f64 = 100.0;
const RESTART_GROWTH: f64 = 1.5;

enum SearchOutcome {
    Sat,
    Unsat,
    Restart,
    Budget,
}

/// Incremental CDCL solver.
#[derive(Debug)]
pub struct Solver {
    num_vars: u32,
    ok: bool,
    clauses: Vec<Option<Clause>>,
    free_slots: Vec<ClauseRef>,
    learnts: Vec<ClauseRef>,
    original: Vec<Vec<Lit>>,
    watches: Vec<Vec<Watcher>>,

    assigns: Vec<LBool>,
    level: Vec<u32>,
    reason: Vec<Option<ClauseRef>>,
    phase: Vec<bool>,
    seen: Vec<bool>,
    in_use: Vec<bool>,
    activity: Vec<f64>,
    heap: VarHeap,

    trail: Vec<Lit>,
    trail_lim: Vec<usize>,
    qhead: usize,

    var_inc: f64,
    cla_inc: f64,
    max_learnts: f64,

    model: Option<Vec<bool>>,
    deadline: Option<Instant>,
    stats: SolverStats,
}

impl Default for Solver {
    fn default() -> Self {
        Self::new()
    }
}

impl Solver {
    pub fn new() -> Solver {
        let mut s = Solver {
            num_vars: 0,
            ok: true,
            clauses: Vec::new(),
            free_slots: Vec::new(),
            learnts: Vec::new(),
            original: Vec::new(),
            watches: vec![Vec::new(), Vec::new()],
            assigns: vec![LBool::Undef],
            level: vec![0],
            reason: vec![None],
            phase: vec![false],
            seen: vec![false],
            in_use: vec![false],
            activity: vec![0.0],
            heap: VarHeap::default(),
            trail: Vec::new(),
            trail_lim: Vec::new(),
            qhead: 0,
            var_inc: 1.0,
            cla_inc: 1.0,
            max_learnts: 1000.0,
            model: None,
            deadline: None,
            stats: SolverStats::default(),
        };
        s.heap.grow(0);
        s
    }

    /// Allocates a fresh variable and returns its positive literal.
    pub fn new_var(&mut self) -> Lit {
        self.num_vars += 1;
        let v = self.num_vars;
        self.assigns.push(LBool::Undef);
        self.level.push(0);
        self.reason.push(None);
        self.phase.push(false);
        self.seen.push(false);
        self.in_use.push(false);
        self.activity.push(0.0);
        self.watches.push(Vec::new());
        self.watches.push(Vec::new());
        self.heap.grow(v as usize);
        Var(v).positive()
    }

    pub fn num_vars(&self) -> u32 {
        self.num_vars
    }

    /// Number of clauses handed to [`Solver::add_clause`].
    pub fn num_clauses(&self) -> usize {
        self.original.len()
    }

    pub fn num_learnts(&self) -> usize {
        self.learnts.len()
    }

    pub fn stats(&self) -> SolverStats {
        self.stats
    }

    /// False once the clause database is unsatisfiable on its own.
    pub fn is_ok(&self) -> bool {
        self.ok
    }

    /// Queries running past `deadline` return [`SolveResult::Unknown`].
    pub fn set_deadline(&mut self, deadline: Option<Instant>) {
        self.deadline = deadline;
    }

    fn check_lit(&self, l: Lit) -> Result<(), SolverError> {
        let v = l.var().0;
        if v == 0 || v > self.num_vars {
            Err(SolverError::UnknownVar(v))
        } else {
            Ok(())
        }
    }

    fn value(&self, l: Lit) -> LBool {
        match self.assigns[l.var().0 as usize] {
            LBool::Undef => LBool::Undef,
            LBool::True => LBool::from_bool(!l.is_negated()),
            LBool::False => LBool::from_bool(l.is_negated()),
        }
    }

    fn decision_level(&self) -> usize {
        self.trail_lim.len()
    }

    fn mark_in_use(&mut self, v: Var) {
        let i = v.0 as usize;
        if !self.in_use[i] {
            self.in_use[i] = true;
            if self.assigns[i] == LBool::Undef {
                self.heap.insert(v.0, &self.activity);
            }
        }
    }

    /// Adds a permanent clause. An empty clause (or one falsified at the top
    /// level) makes the solver permanently unsatisfiable.
    pub fn add_clause(&mut self, lits: &[Lit]) -> Result<(), SolverError> {
        for &l in lits {
            self.check_lit(l)?;
        }
        self.original.push(lits.to_vec());
        self.model = None;
        if !self.ok {
            return Ok(());
        }
        self.cancel_until(0);

        let mut c: Vec<Lit> = lits.to_vec();
        c.sort_unstable();
        c.dedup();
        for w in c.windows(2) {
            if w[0] == !w[1] {
                return Ok(());
            }
        }
        for &l in &c {
            self.mark_in_use(l.var());
        }
        if c.iter().any(|&l| self.value(l) == LBool::True) {
            return Ok(());
        }
        c.retain(|&l| self.value(l) != LBool::False);

        match c.len() {
            0 => self.ok = false,
            1 => {
                self.enqueue(c[0], None);
                if self.propagate().is_some() {
                    self.ok = false;
                }
            }
            _ => {
                let cref = self.alloc_clause(c, false);
                self.attach(cref);
            }
        }
        Ok(())
    }

    fn alloc_clause(&mut self, lits: Vec<Lit>, learnt: bool) -> ClauseRef {
        let clause = Clause {
            lits,
            learnt,
            activity: 0.0,
        };
        if let Some(slot) = self.free_slots.pop() {
            self.clauses[slot as usize] = Some(clause);
            slot
        } else {
            self.clauses.push(Some(clause));
            (self.clauses.len() - 1) as ClauseRef
        }
    }

    fn clause(&self, cref: ClauseRef) -> &Clause {
        self.clauses[cref as usize].as_ref().expect("live clause")
    }

    fn attach(&mut self, cref: ClauseRef) {
        let (l0, l1) = {
            let c = self.clause(cref);
            (c.lits[0], c.lits[1])
        };
        self.watches[(!l0).idx()].push(Watcher { cref, blocker: l1 });
        self.watches[(!l1).idx()].push(Watcher { cref, blocker: l0 });
    }

    fn enqueue(&mut self, l: Lit, reason: Option<ClauseRef>) {
        let v = l.var().0 as usize;
        debug_assert_eq!(self.assigns[v], LBool::Undef);
        self.assigns[v] = LBool::from_bool(!l.is_negated());
        self.level[v] = self.decision_level() as u32;
        self.reason[v] = reason;
        self.trail.push(l);
    }

    fn propagate(&mut self) -> Option<ClauseRef> {
        let mut conflict = None;
        while self.qhead < self.trail.len() {
            let p = self.trail[self.qhead];
            self.qhead += 1;
            self.stats.propagations += 1;
            let false_lit = !p;
            let mut ws = std::mem::take(&mut self.watches[p.idx()]);
            let mut i = 0;
            let mut j = 0;
            while i < ws.len() {
                let w = ws[i];
                i += 1;
                if self.value(w.blocker) == LBool::True {
                    ws[j] = w;
                    j += 1;
                    continue;
                }
                let cref = w.cref;
                let clause = self.clauses[cref as usize].as_mut().expect("watched clause is live");
                if clause.lits[0] == false_lit {
                    clause.lits.swap(0, 1);
                }
                let first = clause.lits[0];
                let first_val = match self.assigns[first.var().0 as usize] {
                    LBool::Undef => LBool::Undef,
                    LBool::True => LBool::from_bool(!first.is_negated()),
                    LBool::False => LBool::from_bool(first.is_negated()),
                };
                if first != w.blocker && first_val == LBool::True {
                    ws[j] = Watcher { cref, blocker: first };
                    j += 1;
                    continue;
                }

                let mut moved = false;
                for k in 2..clause.lits.len() {
                    let l = clause.lits[k];
                    let val = match self.assigns[l.var().0 as usize] {
                        LBool::Undef => LBool::Undef,
                        LBool::True => LBool::from_bool(!l.is_negated()),
                        LBool::False => LBool::from_bool(l.is_negated()),
                    };
                    if val != LBool::False {
                        clause.lits.swap(1, k);
                        self.watches[(!l).idx()].push(Watcher { cref, blocker: first });
                        moved = true;
                        break;
                    }
                }
                if moved {
                    continue;
                }

                ws[j] = Watcher { cref, blocker: first };
                j += 1;
                if first_val == LBool::False {
                    conflict = Some(cref);
                    while i < ws.len() {
                        ws[j] = ws[i];
                        i += 1;
                        j += 1;
                    }
                } else {
                    self.enqueue(first, Some(cref));
                }
            }
            ws.truncate(j);
            self.watches[p.idx()] = ws;
            if conflict.is_some() {
                self.qhead = self.trail.len();
                break;
            }
        }
        conflict
    }

    fn bump_var(&mut self, v: u32) {
        self.activity[v as usize] += self.var_inc;
        if self.activity[v as usize] > 1e100 {
            for a in self.activity.iter_mut() {
                *a *= 1e-100;
            }
            self.var_inc *= 1e-100;
        }
        self.heap.bumped(v, &self.activity);
    }

    fn bump_clause(&mut self, cref: ClauseRef) {
        let inc = self.cla_inc;
        let c = self.clauses[cref as usize].as_mut().expect("live clause");
        if !c.learnt {
            return;
        }
        c.activity += inc;
        if c.activity > 1e20 {
            for &r in &self.learnts {
                if let Some(c) = self.clauses[r as usize].as_mut() {
                    c.activity *= 1e-20;
                }
            }
            self.cla_inc *= 1e-20;
        }
    }

    fn analyze(&mut self, mut confl: ClauseRef) -> (Vec<Lit>, usize) {
        let mut learnt: Vec<Lit> = vec![Lit(0)];
        let mut path_count = 0usize;
        let mut p: Option<Lit> = None;
        let mut index = self.trail.len();
        let current = self.decision_level() as u32;

        loop {
            self.bump_clause(confl);
            let lits = self.clause(confl).lits.clone();
            let start = if p.is_some() { 1 } else { 0 };
            for &q in &lits[start..] {
                let v = q.var().0 as usize;
                if !self.seen[v] && self.level[v] > 0 {
                    self.bump_var(v as u32);
                    self.seen[v] = true;
                    if self.level[v] >= current {
                        path_count += 1;
                    } else {
                        learnt.push(q);
                    }
                }
            }
            loop {
                index -= 1;
                if self.seen[self.trail[index].var().0 as usize] {
                    break;
                }
            }
            let pl = self.trail[index];
            p = Some(pl);
            self.seen[pl.var().0 as usize] = false;
            path_count -= 1;
            if path_count == 0 {
                break;
            }
            confl = self.reason[pl.var().0 as usize].expect("implied literal has a reason");
        }
        learnt[0] = !p.expect("conflict analysis visits at least one literal");

        // local minimization: drop literals implied by other learnt literals
        let mut kept = vec![learnt[0]];
        for &l in &learnt[1..] {
            let v = l.var().0 as usize;
            let redundant = match self.reason[v] {
                None => false,
                Some(r) => self.clause(r).lits[1..].iter().all(|q| {
                    let qv = q.var().0 as usize;
                    self.seen[qv] || self.level[qv] == 0
                }),
            };
            if !redundant {
                kept.push(l);
            }
        }
        for &l in &learnt[1..] {
            self.seen[l.var().0 as usize] = false;
        }
        let mut learnt = kept;

        let bt_level = if learnt.len() == 1 {
            0
        } else {
            let mut max_i = 1;
            for i in 2..learnt.len() {
                if self.level[learnt[i].var().0 as usize] > self.level[learnt[max_i].var().0 as usize] {
                    max_i = i;
                }
            }
            learnt.swap(1, max_i);
            self.level[learnt[1].var().0 as usize] as usize
        };
        (learnt, bt_level)
    }

    fn cancel_until(&mut self, level: usize) {
        if self.decision_level() <= level {
            return;
        }
        let lim = self.trail_lim[level];
        for i in (lim..self.trail.len()).rev() {
            let l = self.trail[i];
            let v = l.var().0 as usize;
            self.assigns[v] = LBool::Undef;
            self.reason[v] = None;
            self.phase[v] = !l.is_negated();
            if self.in_use[v] {
                self.heap.insert(v as u32, &self.activity);
            }
        }
        self.trail.truncate(lim);
        self.trail_lim.truncate(level);
        self.qhead = lim;
    }

    fn pick_branch(&mut self) -> Option<Lit> {
        while !self.heap.is_empty() {
            let v = self.heap.pop(&self.activity)?;
            if self.assigns[v as usize] == LBool::Undef {
                return Some(Var(v).lit(!self.phase[v as usize]));
            }
        }
        None
    }

    fn locked(&self, cref: ClauseRef) -> bool {
        let l0 = self.clause(cref).lits[0];
        self.reason[l0.var().0 as usize] == Some(cref) && self.value(l0) == LBool::True
    }

    fn reduce_db(&mut self) {
        let mut refs = std::mem::take(&mut self.learnts);
        refs.sort_by(|&a, &b| {
            let (ca, cb) = (self.clause(a), self.clause(b));
            ca.activity
                .partial_cmp(&cb.activity)
                .unwrap_or(std::cmp::Ordering::Equal)
                .then(a.cmp(&b))
        });
        let half = refs.len() / 2;
        let mut kept = Vec::with_capacity(refs.len());
        let mut removed = false;
        for (i, &cref) in refs.iter().enumerate() {
            if i < half && self.clause(cref).lits.len() > 2 && !self.locked(cref) {
                self.clauses[cref as usize] = None;
                self.free_slots.push(cref);
                removed = true;
            } else {
                kept.push(cref);
            }
        }
        self.learnts = kept;
        if removed {
            let clauses = &self.clauses;
            for ws in self.watches.iter_mut() {
                ws.retain(|w| clauses[w.cref as usize].is_some());
            }
        }
    }

    fn search(&mut self, conflict_budget: u64, assumptions: &[Lit], limit: Option<u64>, start: u64) -> SearchOutcome {
        let mut conflicts_here = 0u64;
        loop {
            if let Some(confl) = self.propagate() {
                self.stats.conflicts += 1;
                conflicts_here += 1;
                if self.decision_level() == 0 {
                    self.ok = false;
                    return SearchOutcome::Unsat;
                }
                let (learnt, bt) = self.analyze(confl);
                self.cancel_until(bt);
                if learnt.len() == 1 {
                    self.enqueue(learnt[0], None);
                } else {
                    let cref = self.alloc_clause(learnt, true);
                    self.attach(cref);
                    self.bump_clause(cref);
                    self.learnts.push(cref);
                    let l0 = self.clause(cref).lits[0];
                    self.enqueue(l0, Some(cref));
                }
                self.var_inc /= VAR_DECAY;
                self.cla_inc /= CLAUSE_DECAY;
            } else {
                if conflicts_here >= conflict_budget {
                    self.cancel_until(0);
                    return SearchOutcome::Restart;
                }
                if let Some(limit) = limit {
                    if self.stats.conflicts - start >= limit {
                        self.cancel_until(0);
                        return SearchOutcome::Budget;
                    }
                }
                if conflicts_here > 0 && conflicts_here.is_multiple_of(64) {
                    if let Some(d) = self.deadline {
                        if Instant::now() >= d {
                            self.cancel_until(0);
                            return SearchOutcome::Budget;
                        }
                    }
                }
                let assigned = self.trail.len();
                if self.learnts.len() as f64 - assigned as f64 >= self.max_learnts {
                    self.reduce_db();
                }

                let mut next = None;
                while self.decision_level() < assumptions.len() {
                    let a = assumptions[self.decision_level()];
                    match self.value(a) {
                        LBool::True => self.trail_lim.push(self.trail.len()),
                        LBool::False => {
                            self.cancel_until(0);
                            return SearchOutcome::Unsat;
                        }
                        LBool::Undef => {
                            next = Some(a);
                            break;
                        }
                    }
                }
                let next = match next {
                    Some(l) => l,
                    None => {
                        self.stats.decisions += 1;
                        match self.pick_branch() {
                            Some(l) => l,
                            None => return SearchOutcome::Sat,
                        }
                    }
                };
                self.trail_lim.push(self.trail.len());
                self.enqueue(next, None);
            }
        }
    }

    /// Solves under `assumptions`. Learned clauses persist across calls.
    pub fn solve(&mut self, assumptions: &[Lit]) -> SolveResult {
        self.solve_limited(assumptions, None)
    }

    /// Like [`Solver::solve`], but gives up with [`SolveResult::Unknown`]
    /// after `conflict_limit` conflicts.
    pub fn solve_limited(&mut self, assumptions: &[Lit], conflict_limit: Option<u64>) -> SolveResult {
        self.stats.solves += 1;
        self.model = None;
        if !self.ok {
            return SolveResult::Unsat;
        }
        for &a in assumptions {
            assert!(self.check_lit(a).is_ok(), "assumption on unallocated variable {}", a.var().0);
        }
        self.cancel_until(0);
        let start = self.stats.conflicts;
        let mut budget = RESTART_FIRST;
        self.max_learnts = self.max_learnts.max(self.original.len() as f64 / 3.0);
        loop {
            match self.search(budget as u64, assumptions, conflict_limit, start) {
                SearchOutcome::Sat => {
                    let model = (0..=self.num_vars as usize)
                        .map(|v| self.assigns[v] == LBool::True)
                        .collect();
                    self.model = Some(model);
                    self.cancel_until(0);
                    return SolveResult::Sat;
                }
                SearchOutcome::Unsat => {
                    self.cancel_until(0);
                    return SolveResult::Unsat;
                }
                SearchOutcome::Budget => return SolveResult::Unknown,
                SearchOutcome::Restart => {
                    budget *= RESTART_GROWTH;
                    self.max_learnts *= 1.1;
                }
            }
        }
    }

    /// Value of `lit` in the model of the last satisfiable query.
    /// Variables never touched by propagation or decisions read as false.
    pub fn model_value(&self, lit: Lit) -> Result<bool, SolverError> {
        self.check_lit(lit)?;
        let model = self.model.as_ref().ok_or(SolverError::NoModel)?;
        let v = model.get(lit.var().0 as usize).copied().unwrap_or(false);
        Ok(v != lit.is_negated())
    }

    /// True when a model from the last query is available.
    pub fn has_model(&self) -> bool {
        self.model.is_some()
    }

    /// Every clause passed to [`Solver::add_clause`], in insertion order.
    pub fn original_clauses(&self) -> &[Vec<Lit>] {
        &self.original
    }

    /// Writes the permanent clause database in DIMACS CNF.
    pub fn write_dimacs<W: Write>(&self, out: &mut W) -> io::Result<()> {
        writeln!(out, "p cnf {} {}", self.num_vars, self.original.len())?;
        for clause in &self.original {
            for l in clause {
                write!(out, "{} ", l.to_dimacs())?;
            }
            writeln!(out, "0")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lits(s: &mut Solver, n: usize) -> Vec<Lit> {
        (0..n).map(|_| s.new_var()).collect()
    }

    #[test]
    fn sequential_allocation() {
        let mut s = Solver::new();
        let a = s.new_var();
        assert_eq!(a.var().index(), 1);
        let rest = lits(&mut s, 9);
        let mut all: Vec<u32> = std::iter::once(a).chain(rest).map(|l| l.var().index()).collect();
        all.dedup();
        assert_eq!(all, (1..=10).collect::<Vec<_>>());
        s.add_clause(&[a]).unwrap();
        assert_eq!(s.new_var().var().index(), 11);
    }

    #[test]
    fn unit_and_negation_is_unsat() {
        let mut s = Solver::new();
        let a = s.new_var();
        s.add_clause(&[a]).unwrap();
        s.add_clause(&[!a]).unwrap();
        assert_eq!(s.solve(&[]), SolveResult::Unsat);
        assert!(!s.is_ok());
    }

    #[test]
    fn assumption_forces_other_literal() {
        let mut s = Solver::new();
        let a = s.new_var();
        let b = s.new_var();
        s.add_clause(&[a, b]).unwrap();
        assert_eq!(s.solve(&[!a]), SolveResult::Sat);
        assert!(s.model_value(b).unwrap());
        assert!(!s.model_value(a).unwrap());
    }

    #[test]
    fn empty_clause_poisons_solver() {
        let mut s = Solver::new();
        let a = s.new_var();
        s.add_clause(&[]).unwrap();
        assert_eq!(s.solve(&[a]), SolveResult::Unsat);
        assert_eq!(s.solve(&[]), SolveResult::Unsat);
    }

    #[test]
    fn no_clauses_assumption_sat() {
        let mut s = Solver::new();
        let x = s.new_var();
        assert_eq!(s.solve(&[x]), SolveResult::Sat);
        assert!(s.model_value(x).unwrap());
        assert!(!s.model_value(!x).unwrap());
    }

    #[test]
    fn and_gate_semantics() {
        let mut s = Solver::new();
        let a = s.new_var();
        let b = s.new_var();
        let g = s.new_var();
        s.add_clause(&[!g, a]).unwrap();
        s.add_clause(&[!g, b]).unwrap();
        s.add_clause(&[g, !a, !b]).unwrap();
        assert_eq!(s.solve(&[g, !a]), SolveResult::Unsat);
        // a failed assumption set does not poison later queries
        assert!(s.is_ok());
        assert_eq!(s.solve(&[g]), SolveResult::Sat);
        assert!(s.model_value(a).unwrap() && s.model_value(b).unwrap());
    }

    #[test]
    fn model_value_errors() {
        let mut s = Solver::new();
        let a = s.new_var();
        assert_eq!(s.model_value(a), Err(SolverError::NoModel));
        s.add_clause(&[a]).unwrap();
        assert_eq!(s.solve(&[!a]), SolveResult::Unsat);
        assert_eq!(s.model_value(a), Err(SolverError::NoModel));
        assert_eq!(s.model_value(Var(7).positive()), Err(SolverError::UnknownVar(7)));
    }

    #[test]
    fn unconstrained_vars_default_false() {
        let mut s = Solver::new();
        let a = s.new_var();
        let free = s.new_var();
        s.add_clause(&[a]).unwrap();
        assert_eq!(s.solve(&[]), SolveResult::Sat);
        assert!(!s.model_value(free).unwrap());
    }

    #[test]
    fn conflict_budget_reports_unknown() {
        // PHP(7,6) needs far more than a single conflict
        let mut s = Solver::new();
        let (p, h) = (7, 6);
        let x: Vec<Vec<Lit>> = (0..p).map(|_| lits(&mut s, h)).collect();
        for row in &x {
            s.add_clause(row).unwrap();
        }
        for j in 0..h {
            for a in 0..p {
                for b in a + 1..p {
                    s.add_clause(&[!x[a][j], !x[b][j]]).unwrap();
                }
            }
        }
        assert_eq!(s.solve_limited(&[], Some(1)), SolveResult::Unknown);
        assert_eq!(s.solve(&[]), SolveResult::Unsat);
    }

    #[test]
    fn dimacs_dump() {
        let mut s = Solver::new();
        let a = s.new_var();
        let b = s.new_var();
        s.add_clause(&[a, !b]).unwrap();
        let mut out = Vec::new();
        s.write_dimacs(&mut out).unwrap();
        assert_eq!(String::from_utf8(out).unwrap(), "p cnf 2 1\n1 -2 0\n");
    }
}
