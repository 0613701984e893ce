//! Conflict-driven clause learning over a clause translation of a ground
//! program. The translation (see `translate`) consists of completion
//! clauses, cardinality constraints for choice-rule bounds, and positive
//! dependency components for unfounded-set detection, so every total
//! assignment accepted here is a stable model and vice versa.
//!
//! The solver is incremental: integrity constraints and choice rules over
//! fresh atoms can be added between calls, and learned clauses, activities,
//! and saved phases persist across calls.

mod cardinality;
mod translate;
mod unfounded;

pub use translate::{check_head_cycle_free, translate, TranslateError, TranslateOptions};

use crate::program::{AtomId, AtomTable, Interpretation, Literal};
use std::collections::{BTreeSet, HashMap};
use std::time::Instant;
use thiserror::Error;

pub(crate) type Var = usize;

/// Solver literal: variable index and sign packed into one word.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub(crate) struct SLit(u32);

impl SLit {
    pub(crate) fn new(v: Var, negated: bool) -> Self {
        SLit(((v as u32) << 1) | negated as u32)
    }
    pub(crate) fn var(self) -> Var {
        (self.0 >> 1) as usize
    }
    pub(crate) fn negated(self) -> bool {
        self.0 & 1 == 1
    }
    pub(crate) fn complement(self) -> Self {
        SLit(self.0 ^ 1)
    }
    pub(crate) fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub(crate) enum LBool {
    True,
    False,
    Undef,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub(crate) enum Reason {
    None,
    Clause(u32),
    Card(u32),
}

#[derive(Clone, Copy, Debug)]
pub(crate) enum Conflict {
    Clause(u32),
    Card(u32),
}

#[derive(Debug)]
pub(crate) struct Clause {
    pub(crate) lits: Vec<SLit>,
    pub(crate) learnt: bool,
    pub(crate) deleted: bool,
}

#[derive(Clone, Copy, Debug)]
struct Watcher {
    clause: u32,
    blocker: SLit,
}

/// Outcome of one solver call: a stable model of the current program that
/// satisfies the assumptions, or a subset of the assumptions that cannot be
/// jointly satisfied. An empty core means the program itself has no stable
/// model, independent of any assumptions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SolveResult {
    Model(Interpretation),
    Core(BTreeSet<Literal>),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SolveError {
    #[error("deadline exceeded")]
    Timeout,
    #[error("literal refers to an atom the solver does not know")]
    UnknownAtom,
    #[error("atom '{0}' is not free; only fresh choice atoms may appear positively in an added choice rule")]
    AtomNotFree(String),
}

/// Cumulative counters; all deterministic for a fixed program and seed.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SolverStats {
    pub solve_calls: u64,
    pub decisions: u64,
    pub propagations: u64,
    pub conflicts: u64,
    pub restarts: u64,
    pub learned_total: u64,
    pub unfounded_sets: u64,
    pub peak_trail: usize,
}

enum MappedLit {
    AlwaysTrue,
    AlwaysFalse,
    Lit(SLit),
}

pub struct CdclSolver {
    // Clause database and two-literal watches.
    clauses: Vec<Clause>,
    watches: Vec<Vec<Watcher>>,
    live_learnt: usize,
    learnt_limit: usize,
    unit_loop: HashMap<SLit, u32>,

    // Cardinality constraints (choice-rule bounds), counter-based.
    pub(crate) cards: Vec<cardinality::CardConstraint>,
    pub(crate) card_occ: Vec<Vec<u32>>,

    // Assignment and trail.
    assigns: Vec<LBool>,
    level: Vec<u32>,
    reason: Vec<Reason>,
    trail_pos: Vec<u32>,
    trail: Vec<SLit>,
    trail_lim: Vec<usize>,
    qhead: usize,

    // Branching state.
    activity: Vec<f64>,
    var_inc: f64,
    phase: Vec<bool>,
    prefs: Vec<SLit>,

    // Atom bookkeeping. The solver owns a copy of the atom table so it can
    // mint fresh atoms for incrementally added choice rules.
    atoms: AtomTable,
    atom_of_var: Vec<Option<AtomId>>,
    var_of_atom: Vec<Option<Var>>,
    pub(crate) choice_var: Vec<bool>,
    pub(crate) fact_var: Vec<bool>,
    body_def: Vec<Option<Vec<SLit>>>,
    pub(crate) body_map: HashMap<Vec<SLit>, SLit>,

    // Positive-recursion components for unfounded-set detection.
    pub(crate) sccs: Vec<unfounded::SccData>,
    pub(crate) atom_rules: Vec<Vec<(SLit, Vec<AtomId>)>>,

    // Search scratch.
    seen: Vec<bool>,
    assumptions: Vec<(Literal, SLit)>,

    pub(crate) ok: bool,
    seed: u64,
    deadline: Option<Instant>,
    stats: SolverStats,
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = x;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

impl CdclSolver {
    pub(crate) fn new_empty(atoms: AtomTable, seed: u64) -> Self {
        CdclSolver {
            clauses: Vec::new(),
            watches: Vec::new(),
            live_learnt: 0,
            learnt_limit: 3000,
            unit_loop: HashMap::new(),
            cards: Vec::new(),
            card_occ: Vec::new(),
            assigns: Vec::new(),
            level: Vec::new(),
            reason: Vec::new(),
            trail_pos: Vec::new(),
            trail: Vec::new(),
            trail_lim: Vec::new(),
            qhead: 0,
            activity: Vec::new(),
            var_inc: 1.0,
            phase: Vec::new(),
            prefs: Vec::new(),
            atom_rules: vec![Vec::new(); atoms.len()],
            atoms,
            atom_of_var: Vec::new(),
            var_of_atom: Vec::new(),
            choice_var: Vec::new(),
            fact_var: Vec::new(),
            body_def: Vec::new(),
            body_map: HashMap::new(),
            sccs: Vec::new(),
            seen: Vec::new(),
            assumptions: Vec::new(),
            ok: true,
            seed,
            deadline: None,
            stats: SolverStats::default(),
        }
    }

    // ----- variables and values ------------------------------------------

    pub(crate) fn new_var(&mut self, atom: Option<AtomId>, choice: bool) -> Var {
        let v = self.assigns.len();
        self.assigns.push(LBool::Undef);
        self.level.push(0);
        self.reason.push(Reason::None);
        self.trail_pos.push(0);
        let jitter = if self.seed == 0 {
            0.0
        } else {
            let h = splitmix64(self.seed ^ (v as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15));
            (h >> 11) as f64 / (1u64 << 53) as f64 * 1e-6
        };
        self.activity.push(jitter);
        self.phase.push(false);
        self.atom_of_var.push(atom);
        self.choice_var.push(choice);
        self.fact_var.push(false);
        self.body_def.push(None);
        self.seen.push(false);
        self.watches.push(Vec::new());
        self.watches.push(Vec::new());
        self.card_occ.push(Vec::new());
        self.card_occ.push(Vec::new());
        if let Some(a) = atom {
            if self.var_of_atom.len() <= a.index() {
                self.var_of_atom.resize(a.index() + 1, None);
            }
            self.var_of_atom[a.index()] = Some(v);
        }
        v
    }

    pub(crate) fn num_vars(&self) -> usize {
        self.assigns.len()
    }

    pub(crate) fn value(&self, l: SLit) -> LBool {
        match self.assigns[l.var()] {
            LBool::Undef => LBool::Undef,
            LBool::True => {
                if l.negated() {
                    LBool::False
                } else {
                    LBool::True
                }
            }
            LBool::False => {
                if l.negated() {
                    LBool::True
                } else {
                    LBool::False
                }
            }
        }
    }

    pub(crate) fn slit(&self, l: &Literal) -> SLit {
        debug_assert!(!l.atom.is_false_atom());
        SLit::new(
            self.var_of_atom[l.atom.index()].expect("atom has a solver variable"),
            l.negated,
        )
    }

    fn map_literal(&self, l: &Literal) -> Result<MappedLit, SolveError> {
        if l.atom.is_false_atom() {
            return Ok(if l.negated {
                MappedLit::AlwaysTrue
            } else {
                MappedLit::AlwaysFalse
            });
        }
        match self.var_of_atom.get(l.atom.index()).copied().flatten() {
            Some(v) => Ok(MappedLit::Lit(SLit::new(v, l.negated))),
            None => Err(SolveError::UnknownAtom),
        }
    }

    fn literal_of(&self, s: SLit) -> Literal {
        let a = self.atom_of_var[s.var()].expect("assumption variables name atoms");
        Literal {
            atom: a,
            negated: s.negated(),
        }
    }

    // ----- trail ----------------------------------------------------------

    pub(crate) fn decision_level(&self) -> usize {
        self.trail_lim.len()
    }

    fn new_level(&mut self) {
        self.trail_lim.push(self.trail.len());
    }

    pub(crate) fn assign(&mut self, p: SLit, r: Reason) {
        debug_assert_eq!(self.value(p), LBool::Undef);
        let v = p.var();
        self.assigns[v] = if p.negated() {
            LBool::False
        } else {
            LBool::True
        };
        self.level[v] = self.decision_level() as u32;
        self.reason[v] = r;
        self.trail_pos[v] = self.trail.len() as u32;
        self.trail.push(p);
        if self.trail.len() > self.stats.peak_trail {
            self.stats.peak_trail = self.trail.len();
        }
        // Keep cardinality counters in sync with the trail.
        let idx = p.index();
        for i in 0..self.card_occ[idx].len() {
            let ci = self.card_occ[idx][i] as usize;
            self.cards[ci].num_true += 1;
        }
        let cidx = p.complement().index();
        for i in 0..self.card_occ[cidx].len() {
            let ci = self.card_occ[cidx][i] as usize;
            self.cards[ci].num_false += 1;
        }
    }

    pub(crate) fn cancel_until(&mut self, lvl: usize) {
        if self.decision_level() <= lvl {
            return;
        }
        let bound = self.trail_lim[lvl];
        for i in (bound..self.trail.len()).rev() {
            let p = self.trail[i];
            let v = p.var();
            self.phase[v] = !p.negated();
            self.assigns[v] = LBool::Undef;
            self.reason[v] = Reason::None;
            let idx = p.index();
            for k in 0..self.card_occ[idx].len() {
                let ci = self.card_occ[idx][k] as usize;
                self.cards[ci].num_true -= 1;
            }
            let cidx = p.complement().index();
            for k in 0..self.card_occ[cidx].len() {
                let ci = self.card_occ[cidx][k] as usize;
                self.cards[ci].num_false -= 1;
            }
        }
        self.trail.truncate(bound);
        self.trail_lim.truncate(lvl);
        self.qhead = bound;
    }

    // ----- clauses --------------------------------------------------------

    fn attach(&mut self, idx: u32) {
        let (l0, l1) = {
            let c = &self.clauses[idx as usize];
            (c.lits[0], c.lits[1])
        };
        self.watches[l0.index()].push(Watcher {
            clause: idx,
            blocker: l1,
        });
        self.watches[l1.index()].push(Watcher {
            clause: idx,
            blocker: l0,
        });
    }

    /// Adds a clause at decision level 0, simplifying against the current
    /// root assignment. Sets `ok = false` on an immediate contradiction.
    pub(crate) fn add_root_clause(&mut self, mut lits: Vec<SLit>) {
        debug_assert_eq!(self.decision_level(), 0);
        if !self.ok {
            return;
        }
        lits.sort_unstable();
        lits.dedup();
        // Tautology: adjacent sorted literals of one variable with both signs.
        if lits.windows(2).any(|w| w[0].var() == w[1].var()) {
            return;
        }
        lits.retain(|&l| self.value(l) != LBool::False);
        if lits.iter().any(|&l| self.value(l) == LBool::True) {
            return;
        }
        match lits.len() {
            0 => self.ok = false,
            1 => self.assign(lits[0], Reason::None),
            _ => {
                let idx = self.clauses.len() as u32;
                self.clauses.push(Clause {
                    lits,
                    learnt: false,
                    deleted: false,
                });
                self.attach(idx);
            }
        }
    }

    /// Installs a learnt clause whose literals are already ordered for
    /// attachment: `lits[0]` is the asserting or conflicting literal and
    /// `lits[1]` has the highest trail position among the rest.
    pub(crate) fn add_learnt_clause(&mut self, lits: Vec<SLit>) -> u32 {
        debug_assert!(lits.len() >= 2);
        let idx = self.clauses.len() as u32;
        self.clauses.push(Clause {
            lits,
            learnt: true,
            deleted: false,
        });
        self.attach(idx);
        self.stats.learned_total += 1;
        self.live_learnt += 1;
        idx
    }

    /// One-literal clause derived from an unfounded set. It cannot carry
    /// watches, so it is recorded once and re-used as a reason.
    pub(crate) fn unit_loop_clause(&mut self, lit: SLit) -> u32 {
        if let Some(&idx) = self.unit_loop.get(&lit) {
            return idx;
        }
        let idx = self.clauses.len() as u32;
        self.clauses.push(Clause {
            lits: vec![lit],
            learnt: true,
            deleted: false,
        });
        self.stats.learned_total += 1;
        self.unit_loop.insert(lit, idx);
        idx
    }

    fn locked(&self, idx: u32) -> bool {
        let c = &self.clauses[idx as usize];
        let l0 = c.lits[0];
        self.value(l0) == LBool::True && self.reason[l0.var()] == Reason::Clause(idx)
    }

    fn maybe_reduce(&mut self) {
        if self.live_learnt <= self.learnt_limit {
            return;
        }
        let mut cands: Vec<u32> = (0..self.clauses.len() as u32)
            .filter(|&i| {
                let c = &self.clauses[i as usize];
                c.learnt && !c.deleted && c.lits.len() > 2 && !self.locked(i)
            })
            .collect();
        // Drop the longest half; ties resolved by age for determinism.
        cands.sort_by_key(|&i| (usize::MAX - self.clauses[i as usize].lits.len(), i));
        for &i in cands.iter().take(cands.len() / 2) {
            self.clauses[i as usize].deleted = true;
            self.live_learnt -= 1;
        }
        self.learnt_limit += self.learnt_limit / 5;
    }

    // ----- propagation ----------------------------------------------------

    fn propagate_units(&mut self) -> Option<Conflict> {
        while self.qhead < self.trail.len() {
            let p = self.trail[self.qhead];
            self.qhead += 1;
            self.stats.propagations += 1;
            let fl = p.complement();
            let mut ws = std::mem::take(&mut self.watches[fl.index()]);
            let mut j = 0;
            let mut i = 0;
            let mut confl = None;
            'watchers: while i < ws.len() {
                let w = ws[i];
                i += 1;
                if self.clauses[w.clause as usize].deleted {
                    continue; // drop the stale watcher
                }
                if self.value(w.blocker) == LBool::True {
                    ws[j] = w;
                    j += 1;
                    continue;
                }
                let ci = w.clause as usize;
                if self.clauses[ci].lits[0] == fl {
                    self.clauses[ci].lits.swap(0, 1);
                }
                debug_assert_eq!(self.clauses[ci].lits[1], fl);
                let first = self.clauses[ci].lits[0];
                let neww = Watcher {
                    clause: w.clause,
                    blocker: first,
                };
                if first != w.blocker && self.value(first) == LBool::True {
                    ws[j] = neww;
                    j += 1;
                    continue;
                }
                let len = self.clauses[ci].lits.len();
                for k in 2..len {
                    let lk = self.clauses[ci].lits[k];
                    if self.value(lk) != LBool::False {
                        self.clauses[ci].lits.swap(1, k);
                        self.watches[lk.index()].push(neww);
                        continue 'watchers;
                    }
                }
                // Unit or conflicting.
                ws[j] = neww;
                j += 1;
                if self.value(first) == LBool::False {
                    confl = Some(Conflict::Clause(w.clause));
                    self.qhead = self.trail.len();
                    while i < ws.len() {
                        ws[j] = ws[i];
                        j += 1;
                        i += 1;
                    }
                } else {
                    self.assign(first, Reason::Clause(w.clause));
                }
            }
            ws.truncate(j);
            self.watches[fl.index()] = ws;
            if confl.is_some() {
                return confl;
            }
            // Cardinality constraints containing the newly false literal.
            for k in 0..self.card_occ[fl.index()].len() {
                let ci = self.card_occ[fl.index()][k] as usize;
                if let Some(c) = self.check_card(ci) {
                    self.qhead = self.trail.len();
                    return Some(c);
                }
            }
        }
        None
    }

    /// Runs unit and cardinality propagation and unfounded-set detection to
    /// a joint fixpoint.
    pub(crate) fn propagate_fixpoint(&mut self) -> Option<Conflict> {
        loop {
            if let Some(c) = self.propagate_units() {
                return Some(c);
            }
            if self.sccs.is_empty() {
                return None;
            }
            match self.unfounded_check() {
                unfounded::UfOutcome::Conflict(c) => return Some(c),
                unfounded::UfOutcome::Progress => continue,
                unfounded::UfOutcome::Clean => return None,
            }
        }
    }

    // ----- conflict analysis ---------------------------------------------

    fn conflict_lits(&self, c: Conflict) -> Vec<SLit> {
        match c {
            Conflict::Clause(i) => self.clauses[i as usize].lits.clone(),
            Conflict::Card(i) => self.card_falsified_lits(i as usize),
        }
    }

    fn reason_lits(&self, v: Var) -> Vec<SLit> {
        match self.reason[v] {
            Reason::None => unreachable!("decisions carry no reason"),
            Reason::Clause(i) => self.clauses[i as usize].lits[1..].to_vec(),
            Reason::Card(i) => self.card_reason_lits(i as usize, v),
        }
    }

    fn bump(&mut self, v: Var) {
        self.activity[v] += self.var_inc;
        if self.activity[v] > 1e100 {
            for a in &mut self.activity {
                *a *= 1e-100;
            }
            self.var_inc *= 1e-100;
        }
    }

    /// First-UIP conflict analysis. Returns the learnt clause (asserting
    /// literal first, highest-level remaining literal second) and the level
    /// to backtrack to.
    fn analyze(&mut self, confl: Conflict) -> (Vec<SLit>, usize) {
        let mut learnt: Vec<SLit> = vec![SLit(0)];
        let mut counter = 0u32;
        let mut index = self.trail.len();
        let mut to_clear: Vec<Var> = Vec::new();
        let mut cur = self.conflict_lits(confl);
        let dl = self.decision_level();
        loop {
            for &q in &cur {
                let v = q.var();
                if !self.seen[v] && self.level[v] > 0 {
                    self.seen[v] = true;
                    to_clear.push(v);
                    self.bump(v);
                    if self.level[v] as usize >= dl {
                        counter += 1;
                    } else {
                        learnt.push(q);
                    }
                }
            }
            loop {
                index -= 1;
                if self.seen[self.trail[index].var()] {
                    break;
                }
            }
            let pv = self.trail[index].var();
            self.seen[pv] = false;
            counter -= 1;
            if counter == 0 {
                learnt[0] = self.trail[index].complement();
                break;
            }
            cur = self.reason_lits(pv);
        }
        for v in to_clear {
            self.seen[v] = false;
        }
        let bt = if learnt.len() == 1 {
            0
        } else {
            let mut m = 1;
            for k in 2..learnt.len() {
                if self.level[learnt[k].var()] > self.level[learnt[m].var()] {
                    m = k;
                }
            }
            learnt.swap(1, m);
            self.level[learnt[1].var()] as usize
        };
        self.var_inc /= 0.95;
        (learnt, bt)
    }

    /// Builds an unsatisfiable subset of the assumptions from the reasons
    /// for a failed assumption literal.
    fn analyze_final(&mut self, failed: SLit, failed_lit: &Literal) -> BTreeSet<Literal> {
        let mut out: BTreeSet<Literal> = [*failed_lit].into_iter().collect();
        if self.decision_level() == 0 {
            return out;
        }
        self.seen[failed.var()] = true;
        let base = self.trail_lim[0];
        for i in (base..self.trail.len()).rev() {
            let p = self.trail[i];
            let v = p.var();
            if !self.seen[v] {
                continue;
            }
            match self.reason[v] {
                Reason::None => {
                    // Decisions above the root are assumption decisions here.
                    out.insert(self.literal_of(p));
                }
                _ => {
                    for q in self.reason_lits(v) {
                        if self.level[q.var()] > 0 {
                            self.seen[q.var()] = true;
                        }
                    }
                }
            }
            self.seen[v] = false;
        }
        self.seen[failed.var()] = false;
        out
    }

    // ----- branching ------------------------------------------------------

    fn prefs_fully_assigned(&self) -> bool {
        self.prefs.iter().all(|&p| self.value(p) != LBool::Undef)
    }

    fn next_pref(&self) -> Option<SLit> {
        self.prefs
            .iter()
            .copied()
            .find(|&p| self.value(p) == LBool::Undef)
    }

    fn pick_branch(&self) -> Option<SLit> {
        let mut best: Option<Var> = None;
        for v in 0..self.num_vars() {
            if self.assigns[v] == LBool::Undef
                && best.is_none_or(|b| self.activity[v] > self.activity[b])
            {
                best = Some(v);
            }
        }
        best.map(|v| SLit::new(v, !self.phase[v]))
    }

    // ----- main search ----------------------------------------------------

    fn search(&mut self) -> Result<SolveResult, SolveError> {
        let mut restart_budget = 100u64;
        let mut conflicts_here = 0u64;
        loop {
            if let Some(d) = self.deadline {
                if Instant::now() > d {
                    return Err(SolveError::Timeout);
                }
            }
            if let Some(confl) = self.propagate_fixpoint() {
                self.stats.conflicts += 1;
                conflicts_here += 1;
                // Loop clauses may conflict using only literals assigned at
                // earlier levels; first return to the newest involved level
                // so conflict analysis sees a literal of the current level.
                let top = self
                    .conflict_lits(confl)
                    .iter()
                    .map(|l| self.level[l.var()] as usize)
                    .max()
                    .unwrap_or(0);
                if self.decision_level() == 0 || top == 0 {
                    self.ok = false;
                    return Ok(SolveResult::Core(BTreeSet::new()));
                }
                if top < self.decision_level() {
                    self.cancel_until(top);
                }
                let (learnt, bt) = self.analyze(confl);
                self.cancel_until(bt);
                if learnt.len() == 1 {
                    debug_assert_eq!(self.decision_level(), 0);
                    self.stats.learned_total += 1;
                    match self.value(learnt[0]) {
                        LBool::False => {
                            self.ok = false;
                            return Ok(SolveResult::Core(BTreeSet::new()));
                        }
                        LBool::Undef => self.assign(learnt[0], Reason::None),
                        LBool::True => {}
                    }
                } else {
                    let idx = self.add_learnt_clause(learnt);
                    let first = self.clauses[idx as usize].lits[0];
                    self.assign(first, Reason::Clause(idx));
                }
            } else {
                if conflicts_here >= restart_budget && self.prefs_fully_assigned() {
                    conflicts_here = 0;
                    restart_budget += restart_budget / 2;
                    self.stats.restarts += 1;
                    self.cancel_until(0);
                    continue;
                }
                self.maybe_reduce();
                let mut next: Option<SLit> = None;
                while self.decision_level() < self.assumptions.len() {
                    let (pl, sl) = self.assumptions[self.decision_level()];
                    match self.value(sl) {
                        LBool::True => self.new_level(), // already holds: dummy level
                        LBool::False => {
                            return Ok(SolveResult::Core(self.analyze_final(sl, &pl)));
                        }
                        LBool::Undef => {
                            next = Some(sl);
                            break;
                        }
                    }
                }
                if next.is_none() {
                    next = self.next_pref();
                }
                if next.is_none() {
                    next = self.pick_branch();
                }
                match next {
                    Some(p) => {
                        self.stats.decisions += 1;
                        self.new_level();
                        self.assign(p, Reason::None);
                    }
                    None => {
                        debug_assert!(self.total_assignment_consistent());
                        return Ok(SolveResult::Model(self.extract_model()));
                    }
                }
            }
        }
    }

    fn extract_model(&self) -> Interpretation {
        Interpretation::from_atoms((0..self.num_vars()).filter_map(|v| {
            match (self.atom_of_var[v], self.assigns[v]) {
                (Some(a), LBool::True) => Some(a),
                _ => None,
            }
        }))
    }

    fn total_assignment_consistent(&self) -> bool {
        self.assigns.iter().all(|&a| a != LBool::Undef)
            && self
                .clauses
                .iter()
                .all(|c| c.deleted || c.lits.iter().any(|&l| self.value(l) == LBool::True))
            && (0..self.cards.len()).all(|ci| self.card_satisfied(ci))
    }

    // ----- public API -----------------------------------------------------

    /// Computes a stable model of the current program consistent with
    /// `assumptions`, or an unsatisfiable subset of the assumptions.
    pub fn compute_stable_model(
        &mut self,
        assumptions: &[Literal],
    ) -> Result<SolveResult, SolveError> {
        self.stats.solve_calls += 1;
        self.cancel_until(0);
        if !self.ok {
            return Ok(SolveResult::Core(BTreeSet::new()));
        }
        self.assumptions.clear();
        for l in assumptions {
            match self.map_literal(l)? {
                MappedLit::AlwaysTrue => {}
                MappedLit::AlwaysFalse => {
                    // Assuming falsity itself: unsatisfiable on its own.
                    return Ok(SolveResult::Core([*l].into_iter().collect()));
                }
                MappedLit::Lit(s) => {
                    if !self.assumptions.iter().any(|(_, s2)| *s2 == s) {
                        self.assumptions.push((*l, s));
                    }
                }
            }
        }
        self.search()
    }

    /// Forbids the conjunction `body` in all later models. Takes effect for
    /// every subsequent call; learned clauses remain valid.
    pub fn add_integrity_constraint(&mut self, body: &[Literal]) -> Result<(), SolveError> {
        self.cancel_until(0);
        let mut lits = Vec::with_capacity(body.len());
        for l in body {
            match self.map_literal(l)? {
                MappedLit::AlwaysTrue => {}
                MappedLit::AlwaysFalse => return Ok(()), // can never fire
                MappedLit::Lit(s) => lits.push(s.complement()),
            }
        }
        self.add_root_clause(lits);
        Ok(())
    }

    /// Interns a fresh atom with no support requirement. Returns the
    /// existing id when the name is already bound to a free atom.
    pub fn new_free_atom(&mut self, name: &str) -> Result<AtomId, SolveError> {
        if let Some(a) = self.atoms.lookup(name) {
            return match self.var_of_atom.get(a.index()).copied().flatten() {
                Some(v) if self.choice_var[v] => Ok(a),
                _ => Err(SolveError::AtomNotFree(name.to_string())),
            };
        }
        let a = self.atoms.intern(name);
        self.new_var(Some(a), true);
        Ok(a)
    }

    /// Adds a choice rule over `literals` with a lower bound. Positive
    /// literals must name free atoms (see `new_free_atom`); the bound is
    /// always enforced, because added choice rules come from internal
    /// reformulations rather than from the input program.
    pub fn add_choice_rule(&mut self, literals: &[Literal], bound: u32) -> Result<(), SolveError> {
        self.cancel_until(0);
        let mut bound = bound;
        let mut lits = Vec::with_capacity(literals.len());
        for l in literals {
            match self.map_literal(l)? {
                MappedLit::AlwaysTrue => bound = bound.saturating_sub(1),
                MappedLit::AlwaysFalse => {}
                MappedLit::Lit(s) => {
                    if !l.negated && !self.choice_var[s.var()] {
                        return Err(SolveError::AtomNotFree(self.atoms.name(l.atom).to_string()));
                    }
                    lits.push(s);
                }
            }
        }
        self.add_card(lits, bound);
        Ok(())
    }

    /// Orders branching: while any literal in `prefs` is unassigned, the
    /// first such literal is decided next, with the given polarity. With
    /// preferences installed, restarts are suppressed until the whole list
    /// is assigned, so the first model found realizes the preference order.
    pub fn set_branching_preference(&mut self, prefs: Option<&[Literal]>) {
        self.prefs.clear();
        if let Some(ps) = prefs {
            for l in ps {
                if let Ok(MappedLit::Lit(s)) = self.map_literal(l) {
                    self.prefs.push(s);
                }
            }
        }
    }

    pub fn set_deadline(&mut self, d: Option<Instant>) {
        self.deadline = d;
    }

    pub fn stats(&self) -> &SolverStats {
        &self.stats
    }

    pub fn atom_table(&self) -> &AtomTable {
        &self.atoms
    }

    /// Branching activity of an atom; 0 for atoms without a variable.
    pub fn activity_of(&self, a: AtomId) -> f64 {
        self.var_of_atom
            .get(a.index())
            .copied()
            .flatten()
            .map_or(0.0, |v| self.activity[v])
    }

    /// Test hook: verifies that every root-level consequence and every
    /// learnt clause is satisfied by `model`, which must be a stable model
    /// of the current program (including incremental additions). Body
    /// variables are valued by their defining conjunction.
    #[doc(hidden)]
    pub fn check_learned_entailment(&self, model: &Interpretation) -> Result<(), String> {
        let lit_val = |l: SLit| -> bool {
            let v = l.var();
            let base = match self.atom_of_var[v] {
                Some(a) => model.contains(a),
                None => self.body_def[v]
                    .as_ref()
                    .expect("variable is an atom or a body conjunction")
                    .iter()
                    .all(|&bl| {
                        let a = self.atom_of_var[bl.var()].expect("body literal names an atom");
                        model.contains(a) != bl.negated()
                    }),
            };
            base != l.negated()
        };
        let root_end = self.trail_lim.first().copied().unwrap_or(self.trail.len());
        for &p in &self.trail[..root_end] {
            if !lit_val(p) {
                return Err(format!(
                    "root consequence over variable {} is violated by the model",
                    p.var()
                ));
            }
        }
        for (i, c) in self.clauses.iter().enumerate() {
            if c.deleted || !c.learnt {
                continue;
            }
            if !c.lits.iter().any(|&l| lit_val(l)) {
                return Err(format!("learnt clause {i} is falsified by the model"));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests;
