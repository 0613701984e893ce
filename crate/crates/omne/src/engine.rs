//! Anytime computation of cautious consequences: the query atoms that are
//! true in every stable model.
//!
//! All strategies share one shape. An underestimate `proved` (atoms shown
//! cautious) grows, an overestimate (query atoms not yet excluded) shrinks,
//! and the two meet exactly at the answer. Every stable model found shrinks
//! the overestimate by intersection; strategies differ in how they force
//! progress between models:
//!
//! - [`Strategy::Or`] forbids the whole overestimate via an integrity
//!   constraint; unsatisfiability proves every remaining atom at once.
//! - [`Strategy::Ict`] tests one candidate atom per call by assuming its
//!   falsity; an unsatisfiable core proves that atom.
//! - [`Strategy::Opt`] asks the solver for a model that is subset-minimal
//!   on the overestimate (branching preferences decide candidate atoms
//!   false first); if even that model contains all candidates, they are all
//!   cautious.
//! - [`Strategy::One`] computes a model with the minimum number of
//!   candidate atoms true, replacing unsatisfiable cores by cardinality
//!   reformulations over fresh relaxation atoms until the solver succeeds.
//! - [`Strategy::Cm`] assumes all candidates false at once and shrinks the
//!   returned unsatisfiable cores; a core reduced to one literal proves its
//!   atom. The number of solver calls per round is audited against the
//!   bound `|overestimate| - |proved| + 1`.
//! - [`Strategy::Enumerate`] is the baseline: enumerate all stable models
//!   with the exhaustive oracle and intersect. It refuses programs beyond
//!   the oracle's enumeration cap.

use crate::oracle::{CautiousResult, Oracle, OracleError};
use crate::program::{AtomId, Interpretation, Literal, Program};
use crate::solver::{
    translate, CdclSolver, SolveError, SolveResult, TranslateError, TranslateOptions,
};
use std::collections::BTreeSet;
use std::time::{Duration, Instant};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Strategy {
    Or,
    Ict,
    Opt,
    One,
    Cm,
    Enumerate,
}

impl Strategy {
    /// The five solver-backed strategies, in canonical order.
    pub const SOLVER_BACKED: [Strategy; 5] = [
        Strategy::Or,
        Strategy::Ict,
        Strategy::Opt,
        Strategy::One,
        Strategy::Cm,
    ];

    /// All strategies including the enumeration baseline.
    pub const ALL: [Strategy; 6] = [
        Strategy::Or,
        Strategy::Ict,
        Strategy::Opt,
        Strategy::One,
        Strategy::Cm,
        Strategy::Enumerate,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Strategy::Or => "or",
            Strategy::Ict => "ict",
            Strategy::Opt => "opt",
            Strategy::One => "one",
            Strategy::Cm => "cm",
            Strategy::Enumerate => "enum",
        }
    }
}

impl std::fmt::Display for Strategy {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// How a single atom is chosen when a strategy needs one candidate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OneOfPolicy {
    /// Highest branching activity, ties to the lowest atom id.
    #[default]
    Activity,
    /// Lowest atom id.
    Index,
}

#[derive(Debug, Clone)]
pub struct EngineOptions {
    pub strategy: Strategy,
    pub seed: u64,
    pub strict_choice_bounds: bool,
    pub timeout: Option<Duration>,
    pub oneof: OneOfPolicy,
}

impl Default for EngineOptions {
    fn default() -> Self {
        EngineOptions {
            strategy: Strategy::Cm,
            seed: 0,
            strict_choice_bounds: true,
            timeout: None,
            oneof: OneOfPolicy::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EventKind {
    /// A stable model was found; the overestimate was intersected with it.
    Model,
    /// The underestimate grew.
    Proved,
    /// The program has no stable model.
    Incoherent,
    /// The computation finished.
    Done,
}

impl EventKind {
    pub fn name(self) -> &'static str {
        match self {
            EventKind::Model => "model",
            EventKind::Proved => "proved",
            EventKind::Incoherent => "incoherent",
            EventKind::Done => "done",
        }
    }
}

/// A progress report. The invariants `proved ⊆ overestimate`, `proved`
/// nondecreasing and `overestimate` nonincreasing over the event sequence
/// are part of the contract.
#[derive(Debug, Clone)]
pub struct ProgressEvent {
    pub kind: EventKind,
    pub elapsed: Duration,
    pub strategy: Strategy,
    pub proved: BTreeSet<AtomId>,
    pub overestimate: BTreeSet<AtomId>,
}

/// One round of the core-shrinking strategy: how many solver calls it used
/// and the bound it must respect.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CmAudit {
    pub calls: u64,
    pub allowed: u64,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct EngineStats {
    pub solver_calls: u64,
    pub learned_clauses: u64,
    pub conflicts: u64,
    pub restarts: u64,
    pub peak_trail: usize,
    pub cm_audits: Vec<CmAudit>,
}

#[derive(Debug, Error)]
pub enum EngineError {
    #[error(transparent)]
    Translate(#[from] TranslateError),
    #[error("timeout")]
    Timeout,
    #[error("enumeration baseline refused: {0}")]
    Enumeration(OracleError),
    #[error("internal invariant violated: {0}")]
    Internal(String),
}

fn internal(e: SolveError) -> EngineError {
    match e {
        SolveError::Timeout => EngineError::Timeout,
        other => EngineError::Internal(other.to_string()),
    }
}

/// Picks one atom from a non-empty candidate set.
///
/// # Panics
/// Panics when `candidates` is empty: every call site must guarantee a
/// non-empty set, and silently inventing an atom would corrupt the result.
pub(crate) fn one_of(
    policy: OneOfPolicy,
    candidates: &BTreeSet<AtomId>,
    activity: impl Fn(AtomId) -> f64,
) -> AtomId {
    assert!(
        !candidates.is_empty(),
        "selection from an empty candidate set"
    );
    match policy {
        OneOfPolicy::Index => *candidates.iter().next().unwrap(),
        OneOfPolicy::Activity => {
            let mut best = *candidates.iter().next().unwrap();
            let mut best_act = activity(best);
            for &a in candidates.iter().skip(1) {
                let act = activity(a);
                if act > best_act {
                    best = a;
                    best_act = act;
                }
            }
            best
        }
    }
}

struct Ctx<'a> {
    solver: CdclSolver,
    proved: BTreeSet<AtomId>,
    over: BTreeSet<AtomId>,
    t0: Instant,
    deadline: Option<Instant>,
    strategy: Strategy,
    oneof: OneOfPolicy,
    sink: &'a mut dyn FnMut(ProgressEvent),
    cm_audits: Vec<CmAudit>,
    relax_counter: u64,
}

impl Ctx<'_> {
    fn emit(&mut self, kind: EventKind) {
        (self.sink)(ProgressEvent {
            kind,
            elapsed: self.t0.elapsed(),
            strategy: self.strategy,
            proved: self.proved.clone(),
            overestimate: self.over.clone(),
        });
    }

    fn check_deadline(&self) -> Result<(), EngineError> {
        match self.deadline {
            Some(d) if Instant::now() > d => Err(EngineError::Timeout),
            _ => Ok(()),
        }
    }

    fn solve(&mut self, assume: &[Literal]) -> Result<SolveResult, EngineError> {
        self.solver.compute_stable_model(assume).map_err(internal)
    }

    fn intersect_model(&mut self, m: &Interpretation) {
        self.over.retain(|&a| m.contains(a));
        self.emit(EventKind::Model);
    }

    fn prove_all(&mut self) {
        self.proved = self.over.clone();
        self.emit(EventKind::Proved);
    }

    fn pick_one(&self, candidates: &BTreeSet<AtomId>) -> AtomId {
        one_of(self.oneof, candidates, |a| self.solver.activity_of(a))
    }

    fn remaining(&self) -> BTreeSet<AtomId> {
        self.over.difference(&self.proved).copied().collect()
    }

    /// Forbid all remaining candidates at once: a model must drop one, and
    /// unsatisfiability proves them all.
    fn refine_or(&mut self) -> Result<(), EngineError> {
        let body: Vec<Literal> = self.over.iter().map(|&a| Literal::positive(a)).collect();
        self.solver
            .add_integrity_constraint(&body)
            .map_err(internal)?;
        match self.solve(&[])? {
            SolveResult::Core(_) => self.prove_all(),
            SolveResult::Model(m) => self.intersect_model(&m),
        }
        Ok(())
    }

    /// Test one candidate: assume it false; a core proves it cautious.
    fn refine_ict(&mut self) -> Result<(), EngineError> {
        let a = self.pick_one(&self.remaining());
        match self.solve(&[Literal::negative(a)])? {
            SolveResult::Core(_) => {
                self.proved.insert(a);
                self.emit(EventKind::Proved);
            }
            SolveResult::Model(m) => self.intersect_model(&m),
        }
        Ok(())
    }

    /// Ask for a model subset-minimal on the overestimate. Candidate atoms
    /// are preferred false and decided before anything else, so each true
    /// candidate in the produced model is entailed by the earlier ones —
    /// making the model subset-minimal on those atoms. If it still contains
    /// every candidate, no stable model misses any of them.
    fn refine_opt(&mut self) -> Result<(), EngineError> {
        let prefs: Vec<Literal> = self.over.iter().map(|&a| Literal::negative(a)).collect();
        self.solver.set_branching_preference(Some(&prefs));
        let r = self.solve(&[]);
        self.solver.set_branching_preference(None);
        match r? {
            SolveResult::Model(m) => {
                if self.over.iter().all(|&a| m.contains(a)) {
                    self.prove_all();
                } else {
                    self.intersect_model(&m);
                }
            }
            SolveResult::Core(_) => {
                return Err(EngineError::Internal(
                    "assumption-free search reported unsatisfiable after a model was found"
                        .to_string(),
                ));
            }
        }
        Ok(())
    }

    /// Compute a model with the minimum number of overestimate atoms true.
    /// Assume every candidate false; each unsatisfiable core of size k
    /// admits k-1 violations, encoded as a cardinality rule over fresh
    /// relaxation atoms which are then assumed false in turn. The first
    /// model reached this way is cardinality-minimal on the candidates, so
    /// if it contains all of them, every stable model does.
    fn refine_one(&mut self) -> Result<(), EngineError> {
        let mut assume: Vec<Literal> = self.over.iter().map(|&a| Literal::negative(a)).collect();
        loop {
            self.check_deadline()?;
            match self.solve(&assume)? {
                SolveResult::Model(m) => {
                    if self.over.iter().all(|&a| m.contains(a)) {
                        self.prove_all();
                    } else {
                        self.intersect_model(&m);
                    }
                    return Ok(());
                }
                SolveResult::Core(c) => {
                    if c.is_empty() {
                        return Err(EngineError::Internal(
                            "program lost coherence during projection minimization".to_string(),
                        ));
                    }
                    let n = c.len() - 1;
                    assume.retain(|l| !c.contains(l));
                    if n == 0 {
                        // A single assumption is unsatisfiable by itself:
                        // its atom holds in every stable model, so simply
                        // stop assuming it.
                        continue;
                    }
                    let mut fresh: Vec<AtomId> = Vec::with_capacity(n);
                    for _ in 0..n {
                        let name = format!("_relax_{}", self.relax_counter);
                        self.relax_counter += 1;
                        fresh.push(self.solver.new_free_atom(&name).map_err(internal)?);
                    }
                    // At least n of the core literals hold in any stable
                    // model extension; relaxation atoms absorb the slack.
                    let mut lits: Vec<Literal> = c.iter().cloned().collect();
                    lits.extend(fresh.iter().map(|&a| Literal::positive(a)));
                    self.solver
                        .add_choice_rule(&lits, n as u32)
                        .map_err(internal)?;
                    // Symmetry breaking: relaxation atoms switch on as a
                    // prefix of their creation order.
                    for w in fresh.windows(2) {
                        self.solver
                            .add_integrity_constraint(&[
                                Literal::positive(w[1]),
                                Literal::negative(w[0]),
                            ])
                            .map_err(internal)?;
                    }
                    assume.extend(fresh.iter().map(|&a| Literal::negative(a)));
                }
            }
        }
    }

    /// Assume all remaining candidates false at once and shrink the
    /// returned cores: drop one suspect literal per core and retry the
    /// rest. A core reduced to a single literal proves its atom cautious.
    /// Solver calls per round are audited against |remaining| + 1.
    fn refine_cm(&mut self) -> Result<(), EngineError> {
        let remaining = self.remaining();
        let allowed = remaining.len() as u64 + 1;
        let mut used = 0u64;
        let mut c: Vec<Literal> = remaining.iter().map(|&a| Literal::negative(a)).collect();
        let mut held_out: Vec<Literal> = Vec::new();
        let mut suspect: Option<AtomId> = None;
        while !c.is_empty() {
            self.check_deadline()?;
            used += 1;
            match self.solve(&c)? {
                SolveResult::Model(m) => {
                    self.intersect_model(&m);
                    c = std::mem::take(&mut held_out);
                }
                SolveResult::Core(k) => {
                    if k.is_empty() {
                        return Err(EngineError::Internal(
                            "empty core under non-empty assumptions".to_string(),
                        ));
                    }
                    let atoms: BTreeSet<AtomId> = k.iter().map(|l| l.atom).collect();
                    let a = self.pick_one(&atoms);
                    suspect = Some(a);
                    held_out = vec![Literal::negative(a)];
                    c = k.into_iter().filter(|l| l.atom != a).collect();
                }
            }
        }
        // The loop can only end with a held-out literal when the last core
        // was that single literal, which proves its atom.
        if !held_out.is_empty() {
            let a = suspect.expect("held-out literal implies a chosen suspect");
            self.proved.insert(a);
            self.emit(EventKind::Proved);
        }
        self.cm_audits.push(CmAudit {
            calls: used,
            allowed,
        });
        Ok(())
    }

    fn finish_stats(self) -> EngineStats {
        let s = self.solver.stats();
        EngineStats {
            solver_calls: s.solve_calls,
            learned_clauses: s.learned_total,
            conflicts: s.conflicts,
            restarts: s.restarts,
            peak_trail: s.peak_trail,
            cm_audits: self.cm_audits,
        }
    }
}

/// Computes the cautious consequences of `program` restricted to its query
/// atoms, reporting progress through `sink`.
pub fn cautious_reasoning(
    program: &Program,
    opts: &EngineOptions,
    sink: &mut dyn FnMut(ProgressEvent),
) -> Result<(CautiousResult, EngineStats), EngineError> {
    let t0 = Instant::now();
    let deadline = opts.timeout.map(|d| t0 + d);
    if opts.strategy == Strategy::Enumerate {
        return enumerate_baseline(program, t0, deadline, sink);
    }
    let topts = TranslateOptions {
        strict_choice_bounds: opts.strict_choice_bounds,
        seed: opts.seed,
    };
    let mut solver = translate(program, &topts)?;
    solver.set_deadline(deadline);
    let mut ctx = Ctx {
        solver,
        proved: BTreeSet::new(),
        over: program.query.clone(),
        t0,
        deadline,
        strategy: opts.strategy,
        oneof: opts.oneof,
        sink,
        cm_audits: Vec::new(),
        relax_counter: 0,
    };
    ctx.check_deadline()?;
    match ctx.solve(&[])? {
        SolveResult::Core(_) => {
            ctx.proved.clear();
            ctx.over.clear();
            ctx.emit(EventKind::Incoherent);
            ctx.emit(EventKind::Done);
            return Ok((CautiousResult::Incoherent, ctx.finish_stats()));
        }
        SolveResult::Model(m) => ctx.intersect_model(&m),
    }
    while ctx.proved != ctx.over {
        ctx.check_deadline()?;
        match opts.strategy {
            Strategy::Or => ctx.refine_or()?,
            Strategy::Ict => ctx.refine_ict()?,
            Strategy::Opt => ctx.refine_opt()?,
            Strategy::One => ctx.refine_one()?,
            Strategy::Cm => ctx.refine_cm()?,
            Strategy::Enumerate => unreachable!("handled above"),
        }
    }
    ctx.emit(EventKind::Done);
    let answer = ctx.proved.clone();
    Ok((CautiousResult::Consequences(answer), ctx.finish_stats()))
}

fn enumerate_baseline(
    program: &Program,
    t0: Instant,
    deadline: Option<Instant>,
    sink: &mut dyn FnMut(ProgressEvent),
) -> Result<(CautiousResult, EngineStats), EngineError> {
    let oracle = Oracle::new(program)
        .map_err(EngineError::Enumeration)?
        .with_deadline(deadline);
    let result = oracle
        .cautious_consequences_bruteforce(&program.query)
        .map_err(|e| match e {
            OracleError::Timeout => EngineError::Timeout,
            other => EngineError::Enumeration(other),
        })?;
    let mut emit = |kind: EventKind, set: &BTreeSet<AtomId>| {
        sink(ProgressEvent {
            kind,
            elapsed: t0.elapsed(),
            strategy: Strategy::Enumerate,
            proved: set.clone(),
            overestimate: set.clone(),
        });
    };
    match &result {
        CautiousResult::Incoherent => {
            let empty = BTreeSet::new();
            emit(EventKind::Incoherent, &empty);
            emit(EventKind::Done, &empty);
        }
        CautiousResult::Consequences(cc) => {
            emit(EventKind::Done, cc);
        }
    }
    Ok((result, EngineStats::default()))
}

/// A stable model that is subset-minimal with respect to `objective`: no
/// other stable model's objective atoms form a strict subset of its own.
/// Returns `None` when the program has no stable model.
#[doc(hidden)]
pub fn subset_minimal_model(
    program: &Program,
    objective: &BTreeSet<AtomId>,
    opts: &EngineOptions,
) -> Result<Option<Interpretation>, EngineError> {
    let topts = TranslateOptions {
        strict_choice_bounds: opts.strict_choice_bounds,
        seed: opts.seed,
    };
    let mut solver = translate(program, &topts)?;
    solver.set_deadline(opts.timeout.map(|d| Instant::now() + d));
    let prefs: Vec<Literal> = objective.iter().map(|&a| Literal::negative(a)).collect();
    solver.set_branching_preference(Some(&prefs));
    match solver.compute_stable_model(&[]).map_err(internal)? {
        SolveResult::Model(m) => Ok(Some(m)),
        SolveResult::Core(_) => Ok(None),
    }
}

/// A stable model with the minimum number of `objective` atoms true, and
/// that number. Returns `None` when the program has no stable model.
#[doc(hidden)]
pub fn minimum_projection_model(
    program: &Program,
    objective: &BTreeSet<AtomId>,
    opts: &EngineOptions,
) -> Result<Option<(Interpretation, usize)>, EngineError> {
    let topts = TranslateOptions {
        strict_choice_bounds: opts.strict_choice_bounds,
        seed: opts.seed,
    };
    let mut solver = translate(program, &topts)?;
    let deadline = opts.timeout.map(|d| Instant::now() + d);
    solver.set_deadline(deadline);
    let mut relax_counter = 0u64;
    let mut assume: Vec<Literal> = objective.iter().map(|&a| Literal::negative(a)).collect();
    loop {
        if let Some(d) = deadline {
            if Instant::now() > d {
                return Err(EngineError::Timeout);
            }
        }
        match solver.compute_stable_model(&assume).map_err(internal)? {
            SolveResult::Model(m) => {
                let stripped = Interpretation::from_atoms(
                    m.iter().filter(|a| a.index() < program.atoms.len()),
                );
                let k = objective.iter().filter(|&&a| stripped.contains(a)).count();
                return Ok(Some((stripped, k)));
            }
            SolveResult::Core(c) => {
                if c.is_empty() {
                    return Ok(None);
                }
                let n = c.len() - 1;
                assume.retain(|l| !c.contains(l));
                if n == 0 {
                    continue;
                }
                let mut fresh: Vec<AtomId> = Vec::with_capacity(n);
                for _ in 0..n {
                    let name = format!("_relax_{relax_counter}");
                    relax_counter += 1;
                    fresh.push(solver.new_free_atom(&name).map_err(internal)?);
                }
                let mut lits: Vec<Literal> = c.iter().cloned().collect();
                lits.extend(fresh.iter().map(|&a| Literal::positive(a)));
                solver.add_choice_rule(&lits, n as u32).map_err(internal)?;
                for w in fresh.windows(2) {
                    solver
                        .add_integrity_constraint(&[
                            Literal::positive(w[1]),
                            Literal::negative(w[0]),
                        ])
                        .map_err(internal)?;
                }
                assume.extend(fresh.iter().map(|&a| Literal::negative(a)));
            }
        }
    }
}
