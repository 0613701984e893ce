//! Builds a `CdclSolver` from a ground program.
//!
//! Disjunctive rules are shifted into normal rules (each head atom keeps
//! the body plus the negations of its co-headed atoms), which preserves the
//! stable models exactly when no two co-headed atoms depend on each other
//! through positive recursion — the head-cycle-free condition checked up
//! front. Every atom then gets its completion: each rule body becomes an
//! implication toward the head, and non-choice atoms additionally get a
//! support clause requiring some body to hold. Identical bodies share one
//! definition variable. Choice-rule bounds become cardinality constraints,
//! and the positive recursion components are recorded so the search can
//! reject unfounded assignments that the completion alone admits.

use super::{CdclSolver, LBool, Reason, SLit};
use crate::program::{AtomId, Literal, Program};
use std::collections::BTreeSet;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TranslateError {
    #[error("atoms '{a}' and '{b}' appear in one rule head and in a common positive cycle; disjunctive heads must be head-cycle-free")]
    HeadCycle { a: String, b: String },
}

#[derive(Debug, Clone)]
pub struct TranslateOptions {
    /// Enforce choice-rule lower bounds as model constraints (the default).
    /// When off, bounds on rules of the input program are ignored.
    pub strict_choice_bounds: bool,
    /// Branching tie-break seed; 0 keeps activities exactly at zero so ties
    /// fall to the lowest variable index.
    pub seed: u64,
}

impl Default for TranslateOptions {
    fn default() -> Self {
        TranslateOptions {
            strict_choice_bounds: true,
            seed: 0,
        }
    }
}

fn positive_scc_ids(p: &Program) -> Vec<usize> {
    use petgraph::graph::{DiGraph, NodeIndex};
    let n = p.atoms.len();
    let mut g: DiGraph<(), ()> = DiGraph::with_capacity(n, n);
    let nodes: Vec<NodeIndex> = (0..n).map(|_| g.add_node(())).collect();
    for r in &p.disjunctive {
        for h in r.head_atoms() {
            for b in r.positive_body() {
                if !b.is_false_atom() {
                    g.add_edge(nodes[h.index()], nodes[b.index()], ());
                }
            }
        }
    }
    let comps = petgraph::algo::tarjan_scc(&g);
    let mut id = vec![0usize; n];
    for (k, comp) in comps.iter().enumerate() {
        for ni in comp {
            id[ni.index()] = k;
        }
    }
    id
}

/// Verifies that no two atoms sharing a disjunctive head also share a
/// positive-recursion component.
pub fn check_head_cycle_free(p: &Program) -> Result<(), TranslateError> {
    let scc = positive_scc_ids(p);
    for r in &p.disjunctive {
        let heads: Vec<AtomId> = r.head_atoms().collect();
        for i in 0..heads.len() {
            for j in i + 1..heads.len() {
                if scc[heads[i].index()] == scc[heads[j].index()] {
                    return Err(TranslateError::HeadCycle {
                        a: p.atoms.name(heads[i]).to_string(),
                        b: p.atoms.name(heads[j]).to_string(),
                    });
                }
            }
        }
    }
    Ok(())
}

impl CdclSolver {
    /// Representation of a rule body: the literal itself for a one-literal
    /// body, otherwise a shared definition variable constrained to equal
    /// the conjunction.
    fn body_repr(&mut self, body: &BTreeSet<Literal>) -> SLit {
        let mut key: Vec<SLit> = body.iter().map(|l| self.slit(l)).collect();
        key.sort_unstable();
        key.dedup();
        if key.len() == 1 {
            return key[0];
        }
        if let Some(&b) = self.body_map.get(&key) {
            return b;
        }
        let v = self.new_var(None, false);
        let blit = SLit::new(v, false);
        self.body_def[v] = Some(key.clone());
        for &l in &key {
            self.add_root_clause(vec![blit.complement(), l]);
        }
        let mut closing: Vec<SLit> = vec![blit];
        closing.extend(key.iter().map(|&l| l.complement()));
        self.add_root_clause(closing);
        self.body_map.insert(key, blit);
        blit
    }

    fn set_fact(&mut self, a: AtomId) {
        let l = self.slit(&Literal::positive(a));
        self.fact_var[l.var()] = true;
        match self.value(l) {
            LBool::True => {}
            LBool::Undef => self.assign(l, Reason::None),
            LBool::False => self.ok = false,
        }
    }
}

/// Compiles `program` into a solver ready for `compute_stable_model`.
pub fn translate(program: &Program, opts: &TranslateOptions) -> Result<CdclSolver, TranslateError> {
    check_head_cycle_free(program)?;
    let mut s = CdclSolver::new_empty(program.atoms.clone(), opts.seed);

    for a in program.atoms.atoms() {
        s.new_var(Some(a), program.is_choice_atom(a));
    }

    // Shift disjunctive rules; constraints become clauses immediately.
    let mut rules_of: Vec<Vec<BTreeSet<Literal>>> = vec![Vec::new(); program.atoms.len()];
    for r in &program.disjunctive {
        if r.positive_body().any(|a| a.is_false_atom()) {
            continue; // body can never hold
        }
        let body: BTreeSet<Literal> = r
            .body
            .iter()
            .filter(|l| !(l.negated && l.atom.is_false_atom()))
            .cloned()
            .collect();
        let heads: Vec<AtomId> = r.head_atoms().collect();
        if heads.is_empty() {
            let clause: Vec<SLit> = body.iter().map(|l| s.slit(l).complement()).collect();
            s.add_root_clause(clause);
            continue;
        }
        for (i, &h) in heads.iter().enumerate() {
            let mut b = body.clone();
            for (j, &h2) in heads.iter().enumerate() {
                if i != j {
                    b.insert(Literal::negative(h2));
                }
            }
            rules_of[h.index()].push(b);
        }
    }

    // Completion, atom by atom in id order for deterministic numbering.
    for a in program.atoms.atoms() {
        let bodies = std::mem::take(&mut rules_of[a.index()]);
        let mut dedup: Vec<&BTreeSet<Literal>> = Vec::new();
        for b in &bodies {
            if !dedup.contains(&b) {
                dedup.push(b);
            }
        }
        if dedup.iter().any(|b| b.is_empty()) {
            s.set_fact(a);
            continue;
        }
        let alit = s.slit(&Literal::positive(a));
        let mut support: Vec<SLit> = Vec::new();
        for b in dedup {
            let srep = s.body_repr(b);
            s.add_root_clause(vec![srep.complement(), alit]);
            if !support.contains(&srep) {
                support.push(srep);
            }
            let pos: Vec<AtomId> = b
                .iter()
                .filter(|l| !l.negated && !l.atom.is_false_atom())
                .map(|l| l.atom)
                .collect();
            s.atom_rules[a.index()].push((srep, pos));
        }
        if !program.is_choice_atom(a) {
            let mut clause = vec![alit.complement()];
            clause.extend(support);
            s.add_root_clause(clause);
        }
    }

    // Choice-rule bounds.
    if opts.strict_choice_bounds {
        for c in &program.choice {
            let mut bound = c.bound;
            let mut lits = Vec::new();
            for l in &c.literals {
                if l.atom.is_false_atom() {
                    if l.negated {
                        bound = bound.saturating_sub(1); // always satisfied
                    }
                    continue; // a positive literal on falsity never counts
                }
                lits.push(s.slit(l));
            }
            s.add_card(lits, bound);
        }
    }

    s.build_sccs();
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::parse_text;

    #[test]
    fn head_cycle_free_accepts_the_running_example() {
        let p = parse_text("a | b. c | d. q1 :- a. q1 :- b.").unwrap();
        assert!(check_head_cycle_free(&p).is_ok());
    }

    #[test]
    fn head_cycle_is_rejected_with_the_offending_pair() {
        let p = parse_text("a | b. a :- b. b :- a.").unwrap();
        match check_head_cycle_free(&p) {
            Err(TranslateError::HeadCycle { a, b }) => {
                assert_eq!((a.as_str(), b.as_str()), ("a", "b"));
            }
            other => panic!("expected a head-cycle error, got {other:?}"),
        }
        assert!(translate(&p, &TranslateOptions::default()).is_err());
    }

    #[test]
    fn independent_cycles_do_not_trip_the_check() {
        // The cycle exists but never joins two co-headed atoms.
        let p = parse_text("a | b. c :- d. d :- c.").unwrap();
        assert!(check_head_cycle_free(&p).is_ok());
    }

    #[test]
    fn self_recursion_within_one_head_atom_is_allowed() {
        let p = parse_text("a | b :- a.").unwrap();
        assert!(check_head_cycle_free(&p).is_ok());
    }
}
