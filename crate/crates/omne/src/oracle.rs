//! Executable definition of the stable model semantics by exhaustive
//! enumeration. Everything here is deliberately direct: interpretations are
//! bit masks, candidate sets are enumerated in increasing cardinality, and
//! minimality is checked by walking every proper subset. The solver is
//! validated against this module, never the other way around.

use crate::program::{AtomId, DisjunctiveRule, Interpretation, Literal, Program};
use std::collections::BTreeSet;
use std::time::Instant;
use thiserror::Error;

/// Default limit on the number of non-false atoms enumeration will accept.
pub const DEFAULT_ENUMERATION_CAP: usize = 22;

/// Hard representation limit: interpretations are u128 masks.
const MASK_LIMIT: usize = 127;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("program has {atoms} atoms, above the enumeration cap of {cap}")]
    CapExceeded { atoms: usize, cap: usize },
    #[error("program has {atoms} atoms, above the oracle representation limit of {limit}")]
    TooLarge { atoms: usize, limit: usize },
    #[error("interpretation is not a stable model")]
    NotAStableModel,
    #[error("deadline exceeded during enumeration")]
    Timeout,
}

/// Result of a cautious-consequence computation. A program without stable
/// models is incoherent, which is an answer, not an error.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CautiousResult {
    Incoherent,
    Consequences(BTreeSet<AtomId>),
}

/// The reduct of a program with respect to an interpretation: choice rules
/// collapse to facts for their satisfied positive literals, rules with a
/// satisfied negative body literal disappear, and surviving rules keep only
/// their positive parts. Contains no negated literals.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReductProgram {
    pub facts: Vec<AtomId>,
    pub rules: Vec<ReductRule>,
}

/// A positive rule of the reduct. An empty head means the rule came from an
/// integrity constraint and can never be satisfied while its body holds.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReductRule {
    pub head: Vec<AtomId>,
    pub body: Vec<AtomId>,
}

struct DisjMask {
    head: u128,
    pos: u128,
    neg: u128,
}

struct ChoiceMask {
    pos: u128,
    neg: u128,
    /// Contribution of literals over the always-false atom: a negated one
    /// is always satisfied, a positive one never is.
    base: u32,
    bound: u32,
}

/// Semantics oracle over one program. `strict_choice_bounds` controls
/// whether choice-rule bounds constrain stable models (the default) or are
/// ignored during the stability check.
pub struct Oracle<'a> {
    program: &'a Program,
    n: usize,
    cap: usize,
    strict_choice_bounds: bool,
    deadline: Option<Instant>,
    disj: Vec<DisjMask>,
    choice: Vec<ChoiceMask>,
}

fn atom_bit(a: AtomId) -> u128 {
    1u128 << (a.0 - 1)
}

impl<'a> Oracle<'a> {
    pub fn new(program: &'a Program) -> Result<Self, OracleError> {
        let n = program.atoms.atom_count();
        if n > MASK_LIMIT {
            return Err(OracleError::TooLarge {
                atoms: n,
                limit: MASK_LIMIT,
            });
        }
        let mask_of = |atoms: &mut dyn Iterator<Item = AtomId>| -> u128 {
            atoms
                .filter(|a| !a.is_false_atom())
                .map(atom_bit)
                .fold(0, |m, b| m | b)
        };
        let disj = program
            .disjunctive
            .iter()
            // A positive body containing the always-false atom can never
            // fire, so the rule is vacuously satisfied everywhere.
            .filter(|r| !r.positive_body().any(|a| a.is_false_atom()))
            .map(|r| DisjMask {
                head: mask_of(&mut r.head_atoms()),
                pos: mask_of(&mut r.positive_body()),
                neg: mask_of(&mut r.negative_body()),
            })
            .collect();
        let choice = program
            .choice
            .iter()
            .map(|r| ChoiceMask {
                pos: mask_of(&mut r.positive_atoms()),
                neg: mask_of(&mut r.literals.iter().filter(|l| l.negated).map(|l| l.atom)),
                base: r
                    .literals
                    .iter()
                    .filter(|l| l.negated && l.atom.is_false_atom())
                    .count() as u32,
                bound: r.bound,
            })
            .collect();
        Ok(Oracle {
            program,
            n,
            cap: DEFAULT_ENUMERATION_CAP,
            strict_choice_bounds: true,
            deadline: None,
            disj,
            choice,
        })
    }

    pub fn with_cap(mut self, cap: usize) -> Self {
        self.cap = cap.min(MASK_LIMIT);
        self
    }

    pub fn with_strict_choice_bounds(mut self, strict: bool) -> Self {
        self.strict_choice_bounds = strict;
        self
    }

    pub fn with_deadline(mut self, deadline: Option<Instant>) -> Self {
        self.deadline = deadline;
        self
    }

    fn mask(&self, i: &Interpretation) -> u128 {
        i.iter().map(atom_bit).fold(0, |m, b| m | b)
    }

    fn unmask(&self, m: u128) -> Interpretation {
        Interpretation::from_atoms(
            (1..=self.n as u32)
                .map(AtomId)
                .filter(|a| m & atom_bit(*a) != 0),
        )
    }

    fn satisfies_disjunctive(&self, m: u128) -> bool {
        self.disj
            .iter()
            .all(|r| r.pos & !m != 0 || r.neg & m != 0 || r.head & m != 0)
    }

    fn satisfies_choice_bounds(&self, m: u128) -> bool {
        self.choice.iter().all(|r| {
            let sat = (r.pos & m).count_ones() + (r.neg & !m).count_ones() + r.base;
            sat >= r.bound
        })
    }

    /// Classical satisfaction: every disjunctive rule and every choice-rule
    /// bound holds.
    pub fn is_model(&self, i: &Interpretation) -> bool {
        let m = self.mask(i);
        self.satisfies_disjunctive(m) && self.satisfies_choice_bounds(m)
    }

    /// Builds the reduct with respect to `i`.
    pub fn reduct(&self, i: &Interpretation) -> ReductProgram {
        let mut facts = BTreeSet::new();
        for c in &self.program.choice {
            for a in c.positive_atoms() {
                if i.contains(a) {
                    facts.insert(a);
                }
            }
        }
        let rules = self
            .program
            .disjunctive
            .iter()
            .filter(|r| r.negative_body().all(|a| !i.contains(a)))
            .map(|r| ReductRule {
                head: r.head_atoms().collect(),
                body: r.positive_body().collect(),
            })
            .collect();
        ReductProgram {
            facts: facts.into_iter().collect(),
            rules,
        }
    }

    /// Masked reduct of the disjunctive part: (head, positive body) for
    /// every rule whose negative body avoids `m`, plus the choice facts.
    fn reduct_masks(&self, m: u128) -> (u128, Vec<(u128, u128)>) {
        let facts = self.choice.iter().fold(0, |acc, c| acc | (c.pos & m));
        let rules = self
            .disj
            .iter()
            .filter(|r| r.neg & m == 0)
            .map(|r| (r.head, r.pos))
            .collect();
        (facts, rules)
    }

    fn models_reduct(facts: u128, rules: &[(u128, u128)], j: u128) -> bool {
        facts & !j == 0 && rules.iter().all(|(h, b)| b & !j != 0 || h & j != 0)
    }

    fn stable_mask(&self, m: u128) -> bool {
        if !self.satisfies_disjunctive(m) {
            return false;
        }
        if self.strict_choice_bounds && !self.satisfies_choice_bounds(m) {
            return false;
        }
        let (facts, rules) = self.reduct_masks(m);
        if !Self::models_reduct(facts, &rules, m) {
            return false;
        }
        // Minimality: no proper subset of m models the reduct. Iterating
        // s -> (s - 1) & m visits every proper submask exactly once.
        if m != 0 {
            let mut s = m.wrapping_sub(1) & m;
            loop {
                if Self::models_reduct(facts, &rules, s) {
                    return false;
                }
                if s == 0 {
                    break;
                }
                s = s.wrapping_sub(1) & m;
            }
        }
        true
    }

    /// Stability: `i` satisfies the program (bounds included when strict)
    /// and is a minimal model of its own reduct.
    pub fn is_stable_model(&self, i: &Interpretation) -> bool {
        self.stable_mask(self.mask(i))
    }

    fn check_cap(&self) -> Result<(), OracleError> {
        if self.n > self.cap {
            return Err(OracleError::CapExceeded {
                atoms: self.n,
                cap: self.cap,
            });
        }
        Ok(())
    }

    /// All stable models, enumerated in increasing cardinality and by mask
    /// value within one cardinality.
    pub fn enumerate_stable_models(&self) -> Result<Vec<Interpretation>, OracleError> {
        self.check_cap()?;
        let n = self.n as u32;
        let mut out = Vec::new();
        let mut ticker = 0u32;
        for k in 0..=n {
            // Gosper's hack: all n-bit masks with exactly k ones, ascending.
            let mut m: u128 = if k == 0 { 0 } else { (1u128 << k) - 1 };
            loop {
                ticker = ticker.wrapping_add(1);
                if ticker.is_multiple_of(8192) {
                    if let Some(d) = self.deadline {
                        if Instant::now() > d {
                            return Err(OracleError::Timeout);
                        }
                    }
                }
                if self.stable_mask(m) {
                    out.push(self.unmask(m));
                }
                if k == 0 {
                    break;
                }
                let c = m & m.wrapping_neg();
                let r = m + c;
                let next = (((r ^ m) >> 2) / c) | r;
                if next >= 1u128 << n {
                    break;
                }
                m = next;
            }
        }
        Ok(out)
    }

    /// Atoms of `query` true in every stable model, or `Incoherent` when
    /// there are none.
    pub fn cautious_consequences_bruteforce(
        &self,
        query: &BTreeSet<AtomId>,
    ) -> Result<CautiousResult, OracleError> {
        let models = self.enumerate_stable_models()?;
        if models.is_empty() {
            return Ok(CautiousResult::Incoherent);
        }
        let mut inter = query.clone();
        inter.remove(&AtomId::FALSE);
        for m in &models {
            inter.retain(|a| m.contains(*a));
            if inter.is_empty() {
                break;
            }
        }
        Ok(CautiousResult::Consequences(inter))
    }

    /// True if no other stable model has a strictly smaller projection on
    /// `objective`. Errors unless `i` is itself a stable model.
    pub fn is_minimal_wrt(
        &self,
        i: &Interpretation,
        objective: &BTreeSet<AtomId>,
    ) -> Result<bool, OracleError> {
        if !self.is_stable_model(i) {
            return Err(OracleError::NotAStableModel);
        }
        let proj: BTreeSet<AtomId> = objective
            .iter()
            .copied()
            .filter(|a| i.contains(*a))
            .collect();
        for m in self.enumerate_stable_models()? {
            let mp: BTreeSet<AtomId> = objective
                .iter()
                .copied()
                .filter(|a| m.contains(*a))
                .collect();
            if mp.is_subset(&proj) && mp != proj {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Smallest |I ∩ objective| over all stable models, or None when the
    /// program is incoherent.
    pub fn minimum_projection_size(
        &self,
        objective: &BTreeSet<AtomId>,
    ) -> Result<Option<usize>, OracleError> {
        let models = self.enumerate_stable_models()?;
        Ok(models
            .iter()
            .map(|m| objective.iter().filter(|a| m.contains(**a)).count())
            .min())
    }

    /// True iff extending the program with a constraint `:- complement(l)`
    /// for every literal of `c` leaves it without stable models.
    pub fn is_unsat_core(&self, c: &[Literal]) -> Result<bool, OracleError> {
        self.check_cap()?;
        let mut extended = self.program.clone();
        for lit in c {
            extended.disjunctive.push(DisjunctiveRule {
                head: BTreeSet::new(),
                body: [lit.complement()].into_iter().collect(),
            });
        }
        let oracle = Oracle::new(&extended)?
            .with_cap(self.cap)
            .with_strict_choice_bounds(self.strict_choice_bounds)
            .with_deadline(self.deadline);
        Ok(oracle.enumerate_stable_models()?.is_empty())
    }
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::parse::parse_text;

    /// Two interleaved choices feeding four derived atoms; used throughout
    /// the test suite because its four stable models are known exactly.
    pub(crate) const RUNNING: &str = "\
a | b.
c | d.
q1 :- a.
q1 :- b.
q2 :- c.
q3 :- not c.
q3 :- not d.
q4 :- d.
#query q1, q2, q3, q4.
";

    fn interp(p: &Program, names: &[&str]) -> Interpretation {
        Interpretation::from_atoms(names.iter().map(|n| p.atoms.lookup(n).unwrap()))
    }

    fn names(p: &Program, i: &Interpretation) -> Vec<String> {
        i.iter().map(|a| p.atoms.name(a).to_string()).collect()
    }

    #[test]
    fn running_example_has_exactly_four_stable_models() {
        let p = parse_text(RUNNING).unwrap();
        let oracle = Oracle::new(&p).unwrap();
        let models = oracle.enumerate_stable_models().unwrap();
        let got: BTreeSet<Vec<String>> = models.iter().map(|m| names(&p, m)).collect();
        let want: BTreeSet<Vec<String>> = [
            vec!["a", "d", "q1", "q3", "q4"],
            vec!["a", "c", "q1", "q2", "q3"],
            vec!["b", "d", "q1", "q3", "q4"],
            vec!["b", "c", "q1", "q2", "q3"],
        ]
        .into_iter()
        .map(|v| v.into_iter().map(String::from).collect())
        .collect();
        assert_eq!(got, want);
    }

    #[test]
    fn running_example_cautious_consequences() {
        let p = parse_text(RUNNING).unwrap();
        let oracle = Oracle::new(&p).unwrap();
        let out = oracle.cautious_consequences_bruteforce(&p.query).unwrap();
        match out {
            CautiousResult::Consequences(atoms) => {
                let names: Vec<&str> = atoms.iter().map(|a| p.atoms.name(*a)).collect();
                assert_eq!(names, vec!["q1", "q3"]);
            }
            CautiousResult::Incoherent => panic!("running example is coherent"),
        }
    }

    #[test]
    fn reduct_of_running_example_under_i2() {
        let p = parse_text(RUNNING).unwrap();
        let oracle = Oracle::new(&p).unwrap();
        let i2 = interp(&p, &["a", "c", "q1", "q2", "q3"]);
        let reduct = oracle.reduct(&i2);
        assert!(reduct.facts.is_empty());
        // r6 (q3 :- not c) is deleted because c holds; the other seven stay.
        assert_eq!(reduct.rules.len(), 7);
        let q3 = p.atoms.lookup("q3").unwrap();
        let from_r7 = reduct
            .rules
            .iter()
            .find(|r| r.head == vec![q3] && r.body.is_empty());
        assert!(from_r7.is_some(), "r7 keeps q3 with an emptied body");
        for r in &reduct.rules {
            assert!(!r.body.iter().any(|a| a.is_false_atom()));
        }
    }

    #[test]
    fn choice_reduct_keeps_only_true_positive_literals() {
        let p = parse_text("1 { a, not b }.\nc :- a.").unwrap();
        let oracle = Oracle::new(&p).unwrap();
        let i = interp(&p, &["a", "c"]);
        let reduct = oracle.reduct(&i);
        assert_eq!(
            names(&p, &Interpretation::from_atoms(reduct.facts.clone())),
            vec!["a"]
        );
        let empty = interp(&p, &[]);
        assert!(oracle.reduct(&empty).facts.is_empty());
    }

    #[test]
    fn is_model_checks_bounds_and_rules() {
        let p = parse_text("a | b.\n1 { c }.").unwrap();
        let oracle = Oracle::new(&p).unwrap();
        assert!(oracle.is_model(&interp(&p, &["a", "c"])));
        assert!(
            !oracle.is_model(&interp(&p, &["a"])),
            "choice bound 1 unmet"
        );
        assert!(!oracle.is_model(&interp(&p, &["c"])), "disjunction unmet");
    }

    #[test]
    fn stability_rejects_unsupported_and_nonminimal_sets() {
        let p = parse_text("a | b.").unwrap();
        let oracle = Oracle::new(&p).unwrap();
        assert!(oracle.is_stable_model(&interp(&p, &["a"])));
        assert!(oracle.is_stable_model(&interp(&p, &["b"])));
        assert!(
            !oracle.is_stable_model(&interp(&p, &["a", "b"])),
            "not minimal"
        );
        assert!(
            !oracle.is_stable_model(&interp(&p, &[])),
            "rule unsatisfied"
        );
    }

    #[test]
    fn even_negation_cycle_has_two_models_odd_has_none() {
        let even = parse_text("a :- not b.\nb :- not a.").unwrap();
        let oracle = Oracle::new(&even).unwrap();
        assert_eq!(oracle.enumerate_stable_models().unwrap().len(), 2);

        let odd = parse_text("a :- not a.").unwrap();
        let oracle = Oracle::new(&odd).unwrap();
        assert!(oracle.enumerate_stable_models().unwrap().is_empty());
    }

    #[test]
    fn positive_loops_are_unfounded() {
        let p = parse_text("a :- b.\nb :- a.").unwrap();
        let oracle = Oracle::new(&p).unwrap();
        let models = oracle.enumerate_stable_models().unwrap();
        assert_eq!(models, vec![Interpretation::empty()]);
        assert!(!oracle.is_stable_model(&interp(&p, &["a", "b"])));
    }

    #[test]
    fn strictness_switch_changes_choice_bound_enforcement() {
        let p = parse_text("1 { a }.").unwrap();
        let strict = Oracle::new(&p).unwrap();
        let got: Vec<usize> = strict
            .enumerate_stable_models()
            .unwrap()
            .iter()
            .map(|m| m.len())
            .collect();
        assert_eq!(got, vec![1], "strict mode forces a");

        let lax = Oracle::new(&p).unwrap().with_strict_choice_bounds(false);
        let got: Vec<usize> = lax
            .enumerate_stable_models()
            .unwrap()
            .iter()
            .map(|m| m.len())
            .collect();
        assert_eq!(got, vec![0, 1], "lax mode also admits the empty set");
    }

    #[test]
    fn incoherent_program_is_an_answer_not_an_error() {
        let p = parse_text("a. :- a.").unwrap();
        let oracle = Oracle::new(&p).unwrap();
        assert_eq!(
            oracle.cautious_consequences_bruteforce(&p.query).unwrap(),
            CautiousResult::Incoherent
        );
    }

    #[test]
    fn empty_query_on_coherent_program_is_empty() {
        let p = parse_text("a.\n#query.\n").unwrap();
        let oracle = Oracle::new(&p).unwrap();
        assert_eq!(
            oracle.cautious_consequences_bruteforce(&p.query).unwrap(),
            CautiousResult::Consequences(BTreeSet::new())
        );
    }

    #[test]
    fn cap_refusal_names_the_numbers() {
        let mut b = crate::ProgramBuilder::new();
        for i in 0..23 {
            b.fact(&format!("x{i}"));
        }
        let p = b.build();
        let oracle = Oracle::new(&p).unwrap();
        match oracle.enumerate_stable_models() {
            Err(OracleError::CapExceeded { atoms: 23, cap: 22 }) => {}
            other => panic!("expected cap refusal, got {other:?}"),
        }
        // is_model still works above the enumeration cap.
        let all = Interpretation::from_atoms(p.atoms.atoms());
        assert!(oracle.is_model(&all));
    }

    #[test]
    fn core_oracle_on_running_example() {
        let p = parse_text(RUNNING).unwrap();
        let oracle = Oracle::new(&p).unwrap();
        let q1 = p.atoms.lookup("q1").unwrap();
        let q2 = p.atoms.lookup("q2").unwrap();
        assert!(oracle.is_unsat_core(&[Literal::negative(q1)]).unwrap());
        assert!(!oracle.is_unsat_core(&[Literal::negative(q2)]).unwrap());
        // Supersets of a core stay cores.
        assert!(oracle
            .is_unsat_core(&[Literal::negative(q1), Literal::negative(q2)])
            .unwrap());
        assert!(
            !oracle.is_unsat_core(&[]).unwrap(),
            "empty core means incoherent"
        );
    }

    #[test]
    fn cautious_membership_matches_core_membership() {
        // One direction of the correspondence between cautious atoms and
        // singleton cores, checked exhaustively on the running example.
        let p = parse_text(RUNNING).unwrap();
        let oracle = Oracle::new(&p).unwrap();
        let cautious = match oracle.cautious_consequences_bruteforce(&p.query).unwrap() {
            CautiousResult::Consequences(c) => c,
            _ => unreachable!(),
        };
        for a in p.query.iter() {
            let is_core = oracle.is_unsat_core(&[Literal::negative(*a)]).unwrap();
            assert_eq!(is_core, cautious.contains(a), "atom {}", p.atoms.name(*a));
        }
    }

    #[test]
    fn minimality_oracle_on_running_example() {
        let p = parse_text(RUNNING).unwrap();
        let oracle = Oracle::new(&p).unwrap();
        let objective: BTreeSet<AtomId> = p.query.clone();
        let i2 = interp(&p, &["a", "c", "q1", "q2", "q3"]);
        let i1 = interp(&p, &["a", "d", "q1", "q3", "q4"]);
        assert!(oracle.is_minimal_wrt(&i2, &objective).unwrap());
        assert!(
            oracle.is_minimal_wrt(&i1, &objective).unwrap(),
            "projections are incomparable"
        );
        // Every stable model contains exactly three of the four query atoms.
        assert_eq!(oracle.minimum_projection_size(&objective).unwrap(), Some(3));
        let not_a_model = interp(&p, &["a", "b"]);
        assert_eq!(
            oracle.is_minimal_wrt(&not_a_model, &objective),
            Err(OracleError::NotAStableModel)
        );
    }

    #[test]
    fn models_form_an_antichain_under_their_reducts() {
        let p = parse_text(RUNNING).unwrap();
        let oracle = Oracle::new(&p).unwrap();
        let models = oracle.enumerate_stable_models().unwrap();
        for i in &models {
            let reduct = oracle.reduct(i);
            for j in &models {
                if j.len() < i.len() && j.iter().all(|a| i.contains(a)) {
                    let jm: BTreeSet<AtomId> = j.iter().collect();
                    let sat = reduct.facts.iter().all(|f| jm.contains(f))
                        && reduct.rules.iter().all(|r| {
                            !r.body.iter().all(|b| jm.contains(b))
                                || r.head.iter().any(|h| jm.contains(h))
                        });
                    assert!(!sat, "a smaller model models the larger one's reduct");
                }
            }
        }
    }

    #[test]
    fn deadline_interrupts_enumeration() {
        let mut b = crate::ProgramBuilder::new();
        for i in 0..20 {
            b.choice(0, &[&format!("x{i}")], &[]);
        }
        let p = b.build();
        let oracle = Oracle::new(&p)
            .unwrap()
            .with_deadline(Some(Instant::now() - std::time::Duration::from_millis(1)));
        assert_eq!(oracle.enumerate_stable_models(), Err(OracleError::Timeout));
    }
}
