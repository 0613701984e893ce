use super::*;
use crate::oracle::tests::RUNNING;
use crate::oracle::Oracle;
use crate::parse::parse_text;
use crate::program::Program;

fn build(text: &str) -> (Program, CdclSolver) {
    let p = parse_text(text).unwrap();
    let s = translate(&p, &TranslateOptions::default()).unwrap();
    (p, s)
}

fn pos(s: &CdclSolver, name: &str) -> Literal {
    Literal::positive(s.atom_table().lookup(name).unwrap())
}

fn neg(s: &CdclSolver, name: &str) -> Literal {
    Literal::negative(s.atom_table().lookup(name).unwrap())
}

fn interp(p: &Program, names: &[&str]) -> Interpretation {
    Interpretation::from_atoms(names.iter().map(|n| p.atoms.lookup(n).unwrap()))
}

fn model(r: Result<SolveResult, SolveError>) -> Interpretation {
    match r.unwrap() {
        SolveResult::Model(m) => m,
        SolveResult::Core(c) => panic!("expected a model, got core {c:?}"),
    }
}

/// Solves repeatedly, excluding each model over the program's atoms, until
/// unsatisfiable. Checks every model against the learned-clause entailment
/// hook on the way.
fn enumerate_by_blocking(p: &Program, s: &mut CdclSolver) -> Vec<Interpretation> {
    let mut out = Vec::new();
    loop {
        match s.compute_stable_model(&[]).unwrap() {
            SolveResult::Model(m) => {
                s.check_learned_entailment(&m).unwrap();
                let block: Vec<Literal> = p
                    .atoms
                    .atoms()
                    .map(|a| {
                        if m.contains(a) {
                            Literal::positive(a)
                        } else {
                            Literal::negative(a)
                        }
                    })
                    .collect();
                s.add_integrity_constraint(&block).unwrap();
                out.push(m);
            }
            SolveResult::Core(c) => {
                assert!(c.is_empty(), "no assumptions were given");
                return out;
            }
        }
    }
}

#[test]
fn first_model_with_seed_zero_follows_the_deterministic_branching_order() {
    // Activities start at zero, so branching picks the lowest variable with
    // saved phase false: not a (forcing b, q1), then not c (forcing d, q3,
    // q4). Two decisions, no conflicts.
    let (p, mut s) = build(RUNNING);
    let m = model(s.compute_stable_model(&[]));
    assert_eq!(m, interp(&p, &["b", "d", "q1", "q3", "q4"]));
    assert_eq!(s.stats().decisions, 2);
    assert_eq!(s.stats().conflicts, 0);
    assert_eq!(s.stats().solve_calls, 1);
}

#[test]
fn assumptions_fix_a_model_by_propagation_alone() {
    let (p, mut s) = build(RUNNING);
    let assume = [pos(&s, "b"), neg(&s, "q2")];
    let m = model(s.compute_stable_model(&assume));
    assert_eq!(m, interp(&p, &["b", "d", "q1", "q3", "q4"]));
}

#[test]
fn failed_assumptions_return_an_unsatisfiable_subset() {
    // q1 holds in every stable model, so {not q1} alone is the core; the
    // jointly assumed {not q2} is satisfiable and must not appear.
    let (p, mut s) = build(RUNNING);
    let assume = [neg(&s, "q1"), neg(&s, "q2")];
    match s.compute_stable_model(&assume).unwrap() {
        SolveResult::Core(c) => {
            assert_eq!(c, [neg(&s, "q1")].into_iter().collect::<BTreeSet<_>>());
        }
        SolveResult::Model(m) => panic!("expected a core, got model {m:?}"),
    }
    // The refutation of q1 was learned at the root: later calls still
    // enumerate all four stable models of the program.
    let ms = enumerate_by_blocking(&p, &mut s);
    assert_eq!(ms.len(), 4);
}

#[test]
fn contradictory_assumptions_core_contains_both_sides() {
    let (_p, mut s) = build(RUNNING);
    let assume = [pos(&s, "a"), neg(&s, "a")];
    match s.compute_stable_model(&assume).unwrap() {
        SolveResult::Core(c) => {
            let want: BTreeSet<Literal> = [pos(&s, "a"), neg(&s, "a")].into_iter().collect();
            assert_eq!(c, want);
        }
        SolveResult::Model(m) => panic!("expected a core, got model {m:?}"),
    }
}

#[test]
fn branching_preferences_steer_the_first_model() {
    // Preferring all query atoms false yields a model with as few of them
    // as the preference order admits: {b, d, q1, q3, q4}.
    let (p, mut s) = build(RUNNING);
    let prefs = [neg(&s, "q1"), neg(&s, "q2"), neg(&s, "q3"), neg(&s, "q4")];
    s.set_branching_preference(Some(&prefs));
    let m = model(s.compute_stable_model(&[]));
    assert_eq!(m, interp(&p, &["b", "d", "q1", "q3", "q4"]));
    s.set_branching_preference(None);
}

#[test]
fn blocking_enumeration_agrees_with_the_oracle() {
    let (p, mut s) = build(RUNNING);
    let got: BTreeSet<Interpretation> = enumerate_by_blocking(&p, &mut s).into_iter().collect();
    let want: BTreeSet<Interpretation> = Oracle::new(&p)
        .unwrap()
        .enumerate_stable_models()
        .unwrap()
        .into_iter()
        .collect();
    assert_eq!(got.len(), 4);
    assert_eq!(got, want);
}

#[test]
fn empty_program_has_the_empty_model() {
    let (_p, mut s) = build("");
    assert_eq!(model(s.compute_stable_model(&[])), Interpretation::empty());
}

#[test]
fn unfounded_loop_with_no_escape_makes_the_program_incoherent() {
    // a and b only support each other, so both must be false; that forces
    // c, which the constraint forbids. No stable model exists, and the
    // failure is permanent across calls.
    let (_p, mut s) = build("a :- b. b :- a. c :- not a. :- c.");
    match s.compute_stable_model(&[]).unwrap() {
        SolveResult::Core(c) => assert!(c.is_empty()),
        SolveResult::Model(m) => panic!("expected incoherence, got {m:?}"),
    }
    match s.compute_stable_model(&[pos(&s, "b")]).unwrap() {
        SolveResult::Core(c) => assert!(c.is_empty(), "incoherence overrides assumptions"),
        SolveResult::Model(m) => panic!("expected incoherence, got {m:?}"),
    }
}

#[test]
fn loop_with_an_external_rule_keeps_the_supported_model() {
    let text = "a :- b. b :- a. a :- c. c :- not d. d :- not c.";
    let (p, mut s) = build(text);
    let got: BTreeSet<Interpretation> = enumerate_by_blocking(&p, &mut s).into_iter().collect();
    let want: BTreeSet<Interpretation> = Oracle::new(&p)
        .unwrap()
        .enumerate_stable_models()
        .unwrap()
        .into_iter()
        .collect();
    assert_eq!(want.len(), 2, "models are {{a,b,c}} and {{d}}");
    assert_eq!(got, want);
    assert!(
        s.stats().unfounded_sets > 0,
        "the loop {{a,b}} must be detected at least once"
    );
}

#[test]
fn choice_bounds_are_enforced_strictly_and_ignored_when_lax() {
    let text = "2 {a, b, c}.";
    let p = parse_text(text).unwrap();

    let mut strict = translate(&p, &TranslateOptions::default()).unwrap();
    let got: BTreeSet<Interpretation> =
        enumerate_by_blocking(&p, &mut strict).into_iter().collect();
    let want: BTreeSet<Interpretation> = Oracle::new(&p)
        .unwrap()
        .enumerate_stable_models()
        .unwrap()
        .into_iter()
        .collect();
    assert_eq!(
        got.len(),
        4,
        "subsets of {{a,b,c}} with at least two members"
    );
    assert_eq!(got, want);

    let lax_opts = TranslateOptions {
        strict_choice_bounds: false,
        ..Default::default()
    };
    let mut lax = translate(&p, &lax_opts).unwrap();
    let got: BTreeSet<Interpretation> = enumerate_by_blocking(&p, &mut lax).into_iter().collect();
    let want: BTreeSet<Interpretation> = Oracle::new(&p)
        .unwrap()
        .with_strict_choice_bounds(false)
        .enumerate_stable_models()
        .unwrap()
        .into_iter()
        .collect();
    assert_eq!(got.len(), 8, "without the bound every subset is stable");
    assert_eq!(got, want);
}

#[test]
fn shared_bodies_get_one_definition_variable() {
    let text = "{a}. {b}. {c}. x :- a, b. y :- a, b. z :- a, not c.";
    let (p, mut s) = build(text);
    assert_eq!(
        s.body_map.len(),
        2,
        "{{a,b}} is shared; {{a, not c}} is separate"
    );
    let got: BTreeSet<Interpretation> = enumerate_by_blocking(&p, &mut s).into_iter().collect();
    let want: BTreeSet<Interpretation> = Oracle::new(&p)
        .unwrap()
        .enumerate_stable_models()
        .unwrap()
        .into_iter()
        .collect();
    assert_eq!(got.len(), 8);
    assert_eq!(got, want);
}

#[test]
fn added_choice_rules_require_free_atoms() {
    let (_p, mut s) = build(RUNNING);
    let err = s.add_choice_rule(&[pos(&s, "a")], 0).unwrap_err();
    assert_eq!(err, SolveError::AtomNotFree("a".to_string()));
    // An existing non-free name cannot be re-opened as a free atom either.
    assert!(s.new_free_atom("a").is_err());
}

#[test]
fn fresh_free_atoms_can_carry_added_choice_rules() {
    let (p, mut s) = build(RUNNING);
    let x = s.new_free_atom("_x1").unwrap();
    assert_eq!(
        s.new_free_atom("_x1").unwrap(),
        x,
        "interning is idempotent"
    );
    s.add_choice_rule(&[Literal::positive(x)], 1).unwrap();
    let ms = enumerate_by_blocking(&p, &mut s);
    assert_eq!(
        ms.len(),
        4,
        "the forced free atom does not change the model count"
    );
    assert!(
        ms.iter().all(|m| m.contains(x)),
        "bound 1 forces the atom in every model"
    );
}

#[test]
fn integrity_constraints_narrow_later_calls() {
    let (p, mut s) = build(RUNNING);
    // Forbid b: only the two a-models remain.
    s.add_integrity_constraint(&[pos(&s, "b")]).unwrap();
    let ms = enumerate_by_blocking(&p, &mut s);
    assert_eq!(ms.len(), 2);
    let a = p.atoms.lookup("a").unwrap();
    assert!(ms.iter().all(|m| m.contains(a)));
}

#[test]
fn fact_violating_a_constraint_is_caught_at_translation() {
    let (_p, mut s) = build("a. :- a.");
    match s.compute_stable_model(&[]).unwrap() {
        SolveResult::Core(c) => assert!(c.is_empty()),
        SolveResult::Model(m) => panic!("expected incoherence, got {m:?}"),
    }
}

#[test]
fn assuming_falsity_itself_is_its_own_core() {
    let (p, mut s) = build(RUNNING);
    let f = Literal::positive(AtomId::FALSE);
    match s.compute_stable_model(&[f, pos(&s, "a")]).unwrap() {
        SolveResult::Core(c) => assert_eq!(c, [f].into_iter().collect::<BTreeSet<_>>()),
        SolveResult::Model(m) => panic!("expected a core, got {m:?}"),
    }
    // `not falsity` is vacuous and ignored.
    let nf = Literal::negative(AtomId::FALSE);
    let m = model(s.compute_stable_model(&[nf]));
    assert!(Oracle::new(&p).unwrap().is_stable_model(&m));
}

#[test]
fn unknown_atoms_in_assumptions_are_reported() {
    let p = parse_text(RUNNING).unwrap();
    let mut s = translate(&p, &TranslateOptions::default()).unwrap();
    // An atom id beyond this solver's table has no variable.
    let bad = Literal::positive(AtomId(999));
    assert_eq!(
        s.compute_stable_model(&[bad]).unwrap_err(),
        SolveError::UnknownAtom
    );
}

#[test]
fn deadline_interrupts_and_clears() {
    let (_p, mut s) = build(RUNNING);
    s.set_deadline(Some(Instant::now() - std::time::Duration::from_millis(1)));
    assert_eq!(
        s.compute_stable_model(&[]).unwrap_err(),
        SolveError::Timeout
    );
    s.set_deadline(None);
    let _ = model(s.compute_stable_model(&[]));
}

#[test]
fn identical_seeds_replay_identical_searches() {
    let p = parse_text(RUNNING).unwrap();
    let opts = TranslateOptions {
        strict_choice_bounds: true,
        seed: 12345,
    };
    let run = |p: &Program| {
        let mut s = translate(p, &opts).unwrap();
        let mut ms = Vec::new();
        ms.push(model(s.compute_stable_model(&[])));
        let block: Vec<Literal> = p
            .atoms
            .atoms()
            .map(|a| {
                if ms[0].contains(a) {
                    Literal::positive(a)
                } else {
                    Literal::negative(a)
                }
            })
            .collect();
        s.add_integrity_constraint(&block).unwrap();
        ms.push(model(s.compute_stable_model(&[])));
        (ms, s.stats().clone())
    };
    let (m1, s1) = run(&p);
    let (m2, s2) = run(&p);
    assert_eq!(m1, m2);
    assert_eq!(s1, s2);
}
