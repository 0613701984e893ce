//! Shared harness for the integration tests: a seeded generator for small
//! head-cycle-free programs and thin wrappers over the oracle and engine.

#![allow(dead_code)]

use std::collections::BTreeSet;

use omne::oracle::Oracle;
use omne::{
    cautious_reasoning, check_head_cycle_free, AtomId, CautiousResult, EngineOptions, EngineStats,
    Interpretation, Literal, Program, ProgramBuilder, ProgressEvent, Strategy,
};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// Builds a random ground program with 3..=12 atoms and 1..=25 rules.
///
/// Roughly one rule in five is a choice rule; the rest are disjunctive
/// rules whose head size is biased toward singletons but includes
/// constraints and longer disjunctions. Head-cycle-free is enforced by
/// regenerating until the check passes, so every sample works with the
/// shifting-based translation. The query covers all atoms. A healthy share
/// of samples is incoherent (conflicting constraints or unsatisfiable
/// choice bounds), which the tests rely on.
pub fn random_program(rng: &mut ChaCha8Rng) -> Program {
    loop {
        let p = random_candidate(rng);
        if check_head_cycle_free(&p).is_ok() {
            return p;
        }
    }
}

fn random_candidate(rng: &mut ChaCha8Rng) -> Program {
    let n_atoms: usize = rng.gen_range(3..=12);
    let names: Vec<String> = (1..=n_atoms).map(|i| format!("x{i}")).collect();
    let n_rules: usize = rng.gen_range(1..=25);

    let mut b = ProgramBuilder::new();
    // Intern every atom up front so the query is stable even when a rule
    // draw never mentions some atom.
    for name in &names {
        b.atom(name);
    }

    for _ in 0..n_rules {
        if rng.gen_bool(0.18) {
            // Choice rule over 1..=4 literals; the bound occasionally
            // exceeds the literal count, which is legal input and
            // unsatisfiable under strict bounds.
            let len = rng.gen_range(1..=4usize);
            let mut pos: Vec<&str> = Vec::new();
            let mut neg: Vec<&str> = Vec::new();
            for _ in 0..len {
                let name = names[rng.gen_range(0..n_atoms)].as_str();
                if rng.gen_bool(0.30) {
                    neg.push(name);
                } else {
                    pos.push(name);
                }
            }
            let bound = if rng.gen_bool(0.05) {
                len as u32 + 1
            } else {
                rng.gen_range(0..=len as u32)
            };
            b.choice(bound, &pos, &neg);
        } else {
            let head_len = match rng.gen_range(0..100) {
                0..=9 => 0,
                10..=64 => 1,
                65..=89 => 2,
                _ => 3,
            };
            let mut head: Vec<&str> = Vec::new();
            let mut picked = BTreeSet::new();
            while head.len() < head_len && picked.len() < n_atoms {
                let i = rng.gen_range(0..n_atoms);
                if picked.insert(i) {
                    head.push(names[i].as_str());
                }
            }
            // Constraints always get a non-empty body: a bare `:- .` kills
            // the whole program and drowns out the interesting cases.
            let body_len = if head.is_empty() {
                rng.gen_range(1..=4usize)
            } else {
                rng.gen_range(0..=4usize)
            };
            let mut pos: Vec<&str> = Vec::new();
            let mut neg: Vec<&str> = Vec::new();
            for _ in 0..body_len {
                let name = names[rng.gen_range(0..n_atoms)].as_str();
                if rng.gen_bool(0.35) {
                    neg.push(name);
                } else {
                    pos.push(name);
                }
            }
            b.rule(&head, &pos, &neg);
        }
    }
    b.query_all();
    b.build()
}

/// Draws 1..=3 assumption literals over distinct atoms, each sign fair.
pub fn random_assumption_set(rng: &mut ChaCha8Rng, p: &Program) -> Vec<Literal> {
    let atoms: Vec<AtomId> = p.atoms.atoms().collect();
    let k = rng.gen_range(1..=3usize.min(atoms.len()));
    let mut picked = BTreeSet::new();
    while picked.len() < k {
        picked.insert(atoms[rng.gen_range(0..atoms.len())]);
    }
    picked
        .into_iter()
        .map(|a| {
            if rng.gen_bool(0.5) {
                Literal::negative(a)
            } else {
                Literal::positive(a)
            }
        })
        .collect()
}

/// Ground-truth cautious consequences over the program's own query set.
pub fn oracle_cc(p: &Program) -> CautiousResult {
    Oracle::new(p)
        .expect("oracle rejected a generated program")
        .cautious_consequences_bruteforce(&p.query)
        .expect("oracle enumeration failed")
}

/// Ground-truth stable-model enumeration.
pub fn all_models(p: &Program) -> Vec<Interpretation> {
    Oracle::new(p)
        .expect("oracle rejected a generated program")
        .enumerate_stable_models()
        .expect("oracle enumeration failed")
}

/// Runs one strategy, collecting the progress trace.
pub fn run_strategy(
    p: &Program,
    strategy: Strategy,
    seed: u64,
) -> (CautiousResult, EngineStats, Vec<ProgressEvent>) {
    let opts = EngineOptions {
        strategy,
        seed,
        ..EngineOptions::default()
    };
    let mut events = Vec::new();
    let mut sink = |e: ProgressEvent| events.push(e);
    let (result, stats) =
        cautious_reasoning(p, &opts, &mut sink).expect("engine failed on a generated program");
    (result, stats, events)
}
