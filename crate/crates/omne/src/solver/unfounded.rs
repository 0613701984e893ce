//! Unfounded-set detection for positive recursion.
//!
//! Completion clauses accept assignments in which a cycle of atoms supports
//! itself (a derived from b, b from a). At every propagation fixpoint this
//! module checks each positive-recursion component: atoms for which no rule
//! can still fire from outside the cycle are unfounded and must be false.
//! For each unfounded atom a clause `not a ∨ external-supports` is learned,
//! so the deduction participates in conflict analysis like any other.
//!
//! A cheap source-pointer check avoids recomputation: each component
//! member caches the rule that last justified it. While every member that
//! is not assigned false still has its cached rule's body representation
//! non-false, the justification order from the last rebuild remains valid
//! (newer sources only ever reference members justified before them), so
//! no unfounded set can exist and the component is skipped. Backtracking
//! only unfalsifies literals, which never invalidates that argument.

use super::{CdclSolver, Conflict, LBool, Reason, SLit, Var};
use std::collections::BTreeSet;

#[derive(Debug, Default)]
pub(crate) struct SccData {
    pub(crate) members: Vec<Var>,
    /// Per member: the rules that can derive it.
    pub(crate) rules: Vec<Vec<UfRule>>,
    /// Per member: (member, rule) pairs that mention it positively.
    pub(crate) consumers: Vec<Vec<(u32, u32)>>,
    /// Per member: rule that justified it at the last rebuild.
    pub(crate) source: Vec<Option<u32>>,
}

#[derive(Debug)]
pub(crate) struct UfRule {
    /// Body representation literal; false exactly when the body is false.
    pub(crate) support: SLit,
    /// Positive body atoms inside the same component, as member indices.
    pub(crate) local_pos: Vec<u32>,
}

pub(crate) enum UfOutcome {
    Clean,
    Progress,
    Conflict(Conflict),
}

impl CdclSolver {
    /// Collects the non-trivial positive-recursion components (size two or
    /// more, or a direct self-loop) among atoms that need support: atoms
    /// that are not free via a choice rule and not facts.
    pub(crate) fn build_sccs(&mut self) {
        use petgraph::graph::{DiGraph, NodeIndex};
        let rec = std::mem::take(&mut self.atom_rules);
        let n_atoms = rec.len();
        let mut cand = vec![false; n_atoms];
        for (idx, rules) in rec.iter().enumerate().skip(1) {
            if let Some(v) = self.var_of_atom.get(idx).copied().flatten() {
                cand[idx] = !self.choice_var[v] && !self.fact_var[v] && !rules.is_empty();
            }
        }
        let mut g: DiGraph<(), ()> = DiGraph::with_capacity(n_atoms, n_atoms);
        let nodes: Vec<NodeIndex> = (0..n_atoms).map(|_| g.add_node(())).collect();
        for idx in 1..n_atoms {
            if !cand[idx] {
                continue;
            }
            for (_, pos) in &rec[idx] {
                for b in pos {
                    if cand[b.index()] {
                        g.add_edge(nodes[idx], nodes[b.index()], ());
                    }
                }
            }
        }
        for comp in petgraph::algo::tarjan_scc(&g) {
            let mut atoms: Vec<usize> = comp
                .iter()
                .map(|ni| ni.index())
                .filter(|&i| cand[i])
                .collect();
            if atoms.is_empty() {
                continue;
            }
            atoms.sort_unstable();
            let nontrivial = atoms.len() >= 2 || {
                let m = atoms[0];
                rec[m]
                    .iter()
                    .any(|(_, pos)| pos.iter().any(|b| b.index() == m))
            };
            if !nontrivial {
                continue;
            }
            let mut local = vec![u32::MAX; n_atoms];
            for (mi, &ai) in atoms.iter().enumerate() {
                local[ai] = mi as u32;
            }
            let rules: Vec<Vec<UfRule>> = atoms
                .iter()
                .map(|&ai| {
                    rec[ai]
                        .iter()
                        .map(|(sup, pos)| {
                            let mut lp: Vec<u32> = pos
                                .iter()
                                .filter(|b| local[b.index()] != u32::MAX)
                                .map(|b| local[b.index()])
                                .collect();
                            lp.sort_unstable();
                            lp.dedup();
                            UfRule {
                                support: *sup,
                                local_pos: lp,
                            }
                        })
                        .collect()
                })
                .collect();
            let mut consumers: Vec<Vec<(u32, u32)>> = vec![Vec::new(); atoms.len()];
            for (mi, rs) in rules.iter().enumerate() {
                for (ri, r) in rs.iter().enumerate() {
                    for &p in &r.local_pos {
                        consumers[p as usize].push((mi as u32, ri as u32));
                    }
                }
            }
            let members: Vec<Var> = atoms
                .iter()
                .map(|&ai| self.var_of_atom[ai].unwrap())
                .collect();
            let n = members.len();
            self.sccs.push(SccData {
                members,
                rules,
                consumers,
                source: vec![None; n],
            });
        }
    }

    pub(crate) fn unfounded_check(&mut self) -> UfOutcome {
        for si in 0..self.sccs.len() {
            if self.scc_quick_ok(si) {
                continue;
            }
            match self.scc_recompute(si) {
                UfOutcome::Clean => {}
                other => return other,
            }
        }
        UfOutcome::Clean
    }

    fn scc_quick_ok(&self, si: usize) -> bool {
        let s = &self.sccs[si];
        s.members.iter().enumerate().all(|(mi, &v)| {
            self.assigns[v] == LBool::False
                || match s.source[mi] {
                    None => false,
                    Some(ri) => self.value(s.rules[mi][ri as usize].support) != LBool::False,
                }
        })
    }

    /// Rebuilds the justified subset of one component from scratch and
    /// handles whatever remains unjustified.
    fn scc_recompute(&mut self, si: usize) -> UfOutcome {
        let mut scc = std::mem::take(&mut self.sccs[si]);
        let n = scc.members.len();
        let mut missing: Vec<Vec<u32>> = scc
            .rules
            .iter()
            .map(|rs| rs.iter().map(|r| r.local_pos.len() as u32).collect())
            .collect();
        let mut justified = vec![false; n];
        let mut source: Vec<Option<u32>> = vec![None; n];
        let mut work: Vec<u32> = Vec::new();
        for mi in 0..n {
            for (ri, r) in scc.rules[mi].iter().enumerate() {
                if missing[mi][ri] == 0 && self.value(r.support) != LBool::False {
                    justified[mi] = true;
                    source[mi] = Some(ri as u32);
                    work.push(mi as u32);
                    break;
                }
            }
        }
        let mut head = 0;
        while head < work.len() {
            let m = work[head] as usize;
            head += 1;
            for k in 0..scc.consumers[m].len() {
                let (cm, cr) = scc.consumers[m][k];
                let (cm, cr) = (cm as usize, cr as usize);
                missing[cm][cr] -= 1;
                if !justified[cm]
                    && missing[cm][cr] == 0
                    && self.value(scc.rules[cm][cr].support) != LBool::False
                {
                    justified[cm] = true;
                    source[cm] = Some(cr as u32);
                    work.push(cm as u32);
                }
            }
        }
        let in_unfounded: Vec<bool> = (0..n)
            .map(|mi| !justified[mi] && self.assigns[scc.members[mi]] != LBool::False)
            .collect();
        let unfounded: Vec<usize> = (0..n).filter(|&mi| in_unfounded[mi]).collect();
        scc.source = source;
        if unfounded.is_empty() {
            self.sccs[si] = scc;
            return UfOutcome::Clean;
        }
        self.stats.unfounded_sets += 1;
        // External supports of the whole set: bodies of member rules that do
        // not depend on the set itself. All are false here — otherwise their
        // heads would have been justified.
        let mut ext: BTreeSet<SLit> = BTreeSet::new();
        for &mi in &unfounded {
            for r in &scc.rules[mi] {
                if r.local_pos.iter().all(|&p| !in_unfounded[p as usize]) {
                    debug_assert_eq!(
                        self.value(r.support),
                        LBool::False,
                        "external support of an unfounded set must be false at fixpoint"
                    );
                    ext.insert(r.support);
                }
            }
        }
        let ext: Vec<SLit> = ext.into_iter().collect();
        let planned: Vec<Var> = unfounded.iter().map(|&mi| scc.members[mi]).collect();
        self.sccs[si] = scc;

        for v in planned {
            if self.assigns[v] == LBool::False {
                continue;
            }
            let na = SLit::new(v, true);
            if ext.is_empty() {
                // No rule ever escapes the set: its atoms are false in every
                // stable model, which a one-literal clause records.
                let idx = self.unit_loop_clause(na);
                if self.value(na) == LBool::False {
                    return UfOutcome::Conflict(Conflict::Clause(idx));
                }
                self.assign(na, Reason::Clause(idx));
            } else {
                let mut lits = vec![na];
                lits.extend(ext.iter().copied());
                if self.value(na) == LBool::False {
                    // Conflicting: order the literals newest-first so the
                    // watches stay valid after backjumping.
                    lits.sort_by_key(|l| std::cmp::Reverse(self.trail_pos[l.var()]));
                    let idx = self.add_learnt_clause(lits);
                    return UfOutcome::Conflict(Conflict::Clause(idx));
                }
                let mut mx = 1;
                for k in 2..lits.len() {
                    if self.trail_pos[lits[k].var()] > self.trail_pos[lits[mx].var()] {
                        mx = k;
                    }
                }
                lits.swap(1, mx);
                let idx = self.add_learnt_clause(lits);
                self.assign(na, Reason::Clause(idx));
            }
        }
        UfOutcome::Progress
    }
}
