//! Counter-based propagation for lower-bound cardinality constraints
//! ("at least `bound` of these literals are true"), the clause-level form
//! of choice-rule bounds. Counters are kept in sync with the trail by
//! `assign` and `cancel_until`; this module holds the inference rules.

use super::{CdclSolver, Conflict, LBool, Reason, SLit, Var};

#[derive(Debug)]
pub(crate) struct CardConstraint {
    pub(crate) lits: Vec<SLit>,
    pub(crate) bound: u32,
    pub(crate) num_true: u32,
    pub(crate) num_false: u32,
}

impl CdclSolver {
    /// Installs a constraint at the root. A bound of zero is trivially
    /// satisfied and skipped; a bound above the literal count is
    /// unsatisfiable and makes the whole program so.
    pub(crate) fn add_card(&mut self, mut lits: Vec<SLit>, bound: u32) {
        debug_assert_eq!(self.decision_level(), 0);
        if !self.ok || bound == 0 {
            return;
        }
        // Repeated literals count once; a literal and its complement may
        // both appear (exactly one of the pair is true in any assignment).
        lits.sort_unstable();
        lits.dedup();
        if bound as usize > lits.len() {
            self.ok = false;
            return;
        }
        let ci = self.cards.len();
        let mut c = CardConstraint {
            lits,
            bound,
            num_true: 0,
            num_false: 0,
        };
        for &l in &c.lits {
            match self.value(l) {
                LBool::True => c.num_true += 1,
                LBool::False => c.num_false += 1,
                LBool::Undef => {}
            }
            self.card_occ[l.index()].push(ci as u32);
        }
        self.cards.push(c);
        if self.check_card(ci).is_some() {
            self.ok = false;
        }
    }

    /// Re-evaluates one constraint after a literal of it became false:
    /// conflict when too many are false, otherwise force the remainder
    /// true when the slack is exhausted.
    pub(crate) fn check_card(&mut self, ci: usize) -> Option<Conflict> {
        let n = self.cards[ci].lits.len() as u32;
        let slack = n - self.cards[ci].bound;
        if self.cards[ci].num_false > slack {
            return Some(Conflict::Card(ci as u32));
        }
        if self.cards[ci].num_false == slack {
            for k in 0..self.cards[ci].lits.len() {
                let l = self.cards[ci].lits[k];
                if self.value(l) == LBool::Undef {
                    self.assign(l, Reason::Card(ci as u32));
                }
            }
        }
        None
    }

    /// All currently false literals of the constraint: an entailed clause,
    /// every literal of which is false, as conflict analysis expects.
    pub(crate) fn card_falsified_lits(&self, ci: usize) -> Vec<SLit> {
        self.cards[ci]
            .lits
            .iter()
            .copied()
            .filter(|&l| self.value(l) == LBool::False)
            .collect()
    }

    /// The false literals that were assigned before the implied variable
    /// `v`: exactly the ones that exhausted the slack and forced it.
    pub(crate) fn card_reason_lits(&self, ci: usize, v: Var) -> Vec<SLit> {
        let vp = self.trail_pos[v];
        self.cards[ci]
            .lits
            .iter()
            .copied()
            .filter(|&l| {
                l.var() != v && self.value(l) == LBool::False && self.trail_pos[l.var()] < vp
            })
            .collect()
    }

    pub(crate) fn card_satisfied(&self, ci: usize) -> bool {
        let c = &self.cards[ci];
        c.lits
            .iter()
            .filter(|&&l| self.value(l) == LBool::True)
            .count()
            >= c.bound as usize
    }
}
