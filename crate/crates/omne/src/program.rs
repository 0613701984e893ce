//! Ground program representation shared by the parsers, the enumeration
//! oracle, and the solver: atoms, literals, disjunctive and choice rules.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

/// Dense atom identifier. Id 0 is reserved for the false atom.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct AtomId(pub u32);

impl AtomId {
    /// The always-false atom. Never appears in interpretations or queries.
    pub const FALSE: AtomId = AtomId(0);

    pub fn index(self) -> usize {
        self.0 as usize
    }

    pub fn is_false_atom(self) -> bool {
        self == Self::FALSE
    }
}

/// Internal display name of the false atom. Not parseable as input.
pub const FALSE_NAME: &str = "#false";

/// Returns true if `name` lies in the reserved namespace the parsers reject.
/// Internally synthesized atoms (relaxation atoms, unnamed ASPIF atoms) live
/// there, so reserved names can never collide with parsed input.
pub fn is_reserved_name(name: &str) -> bool {
    name.starts_with('_')
}

fn is_bare_name(name: &str) -> bool {
    let mut chars = name.chars();
    match chars.next() {
        Some(c) if c.is_ascii_lowercase() => {}
        _ => return false,
    }
    name != "not" && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

/// Interning table mapping atom names to dense ids. Name lookup is a
/// bijection; id 0 always holds the false atom.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AtomTable {
    names: Vec<String>,
    index: HashMap<String, AtomId>,
}

impl AtomTable {
    pub fn new() -> Self {
        let mut t = AtomTable {
            names: Vec::new(),
            index: HashMap::new(),
        };
        t.intern(FALSE_NAME);
        t
    }

    /// Returns the id for `name`, registering it if new.
    pub fn intern(&mut self, name: &str) -> AtomId {
        if let Some(&id) = self.index.get(name) {
            return id;
        }
        let id = AtomId(self.names.len() as u32);
        self.names.push(name.to_string());
        self.index.insert(name.to_string(), id);
        id
    }

    pub fn lookup(&self, name: &str) -> Option<AtomId> {
        self.index.get(name).copied()
    }

    pub fn name(&self, id: AtomId) -> &str {
        &self.names[id.index()]
    }

    /// Total number of atoms including the false atom.
    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        false // the false atom is always present
    }

    /// Count of real atoms, excluding the false atom.
    pub fn atom_count(&self) -> usize {
        self.names.len() - 1
    }

    /// All real atom ids in increasing order.
    pub fn atoms(&self) -> impl Iterator<Item = AtomId> + '_ {
        (1..self.names.len() as u32).map(AtomId)
    }

    /// Replaces the name of `id`. The new name must be unused.
    pub(crate) fn rename(&mut self, id: AtomId, name: &str) {
        debug_assert!(!self.index.contains_key(name));
        let old = std::mem::replace(&mut self.names[id.index()], name.to_string());
        self.index.remove(&old);
        self.index.insert(name.to_string(), id);
    }
}

impl Default for AtomTable {
    fn default() -> Self {
        Self::new()
    }
}

/// An atom or its default negation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Literal {
    pub atom: AtomId,
    pub negated: bool,
}

impl Literal {
    pub fn positive(atom: AtomId) -> Self {
        Literal {
            atom,
            negated: false,
        }
    }

    pub fn negative(atom: AtomId) -> Self {
        Literal {
            atom,
            negated: true,
        }
    }

    /// The complement: an involution swapping `a` and `not a`.
    pub fn complement(self) -> Self {
        Literal {
            atom: self.atom,
            negated: !self.negated,
        }
    }
}

/// A rule `h1 | ... | hm :- body`. An empty head (or one containing only the
/// false atom) makes it an integrity constraint.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DisjunctiveRule {
    pub head: BTreeSet<AtomId>,
    pub body: BTreeSet<Literal>,
}

impl DisjunctiveRule {
    pub fn is_constraint(&self) -> bool {
        self.head.iter().all(|a| a.is_false_atom())
    }

    /// Head atoms other than the false atom.
    pub fn head_atoms(&self) -> impl Iterator<Item = AtomId> + '_ {
        self.head.iter().copied().filter(|a| !a.is_false_atom())
    }

    pub fn positive_body(&self) -> impl Iterator<Item = AtomId> + '_ {
        self.body.iter().filter(|l| !l.negated).map(|l| l.atom)
    }

    pub fn negative_body(&self) -> impl Iterator<Item = AtomId> + '_ {
        self.body.iter().filter(|l| l.negated).map(|l| l.atom)
    }
}

/// A choice rule `bound { l1, ..., ln }`: an interpretation I satisfies it
/// when |lits+ ∩ I| + |lits- \ I| >= bound. An unsatisfiable bound is legal
/// input. Atoms occurring positively may be true without rule support.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChoiceRule {
    pub literals: BTreeSet<Literal>,
    pub bound: u32,
}

impl ChoiceRule {
    pub fn positive_atoms(&self) -> impl Iterator<Item = AtomId> + '_ {
        self.literals.iter().filter(|l| !l.negated).map(|l| l.atom)
    }
}

/// A ground program plus its query set (the candidate atoms for cautious
/// reasoning). The query set never contains the false atom.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Program {
    pub atoms: AtomTable,
    pub disjunctive: Vec<DisjunctiveRule>,
    pub choice: Vec<ChoiceRule>,
    pub query: BTreeSet<AtomId>,
}

impl Program {
    pub fn new() -> Self {
        Program {
            atoms: AtomTable::new(),
            disjunctive: Vec::new(),
            choice: Vec::new(),
            query: BTreeSet::new(),
        }
    }

    /// True if some choice rule lists `atom` positively.
    pub fn is_choice_atom(&self, atom: AtomId) -> bool {
        self.choice
            .iter()
            .any(|c| c.positive_atoms().any(|a| a == atom))
    }
}

impl Default for Program {
    fn default() -> Self {
        Self::new()
    }
}

/// A set of true atoms. The false atom is never a member.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Default)]
pub struct Interpretation(BTreeSet<AtomId>);

impl Interpretation {
    pub fn empty() -> Self {
        Interpretation(BTreeSet::new())
    }

    pub fn from_atoms<I: IntoIterator<Item = AtomId>>(atoms: I) -> Self {
        Interpretation(atoms.into_iter().filter(|a| !a.is_false_atom()).collect())
    }

    pub fn contains(&self, atom: AtomId) -> bool {
        self.0.contains(&atom)
    }

    pub fn insert(&mut self, atom: AtomId) {
        if !atom.is_false_atom() {
            self.0.insert(atom);
        }
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = AtomId> + '_ {
        self.0.iter().copied()
    }

    pub fn as_set(&self) -> &BTreeSet<AtomId> {
        &self.0
    }

    /// True if every atom of `other` is a member.
    pub fn is_superset_of<'a, I: IntoIterator<Item = &'a AtomId>>(&self, other: I) -> bool {
        other.into_iter().all(|a| self.0.contains(a))
    }

    /// True if `lit` holds: a positive literal needs membership, a negated
    /// one needs absence.
    pub fn satisfies(&self, lit: Literal) -> bool {
        self.contains(lit.atom) != lit.negated
    }
}

impl FromIterator<AtomId> for Interpretation {
    fn from_iter<I: IntoIterator<Item = AtomId>>(iter: I) -> Self {
        Self::from_atoms(iter)
    }
}

/// Convenience constructor used by tests and generators.
pub struct ProgramBuilder {
    program: Program,
}

impl ProgramBuilder {
    pub fn new() -> Self {
        ProgramBuilder {
            program: Program::new(),
        }
    }

    pub fn atom(&mut self, name: &str) -> AtomId {
        self.program.atoms.intern(name)
    }

    pub fn rule(&mut self, heads: &[&str], pos: &[&str], neg: &[&str]) -> &mut Self {
        let head = heads.iter().map(|n| self.program.atoms.intern(n)).collect();
        let mut body = BTreeSet::new();
        for n in pos {
            let a = self.program.atoms.intern(n);
            body.insert(Literal::positive(a));
        }
        for n in neg {
            let a = self.program.atoms.intern(n);
            body.insert(Literal::negative(a));
        }
        self.program
            .disjunctive
            .push(DisjunctiveRule { head, body });
        self
    }

    pub fn fact(&mut self, name: &str) -> &mut Self {
        self.rule(&[name], &[], &[])
    }

    pub fn constraint(&mut self, pos: &[&str], neg: &[&str]) -> &mut Self {
        self.rule(&[], pos, neg)
    }

    pub fn choice(&mut self, bound: u32, pos: &[&str], neg: &[&str]) -> &mut Self {
        let mut literals = BTreeSet::new();
        for n in pos {
            let a = self.program.atoms.intern(n);
            literals.insert(Literal::positive(a));
        }
        for n in neg {
            let a = self.program.atoms.intern(n);
            literals.insert(Literal::negative(a));
        }
        self.program.choice.push(ChoiceRule { literals, bound });
        self
    }

    pub fn query(&mut self, names: &[&str]) -> &mut Self {
        for n in names {
            let a = self.program.atoms.intern(n);
            if !a.is_false_atom() {
                self.program.query.insert(a);
            }
        }
        self
    }

    /// Sets the query to every registered atom.
    pub fn query_all(&mut self) -> &mut Self {
        self.program.query = self.program.atoms.atoms().collect();
        self
    }

    pub fn build(&mut self) -> Program {
        std::mem::take(&mut self.program)
    }
}

impl Default for ProgramBuilder {
    fn default() -> Self {
        Self::new()
    }
}

fn write_name(f: &mut fmt::Formatter<'_>, name: &str) -> fmt::Result {
    if is_bare_name(name) {
        f.write_str(name)
    } else {
        write!(f, "\"{name}\"")
    }
}

struct NamedLit<'a>(&'a AtomTable, Literal);

impl fmt::Display for NamedLit<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.1.negated {
            f.write_str("not ")?;
        }
        write_name(f, self.0.name(self.1.atom))
    }
}

/// Prints the program in the text input format. Parsing the output of a
/// text-parsed program yields a structurally identical program.
impl fmt::Display for Program {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for rule in &self.disjunctive {
            let heads: Vec<AtomId> = rule.head_atoms().collect();
            for (i, h) in heads.iter().enumerate() {
                if i > 0 {
                    f.write_str(" | ")?;
                }
                write_name(f, self.atoms.name(*h))?;
            }
            if !rule.body.is_empty() || heads.is_empty() {
                if !heads.is_empty() {
                    f.write_str(" ")?;
                }
                f.write_str(":-")?;
                for (i, l) in rule.body.iter().enumerate() {
                    f.write_str(if i == 0 { " " } else { ", " })?;
                    write!(f, "{}", NamedLit(&self.atoms, *l))?;
                }
            }
            f.write_str(".\n")?;
        }
        for rule in &self.choice {
            write!(f, "{} {{", rule.bound)?;
            for (i, l) in rule.literals.iter().enumerate() {
                f.write_str(if i == 0 { " " } else { ", " })?;
                write!(f, "{}", NamedLit(&self.atoms, *l))?;
            }
            f.write_str(" }.\n")?;
        }
        f.write_str("#query")?;
        for (i, a) in self.query.iter().enumerate() {
            f.write_str(if i == 0 { " " } else { ", " })?;
            write_name(f, self.atoms.name(*a))?;
        }
        f.write_str(".\n")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn false_atom_is_id_zero() {
        let t = AtomTable::new();
        assert_eq!(t.lookup(FALSE_NAME), Some(AtomId::FALSE));
        assert_eq!(t.atom_count(), 0);
    }

    #[test]
    fn intern_is_idempotent() {
        let mut t = AtomTable::new();
        let a = t.intern("a");
        let b = t.intern("b");
        assert_eq!(t.intern("a"), a);
        assert_ne!(a, b);
        assert_eq!(t.name(a), "a");
        assert_eq!(t.name(b), "b");
    }

    #[test]
    fn complement_swaps_polarity() {
        let a = AtomId(3);
        assert_eq!(Literal::positive(a).complement(), Literal::negative(a));
        assert_eq!(Literal::negative(a).complement(), Literal::positive(a));
    }

    proptest! {
        #[test]
        fn complement_is_an_involution(atom in 0u32..10_000, neg: bool) {
            let l = Literal { atom: AtomId(atom), negated: neg };
            prop_assert_eq!(l.complement().complement(), l);
            prop_assert_ne!(l.complement(), l);
        }
    }

    #[test]
    fn constraint_heads() {
        let mut b = ProgramBuilder::new();
        b.constraint(&["a"], &[]);
        b.fact("a");
        let p = b.build();
        assert!(p.disjunctive[0].is_constraint());
        assert!(!p.disjunctive[1].is_constraint());
    }

    #[test]
    fn interpretation_excludes_false_atom() {
        let mut i = Interpretation::empty();
        i.insert(AtomId::FALSE);
        i.insert(AtomId(2));
        assert!(!i.is_empty());
        assert_eq!(i.len(), 1);
        assert!(!i.contains(AtomId::FALSE));
    }

    #[test]
    fn interpretation_literal_satisfaction() {
        let i = Interpretation::from_atoms([AtomId(1)]);
        assert!(i.satisfies(Literal::positive(AtomId(1))));
        assert!(!i.satisfies(Literal::negative(AtomId(1))));
        assert!(i.satisfies(Literal::negative(AtomId(2))));
    }

    #[test]
    fn builder_dedups_rule_members() {
        let mut b = ProgramBuilder::new();
        b.rule(&["a", "a", "b"], &["c", "c"], &[]);
        let p = b.build();
        assert_eq!(p.disjunctive[0].head.len(), 2);
        assert_eq!(p.disjunctive[0].body.len(), 1);
    }

    #[test]
    fn display_quotes_structured_names() {
        let mut b = ProgramBuilder::new();
        b.rule(&["in(a)"], &[], &["x"]).query(&["in(a)"]);
        let p = b.build();
        let text = p.to_string();
        assert!(text.contains("\"in(a)\" :- not x."));
        assert!(text.contains("#query \"in(a)\"."));
    }
}
