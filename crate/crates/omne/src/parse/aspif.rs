//! ASPIF v1 reader covering exactly the statement kinds the supported rule
//! forms need: normal/disjunctive rules, body-free choice rules, and output
//! statements (which supply atom names and the query set). Everything else
//! is rejected by kind and line, never skipped.

use super::ParseError;
use crate::program::{AtomId, ChoiceRule, DisjunctiveRule, Literal, Program};
use std::collections::{BTreeSet, HashMap};

struct Cursor<'a> {
    line: &'a str,
    pos: usize,
    lineno: u32,
}

impl<'a> Cursor<'a> {
    fn new(line: &'a str, lineno: u32) -> Self {
        Cursor {
            line,
            pos: 0,
            lineno,
        }
    }

    fn err(&self, msg: impl Into<String>) -> ParseError {
        ParseError::new(self.lineno, (self.pos + 1) as u32, msg)
    }

    fn int(&mut self) -> Result<i64, ParseError> {
        let bytes = self.line.as_bytes();
        while self.pos < bytes.len() && bytes[self.pos] == b' ' {
            self.pos += 1;
        }
        let start = self.pos;
        if self.pos < bytes.len() && bytes[self.pos] == b'-' {
            self.pos += 1;
        }
        while self.pos < bytes.len() && bytes[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if self.pos == start {
            return Err(self.err("expected integer"));
        }
        self.line[start..self.pos]
            .parse()
            .map_err(|_| self.err("integer out of range"))
    }

    fn uint(&mut self) -> Result<u64, ParseError> {
        let n = self.int()?;
        u64::try_from(n).map_err(|_| self.err("expected non-negative integer"))
    }

    /// Takes exactly `len` bytes after a single separating space.
    fn raw(&mut self, len: usize) -> Result<&'a str, ParseError> {
        let bytes = self.line.as_bytes();
        if self.pos >= bytes.len() || bytes[self.pos] != b' ' {
            return Err(self.err("expected space before string"));
        }
        self.pos += 1;
        if self.pos + len > bytes.len() {
            return Err(self.err("string shorter than its declared length"));
        }
        let s = &self.line[self.pos..self.pos + len];
        self.pos += len;
        Ok(s)
    }

    fn finish(&mut self) -> Result<(), ParseError> {
        let rest = self.line[self.pos..].trim();
        if rest.is_empty() {
            Ok(())
        } else {
            Err(self.err(format!("trailing tokens '{rest}'")))
        }
    }
}

struct AspifReader {
    program: Program,
    ids: HashMap<u64, AtomId>,
    shown: BTreeSet<AtomId>,
}

impl AspifReader {
    fn atom(&mut self, aspif_id: u64, cur: &Cursor) -> Result<AtomId, ParseError> {
        if aspif_id == 0 {
            return Err(cur.err("atom id 0 is invalid"));
        }
        if let Some(&id) = self.ids.get(&aspif_id) {
            return Ok(id);
        }
        let id = self.program.atoms.intern(&format!("_{aspif_id}"));
        self.ids.insert(aspif_id, id);
        Ok(id)
    }

    fn literal(&mut self, lit: i64, cur: &Cursor) -> Result<Literal, ParseError> {
        let atom = self.atom(lit.unsigned_abs(), cur)?;
        Ok(Literal {
            atom,
            negated: lit < 0,
        })
    }

    fn rule(&mut self, cur: &mut Cursor) -> Result<(), ParseError> {
        let head_kind = cur.uint()?;
        let m = cur.uint()? as usize;
        let mut head_atoms = Vec::with_capacity(m);
        for _ in 0..m {
            let a = cur.uint()?;
            head_atoms.push(self.atom(a, cur)?);
        }
        let body_kind = cur.uint()?;
        if body_kind == 1 {
            return Err(ParseError::new(
                cur.lineno,
                1,
                "unsupported statement: weight body",
            ));
        }
        if body_kind != 0 {
            return Err(ParseError::new(
                cur.lineno,
                1,
                format!("unknown body kind {body_kind}"),
            ));
        }
        let n = cur.uint()? as usize;
        let mut body = BTreeSet::new();
        for _ in 0..n {
            let l = cur.int()?;
            if l == 0 {
                return Err(cur.err("literal 0 is invalid"));
            }
            body.insert(self.literal(l, cur)?);
        }
        cur.finish()?;
        match head_kind {
            0 => {
                self.program.disjunctive.push(DisjunctiveRule {
                    head: head_atoms.into_iter().collect(),
                    body,
                });
            }
            1 => {
                if !body.is_empty() {
                    return Err(ParseError::new(
                        cur.lineno,
                        1,
                        "unsupported statement: choice rule with non-empty body",
                    ));
                }
                self.program.choice.push(ChoiceRule {
                    literals: head_atoms.into_iter().map(Literal::positive).collect(),
                    bound: 0,
                });
            }
            k => {
                return Err(ParseError::new(
                    cur.lineno,
                    1,
                    format!("unknown head kind {k}"),
                ))
            }
        }
        Ok(())
    }

    fn name_atom(&mut self, id: AtomId, name: &str, cur: &Cursor) -> Result<(), ParseError> {
        if self.program.atoms.name(id) == name {
            return Ok(());
        }
        if self.program.atoms.lookup(name).is_some() {
            return Err(cur.err(format!("duplicate atom name '{name}'")));
        }
        if !self.program.atoms.name(id).starts_with('_') {
            return Err(cur.err(format!(
                "conflicting names for one atom: '{}' and '{name}'",
                self.program.atoms.name(id)
            )));
        }
        self.program.atoms.rename(id, name);
        Ok(())
    }

    fn output(&mut self, cur: &mut Cursor) -> Result<(), ParseError> {
        let len = cur.uint()? as usize;
        let name = cur.raw(len)?.to_string();
        if name.is_empty() {
            return Err(cur.err("empty output name"));
        }
        if name.starts_with('_') {
            return Err(cur.err(format!("output name '{name}' is reserved for internal use")));
        }
        let n = cur.uint()? as usize;
        match n {
            0 => {
                // Unconditional output: grounders emit these for facts that
                // were simplified away. Reify the name as a fact atom.
                cur.finish()?;
                let id = self.program.atoms.intern(&name);
                self.program.disjunctive.push(DisjunctiveRule {
                    head: [id].into_iter().collect(),
                    body: BTreeSet::new(),
                });
                self.shown.insert(id);
            }
            1 => {
                let l = cur.int()?;
                cur.finish()?;
                if l <= 0 {
                    return Err(ParseError::new(
                        cur.lineno,
                        1,
                        "unsupported statement: output conditioned on a negative literal",
                    ));
                }
                let id = self.atom(l as u64, cur)?;
                self.name_atom(id, &name, cur)?;
                self.shown.insert(id);
            }
            _ => {
                return Err(ParseError::new(
                    cur.lineno,
                    1,
                    "unsupported statement: output with a multi-literal condition",
                ));
            }
        }
        Ok(())
    }
}

/// Parses an ASPIF v1 document. The query set is the set of shown atoms,
/// which may be empty.
pub fn parse_aspif(src: &str) -> Result<Program, ParseError> {
    let mut lines = src.lines().enumerate();
    let header = loop {
        match lines.next() {
            Some((i, l)) if l.trim().is_empty() => {
                let _ = i;
                continue;
            }
            Some((i, l)) => break (i, l),
            None => return Err(ParseError::new(1, 1, "missing 'asp' header")),
        }
    };
    let (hline, htext) = (header.0 as u32 + 1, header.1.trim_end_matches('\r'));
    let parts: Vec<&str> = htext.split_whitespace().collect();
    if parts.first() != Some(&"asp") {
        return Err(ParseError::new(hline, 1, "missing 'asp' header"));
    }
    if parts.len() < 4 || parts[1] != "1" || parts[2] != "0" || parts[3] != "0" {
        return Err(ParseError::new(
            hline,
            1,
            format!("unsupported ASPIF version in '{htext}'"),
        ));
    }
    if parts.len() > 4 {
        return Err(ParseError::new(
            hline,
            1,
            format!("unsupported header tag '{}'", parts[4]),
        ));
    }

    let mut reader = AspifReader {
        program: Program::new(),
        ids: HashMap::new(),
        shown: BTreeSet::new(),
    };
    let mut terminated = false;
    for (i, raw_line) in lines {
        let lineno = i as u32 + 1;
        let line = raw_line.trim_end_matches('\r');
        if line.trim().is_empty() {
            continue;
        }
        if terminated {
            return Err(ParseError::new(lineno, 1, "statement after terminator"));
        }
        let mut cur = Cursor::new(line, lineno);
        let kind = cur.uint()?;
        match kind {
            0 => {
                cur.finish()?;
                terminated = true;
            }
            1 => reader.rule(&mut cur)?,
            2 => {
                return Err(ParseError::new(
                    lineno,
                    1,
                    "unsupported statement: minimize",
                ))
            }
            3 => {
                return Err(ParseError::new(
                    lineno,
                    1,
                    "unsupported statement: projection",
                ))
            }
            4 => reader.output(&mut cur)?,
            5 => {
                return Err(ParseError::new(
                    lineno,
                    1,
                    "unsupported statement: external",
                ))
            }
            6 => {
                return Err(ParseError::new(
                    lineno,
                    1,
                    "unsupported statement: assumption",
                ))
            }
            7 => {
                return Err(ParseError::new(
                    lineno,
                    1,
                    "unsupported statement: heuristic",
                ))
            }
            8 => return Err(ParseError::new(lineno, 1, "unsupported statement: edge")),
            9 => return Err(ParseError::new(lineno, 1, "unsupported statement: theory")),
            10 => return Err(ParseError::new(lineno, 1, "unsupported statement: comment")),
            k => {
                return Err(ParseError::new(
                    lineno,
                    1,
                    format!("unknown statement kind {k}"),
                ))
            }
        }
    }
    if !terminated {
        return Err(ParseError::new(
            src.lines().count() as u32,
            1,
            "missing terminator statement",
        ));
    }
    reader.program.query = reader.shown;
    Ok(reader.program)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::parse_text;

    #[test]
    fn fact_and_show_roundtrip() {
        let p = parse_aspif("asp 1 0 0\n1 0 1 1 0 0\n4 1 a 1 1\n0\n").unwrap();
        assert_eq!(p.disjunctive.len(), 1);
        let a = p.atoms.lookup("a").unwrap();
        assert!(p.query.contains(&a));
        // Round-trip through the text printer.
        let p2 = parse_text(&p.to_string()).unwrap();
        assert_eq!(p2.disjunctive.len(), 1);
        assert!(p2.query.contains(&p2.atoms.lookup("a").unwrap()));
    }

    #[test]
    fn empty_program_has_empty_query() {
        let p = parse_aspif("asp 1 0 0\n0\n").unwrap();
        assert!(p.disjunctive.is_empty());
        assert!(p.query.is_empty());
    }

    #[test]
    fn minimize_is_rejected_by_kind_and_line() {
        let e = parse_aspif("asp 1 0 0\n2 0 1 1 1\n0\n").unwrap_err();
        assert_eq!(e.line, 2);
        assert!(e.msg.contains("unsupported statement: minimize"), "{e}");
    }

    #[test]
    fn weight_body_is_rejected() {
        let e = parse_aspif("asp 1 0 0\n1 0 1 1 1 2 2 1 1 2 1\n0\n").unwrap_err();
        assert!(e.msg.contains("weight body"), "{e}");
    }

    #[test]
    fn theory_is_rejected() {
        let e = parse_aspif("asp 1 0 0\n9 0 1 0\n0\n").unwrap_err();
        assert!(e.msg.contains("unsupported statement: theory"), "{e}");
    }

    #[test]
    fn disjunction_choice_and_negation_parse() {
        // a|b.  {c}.  d :- c, not a.  :- d.
        let src = "asp 1 0 0\n1 0 2 1 2 0 0\n1 1 1 3 0 0\n1 0 1 4 0 2 3 -1\n1 0 0 0 1 4\n4 1 a 1 1\n4 1 b 1 2\n4 1 c 1 3\n4 1 d 1 4\n0\n";
        let p = parse_aspif(src).unwrap();
        assert_eq!(p.disjunctive.len(), 3);
        assert_eq!(p.choice.len(), 1);
        assert_eq!(p.choice[0].bound, 0);
        assert!(p.disjunctive[2].is_constraint());
        let d = p.atoms.lookup("d").unwrap();
        let rule = &p.disjunctive[1];
        assert!(rule.head.contains(&d));
        assert_eq!(rule.negative_body().count(), 1);
        assert_eq!(p.query.len(), 4);
    }

    #[test]
    fn unconditional_output_becomes_a_fact() {
        let p = parse_aspif("asp 1 0 0\n4 6 arg(a) 0\n0\n").unwrap();
        let a = p.atoms.lookup("arg(a)").unwrap();
        assert_eq!(p.disjunctive.len(), 1);
        assert!(p.disjunctive[0].head.contains(&a));
        assert!(p.disjunctive[0].body.is_empty());
        assert!(p.query.contains(&a));
    }

    #[test]
    fn output_names_may_contain_spaces() {
        let p = parse_aspif("asp 1 0 0\n1 0 1 1 0 0\n4 3 a b 1 1\n0\n").unwrap();
        assert!(p.atoms.lookup("a b").is_some());
    }

    #[test]
    fn unnamed_atoms_get_reserved_names() {
        let p = parse_aspif("asp 1 0 0\n1 0 1 1 0 0\n0\n").unwrap();
        assert_eq!(p.atoms.atom_count(), 1);
        assert!(p.atoms.name(crate::AtomId(1)).starts_with('_'));
        assert!(p.query.is_empty());
    }

    #[test]
    fn missing_terminator_is_an_error() {
        let e = parse_aspif("asp 1 0 0\n1 0 1 1 0 0\n").unwrap_err();
        assert!(e.msg.contains("terminator"), "{e}");
    }

    #[test]
    fn missing_header_is_an_error() {
        let e = parse_aspif("1 0 1 1 0 0\n0\n").unwrap_err();
        assert!(e.msg.contains("header"), "{e}");
    }

    #[test]
    fn incremental_tag_is_rejected() {
        let e = parse_aspif("asp 1 0 0 incremental\n0\n").unwrap_err();
        assert!(e.msg.contains("incremental"), "{e}");
    }

    #[test]
    fn choice_with_body_is_rejected() {
        let e = parse_aspif("asp 1 0 0\n1 1 1 1 0 1 2\n0\n").unwrap_err();
        assert!(e.msg.contains("choice rule with non-empty body"), "{e}");
    }

    #[test]
    fn duplicate_output_names_are_rejected() {
        let e = parse_aspif("asp 1 0 0\n1 0 2 1 2 0 0\n4 1 a 1 1\n4 1 a 1 2\n0\n").unwrap_err();
        assert!(e.msg.contains("duplicate"), "{e}");
    }

    #[test]
    fn detect_format_sniffs_header() {
        use crate::parse::{detect_format, Format};
        assert_eq!(detect_format("asp 1 0 0\n0\n"), Format::Aspif);
        assert_eq!(detect_format("a | b.\n"), Format::Text);
        assert_eq!(detect_format("aspirin :- b.\n"), Format::Text);
    }
}
