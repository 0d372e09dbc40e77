//! Propositional formulas over a declared set of atoms.
//!
//! Consistency and entailment are decided by enumerating truth assignments.
//! Worlds are numbered by binary counting over the atom order, atom 0 being
//! the most significant bit, so the enumeration order is canonical.

use std::collections::HashMap;
use std::fmt;

use thiserror::Error;

/// Largest atom count accepted by default for model enumeration.
pub const DEFAULT_ATOM_LIMIT: usize = 24;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FormulaError {
    #[error("syntax error at offset {position}: {message}")]
    Syntax { position: usize, message: String },
    #[error("undeclared atom `{name}` at offset {position}")]
    UndeclaredAtom { name: String, position: usize },
    #[error("invalid atom name `{0}`")]
    InvalidAtomName(String),
    #[error("duplicate atom `{0}`")]
    DuplicateAtom(String),
    #[error("{atoms} atoms exceed the enumeration limit of {limit}")]
    AtomLimitExceeded { atoms: usize, limit: usize },
}

/// Ordered, duplicate-free list of atom names.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AtomTable {
    names: Vec<String>,
    index: HashMap<String, usize>,
    limit: usize,
}

fn valid_identifier(name: &str) -> bool {
    let mut chars = name.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
        _ => return false,
    }
    if name == "true" || name == "false" {
        return false;
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

impl AtomTable {
    pub fn new<I, S>(names: I) -> Result<Self, FormulaError>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut table = AtomTable {
            names: Vec::new(),
            index: HashMap::new(),
            limit: DEFAULT_ATOM_LIMIT,
        };
        for name in names {
            let name = name.into();
            if !valid_identifier(&name) {
                return Err(FormulaError::InvalidAtomName(name));
            }
            if table.index.contains_key(&name) {
                return Err(FormulaError::DuplicateAtom(name));
            }
            table.index.insert(name.clone(), table.names.len());
            table.names.push(name);
        }
        Ok(table)
    }

    /// Overrides the enumeration limit (default [`DEFAULT_ATOM_LIMIT`]).
    pub fn with_atom_limit(mut self, limit: usize) -> Self {
        self.limit = limit;
        self
    }

    pub fn atom_limit(&self) -> usize {
        self.limit
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn name(&self, atom: usize) -> &str {
        &self.names[atom]
    }

    pub fn lookup(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }

    /// Number of worlds, or an error when the atom count is above the limit.
    pub fn world_count(&self) -> Result<u64, FormulaError> {
        if self.names.len() > self.limit || self.names.len() >= 64 {
            return Err(FormulaError::AtomLimitExceeded {
                atoms: self.names.len(),
                limit: self.limit,
            });
        }
        Ok(1u64 << self.names.len())
    }

    pub fn parse(&self, text: &str) -> Result<Formula, FormulaError> {
        parse(text, self)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Formula {
    True,
    False,
    Atom(usize),
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Imp(Box<Formula>, Box<Formula>),
    Iff(Box<Formula>, Box<Formula>),
}

impl Formula {
    pub fn atom(index: usize) -> Self {
        Formula::Atom(index)
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(f: Formula) -> Self {
        Formula::Not(Box::new(f))
    }

    pub fn and(a: Formula, b: Formula) -> Self {
        Formula::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: Formula, b: Formula) -> Self {
        Formula::Or(Box::new(a), Box::new(b))
    }

    pub fn imp(a: Formula, b: Formula) -> Self {
        Formula::Imp(Box::new(a), Box::new(b))
    }

    pub fn iff(a: Formula, b: Formula) -> Self {
        Formula::Iff(Box::new(a), Box::new(b))
    }

    pub fn evaluate(&self, world: &World) -> bool {
        match self {
            Formula::True => true,
            Formula::False => false,
            Formula::Atom(i) => world.value(*i),
            Formula::Not(f) => !f.evaluate(world),
            Formula::And(a, b) => a.evaluate(world) && b.evaluate(world),
            Formula::Or(a, b) => a.evaluate(world) || b.evaluate(world),
            Formula::Imp(a, b) => !a.evaluate(world) || b.evaluate(world),
            Formula::Iff(a, b) => a.evaluate(world) == b.evaluate(world),
        }
    }

    /// Largest atom index referenced, if any.
    pub fn max_atom(&self) -> Option<usize> {
        match self {
            Formula::True | Formula::False => None,
            Formula::Atom(i) => Some(*i),
            Formula::Not(f) => f.max_atom(),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Imp(a, b) | Formula::Iff(a, b) => {
                match (a.max_atom(), b.max_atom()) {
                    (Some(x), Some(y)) => Some(x.max(y)),
                    (x, y) => x.or(y),
                }
            }
        }
    }

    fn precedence(&self) -> u8 {
        match self {
            Formula::Iff(..) => 1,
            Formula::Imp(..) => 2,
            Formula::Or(..) => 3,
            Formula::And(..) => 4,
            Formula::Not(..) => 5,
            Formula::True | Formula::False | Formula::Atom(_) => 6,
        }
    }

    /// Renders the formula in the textual grammar using the given atom names.
    pub fn display<'a>(&'a self, atoms: &'a AtomTable) -> FormulaDisplay<'a> {
        FormulaDisplay {
            formula: self,
            atoms,
        }
    }

    pub fn to_text(&self, atoms: &AtomTable) -> String {
        self.display(atoms).to_string()
    }
}

pub struct FormulaDisplay<'a> {
    formula: &'a Formula,
    atoms: &'a AtomTable,
}

impl FormulaDisplay<'_> {
    fn write_child(
        &self,
        f: &mut fmt::Formatter<'_>,
        child: &Formula,
        parens: bool,
    ) -> fmt::Result {
        let inner = FormulaDisplay {
            formula: child,
            atoms: self.atoms,
        };
        if parens {
            write!(f, "({inner})")
        } else {
            write!(f, "{inner}")
        }
    }
}

impl fmt::Display for FormulaDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let prec = self.formula.precedence();
        let (op, left, right) = match self.formula {
            Formula::True => return f.write_str("true"),
            Formula::False => return f.write_str("false"),
            Formula::Atom(i) => return f.write_str(self.atoms.name(*i)),
            Formula::Not(inner) => {
                f.write_str("!")?;
                return self.write_child(f, inner, inner.precedence() < prec);
            }
            Formula::And(a, b) => (" & ", a, b),
            Formula::Or(a, b) => (" | ", a, b),
            Formula::Imp(a, b) => (" -> ", a, b),
            Formula::Iff(a, b) => (" <-> ", a, b),
        };
        // & and | associate left, -> associates right, <-> does not associate.
        let (left_parens, right_parens) = match self.formula {
            Formula::And(..) | Formula::Or(..) => {
                (left.precedence() < prec, right.precedence() <= prec)
            }
            Formula::Imp(..) => (left.precedence() <= prec, right.precedence() < prec),
            _ => (left.precedence() <= prec, right.precedence() <= prec),
        };
        self.write_child(f, left, left_parens)?;
        f.write_str(op)?;
        self.write_child(f, right, right_parens)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Token {
    Ident(String),
    Not,
    And,
    Or,
    Imp,
    Iff,
    LParen,
    RParen,
    True,
    False,
}

impl Token {
    fn describe(&self) -> String {
        match self {
            Token::Ident(s) => format!("`{s}`"),
            Token::Not => "`!`".into(),
            Token::And => "`&`".into(),
            Token::Or => "`|`".into(),
            Token::Imp => "`->`".into(),
            Token::Iff => "`<->`".into(),
            Token::LParen => "`(`".into(),
            Token::RParen => "`)`".into(),
            Token::True => "`true`".into(),
            Token::False => "`false`".into(),
        }
    }
}

fn tokenize(text: &str) -> Result<Vec<(Token, usize)>, FormulaError> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        let start = i;
        match c {
            b' ' | b'\t' | b'\n' | b'\r' => {
                i += 1;
                continue;
            }
            b'!' => {
                out.push((Token::Not, start));
                i += 1;
            }
            b'&' => {
                out.push((Token::And, start));
                i += 1;
            }
            b'|' => {
                out.push((Token::Or, start));
                i += 1;
            }
            b'(' => {
                out.push((Token::LParen, start));
                i += 1;
            }
            b')' => {
                out.push((Token::RParen, start));
                i += 1;
            }
            b'-' if bytes.get(i + 1) == Some(&b'>') => {
                out.push((Token::Imp, start));
                i += 2;
            }
            b'<' if bytes.get(i + 1) == Some(&b'-') && bytes.get(i + 2) == Some(&b'>') => {
                out.push((Token::Iff, start));
                i += 3;
            }
            c if c.is_ascii_alphabetic() || c == b'_' => {
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                    i += 1;
                }
                let word = &text[start..i];
                let tok = match word {
                    "true" => Token::True,
                    "false" => Token::False,
                    _ => Token::Ident(word.to_string()),
                };
                out.push((tok, start));
            }
            _ => {
                let ch = text[start..].chars().next().unwrap_or('?');
                return Err(FormulaError::Syntax {
                    position: start,
                    message: format!("unexpected character `{ch}`"),
                });
            }
        }
    }
    Ok(out)
}

struct Parser<'a> {
    tokens: Vec<(Token, usize)>,
    pos: usize,
    end: usize,
    atoms: &'a AtomTable,
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos).map(|(t, _)| t)
    }

    fn offset(&self) -> usize {
        self.tokens.get(self.pos).map_or(self.end, |(_, p)| *p)
    }

    fn unexpected(&self, expected: &str) -> FormulaError {
        let found = self
            .peek()
            .map_or_else(|| "end of input".to_string(), Token::describe);
        FormulaError::Syntax {
            position: self.offset(),
            message: format!("expected {expected}, found {found}"),
        }
    }

    fn iff(&mut self) -> Result<Formula, FormulaError> {
        let left = self.imp()?;
        if self.peek() == Some(&Token::Iff) {
            self.pos += 1;
            let right = self.imp()?;
            if self.peek() == Some(&Token::Iff) {
                return Err(FormulaError::Syntax {
                    position: self.offset(),
                    message: "`<->` does not associate; add parentheses".into(),
                });
            }
            return Ok(Formula::iff(left, right));
        }
        Ok(left)
    }

    fn imp(&mut self) -> Result<Formula, FormulaError> {
        let left = self.or()?;
        if self.peek() == Some(&Token::Imp) {
            self.pos += 1;
            let right = self.imp()?;
            return Ok(Formula::imp(left, right));
        }
        Ok(left)
    }

    fn or(&mut self) -> Result<Formula, FormulaError> {
        let mut left = self.and()?;
        while self.peek() == Some(&Token::Or) {
            self.pos += 1;
            let right = self.and()?;
            left = Formula::or(left, right);
        }
        Ok(left)
    }

    fn and(&mut self) -> Result<Formula, FormulaError> {
        let mut left = self.unary()?;
        while self.peek() == Some(&Token::And) {
            self.pos += 1;
            let right = self.unary()?;
            left = Formula::and(left, right);
        }
        Ok(left)
    }

    fn unary(&mut self) -> Result<Formula, FormulaError> {
        let offset = self.offset();
        match self.peek().cloned() {
            Some(Token::Not) => {
                self.pos += 1;
                Ok(Formula::not(self.unary()?))
            }
            Some(Token::LParen) => {
                self.pos += 1;
                let inner = self.iff()?;
                if self.peek() != Some(&Token::RParen) {
                    return Err(self.unexpected("`)`"));
                }
                self.pos += 1;
                Ok(inner)
            }
            Some(Token::True) => {
                self.pos += 1;
                Ok(Formula::True)
            }
            Some(Token::False) => {
                self.pos += 1;
                Ok(Formula::False)
            }
            Some(Token::Ident(name)) => {
                self.pos += 1;
                self.atoms
                    .lookup(&name)
                    .map(Formula::Atom)
                    .ok_or(FormulaError::UndeclaredAtom {
                        name,
                        position: offset,
                    })
            }
            _ => Err(self.unexpected("a formula")),
        }
    }
}

/// Parses `text` against the declared atoms.
///
/// Precedence from tightest to loosest: `!`, `&`, `|`, `->`, `<->`.
pub fn parse(text: &str, atoms: &AtomTable) -> Result<Formula, FormulaError> {
    let tokens = tokenize(text)?;
    let mut parser = Parser {
        tokens,
        pos: 0,
        end: text.len(),
        atoms,
    };
    let formula = parser.iff()?;
    if parser.pos != parser.tokens.len() {
        return Err(parser.unexpected("end of input"));
    }
    Ok(formula)
}

/// A total truth assignment, identified by its index in the canonical order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct World {
    index: u64,
    atoms: usize,
}

impl World {
    pub fn new(index: u64, atoms: usize) -> Self {
        debug_assert!(atoms < 64 && index < (1u64 << atoms));
        World { index, atoms }
    }

    /// Builds the world from an assignment listed in atom order.
    pub fn from_assignment(values: &[bool]) -> Self {
        let index = values
            .iter()
            .fold(0u64, |acc, &v| (acc << 1) | u64::from(v));
        World {
            index,
            atoms: values.len(),
        }
    }

    pub fn index(&self) -> u64 {
        self.index
    }

    pub fn atom_count(&self) -> usize {
        self.atoms
    }

    pub fn value(&self, atom: usize) -> bool {
        (self.index >> (self.atoms - 1 - atom)) & 1 == 1
    }

    pub fn assignment(&self) -> Vec<bool> {
        (0..self.atoms).map(|a| self.value(a)).collect()
    }
}

/// Iterates every world over the table in canonical order.
pub fn all_worlds(atoms: &AtomTable) -> Result<impl Iterator<Item = World>, FormulaError> {
    let count = atoms.world_count()?;
    let n = atoms.len();
    Ok((0..count).map(move |i| World::new(i, n)))
}

/// Worlds satisfying every formula of `fs`, in increasing index order.
pub fn models(fs: &[Formula], atoms: &AtomTable) -> Result<Vec<World>, FormulaError> {
    Ok(all_worlds(atoms)?
        .filter(|w| fs.iter().all(|f| f.evaluate(w)))
        .collect())
}

pub fn satisfiable(fs: &[Formula], atoms: &AtomTable) -> Result<bool, FormulaError> {
    Ok(all_worlds(atoms)?.any(|w| fs.iter().all(|f| f.evaluate(&w))))
}

/// True iff every model of `fs` satisfies `goal`.
pub fn entails(fs: &[Formula], goal: &Formula, atoms: &AtomTable) -> Result<bool, FormulaError> {
    Ok(all_worlds(atoms)?
        .filter(|w| fs.iter().all(|f| f.evaluate(w)))
        .all(|w| goal.evaluate(&w)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn hotel() -> AtomTable {
        AtomTable::new(["s", "t", "x", "h", "a", "e"]).unwrap()
    }

    #[test]
    fn parses_hotel_constraint() {
        let atoms = hotel();
        let f = parse("(!e | x) <-> a", &atoms).unwrap();
        let e = Formula::atom(5);
        let x = Formula::atom(2);
        let a = Formula::atom(4);
        assert_eq!(f, Formula::iff(Formula::or(Formula::not(e), x), a));
    }

    #[test]
    fn parses_single_atom() {
        let atoms = AtomTable::new(["p"]).unwrap();
        assert_eq!(parse("p", &atoms).unwrap(), Formula::Atom(0));
    }

    #[test]
    fn undeclared_atom_is_named() {
        let atoms = AtomTable::new(["p"]).unwrap();
        match parse("p -> q", &atoms) {
            Err(FormulaError::UndeclaredAtom { name, position }) => {
                assert_eq!(name, "q");
                assert_eq!(position, 5);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn precedence_and_associativity() {
        let atoms = AtomTable::new(["a", "b", "c"]).unwrap();
        let (a, b, c) = (Formula::atom(0), Formula::atom(1), Formula::atom(2));
        assert_eq!(
            parse("a -> b -> c", &atoms).unwrap(),
            Formula::imp(a.clone(), Formula::imp(b.clone(), c.clone()))
        );
        assert_eq!(
            parse("!a & b | c", &atoms).unwrap(),
            Formula::or(Formula::and(Formula::not(a.clone()), b.clone()), c.clone())
        );
        assert_eq!(
            parse("a | b & c <-> a", &atoms).unwrap(),
            Formula::iff(Formula::or(a.clone(), Formula::and(b, c)), a)
        );
        assert!(matches!(
            parse("a <-> b <-> c", &atoms),
            Err(FormulaError::Syntax { .. })
        ));
    }

    #[test]
    fn syntax_errors_carry_positions() {
        let atoms = AtomTable::new(["p", "q"]).unwrap();
        assert!(matches!(
            parse("p & ", &atoms),
            Err(FormulaError::Syntax { position: 4, .. })
        ));
        assert!(matches!(
            parse("(p", &atoms),
            Err(FormulaError::Syntax { position: 2, .. })
        ));
        assert!(matches!(
            parse("p $ q", &atoms),
            Err(FormulaError::Syntax { position: 2, .. })
        ));
        assert!(matches!(
            parse("p q", &atoms),
            Err(FormulaError::Syntax { position: 2, .. })
        ));
    }

    #[test]
    fn atom_names_are_validated() {
        assert!(matches!(
            AtomTable::new(["1p"]),
            Err(FormulaError::InvalidAtomName(_))
        ));
        assert!(matches!(
            AtomTable::new(["p", "p"]),
            Err(FormulaError::DuplicateAtom(_))
        ));
        assert!(AtomTable::new(["_x9"]).is_ok());
    }

    #[test]
    fn evaluates_implication() {
        let atoms = AtomTable::new(["p", "q"]).unwrap();
        let f = parse("p -> q", &atoms).unwrap();
        assert!(!f.evaluate(&World::from_assignment(&[true, false])));
        assert!(Formula::True.evaluate(&World::from_assignment(&[false, false])));
    }

    #[test]
    fn evaluates_hotel_constraint_against_truth_table() {
        let atoms = hotel();
        let f = parse("(!e | x) <-> a", &atoms).unwrap();
        // s t x h a e
        let w = World::from_assignment(&[false, false, false, false, false, true]);
        assert!(f.evaluate(&w));
        for w in all_worlds(&atoms).unwrap() {
            let v = w.assignment();
            let expected = (!v[5] || v[2]) == v[4];
            assert_eq!(f.evaluate(&w), expected);
        }
    }

    #[test]
    fn models_of_implication() {
        let atoms = AtomTable::new(["p", "q"]).unwrap();
        let f = parse("p -> q", &atoms).unwrap();
        let ms: Vec<u64> = models(&[f], &atoms)
            .unwrap()
            .iter()
            .map(World::index)
            .collect();
        assert_eq!(ms, vec![0b00, 0b01, 0b11]);
    }

    #[test]
    fn contradiction_has_no_models() {
        let atoms = AtomTable::new(["p"]).unwrap();
        let p = Formula::atom(0);
        assert!(models(&[p.clone(), Formula::not(p)], &atoms)
            .unwrap()
            .is_empty());
        assert_eq!(models(&[], &atoms).unwrap().len(), 2);
    }

    #[test]
    fn hotel_constraints_are_satisfiable() {
        let atoms = hotel();
        let g1 = parse("(!e | x) <-> a", &atoms).unwrap();
        let g2 = parse("((s | t) & a) <-> h", &atoms).unwrap();
        let ms = models(&[g1.clone(), g2.clone()], &atoms).unwrap();
        let brute = all_worlds(&atoms)
            .unwrap()
            .filter(|w| {
                let v = w.assignment();
                ((!v[5] || v[2]) == v[4]) && (((v[0] || v[1]) && v[4]) == v[3])
            })
            .count();
        assert!(!ms.is_empty());
        assert_eq!(ms.len(), brute);
    }

    #[test]
    fn entailment_examples() {
        let atoms = AtomTable::new(["p", "q"]).unwrap();
        let p = Formula::atom(0);
        let q = Formula::atom(1);
        assert!(entails(&[p.clone(), Formula::imp(p.clone(), q.clone())], &q, &atoms).unwrap());
        assert!(!entails(&[], &p, &atoms).unwrap());

        let atoms = hotel();
        let g1 = parse("(!e | x) <-> a", &atoms).unwrap();
        let not_a = parse("!a", &atoms).unwrap();
        let e = parse("e", &atoms).unwrap();
        assert!(entails(&[not_a, g1], &e, &atoms).unwrap());
    }

    #[test]
    fn atom_limit_is_enforced() {
        let names: Vec<String> = (0..5).map(|i| format!("v{i}")).collect();
        let atoms = AtomTable::new(names).unwrap().with_atom_limit(4);
        assert!(matches!(
            models(&[], &atoms),
            Err(FormulaError::AtomLimitExceeded { atoms: 5, limit: 4 })
        ));
    }

    #[test]
    fn display_round_trips_tricky_shapes() {
        let atoms = AtomTable::new(["a", "b", "c"]).unwrap();
        for text in [
            "(a -> b) -> c",
            "a -> b -> c",
            "a & (b & c)",
            "(a <-> b) <-> c",
            "!(a | b) & !!c",
            "true | false",
        ] {
            let f = parse(text, &atoms).unwrap();
            let printed = f.to_text(&atoms);
            assert_eq!(parse(&printed, &atoms).unwrap(), f, "{text} -> {printed}");
        }
    }
}
