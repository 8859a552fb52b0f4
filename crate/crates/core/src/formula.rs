//! Formula syntax: the core AST over atoms, `&`, `~` and `[]`, together with
//! the concrete text grammar, the printer and a few structural utilities.
//!
//! Disjunction and possibility exist only in the surface syntax. The parser
//! rewrites `a | b` to `~(~a & ~b)` and `<>a` to `~[]~a`, so everything
//! downstream deals with exactly four constructors.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use thiserror::Error;

/// Words that lex as identifiers but are refused as atom names.
pub const RESERVED_WORDS: &[&str] = &["and", "or", "not"];

/// An atom name, `[a-z][a-z0-9_]*`.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Atom(Arc<str>);

impl Atom {
    /// Builds an atom after checking the identifier syntax.
    pub fn new(name: &str) -> Result<Self, ParseError> {
        if !is_identifier(name) {
            return Err(ParseError {
                token: 1,
                column: 1,
                message: format!("invalid atom name '{name}'"),
            });
        }
        if RESERVED_WORDS.contains(&name) {
            return Err(ParseError {
                token: 1,
                column: 1,
                message: format!("'{name}' is reserved and cannot be an atom"),
            });
        }
        Ok(Atom(Arc::from(name)))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Debug for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some('a'..='z'))
        && chars.all(|c| matches!(c, 'a'..='z' | '0'..='9' | '_'))
}

/// Core formula AST. The derived ordering (atoms, then conjunctions, then
/// negations, then boxes, each compared structurally) is the canonical order
/// used for formula sets everywhere in the crate.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Formula {
    Atom(Atom),
    And(Arc<Formula>, Arc<Formula>),
    Not(Arc<Formula>),
    Box(Arc<Formula>),
}

impl Formula {
    /// Atom constructor for names known to be valid. Panics otherwise.
    pub fn atom(name: &str) -> Self {
        Formula::Atom(Atom::new(name).expect("valid atom name"))
    }

    pub fn and(left: Formula, right: Formula) -> Self {
        Formula::And(Arc::new(left), Arc::new(right))
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(inner: Formula) -> Self {
        Formula::Not(Arc::new(inner))
    }

    pub fn boxed(inner: Formula) -> Self {
        Formula::Box(Arc::new(inner))
    }

    /// `a | b`, i.e. `~(~a & ~b)`.
    pub fn or(left: Formula, right: Formula) -> Self {
        Formula::not(Formula::and(Formula::not(left), Formula::not(right)))
    }

    /// `<>a`, i.e. `~[]~a`.
    pub fn diamond(inner: Formula) -> Self {
        Formula::not(Formula::boxed(Formula::not(inner)))
    }

    /// Atoms have depth 0; every connective adds one.
    pub fn depth(&self) -> usize {
        match self {
            Formula::Atom(_) => 0,
            Formula::And(a, b) => 1 + a.depth().max(b.depth()),
            Formula::Not(a) | Formula::Box(a) => 1 + a.depth(),
        }
    }

    /// All subformulas, including `self`.
    pub fn subformulas(&self) -> BTreeSet<Formula> {
        let mut out = BTreeSet::new();
        self.collect_subformulas(&mut out);
        out
    }

    fn collect_subformulas(&self, out: &mut BTreeSet<Formula>) {
        if !out.insert(self.clone()) {
            return;
        }
        match self {
            Formula::Atom(_) => {}
            Formula::And(a, b) => {
                a.collect_subformulas(out);
                b.collect_subformulas(out);
            }
            Formula::Not(a) | Formula::Box(a) => a.collect_subformulas(out),
        }
    }

    pub fn atoms(&self) -> BTreeSet<Atom> {
        let mut out = BTreeSet::new();
        self.collect_atoms(&mut out);
        out
    }

    fn collect_atoms(&self, out: &mut BTreeSet<Atom>) {
        match self {
            Formula::Atom(a) => {
                out.insert(a.clone());
            }
            Formula::And(a, b) => {
                a.collect_atoms(out);
                b.collect_atoms(out);
            }
            Formula::Not(a) | Formula::Box(a) => a.collect_atoms(out),
        }
    }

    pub fn contains_box(&self) -> bool {
        match self {
            Formula::Atom(_) => false,
            Formula::Box(_) => true,
            Formula::And(a, b) => a.contains_box() || b.contains_box(),
            Formula::Not(a) => a.contains_box(),
        }
    }

    /// Renders the constructor tree, e.g. `Not(Box(Atom(p)))`.
    pub fn ast_string(&self) -> String {
        match self {
            Formula::Atom(a) => format!("Atom({a})"),
            Formula::And(a, b) => format!("And({}, {})", a.ast_string(), b.ast_string()),
            Formula::Not(a) => format!("Not({})", a.ast_string()),
            Formula::Box(a) => format!("Box({})", a.ast_string()),
        }
    }
}

/// Every formula over `atoms` with depth at most `max_depth`, generated level
/// by level: all formulas of depth `d` come before any of depth `d + 1`.
/// Within a level the order is negations, boxes, then conjunctions in
/// lexicographic order of the (left, right) indices.
pub fn enumerate_formulas(atoms: &[Atom], max_depth: usize) -> Vec<Formula> {
    let mut all: Vec<Formula> = atoms.iter().cloned().map(Formula::Atom).collect();
    let mut previous_end = 0;
    for _ in 0..max_depth {
        let level_start = all.len();
        let mut next = Vec::new();
        // formulas of depth exactly d are all[previous_end..level_start]
        for f in &all[previous_end..level_start] {
            next.push(Formula::not(f.clone()));
        }
        for f in &all[previous_end..level_start] {
            next.push(Formula::boxed(f.clone()));
        }
        for (i, a) in all[..level_start].iter().enumerate() {
            for (j, b) in all[..level_start].iter().enumerate() {
                if i >= previous_end || j >= previous_end {
                    next.push(Formula::and(a.clone(), b.clone()));
                }
            }
        }
        previous_end = level_start;
        all.extend(next);
    }
    all
}

// ---------------------------------------------------------------------------
// Printing

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Formula::Atom(a) => write!(f, "{a}"),
            Formula::Not(a) => {
                f.write_str("~")?;
                write_operand(f, a)
            }
            Formula::Box(a) => {
                f.write_str("[]")?;
                write_operand(f, a)
            }
            Formula::And(a, b) => {
                write_operand(f, a)?;
                f.write_str(" & ")?;
                write_operand(f, b)
            }
        }
    }
}

impl fmt::Debug for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

// Conjunctions nested under any operator are always parenthesised.
fn write_operand(f: &mut fmt::Formatter<'_>, operand: &Formula) -> fmt::Result {
    if matches!(operand, Formula::And(..)) {
        write!(f, "({operand})")
    } else {
        write!(f, "{operand}")
    }
}

// ---------------------------------------------------------------------------
// Parsing

/// Positioned syntax error. `token` is the 1-based index of the offending
/// token and `column` the 1-based character column where it starts.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("syntax error at token {token} (column {column}): {message}")]
pub struct ParseError {
    pub token: usize,
    pub column: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum TokenKind {
    Ident(String),
    Not,
    Box,
    Diamond,
    And,
    Or,
    LParen,
    RParen,
    End,
}

impl fmt::Display for TokenKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TokenKind::Ident(s) => write!(f, "'{s}'"),
            TokenKind::Not => f.write_str("'~'"),
            TokenKind::Box => f.write_str("'[]'"),
            TokenKind::Diamond => f.write_str("'<>'"),
            TokenKind::And => f.write_str("'&'"),
            TokenKind::Or => f.write_str("'|'"),
            TokenKind::LParen => f.write_str("'('"),
            TokenKind::RParen => f.write_str("')'"),
            TokenKind::End => f.write_str("end of input"),
        }
    }
}

#[derive(Debug, Clone)]
struct Token {
    kind: TokenKind,
    column: usize,
}

fn tokenize(text: &str) -> Result<Vec<Token>, ParseError> {
    let chars: Vec<char> = text.chars().collect();
    let mut tokens = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let column = i + 1;
        let error = |message: String| ParseError {
            token: tokens.len() + 1,
            column,
            message,
        };
        let kind = match c {
            c if c.is_whitespace() => {
                i += 1;
                continue;
            }
            '~' | '¬' => TokenKind::Not,
            '&' | '∧' => TokenKind::And,
            '|' | '∨' => TokenKind::Or,
            '□' => TokenKind::Box,
            '◇' => TokenKind::Diamond,
            '(' => TokenKind::LParen,
            ')' => TokenKind::RParen,
            '[' => {
                if chars.get(i + 1) != Some(&']') {
                    return Err(error("expected ']' after '['".into()));
                }
                i += 1;
                TokenKind::Box
            }
            '<' => {
                if chars.get(i + 1) != Some(&'>') {
                    return Err(error("expected '>' after '<'".into()));
                }
                i += 1;
                TokenKind::Diamond
            }
            'a'..='z' => {
                let start = i;
                while i + 1 < chars.len() && matches!(chars[i + 1], 'a'..='z' | '0'..='9' | '_') {
                    i += 1;
                }
                TokenKind::Ident(chars[start..=i].iter().collect())
            }
            other => return Err(error(format!("unexpected character '{other}'"))),
        };
        tokens.push(Token { kind, column });
        i += 1;
    }
    tokens.push(Token {
        kind: TokenKind::End,
        column: chars.len() + 1,
    });
    Ok(tokens)
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &TokenKind {
        &self.tokens[self.pos].kind
    }

    fn error_here(&self, message: String) -> ParseError {
        ParseError {
            token: self.pos + 1,
            column: self.tokens[self.pos].column,
            message,
        }
    }

    fn parse_or(&mut self) -> Result<Formula, ParseError> {
        let mut left = self.parse_and()?;
        while *self.peek() == TokenKind::Or {
            self.pos += 1;
            let right = self.parse_and()?;
            left = Formula::or(left, right);
        }
        Ok(left)
    }

    fn parse_and(&mut self) -> Result<Formula, ParseError> {
        let mut left = self.parse_unary()?;
        while *self.peek() == TokenKind::And {
            self.pos += 1;
            let right = self.parse_unary()?;
            left = Formula::and(left, right);
        }
        Ok(left)
    }

    fn parse_unary(&mut self) -> Result<Formula, ParseError> {
        match self.peek().clone() {
            TokenKind::Not => {
                self.pos += 1;
                Ok(Formula::not(self.parse_unary()?))
            }
            TokenKind::Box => {
                self.pos += 1;
                Ok(Formula::boxed(self.parse_unary()?))
            }
            TokenKind::Diamond => {
                self.pos += 1;
                Ok(Formula::diamond(self.parse_unary()?))
            }
            TokenKind::Ident(name) => {
                if RESERVED_WORDS.contains(&name.as_str()) {
                    return Err(
                        self.error_here(format!("'{name}' is reserved and cannot be an atom"))
                    );
                }
                self.pos += 1;
                Ok(Formula::Atom(Atom(Arc::from(name.as_str()))))
            }
            TokenKind::LParen => {
                self.pos += 1;
                let inner = self.parse_or()?;
                if *self.peek() != TokenKind::RParen {
                    return Err(self.error_here(format!("expected ')', found {}", self.peek())));
                }
                self.pos += 1;
                Ok(inner)
            }
            other => Err(self.error_here(format!("expected a formula, found {other}"))),
        }
    }
}

/// Parses the concrete syntax, desugaring `|` and `<>`.
pub fn parse(text: &str) -> Result<Formula, ParseError> {
    let tokens = tokenize(text)?;
    let mut parser = Parser { tokens, pos: 0 };
    let formula = parser.parse_or()?;
    if *parser.peek() != TokenKind::End {
        return Err(parser.error_here(format!("unexpected {}", parser.peek())));
    }
    Ok(formula)
}

impl FromStr for Formula {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse(s)
    }
}
