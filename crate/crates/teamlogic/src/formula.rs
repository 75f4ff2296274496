//! Formula syntax: AST, surface parser and printer, structural predicates
//! and transforms.
//!
//! Surface grammar (ASCII), tightest first:
//!
//! ```text
//! atom      identifier | NE | bot | Bot | Top | ( formula )
//! unary     ~u | <>u | []u | @u | atom
//! conj      unary (& unary)*
//! tensor    conj (| conj)*
//! formula   tensor (\/ tensor)*
//! ```
//!
//! All binary connectives associate to the left.

use std::collections::BTreeSet;
use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Address of one occurrence inside a formula: child indices from the root.
/// Unary nodes have child 0, binary nodes 0 (left) and 1 (right).
pub type Path = [usize];

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(tag = "op", content = "args")]
pub enum Formula {
    Atom(String),
    Neg(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    /// Split disjunction: the state divides into two parts, one per disjunct.
    TensorOr(Box<Formula>, Box<Formula>),
    /// Inquisitive disjunction: the whole state supports one disjunct.
    GlobalOr(Box<Formula>, Box<Formula>),
    Diamond(Box<Formula>),
    Box(Box<Formula>),
    /// Non-emptiness atom.
    Ne,
    /// Emptiness operator: supported where the argument is, or at the empty state.
    Empty(Box<Formula>),
    /// Weak contradiction, supported only by the empty state.
    BotWeak,
    /// Strong tautology, supported everywhere.
    TopStrong,
    /// Strong contradiction, supported nowhere.
    BotStrong,
}

/// Language fragment a formula belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub enum Tier {
    #[serde(rename = "ML")]
    Ml,
    #[serde(rename = "BSML")]
    Bsml,
    #[serde(rename = "BSMLO")]
    Bsmlo,
    #[serde(rename = "BSMLI")]
    Bsmli,
    /// Uses both the emptiness operator and inquisitive disjunction.
    #[serde(rename = "BSMLOI")]
    Full,
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
#[error("syntax error at byte {offset}: expected {}, found {found}", expected.join(" or "))]
pub struct ParseError {
    pub offset: usize,
    pub expected: Vec<&'static str>,
    pub found: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum FormulaError {
    #[error("invalid path {0:?}")]
    InvalidPath(Vec<usize>),
    #[error("enrichment needs a classical formula, got `{0}`")]
    NotClassical(String),
}

impl Formula {
    pub fn atom(name: &str) -> Formula {
        Formula::Atom(name.to_string())
    }

    #[allow(clippy::should_implement_trait)]
    pub fn neg(a: Formula) -> Formula {
        Formula::Neg(Box::new(a))
    }

    pub fn and(a: Formula, b: Formula) -> Formula {
        Formula::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: Formula, b: Formula) -> Formula {
        Formula::TensorOr(Box::new(a), Box::new(b))
    }

    pub fn gor(a: Formula, b: Formula) -> Formula {
        Formula::GlobalOr(Box::new(a), Box::new(b))
    }

    pub fn dia(a: Formula) -> Formula {
        Formula::Diamond(Box::new(a))
    }

    pub fn boxed(a: Formula) -> Formula {
        Formula::Box(Box::new(a))
    }

    pub fn empty(a: Formula) -> Formula {
        Formula::Empty(Box::new(a))
    }

    /// Right-nested conjunction; the empty conjunction is the strong tautology.
    pub fn conj(items: Vec<Formula>) -> Formula {
        fold_right(items, Formula::and).unwrap_or(Formula::TopStrong)
    }

    /// Right-nested split disjunction; the empty disjunction is `bot`.
    pub fn disj(items: Vec<Formula>) -> Formula {
        fold_right(items, Formula::or).unwrap_or(Formula::BotWeak)
    }

    /// Right-nested inquisitive disjunction; the empty one is `Bot`.
    pub fn gdisj(items: Vec<Formula>) -> Formula {
        fold_right(items, Formula::gor).unwrap_or(Formula::BotStrong)
    }

    pub fn children(&self) -> Vec<&Formula> {
        match self {
            Formula::Atom(_) | Formula::Ne | Formula::BotWeak | Formula::TopStrong | Formula::BotStrong => vec![],
            Formula::Neg(a) | Formula::Diamond(a) | Formula::Box(a) | Formula::Empty(a) => {
                vec![a]
            }
            Formula::And(a, b) | Formula::TensorOr(a, b) | Formula::GlobalOr(a, b) => vec![a, b],
        }
    }

    pub fn size(&self) -> usize {
        1 + self.children().iter().map(|c| c.size()).sum::<usize>()
    }

    fn any_node(&self, pred: &dyn Fn(&Formula) -> bool) -> bool {
        pred(self) || self.children().iter().any(|c| c.any_node(pred))
    }

    pub fn modal_depth(&self) -> usize {
        match self {
            Formula::Diamond(a) | Formula::Box(a) => a.modal_depth() + 1,
            _ => self.children().iter().map(|c| c.modal_depth()).max().unwrap_or(0),
        }
    }

    /// Proposition letters occurring in the formula. Constants contribute none.
    pub fn props(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_props(&mut out);
        out
    }

    fn collect_props(&self, out: &mut BTreeSet<String>) {
        if let Formula::Atom(p) = self {
            out.insert(p.clone());
        }
        for c in self.children() {
            c.collect_props(out);
        }
    }

    /// No `NE` and no `Bot` (which abbreviates `bot & NE`).
    pub fn is_ne_free(&self) -> bool {
        !self.any_node(&|f| matches!(f, Formula::Ne | Formula::BotStrong))
    }

    pub fn is_gdis_free(&self) -> bool {
        !self.any_node(&|f| matches!(f, Formula::GlobalOr(..)))
    }

    pub fn is_empty_free(&self) -> bool {
        !self.any_node(&|f| matches!(f, Formula::Empty(_)))
    }

    pub fn is_classical(&self) -> bool {
        self.is_ne_free() && self.is_gdis_free() && self.is_empty_free()
    }

    pub fn tier(&self) -> Tier {
        match (self.is_empty_free(), self.is_gdis_free()) {
            (true, true) if self.is_ne_free() => Tier::Ml,
            (true, true) => Tier::Bsml,
            (false, true) => Tier::Bsmlo,
            (true, false) => Tier::Bsmli,
            (false, false) => Tier::Full,
        }
    }

    pub fn subformula_at(&self, path: &Path) -> Result<&Formula, FormulaError> {
        let mut cur = self;
        for &i in path {
            cur = cur.children().get(i).copied().ok_or_else(|| FormulaError::InvalidPath(path.to_vec()))?;
        }
        Ok(cur)
    }

    /// Replaces exactly the occurrence addressed by `path`.
    pub fn replace_at(&self, path: &Path, with: &Formula) -> Result<Formula, FormulaError> {
        self.replace_inner(path, with).ok_or_else(|| FormulaError::InvalidPath(path.to_vec()))
    }

    fn replace_inner(&self, path: &Path, with: &Formula) -> Option<Formula> {
        let Some((&i, rest)) = path.split_first() else {
            return Some(with.clone());
        };
        let sub = |a: &Formula| a.replace_inner(rest, with).map(Box::new);
        Some(match (self, i) {
            (Formula::Neg(a), 0) => Formula::Neg(sub(a)?),
            (Formula::Diamond(a), 0) => Formula::Diamond(sub(a)?),
            (Formula::Box(a), 0) => Formula::Box(sub(a)?),
            (Formula::Empty(a), 0) => Formula::Empty(sub(a)?),
            (Formula::And(a, b), 0) => Formula::And(sub(a)?, b.clone()),
            (Formula::And(a, b), 1) => Formula::And(a.clone(), sub(b)?),
            (Formula::TensorOr(a, b), 0) => Formula::TensorOr(sub(a)?, b.clone()),
            (Formula::TensorOr(a, b), 1) => Formula::TensorOr(a.clone(), sub(b)?),
            (Formula::GlobalOr(a, b), 0) => Formula::GlobalOr(sub(a)?, b.clone()),
            (Formula::GlobalOr(a, b), 1) => Formula::GlobalOr(a.clone(), sub(b)?),
            _ => return None,
        })
    }

    /// True iff no strict ancestor of the addressed node is a negation or a modality.
    pub fn is_distributive(&self, path: &Path) -> Result<bool, FormulaError> {
        let mut cur = self;
        let mut free = true;
        for &i in path {
            if matches!(cur, Formula::Neg(_) | Formula::Diamond(_) | Formula::Box(_)) {
                free = false;
            }
            cur = cur.children().get(i).copied().ok_or_else(|| FormulaError::InvalidPath(path.to_vec()))?;
        }
        Ok(free)
    }

    /// Replaces every occurrence of the atom `p` by `with`.
    pub fn substitute_all(&self, p: &str, with: &Formula) -> Formula {
        self.map_children(&|c| c.substitute_all(p, with), |f| match f {
            Formula::Atom(q) if q == p => Some(with.clone()),
            _ => None,
        })
    }

    fn map_children(&self, rec: &dyn Fn(&Formula) -> Formula, leaf: impl Fn(&Formula) -> Option<Formula>) -> Formula {
        if let Some(f) = leaf(self) {
            return f;
        }
        let b = |a: &Formula| Box::new(rec(a));
        match self {
            Formula::Neg(a) => Formula::Neg(b(a)),
            Formula::Diamond(a) => Formula::Diamond(b(a)),
            Formula::Box(a) => Formula::Box(b(a)),
            Formula::Empty(a) => Formula::Empty(b(a)),
            Formula::And(x, y) => Formula::And(b(x), b(y)),
            Formula::TensorOr(x, y) => Formula::TensorOr(b(x), b(y)),
            Formula::GlobalOr(x, y) => Formula::GlobalOr(b(x), b(y)),
            leaf => leaf.clone(),
        }
    }

    /// Negation normal form: negations end up only on atoms and `NE`.
    pub fn nnf(&self) -> Formula {
        match self {
            Formula::Neg(a) => a.nnf_neg(),
            _ => self.map_children(&|c| c.nnf(), |_| None),
        }
    }

    /// Normal form of `~self`.
    fn nnf_neg(&self) -> Formula {
        match self {
            Formula::Atom(_) | Formula::Ne => Formula::neg(self.clone()),
            Formula::Neg(a) => a.nnf(),
            Formula::And(a, b) => Formula::or(a.nnf_neg(), b.nnf_neg()),
            Formula::TensorOr(a, b) | Formula::GlobalOr(a, b) => Formula::and(a.nnf_neg(), b.nnf_neg()),
            Formula::Diamond(a) => Formula::boxed(a.nnf_neg()),
            Formula::Box(a) => Formula::dia(a.nnf_neg()),
            Formula::Empty(a) => a.nnf_neg(),
            Formula::BotWeak => Formula::TopStrong,
            Formula::TopStrong => Formula::BotWeak,
            // `~(bot & NE)` is `~bot | ~NE`; this keeps anti-support exact.
            Formula::BotStrong => Formula::or(Formula::TopStrong, Formula::neg(Formula::Ne)),
        }
    }

    /// Unfolds `[]a` into `~<>~a`; constants stay primitive.
    pub fn expand_defined(&self) -> Formula {
        self.map_children(&|c| c.expand_defined(), |f| match f {
            Formula::Box(a) => Some(Formula::neg(Formula::dia(Formula::neg(a.expand_defined())))),
            _ => None,
        })
    }

    /// Pragmatic enrichment: conjoins `NE` at every level of a classical formula.
    pub fn enrich(&self) -> Result<Formula, FormulaError> {
        if !self.is_classical() {
            return Err(FormulaError::NotClassical(self.to_string()));
        }
        Ok(self.enrich_inner())
    }

    fn enrich_inner(&self) -> Formula {
        let ne = |f: Formula| Formula::and(f, Formula::Ne);
        match self {
            Formula::Neg(a) => ne(Formula::neg(a.enrich_inner())),
            Formula::Diamond(a) => ne(Formula::dia(a.enrich_inner())),
            Formula::Box(a) => ne(Formula::boxed(a.enrich_inner())),
            Formula::And(a, b) => ne(Formula::and(a.enrich_inner(), b.enrich_inner())),
            Formula::TensorOr(a, b) => ne(Formula::or(a.enrich_inner(), b.enrich_inner())),
            leaf => ne(leaf.clone()),
        }
    }

    /// Random formula with exactly `size` nodes over `props`, restricted to `tier`.
    pub fn random<R: Rng + ?Sized>(rng: &mut R, size: usize, props: &[String], tier: Tier) -> Formula {
        let size = size.max(1);
        if size == 1 {
            let mut leaves: Vec<Formula> = props.iter().map(|p| Formula::Atom(p.clone())).collect();
            leaves.push(Formula::BotWeak);
            leaves.push(Formula::TopStrong);
            if tier != Tier::Ml {
                leaves.push(Formula::Ne);
                leaves.push(Formula::Ne);
                leaves.push(Formula::BotStrong);
            }
            return leaves[rng.random_range(0..leaves.len())].clone();
        }
        let mut ops: Vec<u8> = vec![0, 1, 2, 3, 4];
        if matches!(tier, Tier::Bsmlo | Tier::Full) {
            ops.push(6);
        }
        if matches!(tier, Tier::Bsmli | Tier::Full) {
            ops.push(7);
        }
        if size == 2 {
            ops.retain(|o| matches!(o, 0 | 3 | 4 | 6));
        }
        match ops[rng.random_range(0..ops.len())] {
            0 => Formula::neg(Formula::random(rng, size - 1, props, tier)),
            3 => Formula::dia(Formula::random(rng, size - 1, props, tier)),
            4 => Formula::boxed(Formula::random(rng, size - 1, props, tier)),
            6 => Formula::empty(Formula::random(rng, size - 1, props, tier)),
            op => {
                let left = rng.random_range(1..size - 1);
                let a = Formula::random(rng, left, props, tier);
                let b = Formula::random(rng, size - 1 - left, props, tier);
                match op {
                    1 => Formula::and(a, b),
                    2 => Formula::or(a, b),
                    _ => Formula::gor(a, b),
                }
            }
        }
    }
}

fn fold_right(items: Vec<Formula>, op: fn(Formula, Formula) -> Formula) -> Option<Formula> {
    items.into_iter().rev().reduce(|acc, f| op(f, acc))
}

impl std::str::FromStr for Formula {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Formula, ParseError> {
        parse(s)
    }
}

// ---------------------------------------------------------------------------
// Printing

fn level(f: &Formula) -> u8 {
    match f {
        Formula::GlobalOr(..) => 1,
        Formula::TensorOr(..) => 2,
        Formula::And(..) => 3,
        _ => 4,
    }
}

fn write_at(f: &Formula, min: u8, out: &mut fmt::Formatter<'_>) -> fmt::Result {
    if level(f) < min {
        out.write_str("(")?;
        write_at(f, 0, out)?;
        return out.write_str(")");
    }
    let binary = |out: &mut fmt::Formatter<'_>, a: &Formula, op: &str, b: &Formula| {
        let l = level(f);
        write_at(a, l, out)?;
        out.write_str(op)?;
        write_at(b, l + 1, out)
    };
    match f {
        Formula::Atom(p) => out.write_str(p),
        Formula::Ne => out.write_str("NE"),
        Formula::BotWeak => out.write_str("bot"),
        Formula::TopStrong => out.write_str("Top"),
        Formula::BotStrong => out.write_str("Bot"),
        Formula::Neg(a) => {
            out.write_str("~")?;
            write_at(a, 4, out)
        }
        Formula::Diamond(a) => {
            out.write_str("<>")?;
            write_at(a, 4, out)
        }
        Formula::Box(a) => {
            out.write_str("[]")?;
            write_at(a, 4, out)
        }
        Formula::Empty(a) => {
            out.write_str("@")?;
            write_at(a, 4, out)
        }
        Formula::And(a, b) => binary(out, a, " & ", b),
        Formula::TensorOr(a, b) => binary(out, a, " | ", b),
        Formula::GlobalOr(a, b) => binary(out, a, " \\/ ", b),
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_at(self, 0, f)
    }
}

// ---------------------------------------------------------------------------
// Parsing

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Ident(String),
    Tilde,
    Dia,
    Box,
    At,
    Amp,
    Bar,
    GOr,
    LParen,
    RParen,
    End,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Tilde => "`~`".into(),
            Tok::Dia => "`<>`".into(),
            Tok::Box => "`[]`".into(),
            Tok::At => "`@`".into(),
            Tok::Amp => "`&`".into(),
            Tok::Bar => "`|`".into(),
            Tok::GOr => "`\\/`".into(),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::End => "end of input".into(),
        }
    }
}

fn lex(src: &str) -> Result<Vec<(usize, Tok)>, ParseError> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        let two = |s: &[u8]| bytes[i..].starts_with(s);
        let tok = if two(b"<>") {
            i += 2;
            Tok::Dia
        } else if two(b"[]") {
            i += 2;
            Tok::Box
        } else if two(b"\\/") {
            i += 2;
            Tok::GOr
        } else if c.is_ascii_alphabetic() || c == b'_' {
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_' || bytes[i] == b'\'') {
                i += 1;
            }
            Tok::Ident(src[start..i].to_string())
        } else {
            i += 1;
            match c {
                b'~' => Tok::Tilde,
                b'@' => Tok::At,
                b'&' => Tok::Amp,
                b'|' => Tok::Bar,
                b'(' => Tok::LParen,
                b')' => Tok::RParen,
                _ => {
                    let ch = src[start..].chars().next().unwrap_or('?');
                    return Err(ParseError {
                        offset: start,
                        expected: vec!["a formula token"],
                        found: format!("`{ch}`"),
                    });
                }
            }
        };
        out.push((start, tok));
    }
    out.push((src.len(), Tok::End));
    Ok(out)
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    pos: usize,
}

const OPERAND: &[&str] = &["identifier", "`NE`", "`bot`", "`Bot`", "`Top`", "`(`", "`~`", "`<>`", "`[]`", "`@`"];

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].1
    }

    fn error(&self, expected: Vec<&'static str>) -> ParseError {
        let (offset, tok) = &self.toks[self.pos];
        ParseError { offset: *offset, expected, found: tok.describe() }
    }

    fn binary(
        &mut self,
        tok: Tok,
        next: fn(&mut Parser) -> Result<Formula, ParseError>,
        build: fn(Formula, Formula) -> Formula,
    ) -> Result<Formula, ParseError> {
        let mut acc = next(self)?;
        while *self.peek() == tok {
            self.pos += 1;
            let rhs = next(self)?;
            acc = build(acc, rhs);
        }
        Ok(acc)
    }

    fn gor(&mut self) -> Result<Formula, ParseError> {
        self.binary(Tok::GOr, Parser::tensor, Formula::gor)
    }

    fn tensor(&mut self) -> Result<Formula, ParseError> {
        self.binary(Tok::Bar, Parser::conj, Formula::or)
    }

    fn conj(&mut self) -> Result<Formula, ParseError> {
        self.binary(Tok::Amp, Parser::unary, Formula::and)
    }

    fn unary(&mut self) -> Result<Formula, ParseError> {
        let tok = self.peek().clone();
        let wrap: fn(Formula) -> Formula = match tok {
            Tok::Tilde => Formula::neg,
            Tok::Dia => Formula::dia,
            Tok::Box => Formula::boxed,
            Tok::At => Formula::empty,
            Tok::LParen => {
                self.pos += 1;
                let inner = self.gor()?;
                if *self.peek() != Tok::RParen {
                    return Err(self.error(vec!["`)`", "`&`", "`|`", "`\\/`"]));
                }
                self.pos += 1;
                return Ok(inner);
            }
            Tok::Ident(name) => {
                self.pos += 1;
                return Ok(match name.as_str() {
                    "NE" => Formula::Ne,
                    "bot" => Formula::BotWeak,
                    "Bot" => Formula::BotStrong,
                    "Top" => Formula::TopStrong,
                    _ => Formula::Atom(name),
                });
            }
            _ => return Err(self.error(OPERAND.to_vec())),
        };
        self.pos += 1;
        Ok(wrap(self.unary()?))
    }
}

pub fn parse(src: &str) -> Result<Formula, ParseError> {
    let mut p = Parser { toks: lex(src)?, pos: 0 };
    let f = p.gor()?;
    if *p.peek() != Tok::End {
        return Err(p.error(vec!["`&`", "`|`", "`\\/`", "end of input"]));
    }
    Ok(f)
}
