//! Text formats for germs and framed curves.
//!
//! Germ files look like
//!
//! ```text
//! # Whitney umbrella
//! map 2 -> 3 order 4 : [x1, x1*x2, x2^2]
//! ```
//!
//! Framed-curve files use the single variable `t`:
//!
//! ```text
//! ruling 2 order 4
//! gamma:  [t, 0, 0, 0]
//! delta1: [1, t, 0, 0]
//! delta2: [0, 0, 1, t]
//! ```
//!
//! Expressions use `+ - * ^` and parentheses. Precedence is `^` over unary
//! minus over `*` over binary `+`/`-`; the binary operators associate to the
//! left and `^` takes a positive integer exponent and does not chain. A
//! literal is an integer or `p/q` written without spaces.

use std::fmt;

use crate::germ::MapJet;
use crate::jet::{Jet, MAX_ORDER, MAX_VARS};
use crate::rat::Rat;

/// Largest exponent accepted after `^`.
pub const MAX_EXPONENT: u32 = 255;
const MAX_DEPTH: usize = 96;
const MAX_LITERAL_BITS: u64 = 1 << 16;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("{line}:{column}: {kind}")]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub kind: ParseErrorKind,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ParseErrorKind {
    #[error("unexpected character {0:?}")]
    UnexpectedChar(char),
    #[error("expected {expected}, found {found}")]
    Unexpected { expected: String, found: String },
    #[error("undeclared variable `{0}`")]
    UndeclaredVariable(String),
    #[error("component {component} has a nonzero constant term")]
    NonzeroConstant { component: usize },
    #[error("exponent must be an integer between 1 and {MAX_EXPONENT}")]
    BadExponent,
    #[error("invalid number: {0}")]
    BadNumber(String),
    #[error("division is only allowed inside a literal such as 1/2")]
    Division,
    #[error("{0}")]
    Header(String),
    #[error("expected {expected} components, found {found}")]
    ComponentCount { expected: usize, found: usize },
    #[error("expression nested too deeply")]
    TooDeep,
    #[error("constant value too large")]
    TooLarge,
}

/// Expression tree. Variables are 0-based; literals are non-negative.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Expr {
    Num(Rat),
    Var(usize),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, u32),
}

impl Expr {
    /// Evaluates to a jet in `num_vars` variables truncated at `order`.
    pub fn to_jet(&self, num_vars: usize, order: u32) -> Jet {
        self.eval(num_vars, order, &mut { u64::MAX }).expect("expression validated by the parser")
    }

    /// `budget` counts coefficient operations and is shared by every
    /// expression of a file, so hostile input fails fast with `TooLarge`.
    fn eval(&self, n: usize, d: u32, budget: &mut u64) -> Result<Jet, ParseErrorKind> {
        Ok(match self {
            Expr::Num(c) => Jet::constant(n, d, c.clone()),
            Expr::Var(k) => Jet::var(n, d, *k).map_err(|_| ParseErrorKind::UndeclaredVariable(format!("#{}", k + 1)))?,
            Expr::Neg(e) => -&e.eval(n, d, budget)?,
            Expr::Add(a, b) => {
                let (a, b) = (a.eval(n, d, budget)?, b.eval(n, d, budget)?);
                charge(budget, (a.len() + b.len()) as u64)?;
                &a + &b
            }
            Expr::Sub(a, b) => {
                let (a, b) = (a.eval(n, d, budget)?, b.eval(n, d, budget)?);
                charge(budget, (a.len() + b.len()) as u64)?;
                &a - &b
            }
            Expr::Mul(a, b) => {
                let (a, b) = (a.eval(n, d, budget)?, b.eval(n, d, budget)?);
                checked_mul(&a, &b, budget)?
            }
            Expr::Pow(b, k) => {
                let base = b.eval(n, d, budget)?;
                if max_bits(&base).saturating_mul(*k as u64) > MAX_LITERAL_BITS {
                    return Err(ParseErrorKind::TooLarge);
                }
                let mut acc = Jet::one(n, d);
                let mut sq = base;
                let mut e = *k;
                while e > 0 {
                    if e & 1 == 1 {
                        acc = checked_mul(&acc, &sq, budget)?;
                    }
                    e >>= 1;
                    if e > 0 {
                        sq = checked_mul(&sq, &sq, budget)?;
                    }
                }
                acc
            }
        })
    }

    /// Builds the expanded sum of monomials of a jet.
    pub fn from_jet(j: &Jet) -> Expr {
        let mut acc: Option<Expr> = None;
        for (m, c) in j.terms() {
            let mut factors: Vec<Expr> = Vec::new();
            for (k, e) in m.exponents(j.num_vars()).into_iter().enumerate() {
                match e {
                    0 => {}
                    1 => factors.push(Expr::Var(k)),
                    e => factors.push(Expr::Pow(Box::new(Expr::Var(k)), e)),
                }
            }
            let mag = c.abs();
            if !mag.is_one() || factors.is_empty() {
                factors.insert(0, Expr::Num(mag));
            }
            let term = factors.into_iter().reduce(|a, b| Expr::Mul(Box::new(a), Box::new(b))).expect("nonempty");
            let neg = c.signum() < 0;
            acc = Some(match (acc, neg) {
                (None, false) => term,
                (None, true) => Expr::Neg(Box::new(term)),
                (Some(a), false) => Expr::Add(Box::new(a), Box::new(term)),
                (Some(a), true) => Expr::Sub(Box::new(a), Box::new(term)),
            });
        }
        acc.unwrap_or(Expr::Num(Rat::zero()))
    }

    fn precedence(&self) -> u8 {
        match self {
            Expr::Add(..) | Expr::Sub(..) => 1,
            Expr::Mul(..) => 2,
            Expr::Neg(_) => 3,
            Expr::Pow(..) => 4,
            Expr::Num(c) if !c.is_integer() || c.signum() < 0 => 4,
            Expr::Num(_) | Expr::Var(_) => 5,
        }
    }

    /// Prints with variable names `names[k]`, using the fewest parentheses
    /// that parse back to the same tree.
    pub fn display_with<'a>(&'a self, names: &'a [String]) -> impl fmt::Display + 'a {
        Printer { expr: self, names }
    }
}

struct Printer<'a> {
    expr: &'a Expr,
    names: &'a [String],
}

impl Printer<'_> {
    fn write(&self, f: &mut fmt::Formatter<'_>, e: &Expr, min_prec: u8) -> fmt::Result {
        if e.precedence() < min_prec {
            write!(f, "(")?;
            self.write(f, e, 0)?;
            return write!(f, ")");
        }
        match e {
            Expr::Num(c) if c.signum() < 0 => write!(f, "-{}", c.abs()),
            Expr::Num(c) => write!(f, "{c}"),
            Expr::Var(k) => match self.names.get(*k) {
                Some(name) => write!(f, "{name}"),
                None => write!(f, "x{}", k + 1),
            },
            Expr::Neg(a) => {
                write!(f, "-")?;
                self.write(f, a, 3)
            }
            Expr::Add(a, b) | Expr::Sub(a, b) => {
                self.write(f, a, 1)?;
                write!(f, " {} ", if matches!(e, Expr::Add(..)) { '+' } else { '-' })?;
                self.write(f, b, 2)
            }
            Expr::Mul(a, b) => {
                self.write(f, a, 2)?;
                write!(f, "*")?;
                self.write(f, b, 3)
            }
            Expr::Pow(a, k) => {
                self.write(f, a, 5)?;
                write!(f, "^{k}")
            }
        }
    }
}

impl fmt::Display for Printer<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.write(f, self.expr, 0)
    }
}

/// Coefficient operations allowed while evaluating one file.
const WORK_BUDGET: u64 = 1 << 22;
const MAX_TERMS: usize = 1 << 14;

fn charge(budget: &mut u64, cost: u64) -> Result<(), ParseErrorKind> {
    *budget = budget.checked_sub(cost).ok_or(ParseErrorKind::TooLarge)?;
    Ok(())
}

fn max_bits(j: &Jet) -> u64 {
    j.terms().map(|(_, c)| c.numer().bits() + c.denom().bits()).max().unwrap_or(0)
}

fn checked_mul(a: &Jet, b: &Jet, budget: &mut u64) -> Result<Jet, ParseErrorKind> {
    // one unit per 64-bit limb of the larger operand coefficients
    let width = 1 + (max_bits(a) + max_bits(b)) / 64;
    charge(budget, (a.len() as u64).saturating_mul(b.len() as u64).saturating_mul(width))?;
    let p = a * b;
    if p.len() > MAX_TERMS {
        return Err(ParseErrorKind::TooLarge);
    }
    check_size(&p)?;
    Ok(p)
}

fn check_size(j: &Jet) -> Result<(), ParseErrorKind> {
    let too_big = j.terms().any(|(_, c)| c.numer().bits() + c.denom().bits() > MAX_LITERAL_BITS);
    if too_big {
        Err(ParseErrorKind::TooLarge)
    } else {
        Ok(())
    }
}

/// A parsed germ file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GermSource {
    pub m: usize,
    pub n: usize,
    pub order: u32,
    pub exprs: Vec<Expr>,
}

impl GermSource {
    pub fn to_map_jet(&self) -> MapJet {
        self.to_map_jet_at(self.order)
    }

    /// Evaluates at a different truncation order.
    pub fn to_map_jet_at(&self, order: u32) -> MapJet {
        let comps = self.exprs.iter().map(|e| e.to_jet(self.m, order)).collect();
        MapJet::new(self.m, comps).expect("components validated by the parser")
    }

    /// Expanded source text for a germ.
    pub fn from_map_jet(f: &MapJet) -> GermSource {
        GermSource {
            m: f.source_dim(),
            n: f.target_dim(),
            order: f.order(),
            exprs: f.components().iter().map(Expr::from_jet).collect(),
        }
    }
}

impl fmt::Display for GermSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names: Vec<String> = (1..=self.m).map(|k| format!("x{k}")).collect();
        write!(f, "map {} -> {} order {} : [", self.m, self.n, self.order)?;
        for (i, e) in self.exprs.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{}", e.display_with(&names))?;
        }
        write!(f, "]")
    }
}

/// A parsed framed-curve file. Every expression is in the variable `t`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FramedSource {
    pub n: usize,
    pub order: u32,
    pub gamma: Vec<Expr>,
    pub delta: Vec<Vec<Expr>>,
}

impl fmt::Display for FramedSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names = vec!["t".to_string()];
        let list = |f: &mut fmt::Formatter<'_>, v: &[Expr]| -> fmt::Result {
            write!(f, "[")?;
            for (i, e) in v.iter().enumerate() {
                if i > 0 {
                    write!(f, ", ")?;
                }
                write!(f, "{}", e.display_with(&names))?;
            }
            writeln!(f, "]")
        };
        writeln!(f, "ruling {} order {}", self.n, self.order)?;
        write!(f, "gamma: ")?;
        list(f, &self.gamma)?;
        for (i, d) in self.delta.iter().enumerate() {
            write!(f, "delta{}: ", i + 1)?;
            list(f, d)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Num(Rat),
    Ident(String),
    Plus,
    Minus,
    Star,
    Caret,
    Slash,
    Arrow,
    Colon,
    Comma,
    LParen,
    RParen,
    LBracket,
    RBracket,
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Num(r) => write!(f, "number {r}"),
            Tok::Ident(s) => write!(f, "`{s}`"),
            Tok::Plus => write!(f, "`+`"),
            Tok::Minus => write!(f, "`-`"),
            Tok::Star => write!(f, "`*`"),
            Tok::Caret => write!(f, "`^`"),
            Tok::Slash => write!(f, "`/`"),
            Tok::Arrow => write!(f, "`->`"),
            Tok::Colon => write!(f, "`:`"),
            Tok::Comma => write!(f, "`,`"),
            Tok::LParen => write!(f, "`(`"),
            Tok::RParen => write!(f, "`)`"),
            Tok::LBracket => write!(f, "`[`"),
            Tok::RBracket => write!(f, "`]`"),
            Tok::Eof => write!(f, "end of input"),
        }
    }
}

#[derive(Clone, Copy, Debug)]
struct Pos {
    line: usize,
    column: usize,
}

fn lex(text: &str) -> Result<Vec<(Tok, Pos)>, ParseError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0, 1, 1);
    let err = |line, column, kind| ParseError { line, column, kind };
    while i < chars.len() {
        let c = chars[i];
        let pos = Pos { line, column: col };
        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        if c == '#' {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
            continue;
        }
        let start = i;
        let tok = if c.is_ascii_digit() {
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            if i + 1 < chars.len() && chars[i] == '/' && chars[i + 1].is_ascii_digit() {
                i += 1;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
            }
            let s: String = chars[start..i].iter().collect();
            if s.len() > 4096 {
                return Err(err(line, col, ParseErrorKind::TooLarge));
            }
            let r: Rat = s.parse().map_err(|e| err(line, col, ParseErrorKind::BadNumber(format!("{s}: {e}"))))?;
            Tok::Num(r)
        } else if c.is_ascii_alphabetic() || c == '_' {
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            Tok::Ident(chars[start..i].iter().collect())
        } else {
            i += 1;
            match c {
                '+' => Tok::Plus,
                '-' if chars.get(i) == Some(&'>') => {
                    i += 1;
                    Tok::Arrow
                }
                '-' => Tok::Minus,
                '*' => Tok::Star,
                '^' => Tok::Caret,
                '/' => Tok::Slash,
                ':' => Tok::Colon,
                ',' => Tok::Comma,
                '(' => Tok::LParen,
                ')' => Tok::RParen,
                '[' => Tok::LBracket,
                ']' => Tok::RBracket,
                _ => return Err(err(line, col, ParseErrorKind::UnexpectedChar(c))),
            }
        };
        col += i - start;
        out.push((tok, pos));
    }
    out.push((Tok::Eof, Pos { line, column: col }));
    Ok(out)
}

struct Parser<'v> {
    toks: Vec<(Tok, Pos)>,
    at: usize,
    vars: &'v [String],
    depth: usize,
    budget: u64,
}

impl Parser<'_> {
    fn peek(&self) -> &Tok {
        &self.toks[self.at].0
    }

    fn pos(&self) -> Pos {
        self.toks[self.at].1
    }

    fn error_at(&self, pos: Pos, kind: ParseErrorKind) -> ParseError {
        ParseError { line: pos.line, column: pos.column, kind }
    }

    fn unexpected(&self, expected: &str) -> ParseError {
        self.error_at(
            self.pos(),
            ParseErrorKind::Unexpected { expected: expected.to_string(), found: self.peek().to_string() },
        )
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.at].0.clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    fn expect(&mut self, tok: Tok, what: &str) -> Result<(), ParseError> {
        if *self.peek() == tok {
            self.bump();
            Ok(())
        } else {
            Err(self.unexpected(what))
        }
    }

    fn keyword(&mut self, word: &str) -> Result<(), ParseError> {
        match self.peek() {
            Tok::Ident(s) if s == word => {
                self.bump();
                Ok(())
            }
            _ => Err(self.unexpected(&format!("`{word}`"))),
        }
    }

    fn integer(&mut self, what: &str) -> Result<(u64, Pos), ParseError> {
        let pos = self.pos();
        match self.peek() {
            Tok::Num(r) if r.is_integer() => {
                let v = r.to_i64().and_then(|v| u64::try_from(v).ok());
                match v {
                    Some(v) => {
                        self.bump();
                        Ok((v, pos))
                    }
                    None => Err(self.error_at(pos, ParseErrorKind::BadNumber(format!("{what} out of range")))),
                }
            }
            _ => Err(self.unexpected(what)),
        }
    }

    fn enter(&mut self) -> Result<(), ParseError> {
        self.depth += 1;
        if self.depth > MAX_DEPTH {
            return Err(self.error_at(self.pos(), ParseErrorKind::TooDeep));
        }
        Ok(())
    }

    fn sum(&mut self) -> Result<Expr, ParseError> {
        self.enter()?;
        let mut lhs = self.product()?;
        loop {
            match self.peek() {
                Tok::Plus => {
                    self.bump();
                    lhs = Expr::Add(Box::new(lhs), Box::new(self.product()?));
                }
                Tok::Minus => {
                    self.bump();
                    lhs = Expr::Sub(Box::new(lhs), Box::new(self.product()?));
                }
                _ => break,
            }
        }
        self.depth -= 1;
        Ok(lhs)
    }

    fn product(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            match self.peek() {
                Tok::Star => {
                    self.bump();
                    lhs = Expr::Mul(Box::new(lhs), Box::new(self.unary()?));
                }
                Tok::Slash => return Err(self.error_at(self.pos(), ParseErrorKind::Division)),
                _ => break,
            }
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        if *self.peek() == Tok::Minus {
            self.bump();
            self.enter()?;
            let inner = self.unary()?;
            self.depth -= 1;
            return Ok(Expr::Neg(Box::new(inner)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.atom()?;
        if *self.peek() != Tok::Caret {
            return Ok(base);
        }
        self.bump();
        let pos = self.pos();
        let k = match self.peek() {
            Tok::Num(r) if r.is_integer() => r.to_i64().filter(|&v| v >= 1 && v <= MAX_EXPONENT as i64),
            _ => None,
        };
        let Some(k) = k else {
            return Err(self.error_at(pos, ParseErrorKind::BadExponent));
        };
        self.bump();
        if *self.peek() == Tok::Caret {
            return Err(self.unexpected("an operator other than a second `^` (use parentheses)"));
        }
        Ok(Expr::Pow(Box::new(base), k as u32))
    }

    fn atom(&mut self) -> Result<Expr, ParseError> {
        let pos = self.pos();
        match self.peek().clone() {
            Tok::Num(r) => {
                self.bump();
                Ok(Expr::Num(r))
            }
            Tok::Ident(name) => match self.vars.iter().position(|v| *v == name) {
                Some(k) => {
                    self.bump();
                    Ok(Expr::Var(k))
                }
                None => Err(self.error_at(pos, ParseErrorKind::UndeclaredVariable(name))),
            },
            Tok::LParen => {
                self.bump();
                let e = self.sum()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(e)
            }
            _ => Err(self.unexpected("an expression")),
        }
    }

    /// `[e, e, ...]`, returning each expression with its starting position.
    fn list(&mut self) -> Result<Vec<(Expr, Pos)>, ParseError> {
        self.expect(Tok::LBracket, "`[`")?;
        let mut out = Vec::new();
        if *self.peek() == Tok::RBracket {
            self.bump();
            return Ok(out);
        }
        loop {
            let pos = self.pos();
            out.push((self.sum()?, pos));
            match self.peek() {
                Tok::Comma => {
                    self.bump();
                }
                Tok::RBracket => {
                    self.bump();
                    return Ok(out);
                }
                _ => return Err(self.unexpected("`,` or `]`")),
            }
        }
    }

    fn eval_checked(&mut self, e: &Expr, pos: Pos, n: usize, d: u32) -> Result<Jet, ParseError> {
        e.eval(n, d, &mut self.budget).map_err(|k| self.error_at(pos, k))
    }
}

/// Parses a germ file.
pub fn parse_germ(text: &str) -> Result<GermSource, ParseError> {
    let toks = lex(text)?;
    let mut p = Parser { toks, at: 0, vars: &[], depth: 0, budget: WORK_BUDGET };
    p.keyword("map")?;
    let (m, m_pos) = p.integer("the source dimension")?;
    p.expect(Tok::Arrow, "`->`")?;
    let (n, n_pos) = p.integer("the target dimension")?;
    p.keyword("order")?;
    let (d, d_pos) = p.integer("the truncation order")?;
    p.expect(Tok::Colon, "`:`")?;
    if m == 0 || m as usize > MAX_VARS {
        return Err(p.error_at(m_pos, ParseErrorKind::Header(format!("source dimension must be 1..={MAX_VARS}"))));
    }
    if n == 0 || n > 4096 {
        return Err(p.error_at(n_pos, ParseErrorKind::Header("target dimension must be 1..=4096".into())));
    }
    if d > MAX_ORDER as u64 {
        return Err(p.error_at(d_pos, ParseErrorKind::Header(format!("order must be at most {MAX_ORDER}"))));
    }
    let (m, n, d) = (m as usize, n as usize, d as u32);
    let names: Vec<String> = (1..=m).map(|k| format!("x{k}")).collect();
    p.vars = &names;
    let list_pos = p.pos();
    let items = p.list()?;
    if *p.peek() != Tok::Eof {
        return Err(p.unexpected("end of input"));
    }
    if items.len() != n {
        return Err(p.error_at(list_pos, ParseErrorKind::ComponentCount { expected: n, found: items.len() }));
    }
    for (i, (e, pos)) in items.iter().enumerate() {
        let j = p.eval_checked(e, *pos, m, d)?;
        if !j.constant_term().is_zero() {
            return Err(p.error_at(*pos, ParseErrorKind::NonzeroConstant { component: i + 1 }));
        }
    }
    Ok(GermSource { m, n, order: d, exprs: items.into_iter().map(|(e, _)| e).collect() })
}

/// Parses a framed-curve file.
pub fn parse_framed(text: &str) -> Result<FramedSource, ParseError> {
    let toks = lex(text)?;
    let names = vec!["t".to_string()];
    let mut p = Parser { toks, at: 0, vars: &[], depth: 0, budget: WORK_BUDGET };
    p.keyword("ruling")?;
    let (n, n_pos) = p.integer("the plane dimension")?;
    p.keyword("order")?;
    let (d, d_pos) = p.integer("the truncation order")?;
    if n == 0 || 2 * n as usize + 1 > MAX_VARS * 2 || n > 7 {
        return Err(p.error_at(n_pos, ParseErrorKind::Header("plane dimension must be 1..=7".into())));
    }
    if d > MAX_ORDER as u64 {
        return Err(p.error_at(d_pos, ParseErrorKind::Header(format!("order must be at most {MAX_ORDER}"))));
    }
    let (n, d) = (n as usize, d as u32);
    p.vars = &names;
    let section = |p: &mut Parser<'_>, label: &str| -> Result<Vec<Expr>, ParseError> {
        p.keyword(label)?;
        p.expect(Tok::Colon, "`:`")?;
        let list_pos = p.pos();
        let items = p.list()?;
        if items.len() != 2 * n {
            return Err(p.error_at(list_pos, ParseErrorKind::ComponentCount { expected: 2 * n, found: items.len() }));
        }
        for (e, pos) in &items {
            p.eval_checked(e, *pos, 1, d)?;
        }
        Ok(items.into_iter().map(|(e, _)| e).collect())
    };
    let gamma = section(&mut p, "gamma")?;
    let mut delta = Vec::with_capacity(n);
    for i in 1..=n {
        delta.push(section(&mut p, &format!("delta{i}"))?);
    }
    if *p.peek() != Tok::Eof {
        return Err(p.unexpected("end of input"));
    }
    Ok(FramedSource { n, order: d, gamma, delta })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn x(k: usize) -> Expr {
        Expr::Var(k)
    }

    fn b(e: Expr) -> Box<Expr> {
        Box::new(e)
    }

    #[test]
    fn whitney_umbrella() {
        let g = parse_germ("map 2 -> 3 order 4 : [x1, x1*x2, x2^2]").unwrap();
        assert_eq!((g.m, g.n, g.order), (2, 3, 4));
        assert_eq!(g.exprs[1], Expr::Mul(b(x(0)), b(x(1))));
        assert_eq!(g.exprs[2], Expr::Pow(b(x(1)), 2));
        assert_eq!(g.to_string(), "map 2 -> 3 order 4 : [x1, x1*x2, x2^2]");
    }

    #[test]
    fn nonzero_constant_reports_component() {
        let e = parse_germ("map 2 -> 3 order 4 : [x1, x2 + 1, x2^2]").unwrap_err();
        assert_eq!(e.kind, ParseErrorKind::NonzeroConstant { component: 2 });
        assert_eq!((e.line, e.column), (1, 27));
    }

    #[test]
    fn h02_with_comments() {
        let text = "# h_{0,2}\nmap 4 -> 5 order 5 : [x1,x2,x3,\n  x1*x4 + x2*x4^2, # h1\n  x3*x4 + x4^3]\n";
        let g = parse_germ(text).unwrap();
        let f = g.to_map_jet();
        assert_eq!(f.target_dim(), 5);
        assert_eq!(f.component(4).to_string(), "x3*x4 + x4^3");
    }

    #[test]
    fn precedence() {
        let names: Vec<String> = vec!["x1".into(), "x2".into()];
        let mut p = Parser { toks: lex("-x1^2*x2 - 1/2*x1 + x2").unwrap(), at: 0, vars: &names, depth: 0, budget: WORK_BUDGET };
        let e = p.sum().unwrap();
        let expected = Expr::Add(
            b(Expr::Sub(
                b(Expr::Mul(b(Expr::Neg(b(Expr::Pow(b(x(0)), 2)))), b(x(1)))),
                b(Expr::Mul(b(Expr::Num(Rat::new(1, 2))), b(x(0)))),
            )),
            b(x(1)),
        );
        assert_eq!(e, expected);
    }

    #[test]
    fn errors_carry_positions() {
        let e = parse_germ("map 2 -> 3 order 4 : [x1, y*x2, x2^2]").unwrap_err();
        assert_eq!(e.kind, ParseErrorKind::UndeclaredVariable("y".into()));
        assert_eq!((e.line, e.column), (1, 27));
        let e = parse_germ("map 2 -> 3 order 4 :\n [x1, x3, x2^2]").unwrap_err();
        assert_eq!((e.line, e.column), (2, 7));
        assert!(matches!(parse_germ("map 1 -> 2 order 3 : [x1, x1^0]").unwrap_err().kind, ParseErrorKind::BadExponent));
        assert!(matches!(parse_germ("map 1 -> 2 order 3 : [x1, x1^2^2]").unwrap_err().kind, ParseErrorKind::Unexpected { .. }));
        assert!(matches!(parse_germ("map 1 -> 2 order 3 : [x1, x1/2]").unwrap_err().kind, ParseErrorKind::Division));
        assert!(matches!(parse_germ("map 1 -> 2 order 3 : [x1]").unwrap_err().kind, ParseErrorKind::ComponentCount { .. }));
        assert!(matches!(parse_germ("map 1 -> 2 order 3 : [x1, x1 $]").unwrap_err().kind, ParseErrorKind::UnexpectedChar('$')));
        assert!(matches!(parse_germ("map 1 -> 2 order 3 : [x1, (x1]").unwrap_err().kind, ParseErrorKind::Unexpected { .. }));
        assert!(matches!(parse_germ("map 1 -> 2 order 3 : [x1, x1 +]").unwrap_err().kind, ParseErrorKind::Unexpected { .. }));
    }

    #[test]
    fn deep_nesting_is_rejected() {
        let text = format!("map 1 -> 1 order 2 : [{}x1{}]", "(".repeat(500), ")".repeat(500));
        assert_eq!(parse_germ(&text).unwrap_err().kind, ParseErrorKind::TooDeep);
        let text = format!("map 1 -> 1 order 2 : [{}x1]", "-".repeat(500));
        assert_eq!(parse_germ(&text).unwrap_err().kind, ParseErrorKind::TooDeep);
    }

    #[test]
    fn expensive_expansions_are_rejected() {
        let text = "map 5 -> 4 order 47 : [(x1 + x2 + x3 + x4 + x5)^86, x1, x2, x3]";
        assert_eq!(parse_germ(text).unwrap_err().kind, ParseErrorKind::TooLarge);
    }

    #[test]
    fn huge_constants_are_rejected() {
        let e = parse_germ("map 1 -> 1 order 2 : [x1*((3^255)^255)^255]").unwrap_err();
        assert_eq!(e.kind, ParseErrorKind::TooLarge);
    }

    #[test]
    fn printer_round_trips_tricky_trees() {
        let trees = vec![
            Expr::Sub(b(x(0)), b(Expr::Sub(b(x(1)), b(x(0))))),
            Expr::Mul(b(x(0)), b(Expr::Neg(b(x(1))))),
            Expr::Neg(b(Expr::Neg(b(x(0))))),
            Expr::Pow(b(Expr::Neg(b(x(0)))), 3),
            Expr::Pow(b(Expr::Pow(b(x(0)), 2)), 3),
            Expr::Pow(b(Expr::Num(Rat::new(1, 2))), 2),
            Expr::Mul(b(Expr::Mul(b(x(0)), b(x(1)))), b(Expr::Mul(b(x(0)), b(x(1))))),
            Expr::Neg(b(Expr::Add(b(x(0)), b(x(1))))),
        ];
        for t in trees {
            let g = GermSource { m: 2, n: 2, order: 3, exprs: vec![x(0), Expr::Mul(b(x(0)), b(t))] };
            assert_eq!(parse_germ(&g.to_string()).unwrap(), g, "{g}");
        }
    }

    #[test]
    fn from_jet_expands() {
        let g = parse_germ("map 2 -> 2 order 3 : [x1, -(x1 - 1/2*x2)^2]").unwrap();
        let f = g.to_map_jet();
        let back = GermSource::from_map_jet(&f);
        assert_eq!(back.to_string(), "map 2 -> 2 order 3 : [x1, -x1^2 + x1*x2 - 1/4*x2^2]");
        assert_eq!(back.to_map_jet(), f);
    }

    #[test]
    fn framed_curve() {
        let text = "ruling 2 order 4\ngamma: [t, 0, 0, 0]\ndelta1: [1 - 1/2*t^2, t - 1/6*t^3, 0, 0]\ndelta2: [0, 0, 1 - 1/2*t^2, t - 1/6*t^3]\n";
        let fs = parse_framed(text).unwrap();
        assert_eq!(fs.delta.len(), 2);
        assert_eq!(parse_framed(&fs.to_string()).unwrap(), fs);
        let e = parse_framed("ruling 2 order 4\ngamma: [t, 0, 0, 0]\ndelta1: [1, t, 0, 0]\n").unwrap_err();
        assert!(matches!(e.kind, ParseErrorKind::Unexpected { .. }));
        assert_eq!(e.line, 4);
    }
}
