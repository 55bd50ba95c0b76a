//! Expression grammar for phase-space functions.
//!
//! ```text
//! expr   := ('-')? term (('+'|'-') term)*
//! term   := factor (('*'|'/') factor)*
//! factor := base ('^' uint)?
//! base   := number | 'i' | symbol | '(' expr ')' | func '(' args ')'
//! func   := 'exp' | 'star' | 'bracket' | 'ln' | 'sqrt'
//! ```
//!
//! Numbers are exact rationals (integers or decimal literals). Symbols are
//! `q`, `p`, `hbar` and any parameters declared by the caller; classification
//! happens at lowering time, not here.

use num_bigint::BigInt;
use num_rational::BigRational;
use std::fmt;

#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Num(BigRational),
    ImaginaryUnit,
    Sym(String),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, u32),
    Call(Func, Vec<Expr>),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Func {
    Exp,
    Star,
    Bracket,
    Ln,
    Sqrt,
}

impl Func {
    fn from_name(name: &str) -> Option<Func> {
        match name {
            "exp" => Some(Func::Exp),
            "star" => Some(Func::Star),
            "bracket" => Some(Func::Bracket),
            "ln" => Some(Func::Ln),
            "sqrt" => Some(Func::Sqrt),
            _ => None,
        }
    }

    fn arity(&self) -> usize {
        match self {
            Func::Exp | Func::Ln | Func::Sqrt => 1,
            Func::Star | Func::Bracket => 2,
        }
    }
}

/// Positioned syntax error.
#[derive(Clone, Debug, PartialEq)]
pub struct SyntaxError {
    pub line: usize,
    pub col: usize,
    pub expected: String,
}

impl fmt::Display for SyntaxError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}: expected {}", self.line, self.col, self.expected)
    }
}

impl std::error::Error for SyntaxError {}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(BigRational),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    Comma,
}

struct Lexer<'a> {
    src: &'a [u8],
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn location(&self, at: usize) -> (usize, usize) {
        let mut line = 1;
        let mut col = 1;
        for &b in &self.src[..at.min(self.src.len())] {
            if b == b'\n' {
                line += 1;
                col = 1;
            } else {
                col += 1;
            }
        }
        (line, col)
    }

    fn error(&self, at: usize, expected: &str) -> SyntaxError {
        let (line, col) = self.location(at);
        SyntaxError { line, col, expected: expected.to_string() }
    }

    fn tokenize(&mut self) -> Result<Vec<(Tok, usize)>, SyntaxError> {
        let mut out = Vec::new();
        while self.pos < self.src.len() {
            let start = self.pos;
            let b = self.src[self.pos];
            match b {
                b' ' | b'\t' | b'\r' | b'\n' => {
                    self.pos += 1;
                }
                b'+' => {
                    out.push((Tok::Plus, start));
                    self.pos += 1;
                }
                b'-' => {
                    out.push((Tok::Minus, start));
                    self.pos += 1;
                }
                b'*' => {
                    out.push((Tok::Star, start));
                    self.pos += 1;
                }
                b'/' => {
                    out.push((Tok::Slash, start));
                    self.pos += 1;
                }
                b'^' => {
                    out.push((Tok::Caret, start));
                    self.pos += 1;
                }
                b'(' => {
                    out.push((Tok::LParen, start));
                    self.pos += 1;
                }
                b')' => {
                    out.push((Tok::RParen, start));
                    self.pos += 1;
                }
                b',' => {
                    out.push((Tok::Comma, start));
                    self.pos += 1;
                }
                b'0'..=b'9' | b'.' => {
                    out.push((self.number()?, start));
                }
                b'a'..=b'z' | b'A'..=b'Z' | b'_' => {
                    let mut end = self.pos;
                    while end < self.src.len()
                        && (self.src[end].is_ascii_alphanumeric() || self.src[end] == b'_')
                    {
                        end += 1;
                    }
                    let name = std::str::from_utf8(&self.src[self.pos..end])
                        .map_err(|_| self.error(start, "valid UTF-8 identifier"))?;
                    out.push((Tok::Ident(name.to_string()), start));
                    self.pos = end;
                }
                _ => return Err(self.error(start, "a token")),
            }
        }
        Ok(out)
    }

    fn number(&mut self) -> Result<Tok, SyntaxError> {
        let start = self.pos;
        let mut int_digits = Vec::new();
        let mut frac_digits = Vec::new();
        let mut seen_dot = false;
        while self.pos < self.src.len() {
            match self.src[self.pos] {
                d @ b'0'..=b'9' => {
                    if seen_dot {
                        frac_digits.push(d);
                    } else {
                        int_digits.push(d);
                    }
                    self.pos += 1;
                }
                b'.' if !seen_dot => {
                    seen_dot = true;
                    self.pos += 1;
                }
                _ => break,
            }
        }
        if int_digits.is_empty() && frac_digits.is_empty() {
            return Err(self.error(start, "digits"));
        }
        if int_digits.len() + frac_digits.len() > 60 {
            return Err(self.error(start, "a shorter numeric literal"));
        }
        let mut digits = int_digits;
        let scale = frac_digits.len() as u32;
        digits.extend_from_slice(&frac_digits);
        let text = std::str::from_utf8(&digits).expect("ascii digits");
        let numer: BigInt = if text.is_empty() {
            BigInt::from(0)
        } else {
            text.parse().map_err(|_| self.error(start, "a number"))?
        };
        Ok(Tok::Num(BigRational::new(numer, BigInt::from(10u8).pow(scale).max(BigInt::from(1)))))
    }
}

struct Parser<'a> {
    toks: Vec<(Tok, usize)>,
    idx: usize,
    lexer: Lexer<'a>,
    depth: usize,
}

const MAX_DEPTH: usize = 80;

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.idx).map(|(t, _)| t)
    }

    fn here(&self) -> usize {
        self.toks
            .get(self.idx)
            .map(|&(_, at)| at)
            .unwrap_or(self.lexer.src.len())
    }

    fn bump(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.idx).map(|(t, _)| t.clone());
        if t.is_some() {
            self.idx += 1;
        }
        t
    }

    fn expect(&mut self, tok: &Tok, what: &str) -> Result<(), SyntaxError> {
        if self.peek() == Some(tok) {
            self.idx += 1;
            Ok(())
        } else {
            Err(self.lexer.error(self.here(), what))
        }
    }

    fn expr(&mut self) -> Result<Expr, SyntaxError> {
        self.depth += 1;
        let out = if self.depth > MAX_DEPTH {
            Err(self.lexer.error(self.here(), "a shallower expression"))
        } else {
            self.expr_inner()
        };
        self.depth -= 1;
        out
    }

    fn expr_inner(&mut self) -> Result<Expr, SyntaxError> {
        let negate = if self.peek() == Some(&Tok::Minus) {
            self.idx += 1;
            true
        } else {
            false
        };
        let mut acc = self.term()?;
        if negate {
            acc = Expr::Neg(Box::new(acc));
        }
        loop {
            match self.peek() {
                Some(Tok::Plus) => {
                    self.idx += 1;
                    let rhs = self.term()?;
                    acc = Expr::Add(Box::new(acc), Box::new(rhs));
                }
                Some(Tok::Minus) => {
                    self.idx += 1;
                    let rhs = self.term()?;
                    acc = Expr::Sub(Box::new(acc), Box::new(rhs));
                }
                _ => break,
            }
        }
        Ok(acc)
    }

    fn term(&mut self) -> Result<Expr, SyntaxError> {
        let mut acc = self.factor()?;
        loop {
            match self.peek() {
                Some(Tok::Star) => {
                    self.idx += 1;
                    let rhs = self.factor()?;
                    acc = Expr::Mul(Box::new(acc), Box::new(rhs));
                }
                Some(Tok::Slash) => {
                    self.idx += 1;
                    let rhs = self.factor()?;
                    acc = Expr::Div(Box::new(acc), Box::new(rhs));
                }
                _ => break,
            }
        }
        Ok(acc)
    }

    fn factor(&mut self) -> Result<Expr, SyntaxError> {
        let base = self.base()?;
        if self.peek() == Some(&Tok::Caret) {
            self.idx += 1;
            let at = self.here();
            match self.bump() {
                Some(Tok::Num(r)) if r.is_integer() => {
                    let exp: u32 = r
                        .numer()
                        .try_into()
                        .map_err(|_| self.lexer.error(at, "a small non-negative integer exponent"))?;
                    if exp > 64 {
                        return Err(self.lexer.error(at, "an exponent of at most 64"));
                    }
                    Ok(Expr::Pow(Box::new(base), exp))
                }
                _ => Err(self.lexer.error(at, "a non-negative integer exponent")),
            }
        } else {
            Ok(base)
        }
    }

    fn base(&mut self) -> Result<Expr, SyntaxError> {
        self.depth += 1;
        let out = if self.depth > MAX_DEPTH {
            Err(self.lexer.error(self.here(), "a shallower expression"))
        } else {
            self.base_inner()
        };
        self.depth -= 1;
        out
    }

    fn base_inner(&mut self) -> Result<Expr, SyntaxError> {
        let at = self.here();
        match self.bump() {
            Some(Tok::Num(r)) => Ok(Expr::Num(r)),
            Some(Tok::Ident(name)) => {
                if name == "i" {
                    return Ok(Expr::ImaginaryUnit);
                }
                if self.peek() == Some(&Tok::LParen) {
                    let func = Func::from_name(&name)
                        .ok_or_else(|| self.lexer.error(at, "a known function (exp, star, bracket, ln, sqrt)"))?;
                    self.idx += 1;
                    let mut args = vec![self.expr()?];
                    while self.peek() == Some(&Tok::Comma) {
                        self.idx += 1;
                        args.push(self.expr()?);
                    }
                    self.expect(&Tok::RParen, "`)`")?;
                    if args.len() != func.arity() {
                        return Err(self.lexer.error(at, &format!("{} argument(s)", func.arity())));
                    }
                    Ok(Expr::Call(func, args))
                } else {
                    Ok(Expr::Sym(name))
                }
            }
            Some(Tok::LParen) => {
                let inner = self.expr()?;
                self.expect(&Tok::RParen, "`)`")?;
                Ok(inner)
            }
            Some(Tok::Minus) => {
                let inner = self.base()?;
                Ok(Expr::Neg(Box::new(inner)))
            }
            _ => Err(self.lexer.error(at, "a number, symbol or `(`")),
        }
    }
}

/// Parse source text into an expression tree.
pub fn parse(text: &str) -> Result<Expr, SyntaxError> {
    let mut lexer = Lexer { src: text.as_bytes(), pos: 0 };
    let toks = lexer.tokenize()?;
    if toks.is_empty() {
        return Err(SyntaxError { line: 1, col: 1, expected: "an expression".into() });
    }
    let mut parser = Parser { toks, idx: 0, lexer: Lexer { src: text.as_bytes(), pos: 0 }, depth: 0 };
    let expr = parser.expr()?;
    if parser.idx != parser.toks.len() {
        let at = parser.here();
        return Err(parser.lexer.error(at, "end of input"));
    }
    Ok(expr)
}
