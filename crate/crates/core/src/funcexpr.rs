//! A small expression language for continuous functions on the unit circle.
//!
//! Grammar, loosest binding first:
//!
//! ```text
//! expr    := term (('+' | '-') term)*
//! term    := unary (('*' | '/') unary)*
//! unary   := '-' unary | power
//! power   := primary ('^' int)*
//! int     := ['-' | '+'] digits | '(' ['-' | '+'] digits ')'
//! primary := number | 'z' | 'pi' | name '(' expr ')' | '(' expr ')' | '(' real ',' real ')'
//! ```
//!
//! `name` is one of `conj re im abs exp cos sin logabs`. A pair `(a,b)` is the
//! complex literal `a + bi`; there is no imaginary-unit identifier.

use std::f64::consts::{PI, TAU};
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::fejer::CircleGrid;
use crate::linalg::C64;

/// Denominators with modulus below this are poles during evaluation.
pub const POLE_EPS: f64 = 1e-14;
/// Minimum admissible denominator modulus over the pole-check grid.
pub const POLE_CHECK_MIN_MODULUS: f64 = 1e-6;
/// Smallest grid the pole check runs on.
pub const POLE_CHECK_MIN_GRID: usize = 4096;
/// Largest accepted integer exponent magnitude.
pub const MAX_EXPONENT: i32 = 1 << 16;

const ON_CIRCLE_TOL: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("syntax error at offset {offset}: {msg}")]
    Syntax { offset: usize, msg: String },
    #[error("unknown identifier `{name}` at offset {offset}")]
    UnknownIdentifier { offset: usize, name: String },
}

impl ParseError {
    pub fn offset(&self) -> usize {
        match self {
            ParseError::Syntax { offset, .. } | ParseError::UnknownIdentifier { offset, .. } => {
                *offset
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Error)]
pub enum EvalError {
    #[error("pole hit: denominator modulus {modulus:.3e} at z = {z}")]
    Pole { modulus: f64, z: C64 },
    #[error("point {0} is not on the unit circle")]
    OffCircle(C64),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
}

impl BinOp {
    fn symbol(self) -> char {
        match self {
            BinOp::Add => '+',
            BinOp::Sub => '-',
            BinOp::Mul => '*',
            BinOp::Div => '/',
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Func {
    Conj,
    Re,
    Im,
    Abs,
    Exp,
    Cos,
    Sin,
    /// `ln |w|`
    LogAbs,
}

impl Func {
    pub fn name(self) -> &'static str {
        match self {
            Func::Conj => "conj",
            Func::Re => "re",
            Func::Im => "im",
            Func::Abs => "abs",
            Func::Exp => "exp",
            Func::Cos => "cos",
            Func::Sin => "sin",
            Func::LogAbs => "logabs",
        }
    }

    fn from_name(name: &str) -> Option<Func> {
        Some(match name {
            "conj" => Func::Conj,
            "re" => Func::Re,
            "im" => Func::Im,
            "abs" => Func::Abs,
            "exp" => Func::Exp,
            "cos" => Func::Cos,
            "sin" => Func::Sin,
            "logabs" => Func::LogAbs,
            _ => return None,
        })
    }

    const ALL: [Func; 8] = [
        Func::Conj,
        Func::Re,
        Func::Im,
        Func::Abs,
        Func::Exp,
        Func::Cos,
        Func::Sin,
        Func::LogAbs,
    ];
}

#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Const(C64),
    Var,
    Neg(Box<Expr>),
    Call(Func, Box<Expr>),
    Binary(BinOp, Box<Expr>, Box<Expr>),
    /// Integer power; `z^(-k)` is evaluated as `conj(z)^k`.
    Pow(Box<Expr>, i32),
}

impl Expr {
    pub fn real(x: f64) -> Expr {
        Expr::Const(C64::new(x, 0.0))
    }

    pub fn binary(op: BinOp, a: Expr, b: Expr) -> Expr {
        Expr::Binary(op, Box::new(a), Box::new(b))
    }

    pub fn call(f: Func, a: Expr) -> Expr {
        Expr::Call(f, Box::new(a))
    }

    pub fn pow(a: Expr, n: i32) -> Expr {
        Expr::Pow(Box::new(a), n)
    }

    /// Evaluates at a point of the unit circle.
    pub fn eval(&self, z: C64) -> Result<C64, EvalError> {
        check_on_circle(z)?;
        self.eval_inner(z, &mut |_| {})
    }

    /// Evaluation that reports the modulus of every singular argument
    /// (denominators, bases of negative powers, `logabs` arguments).
    fn eval_inner(&self, z: C64, seen: &mut impl FnMut(f64)) -> Result<C64, EvalError> {
        Ok(match self {
            Expr::Const(c) => *c,
            Expr::Var => z,
            Expr::Neg(a) => -a.eval_inner(z, seen)?,
            Expr::Call(f, a) => {
                let w = a.eval_inner(z, seen)?;
                match f {
                    Func::Conj => w.conj(),
                    Func::Re => C64::new(w.re, 0.0),
                    Func::Im => C64::new(w.im, 0.0),
                    Func::Abs => C64::new(w.norm(), 0.0),
                    Func::Exp => w.exp(),
                    Func::Cos => w.cos(),
                    Func::Sin => w.sin(),
                    Func::LogAbs => {
                        let m = w.norm();
                        seen(m);
                        if m < POLE_EPS {
                            return Err(EvalError::Pole { modulus: m, z });
                        }
                        C64::new(m.ln(), 0.0)
                    }
                }
            }
            Expr::Binary(op, a, b) => {
                let l = a.eval_inner(z, seen)?;
                let r = b.eval_inner(z, seen)?;
                match op {
                    BinOp::Add => l + r,
                    BinOp::Sub => l - r,
                    BinOp::Mul => l * r,
                    BinOp::Div => {
                        let m = r.norm();
                        seen(m);
                        if m < POLE_EPS {
                            return Err(EvalError::Pole { modulus: m, z });
                        }
                        l / r
                    }
                }
            }
            Expr::Pow(a, n) => {
                if **a == Expr::Var {
                    if *n >= 0 {
                        int_pow(z, n.unsigned_abs())
                    } else {
                        int_pow(z.conj(), n.unsigned_abs())
                    }
                } else {
                    let w = a.eval_inner(z, seen)?;
                    if *n >= 0 {
                        int_pow(w, n.unsigned_abs())
                    } else {
                        let m = w.norm();
                        seen(m);
                        if m < POLE_EPS {
                            return Err(EvalError::Pole { modulus: m, z });
                        }
                        int_pow(w.inv(), n.unsigned_abs())
                    }
                }
            }
        })
    }

    fn precedence(&self) -> u8 {
        match self {
            Expr::Binary(BinOp::Add | BinOp::Sub, ..) => 1,
            Expr::Binary(BinOp::Mul | BinOp::Div, ..) => 2,
            Expr::Neg(_) => 3,
            Expr::Pow(..) => 4,
            _ => 5,
        }
    }
}

fn int_pow(mut base: C64, mut n: u32) -> C64 {
    let mut acc = C64::new(1.0, 0.0);
    while n > 0 {
        if n & 1 == 1 {
            acc *= base;
        }
        base *= base;
        n >>= 1;
    }
    acc
}

fn check_on_circle(z: C64) -> Result<(), EvalError> {
    if (z.norm() - 1.0).abs() > ON_CIRCLE_TOL || !z.re.is_finite() || !z.im.is_finite() {
        return Err(EvalError::OffCircle(z));
    }
    Ok(())
}

fn fmt_real(x: f64) -> String {
    // `{}` on f64 is the shortest representation that round-trips.
    let s = format!("{x}");
    if s == "-0" {
        "-0.0".to_string()
    } else {
        s
    }
}

impl fmt::Display for Expr {
    /// Canonical form: every binary operation parenthesized, so the printed
    /// string parses back to the same tree.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Const(c) => {
                if c.im == 0.0 && !c.re.is_sign_negative() {
                    write!(f, "{}", fmt_real(c.re))
                } else {
                    write!(f, "({},{})", fmt_real(c.re), fmt_real(c.im))
                }
            }
            Expr::Var => f.write_str("z"),
            Expr::Neg(a) => {
                if a.precedence() >= 4 && !matches!(**a, Expr::Neg(_)) {
                    write!(f, "-{a}")
                } else {
                    write!(f, "-({a})")
                }
            }
            Expr::Call(func, a) => write!(f, "{}({a})", func.name()),
            Expr::Binary(op, a, b) => write!(f, "({a} {} {b})", op.symbol()),
            Expr::Pow(a, n) => {
                if a.precedence() >= 5 {
                    write!(f, "{a}^{n}")
                } else {
                    write!(f, "({a})^{n}")
                }
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
enum Tok<'a> {
    Num(f64),
    Ident(&'a str),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    Comma,
    Eof,
}

struct Lexer<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn skip_ws(&mut self) {
        let b = self.src.as_bytes();
        while self.pos < b.len() && b[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    /// Returns the next token and its starting offset.
    fn next(&mut self) -> Result<(Tok<'a>, usize), ParseError> {
        self.skip_ws();
        let b = self.src.as_bytes();
        let start = self.pos;
        let Some(&c) = b.get(start) else {
            return Ok((Tok::Eof, start));
        };
        let single = |t| Ok((t, start));
        match c {
            b'+' => {
                self.pos += 1;
                single(Tok::Plus)
            }
            b'-' => {
                self.pos += 1;
                single(Tok::Minus)
            }
            b'*' => {
                self.pos += 1;
                single(Tok::Star)
            }
            b'/' => {
                self.pos += 1;
                single(Tok::Slash)
            }
            b'^' => {
                self.pos += 1;
                single(Tok::Caret)
            }
            b'(' => {
                self.pos += 1;
                single(Tok::LParen)
            }
            b')' => {
                self.pos += 1;
                single(Tok::RParen)
            }
            b',' => {
                self.pos += 1;
                single(Tok::Comma)
            }
            b'0'..=b'9' | b'.' => {
                let mut end = start;
                while end < b.len() && (b[end].is_ascii_digit() || b[end] == b'.') {
                    end += 1;
                }
                if end < b.len() && (b[end] == b'e' || b[end] == b'E') {
                    let mut e = end + 1;
                    if e < b.len() && (b[e] == b'+' || b[e] == b'-') {
                        e += 1;
                    }
                    if e < b.len() && b[e].is_ascii_digit() {
                        while e < b.len() && b[e].is_ascii_digit() {
                            e += 1;
                        }
                        end = e;
                    }
                }
                let text = &self.src[start..end];
                let value: f64 = text.parse().map_err(|_| ParseError::Syntax {
                    offset: start,
                    msg: format!("malformed number `{text}`"),
                })?;
                if !value.is_finite() {
                    return Err(ParseError::Syntax {
                        offset: start,
                        msg: format!("number `{text}` is out of range"),
                    });
                }
                self.pos = end;
                Ok((Tok::Num(value), start))
            }
            c if c.is_ascii_alphabetic() || c == b'_' => {
                let mut end = start;
                while end < b.len() && (b[end].is_ascii_alphanumeric() || b[end] == b'_') {
                    end += 1;
                }
                self.pos = end;
                Ok((Tok::Ident(&self.src[start..end]), start))
            }
            other => Err(ParseError::Syntax {
                offset: start,
                msg: format!("unexpected character `{}`", other as char),
            }),
        }
    }
}

struct Parser<'a> {
    lexer: Lexer<'a>,
    tok: Tok<'a>,
    at: usize,
    depth: usize,
}

const MAX_NESTING: usize = 256;

impl<'a> Parser<'a> {
    fn new(src: &'a str) -> Result<Self, ParseError> {
        let mut lexer = Lexer { src, pos: 0 };
        let (tok, at) = lexer.next()?;
        Ok(Parser {
            lexer,
            tok,
            at,
            depth: 0,
        })
    }

    fn bump(&mut self) -> Result<(), ParseError> {
        let (tok, at) = self.lexer.next()?;
        self.tok = tok;
        self.at = at;
        Ok(())
    }

    fn error<T>(&self, msg: impl Into<String>) -> Result<T, ParseError> {
        Err(ParseError::Syntax {
            offset: self.at,
            msg: msg.into(),
        })
    }

    fn expect(&mut self, tok: Tok<'static>, what: &str) -> Result<(), ParseError> {
        if self.tok == tok {
            self.bump()
        } else {
            self.error(format!("expected {what}"))
        }
    }

    fn enter(&mut self) -> Result<(), ParseError> {
        self.depth += 1;
        if self.depth > MAX_NESTING {
            return self.error("expression nested too deeply");
        }
        Ok(())
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        self.enter()?;
        let mut lhs = self.term()?;
        loop {
            let op = match self.tok {
                Tok::Plus => BinOp::Add,
                Tok::Minus => BinOp::Sub,
                _ => break,
            };
            self.bump()?;
            let rhs = self.term()?;
            lhs = Expr::binary(op, lhs, rhs);
        }
        self.depth -= 1;
        Ok(lhs)
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.tok {
                Tok::Star => BinOp::Mul,
                Tok::Slash => BinOp::Div,
                _ => break,
            };
            self.bump()?;
            let rhs = self.unary()?;
            lhs = Expr::binary(op, lhs, rhs);
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        if self.tok == Tok::Minus {
            self.enter()?;
            self.bump()?;
            let inner = self.unary()?;
            self.depth -= 1;
            return Ok(Expr::Neg(Box::new(inner)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let mut base = self.primary()?;
        while self.tok == Tok::Caret {
            self.bump()?;
            let n = self.integer_exponent()?;
            base = Expr::pow(base, n);
        }
        Ok(base)
    }

    fn integer_exponent(&mut self) -> Result<i32, ParseError> {
        let parenthesized = self.tok == Tok::LParen;
        if parenthesized {
            self.bump()?;
        }
        let negative = match self.tok {
            Tok::Minus => {
                self.bump()?;
                true
            }
            Tok::Plus => {
                self.bump()?;
                false
            }
            _ => false,
        };
        let Tok::Num(v) = self.tok else {
            return self.error("expected integer exponent");
        };
        if v.fract() != 0.0 || v > MAX_EXPONENT as f64 {
            return self.error(format!(
                "exponent must be an integer of magnitude at most {MAX_EXPONENT}"
            ));
        }
        self.bump()?;
        if parenthesized {
            self.expect(Tok::RParen, "`)` after exponent")?;
        }
        let n = v as i32;
        Ok(if negative { -n } else { n })
    }

    fn primary(&mut self) -> Result<Expr, ParseError> {
        match self.tok {
            Tok::Num(v) => {
                self.bump()?;
                Ok(Expr::real(v))
            }
            Tok::Ident(name) => {
                let at = self.at;
                match name {
                    "z" => {
                        self.bump()?;
                        Ok(Expr::Var)
                    }
                    "pi" => {
                        self.bump()?;
                        Ok(Expr::real(PI))
                    }
                    _ => {
                        let Some(func) = Func::from_name(name) else {
                            return Err(ParseError::UnknownIdentifier {
                                offset: at,
                                name: name.to_string(),
                            });
                        };
                        self.bump()?;
                        self.expect(Tok::LParen, &format!("`(` after `{name}`"))?;
                        let arg = self.expr()?;
                        self.expect(Tok::RParen, "`)`")?;
                        Ok(Expr::call(func, arg))
                    }
                }
            }
            Tok::LParen => {
                self.bump()?;
                let first_at = self.at;
                let first = self.expr()?;
                if self.tok == Tok::Comma {
                    let Some(re) = as_real_literal(&first) else {
                        return Err(ParseError::Syntax {
                            offset: first_at,
                            msg: "complex literal parts must be real numbers".into(),
                        });
                    };
                    self.bump()?;
                    let im_at = self.at;
                    let second = self.expr()?;
                    let Some(im) = as_real_literal(&second) else {
                        return Err(ParseError::Syntax {
                            offset: im_at,
                            msg: "complex literal parts must be real numbers".into(),
                        });
                    };
                    self.expect(Tok::RParen, "`)` closing complex literal")?;
                    return Ok(Expr::Const(C64::new(re, im)));
                }
                self.expect(Tok::RParen, "`)`")?;
                Ok(first)
            }
            Tok::Eof => self.error("unexpected end of input"),
            _ => self.error("expected a number, `z`, a function call or `(`"),
        }
    }
}

fn as_real_literal(e: &Expr) -> Option<f64> {
    match e {
        Expr::Const(c) if c.im == 0.0 => Some(c.re),
        Expr::Neg(inner) => as_real_literal(inner).map(|x| -x),
        _ => None,
    }
}

/// Parses an expression in the circle-function language.
pub fn parse(src: &str) -> Result<Expr, ParseError> {
    if let Some(pos) = src.bytes().position(|b| !b.is_ascii()) {
        return Err(ParseError::Syntax {
            offset: pos,
            msg: "non-ASCII input".into(),
        });
    }
    if src.trim().is_empty() {
        return Err(ParseError::Syntax {
            offset: 0,
            msg: "empty expression".into(),
        });
    }
    let mut p = Parser::new(src)?;
    let e = p.expr()?;
    if p.tok != Tok::Eof {
        return p.error("unexpected trailing input");
    }
    Ok(e)
}

#[derive(Clone, Debug, PartialEq)]
pub struct PoleReport {
    /// `None` when the expression has no singular arguments.
    pub min_denominator_modulus: Option<f64>,
    /// Every sampled value was finite.
    pub finite: bool,
    pub grid_size: usize,
    pub pass: bool,
}

/// Evaluates every denominator (and every other singular argument) over the
/// grid, refined to at least [`POLE_CHECK_MIN_GRID`] nodes.
pub fn pole_check(e: &Expr, grid: &CircleGrid) -> PoleReport {
    let grid = if grid.size() < POLE_CHECK_MIN_GRID {
        CircleGrid::new(POLE_CHECK_MIN_GRID).expect("nonzero grid")
    } else {
        *grid
    };
    let mut min = f64::INFINITY;
    let mut finite = true;
    for z in grid.points() {
        let r = e.eval_inner(z, &mut |m| min = min.min(m));
        match r {
            Ok(w) if w.re.is_finite() && w.im.is_finite() => {}
            _ => finite = false,
        }
    }
    let min_denominator_modulus = if min.is_infinite() { None } else { Some(min) };
    let pass = finite && min_denominator_modulus.is_none_or(|m| m > POLE_CHECK_MIN_MODULUS);
    PoleReport {
        min_denominator_modulus,
        finite,
        grid_size: grid.size(),
        pass,
    }
}

/// Functions shipped with closed-form evaluation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Builtin {
    One,
    Z,
    ReZ,
    ExpZ,
    /// `1 / (z - w)` with `|w| != 1`.
    InvShift(C64),
    /// `z^n`.
    Power(i32),
}

impl Builtin {
    pub fn eval(&self, z: C64) -> C64 {
        match self {
            Builtin::One => C64::new(1.0, 0.0),
            Builtin::Z => z,
            Builtin::ReZ => C64::new(z.re, 0.0),
            Builtin::ExpZ => z.exp(),
            Builtin::InvShift(w) => (z - w).inv(),
            Builtin::Power(n) => {
                if *n >= 0 {
                    int_pow(z, n.unsigned_abs())
                } else {
                    int_pow(z.conj(), n.unsigned_abs())
                }
            }
        }
    }

    /// The same function as an expression tree.
    pub fn to_expr(&self) -> Expr {
        match self {
            Builtin::One => Expr::real(1.0),
            Builtin::Z => Expr::Var,
            Builtin::ReZ => Expr::call(Func::Re, Expr::Var),
            Builtin::ExpZ => Expr::call(Func::Exp, Expr::Var),
            Builtin::InvShift(w) => Expr::binary(
                BinOp::Div,
                Expr::real(1.0),
                Expr::binary(BinOp::Sub, Expr::Var, Expr::Const(*w)),
            ),
            Builtin::Power(n) => Expr::pow(Expr::Var, *n),
        }
    }

    pub fn name(&self) -> String {
        match self {
            Builtin::One => "one".into(),
            Builtin::Z => "z".into(),
            Builtin::ReZ => "re_z".into(),
            Builtin::ExpZ => "exp_z".into(),
            Builtin::InvShift(w) if w.im == 0.0 => format!("inv_shift({})", fmt_real(w.re)),
            Builtin::InvShift(w) => format!("inv_shift({},{})", fmt_real(w.re), fmt_real(w.im)),
            Builtin::Power(n) => format!("power({n})"),
        }
    }

    /// Parses `one`, `z`, `re_z`, `exp_z`, `inv_shift(a)`, `inv_shift(a,b)`, `power(n)`.
    pub fn from_name(s: &str) -> Option<Result<Builtin, String>> {
        let s = s.trim();
        let simple = match s {
            "one" => Some(Builtin::One),
            "z" => Some(Builtin::Z),
            "re_z" => Some(Builtin::ReZ),
            "exp_z" => Some(Builtin::ExpZ),
            _ => None,
        };
        if let Some(b) = simple {
            return Some(Ok(b));
        }
        let args = |prefix: &str| -> Option<Vec<&str>> {
            let rest = s.strip_prefix(prefix)?.trim_start();
            let inner = rest.strip_prefix('(')?.strip_suffix(')')?;
            Some(inner.split(',').map(str::trim).collect())
        };
        if let Some(a) = args("inv_shift") {
            let parsed: Result<Vec<f64>, _> = a.iter().map(|x| x.parse::<f64>()).collect();
            let w = match parsed.as_deref() {
                Ok([re]) => C64::new(*re, 0.0),
                Ok([re, im]) => C64::new(*re, *im),
                _ => return Some(Err(format!("bad inv_shift arguments in `{s}`"))),
            };
            return Some(Builtin::inv_shift(w));
        }
        if let Some(a) = args("power") {
            return Some(match a.as_slice() {
                [n] => n
                    .parse::<i32>()
                    .ok()
                    .filter(|n| n.unsigned_abs() <= MAX_EXPONENT as u32)
                    .map(Builtin::Power)
                    .ok_or_else(|| format!("bad power exponent in `{s}`")),
                _ => Err(format!("bad power arguments in `{s}`")),
            });
        }
        None
    }

    pub fn inv_shift(w: C64) -> Result<Builtin, String> {
        if !w.re.is_finite() || !w.im.is_finite() || (w.norm() - 1.0).abs() < POLE_CHECK_MIN_MODULUS
        {
            return Err(format!("inv_shift pole {w} must lie off the unit circle"));
        }
        Ok(Builtin::InvShift(w))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum FunctionBody {
    Builtin(Builtin),
    Ast(Expr),
}

/// A continuous function on the unit circle.
#[derive(Clone, Debug, PartialEq)]
pub struct CircleFunction {
    body: FunctionBody,
    description: String,
}

impl CircleFunction {
    pub fn builtin(b: Builtin) -> Self {
        CircleFunction {
            description: b.name(),
            body: FunctionBody::Builtin(b),
        }
    }

    pub fn from_expr(e: Expr) -> Self {
        CircleFunction {
            description: e.to_string(),
            body: FunctionBody::Ast(e),
        }
    }

    pub fn parse(src: &str) -> Result<Self, ParseError> {
        let e = parse(src)?;
        Ok(CircleFunction {
            description: src.trim().to_string(),
            body: FunctionBody::Ast(e),
        })
    }

    /// Accepts a builtin name or, failing that, an expression.
    pub fn resolve(src: &str) -> Result<Self, crate::Error> {
        match Builtin::from_name(src) {
            Some(Ok(b)) => Ok(Self::builtin(b)),
            Some(Err(msg)) => Err(crate::Error::InvalidArgument(msg)),
            None => Ok(Self::parse(src)?),
        }
    }

    pub fn one() -> Self {
        Self::builtin(Builtin::One)
    }

    pub fn z() -> Self {
        Self::builtin(Builtin::Z)
    }

    pub fn re_z() -> Self {
        Self::builtin(Builtin::ReZ)
    }

    pub fn exp_z() -> Self {
        Self::builtin(Builtin::ExpZ)
    }

    pub fn power(n: i32) -> Self {
        Self::builtin(Builtin::Power(n))
    }

    pub fn inv_shift(w: C64) -> Result<Self, crate::Error> {
        Builtin::inv_shift(w)
            .map(Self::builtin)
            .map_err(crate::Error::InvalidArgument)
    }

    pub fn body(&self) -> &FunctionBody {
        &self.body
    }

    pub fn description(&self) -> &str {
        &self.description
    }

    pub fn to_expr(&self) -> Expr {
        match &self.body {
            FunctionBody::Builtin(b) => b.to_expr(),
            FunctionBody::Ast(e) => e.clone(),
        }
    }

    pub fn eval(&self, z: C64) -> Result<C64, EvalError> {
        match &self.body {
            FunctionBody::Builtin(b) => {
                check_on_circle(z)?;
                let w = b.eval(z);
                if let Builtin::InvShift(p) = b {
                    let m = (z - p).norm();
                    if m < POLE_EPS {
                        return Err(EvalError::Pole { modulus: m, z });
                    }
                }
                Ok(w)
            }
            FunctionBody::Ast(e) => e.eval(z),
        }
    }

    /// Values at every node of `grid`.
    pub fn sample(&self, grid: &CircleGrid) -> Result<Vec<C64>, EvalError> {
        grid.points().map(|z| self.eval(z)).collect()
    }

    /// `conj(f)`.
    pub fn conj(&self) -> Self {
        let e = Expr::call(Func::Conj, self.to_expr());
        CircleFunction {
            description: format!("conj({})", self.description),
            body: FunctionBody::Ast(e),
        }
    }

    /// Pointwise product `f * g`.
    pub fn mul(&self, other: &CircleFunction) -> Self {
        let e = Expr::binary(BinOp::Mul, self.to_expr(), other.to_expr());
        CircleFunction {
            description: format!("({}) * ({})", self.description, other.description),
            body: FunctionBody::Ast(e),
        }
    }

    pub fn pole_check(&self, grid: &CircleGrid) -> PoleReport {
        pole_check(&self.to_expr(), grid)
    }
}

impl fmt::Display for CircleFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.description)
    }
}

/// Generates a seeded random expression that is continuous on the circle:
/// division only by `(z - w)` with `|w|` in `[1.5, 3]`, no `logabs`.
pub fn random_expr(seed: u64, max_depth: usize) -> Expr {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    random_node(&mut rng, max_depth)
}

fn random_node(rng: &mut ChaCha8Rng, depth: usize) -> Expr {
    let leaf = depth == 0 || rng.random_bool(0.25);
    if leaf {
        return match rng.random_range(0..3) {
            0 => Expr::Var,
            1 => Expr::real((rng.random_range(-2.0..2.0f64) * 8.0).round() / 8.0),
            _ => Expr::Const(C64::new(
                rng.random_range(-1.0..1.0),
                rng.random_range(-1.0..1.0),
            )),
        };
    }
    match rng.random_range(0..7) {
        0 => Expr::Neg(Box::new(random_node(rng, depth - 1))),
        1 => {
            let f = loop {
                let f = Func::ALL[rng.random_range(0..Func::ALL.len())];
                if f != Func::LogAbs {
                    break f;
                }
            };
            // keep exp/cos/sin arguments bounded so values stay moderate
            let arg = if matches!(f, Func::Exp | Func::Cos | Func::Sin) {
                if rng.random_bool(0.5) {
                    Expr::Var
                } else {
                    Expr::call(Func::Conj, Expr::Var)
                }
            } else {
                random_node(rng, depth - 1)
            };
            Expr::call(f, arg)
        }
        2 => Expr::pow(Expr::Var, rng.random_range(-4..=4)),
        3 => {
            let r = rng.random_range(1.5..3.0);
            let phi = rng.random_range(0.0..TAU);
            Expr::binary(
                BinOp::Div,
                random_node(rng, depth - 1),
                Expr::binary(BinOp::Sub, Expr::Var, Expr::Const(C64::from_polar(r, phi))),
            )
        }
        4 => Expr::binary(
            BinOp::Mul,
            random_node(rng, depth - 1),
            random_node(rng, depth - 1),
        ),
        5 => Expr::binary(
            BinOp::Sub,
            random_node(rng, depth - 1),
            random_node(rng, depth - 1),
        ),
        _ => Expr::binary(
            BinOp::Add,
            random_node(rng, depth - 1),
            random_node(rng, depth - 1),
        ),
    }
}
