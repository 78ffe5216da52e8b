//! Arithmetic expression language for nonlinearities `F_i(t, u1, u2)` and
//! boundary functionals built from point evaluations `u1(p)`, `u2(p)`.
//!
//! Grammar (whitespace insensitive):
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := unary (('*' | '/') unary)*
//! unary  := '-' unary | power
//! power  := atom ('^' unary)?            # right-associative
//! atom   := NUMBER | IDENT | IDENT '(' expr ')' | '(' expr ')'
//! ```
//!
//! `^` binds tighter than unary minus, so `-2^2 = -4`. Rational constants are
//! written as divisions (`1/12`). Identifiers are context dependent: a
//! nonlinearity sees the variables `t`, `u1`, `u2`; a functional sees point
//! evaluations `u1(p)` / `u2(p)` with a constant point `p`. The function set
//! is `sin`, `cos`, `exp`, `sqrt`, `abs`, `log` (natural log).

use std::fmt;
use thiserror::Error;

/// Built-in single-argument functions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Sin,
    Cos,
    Exp,
    Sqrt,
    Abs,
    Log,
}

impl Func {
    fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Exp => "exp",
            Func::Sqrt => "sqrt",
            Func::Abs => "abs",
            Func::Log => "log",
        }
    }

    fn from_name(name: &str) -> Option<Func> {
        Some(match name {
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "exp" => Func::Exp,
            "sqrt" => Func::Sqrt,
            "abs" => Func::Abs,
            "log" => Func::Log,
            _ => return None,
        })
    }
}

/// Binary operators.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

/// Expression tree.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    /// The independent variable `t` (nonlinearity context only).
    T,
    /// State variable `u1` or `u2` (component 1 or 2, nonlinearity context only).
    U(u8),
    /// Point evaluation `u1(p)` / `u2(p)` (functional context only).
    PointEval { component: u8, point: f64 },
    Neg(Box<Expr>),
    Bin(BinOp, Box<Expr>, Box<Expr>),
    Call(Func, Box<Expr>),
}

/// Parsing context: which identifiers are legal.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Context {
    /// Variables `t`, `u1`, `u2`.
    Nonlinearity,
    /// Point evaluations `u1(p)`, `u2(p)` with constant `p`; no bare variables.
    Functional,
}

/// Parse failure with a character position into the source string.
#[derive(Debug, Clone, Error, PartialEq)]
#[error("parse error at position {pos}: {message}")]
pub struct ParseError {
    pub pos: usize,
    pub message: String,
}

/// Evaluation failure, carrying a rendering of the offending subexpression.
#[derive(Debug, Clone, Error, PartialEq)]
#[error("{kind} in `{subexpr}`")]
pub struct EvalError {
    pub kind: EvalErrorKind,
    pub subexpr: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EvalErrorKind {
    DivisionByZero,
    NegativeSqrt,
    NonPositiveLog,
    FractionalPowerOfNegative,
    NonFinite,
    UnboundVariable,
}

impl fmt::Display for EvalErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            EvalErrorKind::DivisionByZero => "division by zero",
            EvalErrorKind::NegativeSqrt => "square root of a negative value",
            EvalErrorKind::NonPositiveLog => "logarithm of a non-positive value",
            EvalErrorKind::FractionalPowerOfNegative => {
                "fractional power of a negative base"
            }
            EvalErrorKind::NonFinite => "non-finite result",
            EvalErrorKind::UnboundVariable => "unbound variable",
        };
        f.write_str(s)
    }
}

enum Env<'a> {
    State { t: f64, u1: f64, u2: f64 },
    Points(&'a dyn Fn(u8, f64) -> f64),
}

impl Expr {
    /// Evaluate in the nonlinearity context `F(t, u1, u2)`.
    pub fn eval_state(&self, t: f64, u1: f64, u2: f64) -> Result<f64, EvalError> {
        self.eval_in(&Env::State { t, u1, u2 })
    }

    /// Evaluate in the functional context; `lookup(component, point)` supplies
    /// the value of `u_component(point)`.
    pub fn eval_points(&self, lookup: &dyn Fn(u8, f64) -> f64) -> Result<f64, EvalError> {
        self.eval_in(&Env::Points(lookup))
    }

    fn err(&self, kind: EvalErrorKind) -> EvalError {
        EvalError {
            kind,
            subexpr: self.to_string(),
        }
    }

    fn finite(&self, v: f64) -> Result<f64, EvalError> {
        if v.is_finite() {
            Ok(v)
        } else {
            Err(self.err(EvalErrorKind::NonFinite))
        }
    }

    fn eval_in(&self, env: &Env<'_>) -> Result<f64, EvalError> {
        match self {
            Expr::Num(v) => Ok(*v),
            Expr::T => match env {
                Env::State { t, .. } => Ok(*t),
                Env::Points(_) => Err(self.err(EvalErrorKind::UnboundVariable)),
            },
            Expr::U(c) => match env {
                Env::State { u1, u2, .. } => Ok(if *c == 1 { *u1 } else { *u2 }),
                Env::Points(_) => Err(self.err(EvalErrorKind::UnboundVariable)),
            },
            Expr::PointEval { component, point } => match env {
                Env::Points(lookup) => self.finite(lookup(*component, *point)),
                Env::State { .. } => Err(self.err(EvalErrorKind::UnboundVariable)),
            },
            Expr::Neg(e) => Ok(-e.eval_in(env)?),
            Expr::Bin(op, l, r) => {
                let a = l.eval_in(env)?;
                let b = r.eval_in(env)?;
                let v = match op {
                    BinOp::Add => a + b,
                    BinOp::Sub => a - b,
                    BinOp::Mul => a * b,
                    BinOp::Div => {
                        if b == 0.0 {
                            return Err(self.err(EvalErrorKind::DivisionByZero));
                        }
                        a / b
                    }
                    BinOp::Pow => {
                        if a < 0.0 && b.fract() != 0.0 {
                            return Err(self.err(EvalErrorKind::FractionalPowerOfNegative));
                        }
                        a.powf(b)
                    }
                };
                self.finite(v)
            }
            Expr::Call(f, arg) => {
                let x = arg.eval_in(env)?;
                let v = match f {
                    Func::Sin => x.sin(),
                    Func::Cos => x.cos(),
                    Func::Exp => x.exp(),
                    Func::Sqrt => {
                        if x < 0.0 {
                            return Err(self.err(EvalErrorKind::NegativeSqrt));
                        }
                        x.sqrt()
                    }
                    Func::Abs => x.abs(),
                    Func::Log => {
                        if x <= 0.0 {
                            return Err(self.err(EvalErrorKind::NonPositiveLog));
                        }
                        x.ln()
                    }
                };
                self.finite(v)
            }
        }
    }

    /// Does the expression reference `t`?
    pub fn references_t(&self) -> bool {
        match self {
            Expr::T => true,
            Expr::Num(_) | Expr::U(_) | Expr::PointEval { .. } => false,
            Expr::Neg(e) | Expr::Call(_, e) => e.references_t(),
            Expr::Bin(_, l, r) => l.references_t() || r.references_t(),
        }
    }

    /// Collect all point evaluations `(component, point)` in the tree.
    pub fn collect_point_evals(&self, out: &mut Vec<(u8, f64)>) {
        match self {
            Expr::PointEval { component, point } => {
                if !out.iter().any(|&(c, p)| c == *component && p == *point) {
                    out.push((*component, *point));
                }
            }
            Expr::Num(_) | Expr::T | Expr::U(_) => {}
            Expr::Neg(e) | Expr::Call(_, e) => e.collect_point_evals(out),
            Expr::Bin(_, l, r) => {
                l.collect_point_evals(out);
                r.collect_point_evals(out);
            }
        }
    }

    /// Conservative check that the expression is nondecreasing in each state
    /// variable (and each point evaluation) on the nonnegative orthant.
    ///
    /// Only recognizes sums/products/powers of nonnegative nondecreasing
    /// atoms, plus `exp` and `sqrt`; anything else reports `false`.
    pub fn is_monotone_nondecreasing(&self) -> bool {
        self.mono().0
    }

    /// Returns (nondecreasing, nonnegative) on the domain u >= 0.
    fn mono(&self) -> (bool, bool) {
        match self {
            Expr::Num(v) => (true, *v >= 0.0),
            Expr::T => (true, true),
            Expr::U(_) | Expr::PointEval { .. } => (true, true),
            Expr::Neg(_) => (false, false),
            Expr::Bin(op, l, r) => {
                let (lm, ln) = l.mono();
                let (rm, rn) = r.mono();
                match op {
                    BinOp::Add => (lm && rm, ln && rn),
                    // Only x - c with constant c >= 0 keeps monotonicity; the
                    // result may be negative, so nonnegativity is dropped.
                    BinOp::Sub => (lm && matches!(**r, Expr::Num(_)), false),
                    BinOp::Mul => (lm && rm && ln && rn, ln && rn),
                    BinOp::Div => match **r {
                        Expr::Num(c) if c > 0.0 => (lm, ln),
                        _ => (false, false),
                    },
                    BinOp::Pow => match **r {
                        Expr::Num(e) if e >= 0.0 => (lm && ln, ln),
                        _ => (false, false),
                    },
                }
            }
            Expr::Call(f, arg) => {
                let (am, an) = arg.mono();
                match f {
                    Func::Exp => (am, true),
                    Func::Sqrt => (am && an, an),
                    // sin/cos oscillate; abs and log break the required
                    // corner-minimum property.
                    Func::Sin | Func::Cos | Func::Abs | Func::Log => (false, false),
                }
            }
        }
    }

    fn precedence(&self) -> u8 {
        match self {
            Expr::Bin(BinOp::Add | BinOp::Sub, ..) => 1,
            Expr::Bin(BinOp::Mul | BinOp::Div, ..) => 2,
            Expr::Neg(_) => 3,
            Expr::Bin(BinOp::Pow, ..) => 4,
            _ => 5,
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn paren(f: &mut fmt::Formatter<'_>, e: &Expr, need: bool) -> fmt::Result {
            if need {
                write!(f, "({e})")
            } else {
                write!(f, "{e}")
            }
        }
        match self {
            Expr::Num(v) => write!(f, "{v}"),
            Expr::T => f.write_str("t"),
            Expr::U(c) => write!(f, "u{c}"),
            Expr::PointEval { component, point } => write!(f, "u{component}({point})"),
            Expr::Neg(e) => {
                f.write_str("-")?;
                paren(f, e, e.precedence() < 3)
            }
            Expr::Bin(op, l, r) => {
                let (sym, prec) = match op {
                    BinOp::Add => ("+", 1),
                    BinOp::Sub => ("-", 1),
                    BinOp::Mul => ("*", 2),
                    BinOp::Div => ("/", 2),
                    BinOp::Pow => ("^", 4),
                };
                if *op == BinOp::Pow {
                    // Right-associative: parenthesize a Pow on the left.
                    paren(f, l, l.precedence() <= prec)?;
                    write!(f, " {sym} ")?;
                    paren(f, r, r.precedence() < prec)
                } else {
                    paren(f, l, l.precedence() < prec)?;
                    write!(f, " {sym} ")?;
                    paren(f, r, r.precedence() <= prec)
                }
            }
            Expr::Call(func, arg) => write!(f, "{}({arg})", func.name()),
        }
    }
}

/// Parse `src` in the given context.
pub fn parse(src: &str, ctx: Context) -> Result<Expr, ParseError> {
    let mut p = Parser {
        chars: src.chars().collect(),
        pos: 0,
        ctx,
    };
    p.skip_ws();
    if p.at_end() {
        return Err(p.error("empty expression"));
    }
    let e = p.parse_expr()?;
    p.skip_ws();
    if !p.at_end() {
        return Err(p.error(&format!("unexpected character '{}'", p.peek().unwrap())));
    }
    Ok(e)
}

struct Parser {
    chars: Vec<char>,
    pos: usize,
    ctx: Context,
}

impl Parser {
    fn at_end(&self) -> bool {
        self.pos >= self.chars.len()
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek();
        if c.is_some() {
            self.pos += 1;
        }
        c
    }

    fn skip_ws(&mut self) {
        while matches!(self.peek(), Some(c) if c.is_whitespace()) {
            self.pos += 1;
        }
    }

    fn error(&self, message: &str) -> ParseError {
        ParseError {
            pos: self.pos,
            message: message.to_string(),
        }
    }

    fn expect(&mut self, c: char) -> Result<(), ParseError> {
        self.skip_ws();
        match self.peek() {
            Some(x) if x == c => {
                self.pos += 1;
                Ok(())
            }
            Some(x) => Err(self.error(&format!("expected '{c}', found '{x}'"))),
            None => Err(self.error(&format!("expected '{c}', found end of input"))),
        }
    }

    fn parse_expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.parse_term()?;
        loop {
            self.skip_ws();
            match self.peek() {
                Some('+') => {
                    self.bump();
                    let rhs = self.parse_term()?;
                    lhs = Expr::Bin(BinOp::Add, Box::new(lhs), Box::new(rhs));
                }
                Some('-') => {
                    self.bump();
                    let rhs = self.parse_term()?;
                    lhs = Expr::Bin(BinOp::Sub, Box::new(lhs), Box::new(rhs));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn parse_term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.parse_unary()?;
        loop {
            self.skip_ws();
            match self.peek() {
                Some('*') => {
                    self.bump();
                    let rhs = self.parse_unary()?;
                    lhs = Expr::Bin(BinOp::Mul, Box::new(lhs), Box::new(rhs));
                }
                Some('/') => {
                    self.bump();
                    let rhs = self.parse_unary()?;
                    lhs = Expr::Bin(BinOp::Div, Box::new(lhs), Box::new(rhs));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn parse_unary(&mut self) -> Result<Expr, ParseError> {
        self.skip_ws();
        if self.peek() == Some('-') {
            self.bump();
            let inner = self.parse_unary()?;
            Ok(Expr::Neg(Box::new(inner)))
        } else {
            self.parse_power()
        }
    }

    fn parse_power(&mut self) -> Result<Expr, ParseError> {
        let base = self.parse_atom()?;
        self.skip_ws();
        if self.peek() == Some('^') {
            self.bump();
            let exponent = self.parse_unary()?;
            Ok(Expr::Bin(BinOp::Pow, Box::new(base), Box::new(exponent)))
        } else {
            Ok(base)
        }
    }

    fn parse_atom(&mut self) -> Result<Expr, ParseError> {
        self.skip_ws();
        match self.peek() {
            None => Err(self.error("unexpected end of input")),
            Some('(') => {
                self.bump();
                let inner = self.parse_expr()?;
                self.expect(')')?;
                Ok(inner)
            }
            Some(c) if c.is_ascii_digit() => self.parse_number(),
            Some(c) if c.is_ascii_alphabetic() || c == '_' => self.parse_ident(),
            Some(c) => Err(self.error(&format!("unexpected character '{c}'"))),
        }
    }

    fn parse_number(&mut self) -> Result<Expr, ParseError> {
        let start = self.pos;
        while matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
            self.bump();
        }
        if self.peek() == Some('.') {
            self.bump();
            if !matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
                return Err(self.error("expected digits after decimal point"));
            }
            while matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
                self.bump();
            }
        }
        if matches!(self.peek(), Some('e' | 'E')) {
            let mark = self.pos;
            self.bump();
            if matches!(self.peek(), Some('+' | '-')) {
                self.bump();
            }
            if matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
                while matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
                    self.bump();
                }
            } else {
                // Not an exponent after all (e.g. `2e` would be `2 * e`?
                // there is no `e` constant, so back off and let the caller
                // report the stray identifier).
                self.pos = mark;
            }
        }
        let text: String = self.chars[start..self.pos].iter().collect();
        text.parse::<f64>()
            .map(Expr::Num)
            .map_err(|_| self.error(&format!("invalid number literal '{text}'")))
    }

    fn parse_ident(&mut self) -> Result<Expr, ParseError> {
        let start = self.pos;
        while matches!(self.peek(), Some(c) if c.is_ascii_alphanumeric() || c == '_') {
            self.bump();
        }
        let name: String = self.chars[start..self.pos].iter().collect();

        if let Some(func) = Func::from_name(&name) {
            self.expect('(')?;
            let arg = self.parse_expr()?;
            self.expect(')')?;
            return Ok(Expr::Call(func, Box::new(arg)));
        }

        match (name.as_str(), self.ctx) {
            ("t", Context::Nonlinearity) => Ok(Expr::T),
            ("t", Context::Functional) => Err(ParseError {
                pos: start,
                message: "`t` is not available in a boundary functional".into(),
            }),
            ("u1" | "u2", ctx) => {
                let component = if name == "u1" { 1 } else { 2 };
                self.skip_ws();
                match (ctx, self.peek()) {
                    (Context::Functional, Some('(')) => {
                        let open = self.pos;
                        self.bump();
                        let point_expr = self.parse_expr()?;
                        self.expect(')')?;
                        let point =
                            point_expr
                                .eval_points(&|_, _| f64::NAN)
                                .map_err(|_| ParseError {
                                    pos: open,
                                    message: format!(
                                        "evaluation point of {name} must be a constant"
                                    ),
                                })?;
                        Ok(Expr::PointEval { component, point })
                    }
                    (Context::Functional, _) => Err(ParseError {
                        pos: start,
                        message: format!(
                            "{name} must be applied to a point here, e.g. {name}(1/3)"
                        ),
                    }),
                    (Context::Nonlinearity, Some('(')) => Err(ParseError {
                        pos: self.pos,
                        message: format!(
                            "{name} is a variable in a nonlinearity; point evaluation is \
                             only allowed in boundary functionals"
                        ),
                    }),
                    (Context::Nonlinearity, _) => Ok(Expr::U(component)),
                }
            }
            _ => Err(ParseError {
                pos: start,
                message: format!("unknown identifier '{name}'"),
            }),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn pf(src: &str) -> Expr {
        parse(src, Context::Nonlinearity).unwrap()
    }

    #[test]
    fn precedence_example() {
        let e = pf("2+3*2^2");
        assert_eq!(e.eval_state(0.0, 0.0, 0.0).unwrap(), 14.0);
    }

    #[test]
    fn pow_binds_tighter_than_unary_minus() {
        assert_eq!(pf("-2^2").eval_state(0.0, 0.0, 0.0).unwrap(), -4.0);
        assert_eq!(pf("2^-2").eval_state(0.0, 0.0, 0.0).unwrap(), 0.25);
        // Right associativity.
        assert_eq!(pf("2^3^2").eval_state(0.0, 0.0, 0.0).unwrap(), 512.0);
    }

    #[test]
    fn nonlinearity_hand_values() {
        // 0.5*(u1 + u2^3 + 2) at the origin.
        let f1 = pf("0.5*(u1 + u2^3 + 2)");
        assert_eq!(f1.eval_state(0.0, 0.0, 0.0).unwrap(), 1.0);
        // u1^2 + sin(u2)^2 + 1 at the origin.
        let f = pf("u1^2 + sin(u2)^2 + 1");
        assert_eq!(f.eval_state(0.0, 0.0, 0.0).unwrap(), 1.0);
        // exp(u1) + u2^3 + 1 at the origin.
        let g = pf("exp(u1) + u2^3 + 1");
        assert_eq!(g.eval_state(0.5, 0.0, 0.0).unwrap(), 2.0);
    }

    #[test]
    fn rational_literal_is_division() {
        let e = pf("1/12");
        assert!(matches!(e, Expr::Bin(BinOp::Div, _, _)));
        assert!((e.eval_state(0.0, 0.0, 0.0).unwrap() - 1.0 / 12.0).abs() < 1e-16);
    }

    #[test]
    fn unterminated_call_errors_at_position_4() {
        let err = parse("sin(", Context::Nonlinearity).unwrap_err();
        assert_eq!(err.pos, 4);
    }

    #[test]
    fn unknown_identifier() {
        let err = parse("u3 + 1", Context::Nonlinearity).unwrap_err();
        assert!(err.message.contains("unknown identifier"), "{err}");
        assert_eq!(err.pos, 0);
    }

    #[test]
    fn empty_input_is_an_error() {
        assert!(parse("", Context::Nonlinearity).is_err());
        assert!(parse("   ", Context::Functional).is_err());
    }

    #[test]
    fn division_by_zero_reports_subexpression() {
        let e = pf("1/(u1-u1)");
        let err = e.eval_state(0.0, 3.0, 0.0).unwrap_err();
        assert_eq!(err.kind, EvalErrorKind::DivisionByZero);
        assert!(err.subexpr.contains("u1 - u1"), "{}", err.subexpr);
    }

    #[test]
    fn real_power_semantics() {
        let e = pf("(0-2)^0.5");
        assert_eq!(
            e.eval_state(0.0, 0.0, 0.0).unwrap_err().kind,
            EvalErrorKind::FractionalPowerOfNegative
        );
        // Integer exponents on negative bases are fine.
        assert_eq!(pf("(0-2)^3").eval_state(0.0, 0.0, 0.0).unwrap(), -8.0);
        // sqrt(x) and x^0.5 agree and both reject negatives.
        assert_eq!(
            pf("sqrt(u1-1)").eval_state(0.0, 0.5, 0.0).unwrap_err().kind,
            EvalErrorKind::NegativeSqrt
        );
        let a = pf("sqrt(u1)").eval_state(0.0, 2.0, 0.0).unwrap();
        let b = pf("u1^0.5").eval_state(0.0, 2.0, 0.0).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn overflow_is_an_error() {
        let e = pf("exp(exp(exp(u1)))");
        let err = e.eval_state(0.0, 10.0, 0.0).unwrap_err();
        assert_eq!(err.kind, EvalErrorKind::NonFinite);
    }

    #[test]
    fn functional_context_point_evaluations() {
        let g = parse("0.5*sqrt(u1(1/6)) + sqrt(2)/20*u2(1/5)^3", Context::Functional).unwrap();
        let mut pts = Vec::new();
        g.collect_point_evals(&mut pts);
        assert_eq!(pts.len(), 2);
        let v = g
            .eval_points(&|c, p| if c == 1 { (p * 6.0).round() } else { 0.0 })
            .unwrap();
        assert!((v - 0.5).abs() < 1e-15);

        assert!(parse("u1", Context::Functional).is_err());
        assert!(parse("u1(u2(1))", Context::Functional).is_err());
        assert!(parse("u1(0.3)", Context::Nonlinearity).is_err());
        assert!(parse("t + 1", Context::Functional).is_err());
    }

    #[test]
    fn monotone_detection() {
        assert!(pf("0.5*(u1 + u2^3 + 2)").is_monotone_nondecreasing());
        assert!(pf("0.5*(u1^2 + u2^2 + 1)").is_monotone_nondecreasing());
        assert!(pf("exp(u1) + u2^3 + 1").is_monotone_nondecreasing());
        assert!(!pf("u1^2 + sin(u2)^2 + 1").is_monotone_nondecreasing());
        assert!(!pf("1 - u1").is_monotone_nondecreasing());
        assert!(pf("u1 - 1").is_monotone_nondecreasing());
    }

    // Random expression trees that stay within the total domain of evaluation:
    // no division, sqrt, log or exp, and only small integer exponents, so
    // every evaluation is finite.
    fn safe_expr() -> impl Strategy<Value = Expr> {
        let leaf = prop_oneof![
            (0.0..2.0f64).prop_map(Expr::Num),
            Just(Expr::T),
            Just(Expr::U(1)),
            Just(Expr::U(2)),
        ];
        leaf.prop_recursive(3, 24, 3, |inner| {
            prop_oneof![
                (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::Bin(
                    BinOp::Add,
                    Box::new(a),
                    Box::new(b)
                )),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::Bin(
                    BinOp::Sub,
                    Box::new(a),
                    Box::new(b)
                )),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::Bin(
                    BinOp::Mul,
                    Box::new(a),
                    Box::new(b)
                )),
                (inner.clone(), 0u8..4).prop_map(|(a, e)| Expr::Bin(
                    BinOp::Pow,
                    Box::new(a),
                    Box::new(Expr::Num(e as f64))
                )),
                inner.clone().prop_map(|a| Expr::Neg(Box::new(a))),
                inner.clone().prop_map(|a| Expr::Call(Func::Sin, Box::new(a))),
                inner.clone().prop_map(|a| Expr::Call(Func::Cos, Box::new(a))),
                inner.prop_map(|a| Expr::Call(Func::Abs, Box::new(a))),
            ]
        })
    }

    proptest! {
        #[test]
        fn print_then_reparse_is_identity(e in safe_expr()) {
            let printed = e.to_string();
            let reparsed = parse(&printed, Context::Nonlinearity).unwrap();
            prop_assert_eq!(e, reparsed);
        }

        #[test]
        fn safe_expressions_never_error(e in safe_expr(), t in 0.0..1.0f64,
                                        u1 in 0.0..1.0f64, u2 in 0.0..1.0f64) {
            let v = e.eval_state(t, u1, u2);
            prop_assert!(v.is_ok(), "eval failed: {:?}", v);
        }

        #[test]
        fn eval_is_deterministic(e in safe_expr()) {
            let a = e.eval_state(0.3, 0.7, 0.2).unwrap();
            let b = e.eval_state(0.3, 0.7, 0.2).unwrap();
            prop_assert_eq!(a, b);
        }
    }
}
