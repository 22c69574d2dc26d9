//! Closed-form component expressions.
//!
//! A small arithmetic grammar used by user-defined metrics, embeddings and
//! vector fields:
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := unary (('*' | '/') unary)*
//! unary  := '-' unary | power
//! power  := atom ('^' unary)?
//! atom   := number | symbol | func '(' expr (',' expr)* ')' | '(' expr ')'
//! func   := pow | exp | log | sin | cos | sinh | cosh | sqrt
//! ```
//!
//! Symbols resolve either to variables (coordinate or parameter names, by
//! position) or to named constants (`pi`, `e`, `inf`, plus user constants).
//! Parsed expressions can be differentiated symbolically, which is how
//! user-defined objects get analytic derivatives.

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum ExprError {
    #[error("unexpected character `{ch}` at offset {pos} in `{src}`")]
    UnexpectedChar { src: String, ch: char, pos: usize },
    #[error("unexpected end of expression `{0}`")]
    UnexpectedEnd(String),
    #[error("unexpected token `{token}` in `{src}`")]
    UnexpectedToken { src: String, token: String },
    #[error("unknown symbol `{name}` in `{src}`")]
    UnknownSymbol { src: String, name: String },
    #[error("function `{name}` takes {expected} argument(s), got {found}")]
    Arity { name: String, expected: usize, found: usize },
    #[error("expression `{0}` is not constant")]
    NotConstant(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Exp,
    Log,
    Sin,
    Cos,
    Sinh,
    Cosh,
    Sqrt,
}

impl Func {
    fn from_name(name: &str) -> Option<Func> {
        Some(match name {
            "exp" => Func::Exp,
            "log" => Func::Log,
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "sinh" => Func::Sinh,
            "cosh" => Func::Cosh,
            "sqrt" => Func::Sqrt,
            _ => return None,
        })
    }

    fn name(self) -> &'static str {
        match self {
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Sinh => "sinh",
            Func::Cosh => "cosh",
            Func::Sqrt => "sqrt",
        }
    }

    fn apply(self, x: f64) -> f64 {
        match self {
            Func::Exp => x.exp(),
            Func::Log => x.ln(),
            Func::Sin => x.sin(),
            Func::Cos => x.cos(),
            Func::Sinh => x.sinh(),
            Func::Cosh => x.cosh(),
            Func::Sqrt => x.sqrt(),
        }
    }
}

/// Parsed expression tree. Variables are referenced by index.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Const(f64),
    Var(usize),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, Box<Expr>),
    Call(Func, Box<Expr>),
}

/// Symbol table for parsing: ordered variable names plus named constants.
#[derive(Debug, Clone, Default)]
pub struct Symbols {
    variables: Vec<String>,
    constants: BTreeMap<String, f64>,
}

impl Symbols {
    pub fn new<S: AsRef<str>>(variables: &[S]) -> Self {
        let mut constants = BTreeMap::new();
        constants.insert("pi".to_string(), std::f64::consts::PI);
        constants.insert("e".to_string(), std::f64::consts::E);
        constants.insert("inf".to_string(), f64::INFINITY);
        Symbols { variables: variables.iter().map(|s| s.as_ref().to_string()).collect(), constants }
    }

    pub fn with_constant(mut self, name: &str, value: f64) -> Self {
        self.constants.insert(name.to_string(), value);
        self
    }

    pub fn with_constants<'a>(mut self, constants: impl IntoIterator<Item = (&'a String, &'a f64)>) -> Self {
        for (k, v) in constants {
            self.constants.insert(k.clone(), *v);
        }
        self
    }

    fn resolve(&self, name: &str) -> Option<Expr> {
        if let Some(i) = self.variables.iter().position(|v| v == name) {
            return Some(Expr::Var(i));
        }
        self.constants.get(name).map(|&c| Expr::Const(c))
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Num(f64),
    Ident(String),
    Op(char),
    LParen,
    RParen,
    Comma,
}

impl fmt::Display for Token {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Token::Num(x) => write!(f, "{x}"),
            Token::Ident(s) => write!(f, "{s}"),
            Token::Op(c) => write!(f, "{c}"),
            Token::LParen => write!(f, "("),
            Token::RParen => write!(f, ")"),
            Token::Comma => write!(f, ","),
        }
    }
}

fn tokenize(src: &str) -> Result<Vec<Token>, ExprError> {
    let chars: Vec<char> = src.chars().collect();
    let mut tokens = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        match c {
            c if c.is_whitespace() => i += 1,
            '0'..='9' | '.' => {
                let start = i;
                while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                    i += 1;
                }
                if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                    let mut j = i + 1;
                    if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
                        j += 1;
                    }
                    if j < chars.len() && chars[j].is_ascii_digit() {
                        while j < chars.len() && chars[j].is_ascii_digit() {
                            j += 1;
                        }
                        i = j;
                    }
                }
                let text: String = chars[start..i].iter().collect();
                let value = text
                    .parse::<f64>()
                    .map_err(|_| ExprError::UnexpectedToken { src: src.to_string(), token: text.clone() })?;
                tokens.push(Token::Num(value));
            }
            c if c.is_alphabetic() || c == '_' => {
                let start = i;
                while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                    i += 1;
                }
                tokens.push(Token::Ident(chars[start..i].iter().collect()));
            }
            '+' | '-' | '*' | '/' | '^' => {
                tokens.push(Token::Op(c));
                i += 1;
            }
            '−' => {
                tokens.push(Token::Op('-'));
                i += 1;
            }
            '×' => {
                tokens.push(Token::Op('*'));
                i += 1;
            }
            '÷' => {
                tokens.push(Token::Op('/'));
                i += 1;
            }
            '(' => {
                tokens.push(Token::LParen);
                i += 1;
            }
            ')' => {
                tokens.push(Token::RParen);
                i += 1;
            }
            ',' => {
                tokens.push(Token::Comma);
                i += 1;
            }
            other => return Err(ExprError::UnexpectedChar { src: src.to_string(), ch: other, pos: i }),
        }
    }
    Ok(tokens)
}

struct Parser<'a> {
    src: &'a str,
    tokens: Vec<Token>,
    pos: usize,
    symbols: &'a Symbols,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn next(&mut self) -> Result<Token, ExprError> {
        let t = self.tokens.get(self.pos).cloned().ok_or_else(|| ExprError::UnexpectedEnd(self.src.to_string()))?;
        self.pos += 1;
        Ok(t)
    }

    fn expect(&mut self, want: Token) -> Result<(), ExprError> {
        let t = self.next()?;
        if t == want {
            Ok(())
        } else {
            Err(ExprError::UnexpectedToken { src: self.src.to_string(), token: t.to_string() })
        }
    }

    fn expr(&mut self) -> Result<Expr, ExprError> {
        let mut lhs = self.term()?;
        while let Some(Token::Op(op @ ('+' | '-'))) = self.peek().cloned() {
            self.pos += 1;
            let rhs = self.term()?;
            lhs = if op == '+' { Expr::Add(lhs.into(), rhs.into()) } else { Expr::Sub(lhs.into(), rhs.into()) };
        }
        Ok(lhs)
    }

    fn term(&mut self) -> Result<Expr, ExprError> {
        let mut lhs = self.unary()?;
        while let Some(Token::Op(op @ ('*' | '/'))) = self.peek().cloned() {
            self.pos += 1;
            let rhs = self.unary()?;
            lhs = if op == '*' { Expr::Mul(lhs.into(), rhs.into()) } else { Expr::Div(lhs.into(), rhs.into()) };
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Expr, ExprError> {
        match self.peek() {
            Some(Token::Op('-')) => {
                self.pos += 1;
                Ok(Expr::Neg(self.unary()?.into()))
            }
            Some(Token::Op('+')) => {
                self.pos += 1;
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<Expr, ExprError> {
        let base = self.atom()?;
        if let Some(Token::Op('^')) = self.peek() {
            self.pos += 1;
            let exponent = self.unary()?;
            return Ok(Expr::Pow(base.into(), exponent.into()));
        }
        Ok(base)
    }

    fn args(&mut self) -> Result<Vec<Expr>, ExprError> {
        self.expect(Token::LParen)?;
        let mut args = vec![self.expr()?];
        loop {
            match self.next()? {
                Token::Comma => args.push(self.expr()?),
                Token::RParen => return Ok(args),
                t => return Err(ExprError::UnexpectedToken { src: self.src.to_string(), token: t.to_string() }),
            }
        }
    }

    fn atom(&mut self) -> Result<Expr, ExprError> {
        match self.next()? {
            Token::Num(x) => Ok(Expr::Const(x)),
            Token::LParen => {
                let e = self.expr()?;
                self.expect(Token::RParen)?;
                Ok(e)
            }
            Token::Ident(name) => {
                if matches!(self.peek(), Some(Token::LParen)) {
                    let mut args = self.args()?;
                    if name == "pow" {
                        if args.len() != 2 {
                            return Err(ExprError::Arity { name, expected: 2, found: args.len() });
                        }
                        let exponent = args.pop().unwrap();
                        let base = args.pop().unwrap();
                        return Ok(Expr::Pow(base.into(), exponent.into()));
                    }
                    let func = Func::from_name(&name)
                        .ok_or_else(|| ExprError::UnknownSymbol { src: self.src.to_string(), name: name.clone() })?;
                    if args.len() != 1 {
                        return Err(ExprError::Arity { name, expected: 1, found: args.len() });
                    }
                    Ok(Expr::Call(func, args.pop().unwrap().into()))
                } else {
                    self.symbols
                        .resolve(&name)
                        .ok_or_else(|| ExprError::UnknownSymbol { src: self.src.to_string(), name })
                }
            }
            t => Err(ExprError::UnexpectedToken { src: self.src.to_string(), token: t.to_string() }),
        }
    }
}

impl Expr {
    pub fn parse(src: &str, symbols: &Symbols) -> Result<Expr, ExprError> {
        let tokens = tokenize(src)?;
        if tokens.is_empty() {
            return Err(ExprError::UnexpectedEnd(src.to_string()));
        }
        let mut parser = Parser { src, tokens, pos: 0, symbols };
        let e = parser.expr()?;
        if let Some(t) = parser.peek() {
            return Err(ExprError::UnexpectedToken { src: src.to_string(), token: t.to_string() });
        }
        Ok(e.simplify())
    }

    /// Parses and evaluates an expression that may only use constants.
    pub fn constant(src: &str, symbols: &Symbols) -> Result<f64, ExprError> {
        let e = Expr::parse(src, symbols)?;
        if e.uses_variables() {
            return Err(ExprError::NotConstant(src.to_string()));
        }
        Ok(e.eval(&[]))
    }

    pub fn uses_variables(&self) -> bool {
        match self {
            Expr::Const(_) => false,
            Expr::Var(_) => true,
            Expr::Neg(a) | Expr::Call(_, a) => a.uses_variables(),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) | Expr::Pow(a, b) => {
                a.uses_variables() || b.uses_variables()
            }
        }
    }

    pub fn eval(&self, vars: &[f64]) -> f64 {
        match self {
            Expr::Const(c) => *c,
            Expr::Var(i) => vars[*i],
            Expr::Neg(a) => -a.eval(vars),
            Expr::Add(a, b) => a.eval(vars) + b.eval(vars),
            Expr::Sub(a, b) => a.eval(vars) - b.eval(vars),
            Expr::Mul(a, b) => a.eval(vars) * b.eval(vars),
            Expr::Div(a, b) => a.eval(vars) / b.eval(vars),
            Expr::Pow(a, b) => match **b {
                Expr::Const(c) if c.fract() == 0.0 && c.abs() < 64.0 => a.eval(vars).powi(c as i32),
                _ => a.eval(vars).powf(b.eval(vars)),
            },
            Expr::Call(f, a) => f.apply(a.eval(vars)),
        }
    }

    /// Symbolic partial derivative with respect to variable `var`.
    pub fn derivative(&self, var: usize) -> Expr {
        use Expr::*;
        let d = match self {
            Const(_) => Const(0.0),
            Var(i) => Const(if *i == var { 1.0 } else { 0.0 }),
            Neg(a) => Neg(a.derivative(var).into()),
            Add(a, b) => Add(a.derivative(var).into(), b.derivative(var).into()),
            Sub(a, b) => Sub(a.derivative(var).into(), b.derivative(var).into()),
            Mul(a, b) => {
                Add(Mul(a.derivative(var).into(), b.clone()).into(), Mul(a.clone(), b.derivative(var).into()).into())
            }
            Div(a, b) => Div(
                Sub(Mul(a.derivative(var).into(), b.clone()).into(), Mul(a.clone(), b.derivative(var).into()).into())
                    .into(),
                Pow(b.clone(), Const(2.0).into()).into(),
            ),
            Pow(a, b) => {
                if !b.uses_variables() {
                    let c = b.eval(&[]);
                    Mul(
                        Mul(Const(c).into(), Pow(a.clone(), Const(c - 1.0).into()).into()).into(),
                        a.derivative(var).into(),
                    )
                } else {
                    // d(a^b) = a^b (b' ln a + b a'/a)
                    Mul(
                        self.clone().into(),
                        Add(
                            Mul(b.derivative(var).into(), Call(Func::Log, a.clone()).into()).into(),
                            Div(Mul(b.clone(), a.derivative(var).into()).into(), a.clone()).into(),
                        )
                        .into(),
                    )
                }
            }
            Call(f, a) => {
                let inner = a.derivative(var);
                let outer = match f {
                    Func::Exp => Call(Func::Exp, a.clone()),
                    Func::Log => Div(Const(1.0).into(), a.clone()),
                    Func::Sin => Call(Func::Cos, a.clone()),
                    Func::Cos => Neg(Call(Func::Sin, a.clone()).into()),
                    Func::Sinh => Call(Func::Cosh, a.clone()),
                    Func::Cosh => Call(Func::Sinh, a.clone()),
                    Func::Sqrt => Div(Const(0.5).into(), Call(Func::Sqrt, a.clone()).into()),
                };
                Mul(outer.into(), inner.into())
            }
        };
        d.simplify()
    }

    /// Constant folding and removal of additive/multiplicative identities.
    pub fn simplify(self) -> Expr {
        use Expr::*;
        match self {
            Neg(a) => match a.simplify() {
                Const(c) => Const(-c),
                Neg(inner) => *inner,
                s => Neg(s.into()),
            },
            Add(a, b) => match (a.simplify(), b.simplify()) {
                (Const(x), Const(y)) => Const(x + y),
                (Const(0.0), s) | (s, Const(0.0)) => s,
                (x, y) => Add(x.into(), y.into()),
            },
            Sub(a, b) => match (a.simplify(), b.simplify()) {
                (Const(x), Const(y)) => Const(x - y),
                (s, Const(0.0)) => s,
                (Const(0.0), s) => Neg(s.into()).simplify(),
                (x, y) => Sub(x.into(), y.into()),
            },
            Mul(a, b) => match (a.simplify(), b.simplify()) {
                (Const(x), Const(y)) => Const(x * y),
                (Const(0.0), _) | (_, Const(0.0)) => Const(0.0),
                (Const(1.0), s) | (s, Const(1.0)) => s,
                (x, y) => Mul(x.into(), y.into()),
            },
            Div(a, b) => match (a.simplify(), b.simplify()) {
                (Const(x), Const(y)) => Const(x / y),
                (Const(0.0), _) => Const(0.0),
                (s, Const(1.0)) => s,
                (x, y) => Div(x.into(), y.into()),
            },
            Pow(a, b) => match (a.simplify(), b.simplify()) {
                (Const(x), Const(y)) => Const(x.powf(y)),
                (_, Const(0.0)) => Const(1.0),
                (s, Const(1.0)) => s,
                (x, y) => Pow(x.into(), y.into()),
            },
            Call(f, a) => match a.simplify() {
                Const(c) => Const(f.apply(c)),
                s => Call(f, s.into()),
            },
            e => e,
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Const(c) => write!(f, "{c}"),
            Expr::Var(i) => write!(f, "x{i}"),
            Expr::Neg(a) => write!(f, "(-{a})"),
            Expr::Add(a, b) => write!(f, "({a} + {b})"),
            Expr::Sub(a, b) => write!(f, "({a} - {b})"),
            Expr::Mul(a, b) => write!(f, "({a} * {b})"),
            Expr::Div(a, b) => write!(f, "({a} / {b})"),
            Expr::Pow(a, b) => write!(f, "({a} ^ {b})"),
            Expr::Call(func, a) => write!(f, "{}({a})", func.name()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fd;

    fn sym() -> Symbols {
        Symbols::new(&["t", "x"]).with_constant("M", 1.5)
    }

    #[test]
    fn precedence_and_functions() {
        let e = Expr::parse("-t^2 + 2*x*M - sqrt(4)/2", &sym()).unwrap();
        assert_eq!(e.eval(&[3.0, 2.0]), -9.0 + 6.0 - 1.0);
        let e = Expr::parse("pow(t, 3) + exp(0) + log(e) + sinh(0) + cosh(0) + sin(pi/2) + cos(0)", &sym()).unwrap();
        assert!((e.eval(&[2.0, 0.0]) - 13.0).abs() < 1e-14);
        let e = Expr::parse("2^3^2", &sym()).unwrap();
        assert_eq!(e.eval(&[0.0, 0.0]), 512.0);
        let e = Expr::parse("1.5e-1 × 2 ÷ 3 − 1", &sym()).unwrap();
        assert!((e.eval(&[0.0, 0.0]) + 0.9).abs() < 1e-15);
    }

    #[test]
    fn errors_are_reported() {
        assert!(matches!(Expr::parse("t +", &sym()), Err(ExprError::UnexpectedEnd(_))));
        assert!(matches!(Expr::parse("y", &sym()), Err(ExprError::UnknownSymbol { .. })));
        assert!(matches!(Expr::parse("tan(t)", &sym()), Err(ExprError::UnknownSymbol { .. })));
        assert!(matches!(Expr::parse("pow(t)", &sym()), Err(ExprError::Arity { .. })));
        assert!(matches!(Expr::parse("t $ x", &sym()), Err(ExprError::UnexpectedChar { .. })));
        assert!(matches!(Expr::parse("(t", &sym()), Err(ExprError::UnexpectedEnd(_))));
        assert!(matches!(Expr::constant("t", &sym()), Err(ExprError::NotConstant(_))));
        assert_eq!(Expr::constant("2*pi", &sym()).unwrap(), 2.0 * std::f64::consts::PI);
    }

    #[test]
    fn symbolic_derivative_matches_finite_differences() {
        let cases = [
            "t^2 * sin(x) - 2*M/t",
            "sqrt(1 + t^2) * cosh(x) / (2 + exp(t*x))",
            "pow(t, x) + log(t) * sinh(x)",
            "-(1 - 2*M/t)",
        ];
        let p = [1.3, 0.4];
        for src in cases {
            let e = Expr::parse(src, &sym()).unwrap();
            for var in 0..2 {
                let d = e.derivative(var).eval(&p);
                let num = fd::partial(|y: &[f64]| Ok::<_, ()>(e.eval(y)), &p, var, fd::first_step(p[var])).unwrap();
                assert!((d - num).abs() < 1e-8 * (1.0 + d.abs()), "{src} d/dx{var}: {d} vs {num}");
            }
        }
    }

    #[test]
    fn simplification_folds_constants() {
        let e = Expr::parse("3*t + 2*2", &sym()).unwrap();
        assert_eq!(e.derivative(0), Expr::Const(3.0));
        assert_eq!(e.derivative(1), Expr::Const(0.0));
    }
}
