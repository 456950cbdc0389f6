//! Tiny exact expression language for the data files.
//!
//! Values are polynomials in `z` over ℚ (plain numbers are constants) or
//! booleans. Grammar, loosest binding first:
//!
//! ```text
//! or   := and ('||' and)*
//! and  := not ('&&' not)*
//! not  := '!' not | cmp
//! cmp  := sum (('=='|'!='|'<'|'<='|'>'|'>=') sum)?
//! sum  := prod (('+'|'-') prod)*
//! prod := neg (('*'|'/') neg)*
//! neg  := '-' neg | pow
//! pow  := atom ('^' neg)?
//! atom := INT | IDENT | IDENT '(' or (',' or)* ')' | '(' or ')'
//! ```
//!
//! Built-ins: `abs(x)`, `big(x)` (1 if |x| > 1 else 0), `sgn(x)`,
//! `mod(x, m)` (in `[0, |m|)`), `if(c, a, b)`, `int(x)`, `odd(x)`,
//! `even(x)`, `in(x, step)` (x ∈ step·ℤ), `min`, `max`.

use std::collections::HashMap;
use std::fmt;

use num_traits::{Signed, ToPrimitive, Zero};

use crate::algebra::poly::QPoly;
use crate::algebra::rational::{format_rational, in_lattice, is_integer, rat, Rational};
use crate::error::{Error, Result};

pub type Env = HashMap<String, Rational>;

#[derive(Clone, Debug, PartialEq)]
pub enum Value {
    Poly(QPoly),
    Bool(bool),
}

impl Value {
    pub fn into_poly(self) -> Result<QPoly> {
        match self {
            Value::Poly(p) => Ok(p),
            Value::Bool(_) => Err(Error::Parse("expected a number, found a boolean".into())),
        }
    }

    pub fn into_bool(self) -> Result<bool> {
        match self {
            Value::Bool(b) => Ok(b),
            Value::Poly(_) => Err(Error::Parse("expected a boolean, found a number".into())),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
    And,
    Or,
}

#[derive(Clone, Debug, PartialEq)]
enum Node {
    Num(Rational),
    Var(String),
    Neg(Box<Node>),
    Not(Box<Node>),
    Bin(BinOp, Box<Node>, Box<Node>),
    Call(String, Vec<Node>),
}

/// A parsed expression; cheap to evaluate repeatedly.
#[derive(Clone, Debug, PartialEq)]
pub struct Expr {
    src: String,
    root: Node,
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.src)
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(Rational),
    Ident(String),
    Op(&'static str),
    LParen,
    RParen,
    Comma,
}

const OPS: [&str; 16] = [
    "&&", "||", "==", "!=", "<=", ">=", "<", ">", "!", "+", "-", "*", "/", "^", "=", "|",
];

fn lex(src: &str) -> Result<Vec<Tok>> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    'outer: while i < bytes.len() {
        let c = bytes[i] as char;
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        if c.is_ascii_digit() {
            let start = i;
            while i < bytes.len() && bytes[i].is_ascii_digit() {
                i += 1;
            }
            let n: num_bigint::BigInt = src[start..i].parse().expect("digits");
            out.push(Tok::Num(Rational::from_integer(n)));
            continue;
        }
        if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            out.push(Tok::Ident(src[start..i].to_string()));
            continue;
        }
        match c {
            '(' => out.push(Tok::LParen),
            ')' => out.push(Tok::RParen),
            ',' => out.push(Tok::Comma),
            _ => {
                for op in OPS {
                    if src[i..].starts_with(op) {
                        if op == "=" || op == "|" {
                            break;
                        }
                        out.push(Tok::Op(op));
                        i += op.len();
                        continue 'outer;
                    }
                }
                return Err(Error::Parse(format!("unexpected {c:?} at {i} in {src:?}")));
            }
        }
        i += 1;
    }
    Ok(out)
}

struct Parser<'a> {
    toks: Vec<Tok>,
    pos: usize,
    src: &'a str,
}

impl Parser<'_> {
    fn peek_op(&self) -> Option<&'static str> {
        match self.toks.get(self.pos) {
            Some(Tok::Op(o)) => Some(o),
            _ => None,
        }
    }

    fn err(&self, what: &str) -> Error {
        Error::Parse(format!("{what} at token {} in {:?}", self.pos, self.src))
    }

    fn binary(
        &mut self,
        ops: &[(&str, BinOp)],
        next: fn(&mut Self) -> Result<Node>,
    ) -> Result<Node> {
        let mut lhs = next(self)?;
        'scan: loop {
            if let Some(o) = self.peek_op() {
                for (s, op) in ops {
                    if *s == o {
                        self.pos += 1;
                        let rhs = next(self)?;
                        lhs = Node::Bin(*op, Box::new(lhs), Box::new(rhs));
                        continue 'scan;
                    }
                }
            }
            return Ok(lhs);
        }
    }

    fn or(&mut self) -> Result<Node> {
        self.binary(&[("||", BinOp::Or)], Self::and)
    }

    fn and(&mut self) -> Result<Node> {
        self.binary(&[("&&", BinOp::And)], Self::not)
    }

    fn not(&mut self) -> Result<Node> {
        if self.peek_op() == Some("!") {
            self.pos += 1;
            return Ok(Node::Not(Box::new(self.not()?)));
        }
        self.cmp()
    }

    fn cmp(&mut self) -> Result<Node> {
        let lhs = self.sum()?;
        let op = match self.peek_op() {
            Some("==") => BinOp::Eq,
            Some("!=") => BinOp::Ne,
            Some("<") => BinOp::Lt,
            Some("<=") => BinOp::Le,
            Some(">") => BinOp::Gt,
            Some(">=") => BinOp::Ge,
            _ => return Ok(lhs),
        };
        self.pos += 1;
        let rhs = self.sum()?;
        Ok(Node::Bin(op, Box::new(lhs), Box::new(rhs)))
    }

    fn sum(&mut self) -> Result<Node> {
        self.binary(&[("+", BinOp::Add), ("-", BinOp::Sub)], Self::prod)
    }

    fn prod(&mut self) -> Result<Node> {
        self.binary(&[("*", BinOp::Mul), ("/", BinOp::Div)], Self::neg)
    }

    fn neg(&mut self) -> Result<Node> {
        if self.peek_op() == Some("-") {
            self.pos += 1;
            return Ok(Node::Neg(Box::new(self.neg()?)));
        }
        self.pow()
    }

    fn pow(&mut self) -> Result<Node> {
        let base = self.atom()?;
        if self.peek_op() == Some("^") {
            self.pos += 1;
            let e = self.neg()?;
            return Ok(Node::Bin(BinOp::Pow, Box::new(base), Box::new(e)));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Node> {
        let tok = self.toks.get(self.pos).cloned().ok_or_else(|| self.err("unexpected end"))?;
        self.pos += 1;
        match tok {
            Tok::Num(n) => Ok(Node::Num(n)),
            Tok::Ident(name) => {
                if self.toks.get(self.pos) != Some(&Tok::LParen) {
                    return Ok(Node::Var(name));
                }
                self.pos += 1;
                let mut args = vec![self.or()?];
                loop {
                    match self.toks.get(self.pos) {
                        Some(Tok::Comma) => {
                            self.pos += 1;
                            args.push(self.or()?);
                        }
                        Some(Tok::RParen) => {
                            self.pos += 1;
                            return Ok(Node::Call(name, args));
                        }
                        _ => return Err(self.err("expected ',' or ')'")),
                    }
                }
            }
            Tok::LParen => {
                let inner = self.or()?;
                if self.toks.get(self.pos) != Some(&Tok::RParen) {
                    return Err(self.err("expected ')'"));
                }
                self.pos += 1;
                Ok(inner)
            }
            _ => Err(self.err("unexpected token")),
        }
    }
}

impl Expr {
    pub fn parse(src: &str) -> Result<Self> {
        let toks = lex(src)?;
        let mut p = Parser { toks, pos: 0, src };
        let root = p.or()?;
        if p.pos != p.toks.len() {
            return Err(p.err("trailing input"));
        }
        Ok(Self { src: src.to_string(), root })
    }

    /// Names referenced as variables (excluding `z`).
    pub fn variables(&self) -> Vec<String> {
        fn walk(n: &Node, out: &mut Vec<String>) {
            match n {
                Node::Num(_) => {}
                Node::Var(v) => {
                    if v != "z" && !out.contains(v) {
                        out.push(v.clone());
                    }
                }
                Node::Neg(a) | Node::Not(a) => walk(a, out),
                Node::Bin(_, a, b) => {
                    walk(a, out);
                    walk(b, out);
                }
                Node::Call(_, args) => args.iter().for_each(|a| walk(a, out)),
            }
        }
        let mut out = Vec::new();
        walk(&self.root, &mut out);
        out
    }

    pub fn eval(&self, env: &Env) -> Result<Value> {
        eval(&self.root, env).map_err(|e| match e {
            Error::Parse(m) => Error::Parse(format!("{m} (in {:?})", self.src)),
            other => other,
        })
    }

    pub fn eval_rational(&self, env: &Env) -> Result<Rational> {
        let p = self.eval(env)?.into_poly()?;
        constant(&p).map_err(|e| Error::Parse(format!("{e} (in {:?})", self.src)))
    }

    pub fn eval_bool(&self, env: &Env) -> Result<bool> {
        self.eval(env)?.into_bool()
    }

    pub fn eval_poly(&self, env: &Env) -> Result<QPoly> {
        self.eval(env)?.into_poly()
    }
}

fn constant(p: &QPoly) -> Result<Rational> {
    p.as_constant()
        .ok_or_else(|| Error::Parse(format!("expected a constant, found polynomial {p}")))
}

fn num(node: &Node, env: &Env) -> Result<Rational> {
    constant(&eval(node, env)?.into_poly()?)
}

fn boolean(node: &Node, env: &Env) -> Result<bool> {
    eval(node, env)?.into_bool()
}

fn eval(node: &Node, env: &Env) -> Result<Value> {
    Ok(match node {
        Node::Num(n) => Value::Poly(QPoly::constant(n.clone())),
        Node::Var(v) if v == "z" => Value::Poly(QPoly::x()),
        Node::Var(v) => match env.get(v) {
            Some(x) => Value::Poly(QPoly::constant(x.clone())),
            None => return Err(Error::Parse(format!("unbound variable {v:?}"))),
        },
        Node::Neg(a) => Value::Poly(-&eval(a, env)?.into_poly()?),
        Node::Not(a) => Value::Bool(!boolean(a, env)?),
        Node::Bin(BinOp::And, a, b) => Value::Bool(boolean(a, env)? && boolean(b, env)?),
        Node::Bin(BinOp::Or, a, b) => Value::Bool(boolean(a, env)? || boolean(b, env)?),
        Node::Bin(op, a, b) => {
            let x = eval(a, env)?.into_poly()?;
            let y = eval(b, env)?.into_poly()?;
            match op {
                BinOp::Add => Value::Poly(&x + &y),
                BinOp::Sub => Value::Poly(&x - &y),
                BinOp::Mul => Value::Poly(&x * &y),
                BinOp::Div => {
                    let d = constant(&y)?;
                    if d.is_zero() {
                        return Err(Error::Parse("division by zero".into()));
                    }
                    Value::Poly(x.scale(&d.recip()))
                }
                BinOp::Pow => {
                    let e = constant(&y)?;
                    let e = e
                        .to_integer()
                        .to_u32()
                        .filter(|_| is_integer(&e))
                        .ok_or_else(|| Error::Parse(format!("bad exponent {e}")))?;
                    Value::Poly(x.pow(e))
                }
                _ => {
                    let (x, y) = (constant(&x)?, constant(&y)?);
                    Value::Bool(match op {
                        BinOp::Eq => x == y,
                        BinOp::Ne => x != y,
                        BinOp::Lt => x < y,
                        BinOp::Le => x <= y,
                        BinOp::Gt => x > y,
                        BinOp::Ge => x >= y,
                        _ => unreachable!(),
                    })
                }
            }
        }
        Node::Call(f, args) => call(f, args, env)?,
    })
}

fn call(f: &str, args: &[Node], env: &Env) -> Result<Value> {
    let arity = |n: usize| {
        if args.len() == n {
            Ok(())
        } else {
            Err(Error::Parse(format!("{f}() takes {n} argument(s), got {}", args.len())))
        }
    };
    let c = |x: Rational| Value::Poly(QPoly::constant(x));
    Ok(match f {
        "abs" => {
            arity(1)?;
            c(num(&args[0], env)?.abs())
        }
        "big" => {
            arity(1)?;
            c(if num(&args[0], env)?.abs() > rat(1) { rat(1) } else { rat(0) })
        }
        "sgn" => {
            arity(1)?;
            c(rat(crate::algebra::rational::sign(&num(&args[0], env)?) as i64))
        }
        "mod" => {
            arity(2)?;
            let (x, m) = (num(&args[0], env)?, num(&args[1], env)?.abs());
            if m.is_zero() {
                return Err(Error::Parse("mod by zero".into()));
            }
            c(&x - &m * (&x / &m).floor())
        }
        "if" => {
            arity(3)?;
            if boolean(&args[0], env)? {
                eval(&args[1], env)?
            } else {
                eval(&args[2], env)?
            }
        }
        "int" => {
            arity(1)?;
            Value::Bool(is_integer(&num(&args[0], env)?))
        }
        "odd" | "even" => {
            arity(1)?;
            let x = num(&args[0], env)?;
            let odd = is_integer(&x) && !in_lattice(&x, &rat(2));
            let even = in_lattice(&x, &rat(2));
            Value::Bool(if f == "odd" { odd } else { even })
        }
        "in" => {
            arity(2)?;
            let step = num(&args[1], env)?;
            if !step.is_positive() {
                return Err(Error::Parse(format!("in(): step {} must be positive", format_rational(&step))));
            }
            Value::Bool(in_lattice(&num(&args[0], env)?, &step))
        }
        "min" | "max" => {
            if args.is_empty() {
                return Err(Error::Parse(format!("{f}() needs arguments")));
            }
            let mut best = num(&args[0], env)?;
            for a in &args[1..] {
                let x = num(a, env)?;
                if (f == "min" && x < best) || (f == "max" && x > best) {
                    best = x;
                }
            }
            c(best)
        }
        _ => return Err(Error::Parse(format!("unknown function {f}()"))),
    })
}

/// Convenience: parse-and-evaluate a constant.
pub fn eval_str(src: &str, env: &Env) -> Result<Rational> {
    Expr::parse(src)?.eval_rational(env)
}

/// `{name: value}` environment from pairs.
pub fn env_of<'a>(pairs: impl IntoIterator<Item = (&'a str, Rational)>) -> Env {
    pairs.into_iter().map(|(k, v)| (k.to_string(), v)).collect()
}
