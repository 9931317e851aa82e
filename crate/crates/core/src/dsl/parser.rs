//! Recursive-descent parser with line/column diagnostics.

use super::ast::{Bounds, Builtin, Expr};
use super::ParseError;
use crate::gf::ZeroRule;

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Sym(char),
    End,
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    line: usize,
    column: usize,
}

fn tokenize(src: &str) -> Result<Vec<Token>, ParseError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    while i < chars.len() {
        let c = chars[i];
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
        let (l0, c0) = (line, col);
        if c.is_ascii_digit() || c == '.' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                i += 1;
            }
            let text: String = chars[start..i].iter().collect();
            let v: f64 = text.parse().map_err(|_| ParseError {
                message: format!("malformed number '{text}'"),
                line: l0,
                column: c0,
            })?;
            col += i - start;
            out.push(Token { tok: Tok::Num(v), line: l0, column: c0 });
        } else if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            col += i - start;
            out.push(Token { tok: Tok::Ident(chars[start..i].iter().collect()), line: l0, column: c0 });
        } else if "+-*/^(),".contains(c) {
            i += 1;
            col += 1;
            out.push(Token { tok: Tok::Sym(c), line: l0, column: c0 });
        } else {
            return Err(ParseError { message: format!("unexpected character '{c}'"), line: l0, column: c0 });
        }
    }
    out.push(Token { tok: Tok::End, line, column: col });
    Ok(out)
}

struct Parser {
    toks: Vec<Token>,
    pos: usize,
    scope: Vec<String>,
}

const RESERVED: &[&str] = &[
    "z", "exp", "log", "prod", "sum", "partition", "bell", "geom", "canon", "D", "negbin", "hadamard_gap",
    "gap_series", "polylog", "diff", "inf",
];

/// Parses an expression in the generating-function language.
pub fn parse(src: &str) -> Result<Expr, ParseError> {
    let mut p = Parser { toks: tokenize(src)?, pos: 0, scope: Vec::new() };
    let e = p.expr()?;
    let t = p.peek().clone();
    if t.tok != Tok::End {
        return Err(p.err_at(&t, "unexpected trailing input"));
    }
    Ok(e)
}

impl Parser {
    fn peek(&self) -> &Token {
        &self.toks[self.pos]
    }

    fn next(&mut self) -> Token {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn err_at(&self, t: &Token, msg: &str) -> ParseError {
        let found = match &t.tok {
            Tok::Num(v) => format!("number {v}"),
            Tok::Ident(s) => format!("'{s}'"),
            Tok::Sym(c) => format!("'{c}'"),
            Tok::End => "end of input".to_string(),
        };
        ParseError { message: format!("{msg}, found {found}"), line: t.line, column: t.column }
    }

    fn expect(&mut self, c: char) -> Result<(), ParseError> {
        let t = self.next();
        if t.tok == Tok::Sym(c) {
            Ok(())
        } else {
            Err(self.err_at(&t, &format!("expected '{c}'")))
        }
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek().tok == Tok::Sym(c) {
            self.next();
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.term()?;
        loop {
            if self.eat('+') {
                lhs = Expr::add(lhs, self.term()?);
            } else if self.eat('-') {
                lhs = Expr::sub(lhs, self.term()?);
            } else {
                return Ok(lhs);
            }
        }
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            if self.eat('*') {
                lhs = Expr::mul(lhs, self.unary()?);
            } else if self.eat('/') {
                lhs = Expr::div(lhs, self.unary()?);
            } else {
                return Ok(lhs);
            }
        }
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        if self.eat('-') {
            Ok(Expr::neg(self.unary()?))
        } else {
            self.factor()
        }
    }

    fn factor(&mut self) -> Result<Expr, ParseError> {
        let base = self.atom()?;
        if !self.eat('^') {
            return Ok(base);
        }
        let t = self.peek().clone();
        let exponent = match &t.tok {
            Tok::Sym('-') => {
                self.next();
                let n = self.next();
                match n.tok {
                    Tok::Num(v) => Expr::neg(Expr::Num(v)),
                    _ => return Err(self.err_at(&n, "expected number after '^-'")),
                }
            }
            Tok::Num(v) => {
                self.next();
                Expr::Num(*v)
            }
            Tok::Ident(name) if self.scope.contains(name) => {
                self.next();
                Expr::Index(name.clone())
            }
            Tok::Sym('(') => {
                self.next();
                let e = self.expr()?;
                self.expect(')')?;
                e
            }
            _ => return Err(self.err_at(&t, "expected exponent")),
        };
        if exponent.has_z() {
            return Err(self.err_at(&t, "exponent must not depend on z"));
        }
        Ok(Expr::pow(base, exponent))
    }

    fn atom(&mut self) -> Result<Expr, ParseError> {
        let t = self.next();
        match &t.tok {
            Tok::Num(v) => Ok(Expr::Num(*v)),
            Tok::Sym('(') => {
                let e = self.expr()?;
                self.expect(')')?;
                Ok(e)
            }
            Tok::Ident(name) => {
                if self.scope.contains(name) {
                    return Ok(Expr::Index(name.clone()));
                }
                if name == "z" {
                    return Ok(Expr::Z);
                }
                self.call(name.clone(), &t)
            }
            _ => Err(self.err_at(&t, "expected number, 'z', '(' or function call")),
        }
    }

    fn number(&mut self) -> Result<f64, ParseError> {
        let neg = self.eat('-');
        let t = self.next();
        match t.tok {
            Tok::Num(v) => Ok(if neg { -v } else { v }),
            _ => Err(self.err_at(&t, "expected number")),
        }
    }

    fn integer(&mut self, what: &str) -> Result<i64, ParseError> {
        let t = self.peek().clone();
        let v = self.number()?;
        if v.fract() != 0.0 || v.abs() > 1e15 {
            return Err(ParseError {
                message: format!("malformed bounds: {what} must be an integer"),
                line: t.line,
                column: t.column,
            });
        }
        Ok(v as i64)
    }

    fn call(&mut self, name: String, at: &Token) -> Result<Expr, ParseError> {
        let known = RESERVED.contains(&name.as_str()) && name != "inf";
        if !known {
            return Err(ParseError { message: format!("unknown identifier '{name}'"), line: at.line, column: at.column });
        }
        self.expect('(')?;
        let e = match name.as_str() {
            "exp" => Expr::exp(self.expr()?),
            "log" => Expr::log(self.expr()?),
            "D" => Expr::D(Box::new(self.expr()?)),
            "prod" | "sum" => {
                let b = self.bounds(at)?;
                if name == "prod" { Expr::Prod(b) } else { Expr::Sum(b) }
            }
            "partition" => Expr::Builtin(Builtin::Partition),
            "bell" => Expr::Builtin(Builtin::Bell),
            "geom" => Expr::Builtin(Builtin::Geom),
            "hadamard_gap" => Expr::Builtin(Builtin::HadamardGap),
            "negbin" => Expr::Builtin(Builtin::NegBin(self.positive("negbin parameter")?)),
            "gap_series" => Expr::Builtin(Builtin::GapSeries(self.positive("gap_series order")?)),
            "polylog" => {
                let s = self.number()?;
                self.expect(',')?;
                let eps = self.positive("polylog weight")?;
                Expr::Builtin(Builtin::Polylog(s, eps))
            }
            "canon" => Expr::Builtin(Builtin::Canon(self.canon_rule()?)),
            "diff" => {
                let t = self.next();
                let b = match &t.tok {
                    Tok::Ident(n) => match self.call(n.clone(), &t)? {
                        Expr::Builtin(b) => b,
                        _ => return Err(self.err_at(&t, "diff expects a built-in")),
                    },
                    _ => return Err(self.err_at(&t, "diff expects a built-in")),
                };
                self.expect(',')?;
                let n = self.integer("derivative order")?;
                if !(0..=16).contains(&n) {
                    return Err(self.err_at(self.peek(), "derivative order out of range"));
                }
                Expr::Diff(b, n as u32)
            }
            _ => unreachable!(),
        };
        self.expect(')')?;
        Ok(e)
    }

    fn positive(&mut self, what: &str) -> Result<f64, ParseError> {
        let t = self.peek().clone();
        let v = self.number()?;
        if !(v > 0.0 && v.is_finite()) {
            return Err(ParseError { message: format!("{what} must be positive"), line: t.line, column: t.column });
        }
        Ok(v)
    }

    fn bounds(&mut self, at: &Token) -> Result<Bounds, ParseError> {
        let t = self.next();
        let var = match &t.tok {
            Tok::Ident(v) if !RESERVED.contains(&v.as_str()) => v.clone(),
            _ => return Err(self.err_at(&t, "malformed bounds: expected index variable")),
        };
        self.expect(',')?;
        let lo = self.integer("lower bound")?;
        self.expect(',')?;
        let hi = if matches!(&self.peek().tok, Tok::Ident(s) if s == "inf") {
            self.next();
            None
        } else {
            Some(self.integer("upper bound")?)
        };
        if lo < 0 || hi.is_some_and(|h| h < lo) {
            return Err(ParseError {
                message: "malformed bounds: need 0 <= lower <= upper".into(),
                line: at.line,
                column: at.column,
            });
        }
        self.expect(',')?;
        self.scope.push(var.clone());
        let body = self.expr();
        self.scope.pop();
        Ok(Bounds { var, lo, hi, body: Box::new(body?) })
    }

    fn canon_rule(&mut self) -> Result<ZeroRule, ParseError> {
        let t = self.next();
        let name = match &t.tok {
            Tok::Ident(s) => s.clone(),
            _ => return Err(self.err_at(&t, "expected canonical rule name")),
        };
        let mut args = Vec::new();
        while self.eat(',') {
            args.push(self.number()?);
        }
        let bad = |msg: &str| ParseError { message: msg.to_string(), line: t.line, column: t.column };
        let rule = match (name.as_str(), args.as_slice()) {
            ("geometric", [c, r]) => ZeroRule::Geometric { c: *c, r: *r },
            ("power", [a]) => ZeroRule::Power { a: *a, c: 1.0 },
            ("power", [a, c]) => ZeroRule::Power { a: *a, c: *c },
            ("list", b) if !b.is_empty() => ZeroRule::List(b.to_vec()),
            ("doubleexp", []) => ZeroRule::DoubleExp,
            ("factorial", []) => ZeroRule::Factorial,
            ("expsquare", []) => ZeroRule::ExpSquare,
            ("geometric" | "power" | "list" | "doubleexp" | "factorial" | "expsquare", _) => {
                return Err(bad(&format!("wrong number of arguments for canon rule '{name}'")))
            }
            _ => return Err(bad(&format!("unknown canon rule '{name}'"))),
        };
        crate::gf::CanonicalProductSpec::new(rule.clone()).map_err(|e| bad(&e.to_string()))?;
        Ok(rule)
    }
}
