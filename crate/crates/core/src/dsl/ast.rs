//! Expression tree for the generating-function language.

use std::fmt;

use crate::gf::ZeroRule;

/// Built-in generating functions callable from expressions.
#[derive(Debug, Clone, PartialEq)]
pub enum Builtin {
    Partition,
    Bell,
    Geom,
    NegBin(f64),
    Canon(ZeroRule),
    HadamardGap,
    GapSeries(f64),
    Polylog(f64, f64),
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    /// Nonnegative numeric literal.
    Num(f64),
    Z,
    /// Bound index variable of an enclosing `prod`/`sum`.
    Index(String),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    /// Power with an exponent free of `z`.
    Pow(Box<Expr>, Box<Expr>),
    Exp(Box<Expr>),
    Log(Box<Expr>),
    Prod(Bounds),
    Sum(Bounds),
    Builtin(Builtin),
    /// `z f'(z)`
    D(Box<Expr>),
    /// `d^n/dz^n` of a built-in (produced by differentiation).
    Diff(Builtin, u32),
}

/// Index range and body of a product or sum.
#[derive(Debug, Clone, PartialEq)]
pub struct Bounds {
    pub var: String,
    pub lo: i64,
    /// `None` means infinity.
    pub hi: Option<i64>,
    pub body: Box<Expr>,
}

impl Expr {
    pub fn num(x: f64) -> Expr {
        Expr::Num(x)
    }
    pub fn add(a: Expr, b: Expr) -> Expr {
        Expr::Add(Box::new(a), Box::new(b))
    }
    pub fn sub(a: Expr, b: Expr) -> Expr {
        Expr::Sub(Box::new(a), Box::new(b))
    }
    pub fn mul(a: Expr, b: Expr) -> Expr {
        Expr::Mul(Box::new(a), Box::new(b))
    }
    pub fn div(a: Expr, b: Expr) -> Expr {
        Expr::Div(Box::new(a), Box::new(b))
    }
    pub fn pow(a: Expr, b: Expr) -> Expr {
        Expr::Pow(Box::new(a), Box::new(b))
    }
    pub fn exp(a: Expr) -> Expr {
        Expr::Exp(Box::new(a))
    }
    pub fn log(a: Expr) -> Expr {
        Expr::Log(Box::new(a))
    }
    pub fn neg(a: Expr) -> Expr {
        Expr::Neg(Box::new(a))
    }

    /// Whether `z` occurs anywhere in the tree (built-ins count).
    pub fn has_z(&self) -> bool {
        match self {
            Expr::Num(_) | Expr::Index(_) => false,
            Expr::Z | Expr::Builtin(_) | Expr::Diff(..) => true,
            Expr::Neg(a) | Expr::Exp(a) | Expr::Log(a) | Expr::D(a) => a.has_z(),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) | Expr::Pow(a, b) => {
                a.has_z() || b.has_z()
            }
            Expr::Prod(b) | Expr::Sum(b) => b.body.has_z(),
        }
    }

    /// Number of nodes.
    pub fn size(&self) -> usize {
        1 + match self {
            Expr::Num(_) | Expr::Index(_) | Expr::Z | Expr::Builtin(_) | Expr::Diff(..) => 0,
            Expr::Neg(a) | Expr::Exp(a) | Expr::Log(a) | Expr::D(a) => a.size(),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) | Expr::Pow(a, b) => {
                a.size() + b.size()
            }
            Expr::Prod(b) | Expr::Sum(b) => b.body.size(),
        }
    }

    fn prec(&self) -> u8 {
        match self {
            Expr::Add(..) | Expr::Sub(..) => 1,
            Expr::Mul(..) | Expr::Div(..) => 2,
            Expr::Neg(_) => 3,
            Expr::Pow(..) => 4,
            _ => 5,
        }
    }
}

/// Shortest decimal that reads back to the same `f64`.
pub fn fmt_num(x: f64) -> String {
    format!("{x}")
}

fn wrap(e: &Expr, min: u8) -> String {
    if e.prec() < min { format!("({e})") } else { e.to_string() }
}

impl fmt::Display for Builtin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Builtin::Partition => write!(f, "partition()"),
            Builtin::Bell => write!(f, "bell()"),
            Builtin::Geom => write!(f, "geom()"),
            Builtin::NegBin(a) => write!(f, "negbin({})", fmt_num(*a)),
            Builtin::HadamardGap => write!(f, "hadamard_gap()"),
            Builtin::GapSeries(r) => write!(f, "gap_series({})", fmt_num(*r)),
            Builtin::Polylog(s, e) => write!(f, "polylog({},{})", fmt_num(*s), fmt_num(*e)),
            Builtin::Canon(rule) => match rule {
                ZeroRule::List(b) => {
                    let items: Vec<String> = b.iter().map(|x| fmt_num(*x)).collect();
                    write!(f, "canon(list,{})", items.join(","))
                }
                ZeroRule::Geometric { c, r } => write!(f, "canon(geometric,{},{})", fmt_num(*c), fmt_num(*r)),
                ZeroRule::Power { a, c } => write!(f, "canon(power,{},{})", fmt_num(*a), fmt_num(*c)),
                ZeroRule::DoubleExp => write!(f, "canon(doubleexp)"),
                ZeroRule::Factorial => write!(f, "canon(factorial)"),
                ZeroRule::ExpSquare => write!(f, "canon(expsquare)"),
            },
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Num(x) => write!(f, "{}", fmt_num(*x)),
            Expr::Z => write!(f, "z"),
            Expr::Index(v) => write!(f, "{v}"),
            Expr::Neg(a) => write!(f, "-{}", wrap(a, 3)),
            Expr::Add(a, b) => write!(f, "{}+{}", wrap(a, 1), wrap(b, 2)),
            Expr::Sub(a, b) => write!(f, "{}-{}", wrap(a, 1), wrap(b, 2)),
            Expr::Mul(a, b) => write!(f, "{}*{}", wrap(a, 2), wrap(b, 3)),
            Expr::Div(a, b) => write!(f, "{}/{}", wrap(a, 2), wrap(b, 3)),
            Expr::Pow(a, e) => {
                let exp = match e.as_ref() {
                    Expr::Num(x) => fmt_num(*x),
                    Expr::Neg(inner) if matches!(inner.as_ref(), Expr::Num(_)) => format!("-{inner}"),
                    Expr::Index(v) => v.clone(),
                    other => format!("({other})"),
                };
                write!(f, "{}^{}", wrap(a, 5), exp)
            }
            Expr::Exp(a) => write!(f, "exp({a})"),
            Expr::Log(a) => write!(f, "log({a})"),
            Expr::D(a) => write!(f, "D({a})"),
            Expr::Prod(b) => write!(f, "prod({},{},{},{})", b.var, b.lo, hi(b.hi), b.body),
            Expr::Sum(b) => write!(f, "sum({},{},{},{})", b.var, b.lo, hi(b.hi), b.body),
            Expr::Builtin(b) => write!(f, "{b}"),
            Expr::Diff(b, n) => write!(f, "diff({b},{n})"),
        }
    }
}

fn hi(h: Option<i64>) -> String {
    h.map_or("inf".to_string(), |v| v.to_string())
}
