//! Symbolic differentiation with respect to `z`.

use super::ast::{Bounds, Expr};

fn is_zero(e: &Expr) -> bool {
    matches!(e, Expr::Num(x) if *x == 0.0)
}

fn is_one(e: &Expr) -> bool {
    matches!(e, Expr::Num(x) if *x == 1.0)
}

// Light constant folding so that derivative trees stay small.
fn add(a: Expr, b: Expr) -> Expr {
    if is_zero(&a) {
        b
    } else if is_zero(&b) {
        a
    } else {
        Expr::add(a, b)
    }
}

fn sub(a: Expr, b: Expr) -> Expr {
    if is_zero(&b) {
        a
    } else if is_zero(&a) {
        Expr::neg(b)
    } else {
        Expr::sub(a, b)
    }
}

fn mul(a: Expr, b: Expr) -> Expr {
    if is_zero(&a) || is_zero(&b) {
        Expr::Num(0.0)
    } else if is_one(&a) {
        b
    } else if is_one(&b) {
        a
    } else {
        Expr::mul(a, b)
    }
}

fn div(a: Expr, b: Expr) -> Expr {
    if is_zero(&a) {
        Expr::Num(0.0)
    } else if is_one(&b) {
        a
    } else {
        Expr::div(a, b)
    }
}

fn exponent_minus_one(e: &Expr) -> Expr {
    match e {
        Expr::Num(x) if *x >= 1.0 => Expr::Num(x - 1.0),
        Expr::Num(x) => Expr::neg(Expr::Num(1.0 - x)),
        Expr::Neg(inner) => match inner.as_ref() {
            Expr::Num(x) => Expr::neg(Expr::Num(x + 1.0)),
            _ => Expr::sub(e.clone(), Expr::Num(1.0)),
        },
        _ => Expr::sub(e.clone(), Expr::Num(1.0)),
    }
}

/// First derivative `d/dz`.
pub fn derivative(e: &Expr) -> Expr {
    match e {
        Expr::Num(_) | Expr::Index(_) => Expr::Num(0.0),
        Expr::Z => Expr::Num(1.0),
        Expr::Neg(a) => {
            let d = derivative(a);
            if is_zero(&d) { d } else { Expr::neg(d) }
        }
        Expr::Add(a, b) => add(derivative(a), derivative(b)),
        Expr::Sub(a, b) => sub(derivative(a), derivative(b)),
        Expr::Mul(a, b) => add(mul(derivative(a), (**b).clone()), mul((**a).clone(), derivative(b))),
        Expr::Div(a, b) => {
            let db = derivative(b);
            if is_zero(&db) {
                return div(derivative(a), (**b).clone());
            }
            let num = sub(mul(derivative(a), (**b).clone()), mul((**a).clone(), db));
            div(num, Expr::pow((**b).clone(), Expr::Num(2.0)))
        }
        Expr::Pow(a, k) => {
            let da = derivative(a);
            if is_zero(&da) {
                return Expr::Num(0.0);
            }
            let lowered = match exponent_minus_one(k) {
                Expr::Num(x) if x == 0.0 => Expr::Num(1.0),
                Expr::Num(x) if x == 1.0 => (**a).clone(),
                m => Expr::pow((**a).clone(), m),
            };
            mul(mul((**k).clone(), lowered), da)
        }
        Expr::Exp(a) => mul(e.clone(), derivative(a)),
        Expr::Log(a) => div(derivative(a), (**a).clone()),
        Expr::D(a) => {
            let d1 = derivative(a);
            add(d1.clone(), mul(Expr::Z, derivative(&d1)))
        }
        Expr::Prod(b) => {
            // logarithmic derivative, summed factorwise
            let inner = div(derivative(&b.body), (*b.body).clone());
            if is_zero(&inner) {
                return Expr::Num(0.0);
            }
            mul(e.clone(), Expr::Sum(Bounds { var: b.var.clone(), lo: b.lo, hi: b.hi, body: Box::new(inner) }))
        }
        Expr::Sum(b) => {
            let inner = derivative(&b.body);
            if is_zero(&inner) {
                return Expr::Num(0.0);
            }
            Expr::Sum(Bounds { var: b.var.clone(), lo: b.lo, hi: b.hi, body: Box::new(inner) })
        }
        Expr::Builtin(b) => Expr::Diff(b.clone(), 1),
        Expr::Diff(b, n) => Expr::Diff(b.clone(), n + 1),
    }
}

/// Derivative of order 1 or 2 (higher orders iterate).
pub fn differentiate(e: &Expr, order: u32) -> Expr {
    let mut out = e.clone();
    for _ in 0..order {
        out = derivative(&out);
    }
    out
}
