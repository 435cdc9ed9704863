//! Concrete semantics of expressions over unbounded integers.

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::ast::{BinOp, Expr, UnOp};
use crate::error::{Error, Result};

/// Largest shift amount accepted by `<<`, `>>` and bit selects.
pub const MAX_SHIFT: u32 = 1 << 16;

fn shift_amount(v: &BigInt) -> Result<usize> {
    match v.to_u32() {
        Some(k) if k <= MAX_SHIFT => Ok(k as usize),
        _ => Err(Error::Eval(format!("shift amount {v} is outside 0..={MAX_SHIFT}"))),
    }
}

fn truth(b: bool) -> BigInt {
    if b {
        BigInt::one()
    } else {
        BigInt::zero()
    }
}

pub fn apply_unary(op: UnOp, a: &BigInt) -> BigInt {
    match op {
        UnOp::Neg => -a,
        UnOp::Not => BigInt::one() - a,
    }
}

pub fn apply_binary(op: BinOp, a: &BigInt, b: &BigInt) -> Result<BigInt> {
    Ok(match op {
        BinOp::Add => a + b,
        BinOp::Sub => a - b,
        BinOp::Mul => a * b,
        BinOp::Shl => a << shift_amount(b)?,
        // Arithmetic shift: floor division by 2^b.
        BinOp::Shr => a >> shift_amount(b)?,
        BinOp::And => a & b,
        BinOp::Or => a | b,
        BinOp::Xor => a ^ b,
        BinOp::Eq => truth(a == b),
        BinOp::Ne => truth(a != b),
        BinOp::Lt => truth(a < b),
        BinOp::Le => truth(a <= b),
        BinOp::Gt => truth(a > b),
        BinOp::Ge => truth(a >= b),
    })
}

pub fn apply_bit(a: &BigInt, i: &BigInt) -> Result<BigInt> {
    Ok((a >> shift_amount(i)?) & BigInt::one())
}

/// Evaluates `e` with `lookup` supplying every name.
pub fn eval(e: &Expr, lookup: &dyn Fn(&str) -> Option<BigInt>) -> Result<BigInt> {
    match e {
        Expr::Int(v) => Ok(v.clone()),
        Expr::Var(n) => lookup(n).ok_or_else(|| Error::ReadBeforeWrite(n.clone())),
        Expr::Index(a, _) => Err(Error::Eval(format!("unresolved array access to `{a}`"))),
        Expr::Bit(a, i) => apply_bit(&eval(a, lookup)?, &eval(i, lookup)?),
        Expr::Unary(op, a) => Ok(apply_unary(*op, &eval(a, lookup)?)),
        Expr::Binary(op, a, b) => apply_binary(*op, &eval(a, lookup)?, &eval(b, lookup)?),
        Expr::Mux(g, a, b) => {
            if eval(g, lookup)?.is_zero() {
                eval(b, lookup)
            } else {
                eval(a, lookup)
            }
        }
    }
}

/// Partial evaluation: substitutes known names and folds constant
/// subexpressions. Unknown names are left in place.
pub fn fold(e: &Expr, lookup: &dyn Fn(&str) -> Option<BigInt>) -> Result<Expr> {
    Ok(match e {
        Expr::Int(_) => e.clone(),
        Expr::Var(n) => lookup(n).map_or_else(|| e.clone(), Expr::Int),
        Expr::Index(..) => e.clone(),
        Expr::Bit(a, i) => {
            let (a, i) = (fold(a, lookup)?, fold(i, lookup)?);
            match (a.as_int(), i.as_int()) {
                (Some(x), Some(k)) => Expr::Int(apply_bit(x, k)?),
                _ => Expr::Bit(Box::new(a), Box::new(i)),
            }
        }
        Expr::Unary(op, a) => match fold(a, lookup)? {
            Expr::Int(x) => Expr::Int(apply_unary(*op, &x)),
            a => Expr::Unary(*op, Box::new(a)),
        },
        Expr::Binary(op, a, b) => {
            let (a, b) = (fold(a, lookup)?, fold(b, lookup)?);
            match (a.as_int(), b.as_int()) {
                (Some(x), Some(y)) => Expr::Int(apply_binary(*op, x, y)?),
                _ => Expr::Binary(*op, Box::new(a), Box::new(b)),
            }
        }
        Expr::Mux(g, a, b) => {
            let g = fold(g, lookup)?;
            match g.as_int() {
                Some(v) if v.is_zero() => fold(b, lookup)?,
                Some(_) => fold(a, lookup)?,
                None => Expr::Mux(Box::new(g), Box::new(fold(a, lookup)?), Box::new(fold(b, lookup)?)),
            }
        }
    })
}

/// Conservative static test for 0/1-valued expressions; `is_bool_name`
/// answers for names.
pub fn is_bool(e: &Expr, is_bool_name: &dyn Fn(&str) -> bool) -> bool {
    match e {
        Expr::Int(v) => v.is_zero() || v.is_one(),
        Expr::Var(n) => is_bool_name(n),
        Expr::Index(..) => false,
        Expr::Bit(..) => true,
        Expr::Unary(UnOp::Not, a) => is_bool(a, is_bool_name),
        Expr::Unary(UnOp::Neg, _) => false,
        Expr::Binary(op, a, b) => {
            op.is_relational()
                || (matches!(op, BinOp::And | BinOp::Or | BinOp::Xor | BinOp::Mul)
                    && is_bool(a, is_bool_name)
                    && is_bool(b, is_bool_name))
        }
        Expr::Mux(_, a, b) => is_bool(a, is_bool_name) && is_bool(b, is_bool_name),
    }
}

/// Whether `v` is zero or one.
pub fn is_bit_value(v: &BigInt) -> bool {
    !v.is_negative() && v <= &BigInt::one()
}
