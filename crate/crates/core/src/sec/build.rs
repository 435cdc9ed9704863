//! Translation of assignment right-hand sides into diagrams.
//!
//! Ring operations map to exact diagram arithmetic. Operations without a
//! polynomial form become uninterpreted tokens: one fresh variable per
//! distinct `(operator, canonical arguments)` tuple, so equal applications on
//! both sides meet in the same token. Bit selects of primary inputs use the
//! exact bit-slice decomposition of the input.

use std::collections::{BTreeMap, HashMap};

use num_bigint::BigInt;
use num_traits::{One, ToPrimitive, Zero};

use super::InputOrder;
use crate::dfl::ast::{BinOp, Expr, UnOp};
use crate::dfl::eval::{apply_binary, apply_bit, is_bool, MAX_SHIFT};
use crate::dfl::AssignmentList;
use crate::error::{Error, Result};
use crate::hed::{HedRef, Manager, VarId, VarRange};

/// Name resolution for one design.
pub(crate) struct Scope<'a> {
    pub value: &'a dyn Fn(&str) -> Option<HedRef>,
    pub boolean: &'a dyn Fn(&str) -> bool,
    pub input: &'a dyn Fn(&str) -> Option<VarId>,
}

/// Builds `e`. `notes` collects descriptions of constructs that had to be
/// left uninterpreted although a value-level form was attempted.
pub(crate) fn build(m: &mut Manager, e: &Expr, s: &Scope<'_>, notes: &mut Vec<String>) -> Result<HedRef> {
    Ok(match e {
        Expr::Int(v) => m.mk_const(v.clone()),
        Expr::Var(n) => (s.value)(n).ok_or_else(|| Error::Unresolved(n.clone()))?,
        Expr::Index(a, _) => return Err(Error::Unresolved(format!("{a}[...]"))),
        Expr::Unary(UnOp::Neg, a) => {
            let a = build(m, a, s, notes)?;
            m.neg(&a)?
        }
        Expr::Unary(UnOp::Not, a) => {
            let a = build(m, a, s, notes)?;
            let one = m.mk_const(1);
            m.sub(&one, &a)?
        }
        Expr::Bit(a, i) => bit(m, a, i, s, notes)?,
        Expr::Mux(g, a, b) => {
            let gv = build(m, g, s, notes)?;
            let av = build(m, a, s, notes)?;
            let bv = build(m, b, s, notes)?;
            if let Some(c) = gv.as_const() {
                if c.is_zero() {
                    bv
                } else {
                    av
                }
            } else if av == bv {
                av
            } else {
                let sel = if is_bool(g, s.boolean) {
                    gv
                } else {
                    let t = m.opaque("nz", &[gv], 0, VarRange::Boolean)?;
                    m.mk_var(t)?
                };
                m.ite(&sel, &av, &bv)?
            }
        }
        Expr::Binary(op, a, b) => {
            let av = build(m, a, s, notes)?;
            let bv = build(m, b, s, notes)?;
            if let (Some(x), Some(y)) = (av.as_const(), bv.as_const()) {
                return Ok(m.mk_const(apply_binary(*op, x, y)?));
            }
            binary(m, *op, (a, av), (b, bv), s, notes)?
        }
    })
}

fn shift_amount(v: &BigInt) -> Result<u32> {
    match v.to_u32() {
        Some(k) if k <= MAX_SHIFT => Ok(k),
        _ => Err(Error::Eval(format!("shift amount {v} is outside 0..={MAX_SHIFT}"))),
    }
}

fn token(
    m: &mut Manager,
    op: &str,
    mut args: Vec<HedRef>,
    imm: u64,
    range: VarRange,
    commutative: bool,
) -> Result<HedRef> {
    if commutative {
        args.sort_by(|x, y| (x.node(), x.weight()).cmp(&(y.node(), y.weight())));
    }
    let t = m.opaque(op, &args, imm, range)?;
    m.mk_var(t)
}

fn binary(
    m: &mut Manager,
    op: BinOp,
    (a, av): (&Expr, HedRef),
    (b, bv): (&Expr, HedRef),
    s: &Scope<'_>,
    notes: &mut Vec<String>,
) -> Result<HedRef> {
    let bools = || is_bool(a, s.boolean) && is_bool(b, s.boolean);
    Ok(match op {
        BinOp::Add => m.add(&av, &bv)?,
        BinOp::Sub => m.sub(&av, &bv)?,
        BinOp::Mul => m.mul(&av, &bv)?,
        BinOp::Shl => match bv.as_const() {
            Some(k) => m.shl(&av, shift_amount(k)?)?,
            None => token(m, "<<", vec![av, bv], 0, VarRange::Full, false)?,
        },
        BinOp::Shr => match bv.as_const() {
            Some(k) => {
                let k = shift_amount(k)?;
                shr(m, &av, k, notes)?
            }
            None => token(m, ">>", vec![av, bv], 0, VarRange::Full, false)?,
        },
        BinOp::And if bools() => m.b_and(&av, &bv)?,
        BinOp::Or if bools() => m.b_or(&av, &bv)?,
        BinOp::Xor if bools() => m.b_xor(&av, &bv)?,
        BinOp::And | BinOp::Or | BinOp::Xor => token(m, op.symbol(), vec![av, bv], 0, VarRange::Full, true)?,
        BinOp::Eq | BinOp::Ne if av == bv => m.mk_const(i32::from(op == BinOp::Eq)),
        BinOp::Eq | BinOp::Ne => {
            // Canonical difference, so `a == b` and `b == a` share a token.
            let d = m.sub(&av, &bv)?;
            if d.as_const().is_some() {
                // Differ by a nonzero constant.
                return Ok(m.mk_const(i32::from(op == BinOp::Ne)));
            }
            let n = m.neg(&d)?;
            let key = if (n.node(), n.weight()) < (d.node(), d.weight()) { n } else { d };
            let zero = m.zero();
            let eq = token(m, "==", vec![key, zero], 0, VarRange::Boolean, false)?;
            if op == BinOp::Eq {
                eq
            } else {
                let one = m.mk_const(1);
                m.sub(&one, &eq)?
            }
        }
        BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge => {
            // Normalize to `<` / `<=` on the difference against zero.
            let (x, y, strict) = match op {
                BinOp::Lt => (av, bv, true),
                BinOp::Le => (av, bv, false),
                BinOp::Gt => (bv, av, true),
                _ => (bv, av, false),
            };
            let d = m.sub(&x, &y)?;
            if let Some(c) = d.as_const() {
                let holds =
                    if strict { c.sign() == num_bigint::Sign::Minus } else { c.sign() != num_bigint::Sign::Plus };
                return Ok(m.mk_const(i32::from(holds)));
            }
            let zero = m.zero();
            token(m, if strict { "<" } else { "<=" }, vec![d, zero], 0, VarRange::Boolean, false)?
        }
    })
}

fn shr(m: &mut Manager, a: &HedRef, k: u32, notes: &mut Vec<String>) -> Result<HedRef> {
    if k == 0 {
        return Ok(a.clone());
    }
    let d = m.div_pow2(a, k)?;
    if !d.inexact {
        return Ok(d.value);
    }
    // A lone variable has an exact token for its shifted value.
    if a.weight().is_one() {
        if let Some(v) = m.top(a) {
            if m.mk_var(v)? == *a {
                let t = m.shift_token(v, k);
                return m.mk_var(t);
            }
        }
    }
    notes.push(format!("`({}) >> {k}` is not divisible by 2^{k}; kept uninterpreted", m.format(a)?));
    token(m, ">>", vec![a.clone()], u64::from(k), VarRange::Full, false)
}

fn bit(m: &mut Manager, a: &Expr, i: &Expr, s: &Scope<'_>, notes: &mut Vec<String>) -> Result<HedRef> {
    let iv = build(m, i, s, notes)?;
    let Some(k) = iv.as_const().cloned() else {
        let av = build(m, a, s, notes)?;
        return token(m, "bit", vec![av, iv], 0, VarRange::Boolean, false);
    };
    let k = shift_amount(&k)?;
    if let Expr::Var(n) = a {
        if let Some(v) = (s.input)(n) {
            return input_bit(m, v, k);
        }
    }
    let av = build(m, a, s, notes)?;
    if let Some(c) = av.as_const() {
        return Ok(m.mk_const(apply_bit(c, &BigInt::from(k))?));
    }
    token(m, "bit", vec![av], u64::from(k), VarRange::Boolean, false)
}

fn input_bit(m: &mut Manager, v: VarId, k: u32) -> Result<HedRef> {
    match m.var_info(v).range {
        VarRange::Boolean if k == 0 => m.mk_var(v),
        VarRange::Boolean => Ok(m.zero()),
        VarRange::Bits(w) if k >= w => Ok(m.zero()),
        _ => {
            let b = m.bit_var(v, k)?;
            m.mk_var(b)
        }
    }
}

/// Bit positions selected from each input by constant-index bit selects.
pub(crate) fn selected_bits(list: &AssignmentList, out: &mut BTreeMap<String, Vec<u32>>) {
    fn walk(e: &Expr, inputs: &dyn Fn(&str) -> bool, out: &mut BTreeMap<String, Vec<u32>>) {
        match e {
            Expr::Bit(a, i) => {
                if let (Expr::Var(n), Some(k)) = (a.as_ref(), i.as_int().and_then(|k| k.to_u32())) {
                    if inputs(n) {
                        let bits = out.entry(n.clone()).or_default();
                        if !bits.contains(&k) {
                            bits.push(k);
                        }
                    }
                }
                walk(a, inputs, out);
                walk(i, inputs, out);
            }
            Expr::Unary(_, a) => walk(a, inputs, out),
            Expr::Binary(_, a, b) => {
                walk(a, inputs, out);
                walk(b, inputs, out);
            }
            Expr::Mux(g, a, b) => {
                walk(g, inputs, out);
                walk(a, inputs, out);
                walk(b, inputs, out);
            }
            Expr::Int(_) | Expr::Var(_) | Expr::Index(..) => {}
        }
    }
    let is_input = |n: &str| list.inputs.iter().any(|i| i.name == n);
    for st in &list.stmts {
        walk(&st.rhs, &is_input, out);
    }
}

/// Whether `e` only uses operations whose results modulo `2^w` depend only
/// on their operands modulo `2^w`.
pub(crate) fn ring_only(e: &Expr, boolean: &dyn Fn(&str) -> bool, input: &dyn Fn(&str) -> bool) -> bool {
    match e {
        Expr::Int(_) | Expr::Var(_) => true,
        Expr::Index(..) | Expr::Mux(..) => false,
        Expr::Unary(_, a) => ring_only(a, boolean, input),
        Expr::Bit(a, i) => matches!(a.as_ref(), Expr::Var(n) if input(n)) && i.as_int().is_some(),
        Expr::Binary(op, a, b) => {
            let ok = match op {
                BinOp::Add | BinOp::Sub | BinOp::Mul => true,
                BinOp::Shl => b.as_int().is_some(),
                BinOp::And | BinOp::Or | BinOp::Xor => is_bool(a, boolean) && is_bool(b, boolean),
                _ => false,
            };
            ok && ring_only(a, boolean, input) && ring_only(b, boolean, input)
        }
    }
}

/// Registers inputs with their ranges and returns each input's value:
/// the input variable, or its bit-slice composite when bits of it are
/// selected anywhere. Variables are ordered by first read.
pub(crate) fn register_inputs(m: &mut Manager, lists: &[&AssignmentList]) -> Result<HashMap<String, (VarId, HedRef)>> {
    register_inputs_ordered(m, lists, InputOrder::FirstAppearance)
}

/// [`register_inputs`] under an explicit variable order policy.
pub(crate) fn register_inputs_ordered(
    m: &mut Manager,
    lists: &[&AssignmentList],
    policy: InputOrder,
) -> Result<HashMap<String, (VarId, HedRef)>> {
    let mut order: Vec<String> = Vec::new();
    let mut ranges: HashMap<String, VarRange> = HashMap::new();
    for list in lists {
        let declared: HashMap<&str, Option<u32>> = list.inputs.iter().map(|i| (i.name.as_str(), i.width)).collect();
        let mut seen = Vec::new();
        for st in list.stmts.iter().filter(|_| policy == InputOrder::FirstAppearance) {
            for r in st.rhs.reads() {
                if declared.contains_key(r) && !seen.contains(&r) {
                    seen.push(r);
                }
            }
        }
        seen.extend(list.inputs.iter().map(|i| i.name.as_str()).filter(|n| !seen.contains(n)).collect::<Vec<_>>());
        for n in seen {
            let range = match declared[n] {
                Some(1) => VarRange::Boolean,
                Some(w) => VarRange::Bits(w),
                None => VarRange::Full,
            };
            match ranges.get(n) {
                Some(r) if *r != range => {
                    return Err(Error::Invalid(format!("input `{n}` is declared with different widths")))
                }
                Some(_) => {}
                None => {
                    ranges.insert(n.to_string(), range);
                    order.push(n.to_string());
                }
            }
        }
    }
    let mut vars = HashMap::new();
    for n in &order {
        let v = m.input(n, ranges[n]);
        vars.insert(n.clone(), v);
    }
    let mut bits = BTreeMap::new();
    for list in lists {
        selected_bits(list, &mut bits);
    }
    for (n, ks) in &bits {
        for &k in ks {
            input_bit(m, vars[n], k)?;
        }
    }
    let mut out = HashMap::new();
    for n in order {
        let v = vars[&n];
        let value = m.composite(v)?;
        m.pin(&value);
        out.insert(n, (v, value));
    }
    Ok(out)
}

/// Builds every statement of `list` over the primary inputs, without cut
/// points. Used for confirmation and as an independent reference.
pub(crate) fn build_all(
    m: &mut Manager,
    list: &AssignmentList,
    inputs: &HashMap<String, (VarId, HedRef)>,
    notes: &mut Vec<String>,
) -> Result<HashMap<String, HedRef>> {
    let mut values: HashMap<String, HedRef> = HashMap::new();
    let bools = boolean_names(list);
    for st in &list.stmts {
        let v = {
            let lookup = |n: &str| values.get(n).cloned().or_else(|| inputs.get(n).map(|(_, r)| r.clone()));
            let boolean = |n: &str| bools.get(n).copied().unwrap_or(false);
            let input = |n: &str| inputs.get(n).map(|(v, _)| *v);
            let scope = Scope { value: &lookup, boolean: &boolean, input: &input };
            build(m, &st.rhs, &scope, notes)?
        };
        values.insert(st.lhs.clone(), v);
    }
    Ok(values)
}

pub(crate) fn boolean_names(list: &AssignmentList) -> HashMap<String, bool> {
    let mut out: HashMap<String, bool> = list.inputs.iter().map(|i| (i.name.clone(), i.width == Some(1))).collect();
    out.extend(list.stmts.iter().map(|s| (s.lhs.clone(), s.boolean)));
    out
}

/// Value of a design output: a statement result or an input symbol.
pub(crate) fn output_value(
    ssa: &str,
    values: &HashMap<String, HedRef>,
    inputs: &HashMap<String, (VarId, HedRef)>,
) -> Option<HedRef> {
    values.get(ssa).cloned().or_else(|| inputs.get(ssa).map(|(_, r)| r.clone()))
}
