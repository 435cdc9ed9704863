//! Seeded single-point mutations of assignment lists, used to produce
//! negative test cases.

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::dfl::eval::is_bool;
use crate::dfl::{AssignmentList, BinOp, Expr};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "camelCase")]
pub enum MutationKind {
    /// `+` and `-` exchanged, or `*` replaced by `+`.
    OperatorSwap,
    /// A literal moved by one.
    ConstantPerturbation,
    /// Operands of a non-commutative operator exchanged.
    OperandSwap,
    /// A statement reduced to its first operand.
    Bypass,
}

/// What a mutation changed.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct MutationDescriptor {
    pub kind: MutationKind,
    /// Index of the mutated statement.
    pub statement: usize,
    pub lhs: String,
    pub before: String,
    pub after: String,
}

struct Site {
    stmt: usize,
    path: Vec<usize>,
    kind: MutationKind,
}

fn children(e: &Expr) -> Vec<&Expr> {
    match e {
        Expr::Int(_) | Expr::Var(_) => vec![],
        Expr::Index(_, i) => vec![i],
        Expr::Unary(_, a) => vec![a],
        Expr::Binary(_, a, b) | Expr::Bit(a, b) => vec![a, b],
        Expr::Mux(g, a, b) => vec![g, a, b],
    }
}

fn child_mut(e: &mut Expr, k: usize) -> &mut Expr {
    match (e, k) {
        (Expr::Index(_, i), 0) | (Expr::Unary(_, i), 0) => i,
        (Expr::Binary(_, a, _) | Expr::Bit(a, _) | Expr::Mux(_, a, _), 0) => a,
        (Expr::Binary(_, _, b) | Expr::Bit(_, b) | Expr::Mux(_, _, b), 1) => b,
        _ => unreachable!("mutation paths address existing children"),
    }
}

fn at_mut<'a>(mut e: &'a mut Expr, path: &[usize]) -> &'a mut Expr {
    for &k in path {
        e = child_mut(e, k);
    }
    e
}

fn sites(stmt: usize, e: &Expr, path: &mut Vec<usize>, out: &mut Vec<Site>) {
    let mut add = |kind| out.push(Site { stmt, path: path.clone(), kind });
    match e {
        Expr::Int(_) => add(MutationKind::ConstantPerturbation),
        Expr::Binary(op, a, b) => {
            if matches!(op, BinOp::Add | BinOp::Sub | BinOp::Mul) {
                add(MutationKind::OperatorSwap);
            }
            if matches!(op, BinOp::Sub | BinOp::Shl | BinOp::Shr) && a != b {
                add(MutationKind::OperandSwap);
            }
            if path.is_empty() {
                add(MutationKind::Bypass);
            }
        }
        _ => {}
    }
    for (k, c) in children(e).into_iter().enumerate() {
        // Mux children are ordered guard, then, else; `child_mut` addresses
        // them as 0 = then, 1 = else, so guards are not mutated.
        if matches!(e, Expr::Mux(..)) {
            if k == 0 {
                continue;
            }
            path.push(k - 1);
        } else {
            path.push(k);
        }
        sites(stmt, c, path, out);
        path.pop();
    }
}

/// Applies one mutation chosen uniformly (under `seed`) among all mutation
/// sites of `list`.
pub fn mutate(list: &AssignmentList, seed: u64) -> Result<(AssignmentList, MutationDescriptor)> {
    let mut all = Vec::new();
    for (k, s) in list.stmts.iter().enumerate() {
        sites(k, &s.rhs, &mut Vec::new(), &mut all);
    }
    if all.is_empty() {
        return Err(Error::Invalid("nothing to mutate".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let site = &all[rng.gen_range(0..all.len())];
    let mut out = list.clone();
    let st = &mut out.stmts[site.stmt];
    let before = st.rhs.to_string();
    let node = at_mut(&mut st.rhs, &site.path);
    match site.kind {
        MutationKind::ConstantPerturbation => {
            if let Expr::Int(v) = node {
                *v += if rng.gen_bool(0.5) { 1 } else { -1 };
            }
        }
        MutationKind::OperatorSwap => {
            if let Expr::Binary(op, ..) = node {
                *op = if *op == BinOp::Add { BinOp::Sub } else { BinOp::Add };
            }
        }
        MutationKind::OperandSwap => {
            if let Expr::Binary(_, a, b) = node {
                std::mem::swap(a, b);
            }
        }
        MutationKind::Bypass => {
            if let Expr::Binary(_, a, _) = &*node {
                *node = (**a).clone();
            }
        }
    }
    let descriptor = MutationDescriptor {
        kind: site.kind,
        statement: site.stmt,
        lhs: st.lhs.clone(),
        before,
        after: st.rhs.to_string(),
    };
    recompute_flags(&mut out);
    Ok((out, descriptor))
}

fn recompute_flags(list: &mut AssignmentList) {
    let mut bools: HashMap<String, bool> = list.inputs.iter().map(|i| (i.name.clone(), i.width == Some(1))).collect();
    for s in &mut list.stmts {
        s.boolean = is_bool(&s.rhs, &|n| bools.get(n).copied().unwrap_or(false));
        bools.insert(s.lhs.clone(), s.boolean);
    }
}
