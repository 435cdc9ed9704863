//! Removal of compile-time control: constant propagation into uses,
//! deletion of assignments to constant-valued control variables, and
//! resolution of branches with constant guards.

use std::collections::HashMap;

use num_bigint::BigInt;
use num_traits::Zero;

use super::ast::Expr;
use super::eval::fold;
use super::unroll::Flat;
use crate::error::Result;

/// `keep(name)` marks names whose assignments must survive even when their
/// value is constant (declared outputs).
pub fn resolve_control(stmts: &[Flat], keep: &dyn Fn(&str) -> bool) -> Result<Vec<Flat>> {
    let mut env = HashMap::new();
    let mut out = Vec::new();
    block(stmts, keep, &mut env, false, &mut out)?;
    Ok(out)
}

fn block(
    stmts: &[Flat],
    keep: &dyn Fn(&str) -> bool,
    env: &mut HashMap<String, BigInt>,
    in_branch: bool,
    out: &mut Vec<Flat>,
) -> Result<()> {
    for s in stmts {
        match s {
            Flat::Assign { lhs, rhs, iter, pos } => {
                let rhs = fold(rhs, &|n| env.get(n).cloned())?;
                match rhs.as_int() {
                    Some(v) if !in_branch => {
                        env.insert(lhs.clone(), v.clone());
                        if keep(lhs) {
                            out.push(Flat::Assign { lhs: lhs.clone(), rhs, iter: *iter, pos: *pos });
                        }
                    }
                    _ => {
                        env.remove(lhs);
                        out.push(Flat::Assign { lhs: lhs.clone(), rhs, iter: *iter, pos: *pos });
                    }
                }
            }
            Flat::If { cond, then, els, iter, pos } => {
                let cond = fold(cond, &|n| env.get(n).cloned())?;
                if let Some(v) = cond.as_int() {
                    let taken = if v.is_zero() { els } else { then };
                    block(taken, keep, env, in_branch, out)?;
                    continue;
                }
                let mut t = Vec::new();
                block(then, keep, &mut env.clone(), true, &mut t)?;
                let mut e = Vec::new();
                block(els, keep, &mut env.clone(), true, &mut e)?;
                let mut names = assigned(then);
                names.extend(assigned(els));
                for name in names {
                    // A constant whose assignment was dropped must exist as a
                    // value for the side of the branch that keeps it.
                    if let Some(v) = env.remove(&name) {
                        if !in_branch && !keep(&name) {
                            out.push(Flat::Assign { lhs: name, rhs: Expr::Int(v), iter: *iter, pos: *pos });
                        }
                    }
                }
                out.push(Flat::If { cond, then: t, els: e, iter: *iter, pos: *pos });
            }
        }
    }
    Ok(())
}

/// Names assigned anywhere in `stmts`.
pub fn assigned(stmts: &[Flat]) -> Vec<String> {
    let mut out = Vec::new();
    for s in stmts {
        match s {
            Flat::Assign { lhs, .. } => out.push(lhs.clone()),
            Flat::If { then, els, .. } => {
                out.extend(assigned(then));
                out.extend(assigned(els));
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dfl::parse;
    use crate::dfl::unroll::{unroll, DEFAULT_UNROLL_LIMIT};

    fn render(f: &[Flat]) -> Vec<String> {
        f.iter()
            .map(|s| match s {
                Flat::Assign { lhs, rhs, .. } => format!("{lhs} := {rhs}"),
                Flat::If { cond, .. } => format!("if {cond}"),
            })
            .collect()
    }

    #[test]
    fn control_variables_disappear() {
        let p = parse("input a; output y; var k; k := 3; k := k + 1; y := a * k;").unwrap();
        let f = unroll(&p, DEFAULT_UNROLL_LIMIT).unwrap();
        let r = resolve_control(&f, &|n| n == "y").unwrap();
        assert_eq!(render(&r), ["y := a * 4"]);
    }

    #[test]
    fn symbolic_guards_survive() {
        let p = parse("input x; input a; output y; y := 0; if (x == 0) { y := a; } else { y := 1; }").unwrap();
        let f = unroll(&p, DEFAULT_UNROLL_LIMIT).unwrap();
        let r = resolve_control(&f, &|n| n == "y").unwrap();
        assert_eq!(render(&r), ["y := 0", "if x == 0"]);
    }
}
