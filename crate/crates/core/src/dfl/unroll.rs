//! Loop unrolling by partial evaluation.
//!
//! Loop counters and every scalar or array element whose current value is a
//! compile-time constant are tracked in an environment. Array indices and
//! loop headers must fold to constants; array elements become flat names
//! such as `a[2]`. Branches whose guard folds to a constant are unrolled
//! only on the taken side, so guarded boundary accesses in the untaken branch
//! are never evaluated.

use std::collections::HashMap;

use num_bigint::BigInt;
use num_traits::{ToPrimitive, Zero};

use super::ast::{Expr, LValue, Program, Stmt};
use super::eval::fold;
use crate::error::{Error, Pos, Result};

/// Default cap on emitted statements (and loop iterations).
pub const DEFAULT_UNROLL_LIMIT: usize = 1 << 20;

/// A loop-free statement over flat names.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Flat {
    Assign {
        lhs: String,
        rhs: Expr,
        /// Iteration tag: incremented at each loop-body instance and after
        /// each loop.
        iter: u32,
        pos: Pos,
    },
    If {
        cond: Expr,
        then: Vec<Flat>,
        els: Vec<Flat>,
        iter: u32,
        pos: Pos,
    },
}

/// Flat name of element `i` of array `a`.
pub fn elem_name(a: &str, i: usize) -> String {
    format!("{a}[{i}]")
}

pub fn unroll(p: &Program, limit: usize) -> Result<Vec<Flat>> {
    let mut u = Unroller { p, limit, emitted: 0, iterations: 0, iter: 0, env: HashMap::new(), counters: Vec::new() };
    u.block(&p.body)
}

struct Unroller<'a> {
    p: &'a Program,
    limit: usize,
    emitted: usize,
    iterations: usize,
    iter: u32,
    env: HashMap<String, BigInt>,
    counters: Vec<(String, BigInt)>,
}

impl Unroller<'_> {
    fn lookup(&self, name: &str) -> Option<BigInt> {
        if let Some((_, v)) = self.counters.iter().rev().find(|(c, _)| c == name) {
            return Some(v.clone());
        }
        self.env.get(name).cloned()
    }

    /// Folds `e` after resolving array indices and substituting constants.
    fn resolve(&self, e: &Expr, pos: Pos) -> Result<Expr> {
        let flat = self.flatten(e, pos)?;
        fold(&flat, &|n| self.lookup(n)).map_err(|e| at(pos, e))
    }

    fn flatten(&self, e: &Expr, pos: Pos) -> Result<Expr> {
        Ok(match e {
            Expr::Index(a, i) => {
                let k = self.index(a, i, pos)?;
                Expr::Var(elem_name(a, k))
            }
            Expr::Int(_) | Expr::Var(_) => e.clone(),
            Expr::Bit(a, b) => Expr::Bit(Box::new(self.flatten(a, pos)?), Box::new(self.flatten(b, pos)?)),
            Expr::Unary(op, a) => Expr::Unary(*op, Box::new(self.flatten(a, pos)?)),
            Expr::Binary(op, a, b) => {
                Expr::Binary(*op, Box::new(self.flatten(a, pos)?), Box::new(self.flatten(b, pos)?))
            }
            Expr::Mux(g, a, b) => Expr::Mux(
                Box::new(self.flatten(g, pos)?),
                Box::new(self.flatten(a, pos)?),
                Box::new(self.flatten(b, pos)?),
            ),
        })
    }

    fn index(&self, a: &str, i: &Expr, pos: Pos) -> Result<usize> {
        let folded = self.resolve(i, pos)?;
        let Some(v) = folded.as_int() else {
            return Err(Error::Semantic {
                pos,
                msg: format!("index of `{a}` is not constant after unrolling: `{folded}`"),
            });
        };
        let len = self.p.decl(a).and_then(|d| d.len).unwrap_or(0);
        match v.to_usize() {
            Some(k) if k < len => Ok(k),
            _ => Err(Error::Semantic { pos, msg: format!("index {v} is out of bounds for `{a}[{len}]`") }),
        }
    }

    fn constant(&self, e: &Expr, what: &str, pos: Pos) -> Result<BigInt> {
        match self.resolve(e, pos)? {
            Expr::Int(v) => Ok(v),
            other => Err(Error::NonConstantBound(format!("{pos}: {what} `{other}`"))),
        }
    }

    fn block(&mut self, stmts: &[Stmt]) -> Result<Vec<Flat>> {
        let mut out = Vec::new();
        for s in stmts {
            self.stmt(s, &mut out)?;
        }
        Ok(out)
    }

    fn stmt(&mut self, s: &Stmt, out: &mut Vec<Flat>) -> Result<()> {
        match s {
            Stmt::Cycle => Ok(()),
            Stmt::Assign { lhs, rhs, pos } => {
                let rhs = self.resolve(rhs, *pos)?;
                let lhs = match lhs {
                    LValue::Scalar(n) => n.clone(),
                    LValue::Elem(a, i) => elem_name(a, self.index(a, i, *pos)?),
                };
                match rhs.as_int() {
                    Some(v) => self.env.insert(lhs.clone(), v.clone()),
                    None => self.env.remove(&lhs),
                };
                self.emitted += 1;
                if self.emitted > self.limit {
                    return Err(Error::UnrollLimit(self.limit));
                }
                out.push(Flat::Assign { lhs, rhs, iter: self.iter, pos: *pos });
                Ok(())
            }
            Stmt::If { cond, then, els, pos } => {
                let c = self.resolve(cond, *pos)?;
                match c.as_int() {
                    Some(v) => {
                        let taken = if v.is_zero() { els } else { then };
                        for s in taken {
                            self.stmt(s, out)?;
                        }
                    }
                    None => {
                        let saved = self.env.clone();
                        let t = self.block(then)?;
                        let env_t = std::mem::replace(&mut self.env, saved);
                        let e = self.block(els)?;
                        // Keep only facts that hold on both paths.
                        self.env.retain(|k, v| env_t.get(k) == Some(v));
                        out.push(Flat::If { cond: c, then: t, els: e, iter: self.iter, pos: *pos });
                    }
                }
                Ok(())
            }
            Stmt::For { var, init, cond, step, body, pos } => {
                let start = self.constant(init, "loop start", *pos)?;
                self.counters.push((var.clone(), start));
                loop {
                    let c = self.constant(cond, "loop condition", *pos)?;
                    if c.is_zero() {
                        break;
                    }
                    self.iterations += 1;
                    if self.iterations > self.limit {
                        return Err(Error::UnrollLimit(self.limit));
                    }
                    self.iter += 1;
                    for s in body {
                        self.stmt(s, out)?;
                    }
                    let next = self.constant(step, "loop step", *pos)?;
                    self.counters.last_mut().expect("pushed above").1 = next;
                }
                self.counters.pop();
                self.iter += 1;
                Ok(())
            }
        }
    }
}

fn at(pos: Pos, e: Error) -> Error {
    match e {
        Error::Eval(msg) => Error::Semantic { pos, msg },
        other => other,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dfl::parse;

    fn assigns(f: &[Flat]) -> Vec<String> {
        f.iter()
            .map(|s| match s {
                Flat::Assign { lhs, rhs, .. } => format!("{lhs} := {rhs}"),
                Flat::If { .. } => "if".into(),
            })
            .collect()
    }

    #[test]
    fn counters_are_substituted() {
        let p = parse("input b[2]; output a[2]; for (i := 0; i < 2; i := i + 1) { a[i] := b[i] + 1; }").unwrap();
        let f = unroll(&p, DEFAULT_UNROLL_LIMIT).unwrap();
        assert_eq!(assigns(&f), ["a[0] := b[0] + 1", "a[1] := b[1] + 1"]);
    }

    #[test]
    fn zero_trip_loop_is_empty() {
        let p = parse("input b; var t; for (i := 0; i < 0; i := i + 1) { t := b; }").unwrap();
        assert!(unroll(&p, DEFAULT_UNROLL_LIMIT).unwrap().is_empty());
    }

    #[test]
    fn symbolic_bounds_and_limits_are_errors() {
        let p = parse("input n; var t; for (i := 0; i < n; i := i + 1) { t := i; }").unwrap();
        assert!(matches!(unroll(&p, DEFAULT_UNROLL_LIMIT), Err(Error::NonConstantBound(_))));
        let p = parse("var t; for (i := 0; i < 100; i := i + 1) { t := i; }").unwrap();
        assert!(matches!(unroll(&p, 10), Err(Error::UnrollLimit(10))));
        let p = parse("input a[2]; var t; for (i := 0; i < 3; i := i + 1) { t := a[i]; }").unwrap();
        assert!(matches!(unroll(&p, DEFAULT_UNROLL_LIMIT), Err(Error::Semantic { .. })));
    }

    #[test]
    fn constant_guards_take_one_side() {
        let p = parse(
            "input a[2]; output y[2]; for (i := 0; i < 2; i := i + 1) { if (i < 1) { y[i] := a[i + 1]; } else { y[i] := a[i]; } }",
        )
        .unwrap();
        let f = unroll(&p, DEFAULT_UNROLL_LIMIT).unwrap();
        assert_eq!(assigns(&f), ["y[0] := a[1]", "y[1] := a[1]"]);
    }

    #[test]
    fn iteration_tags_advance_per_body_instance() {
        let p = parse("input b; var t; t := b; for (i := 0; i < 2; i := i + 1) { t := t + b; } t := t * 2;").unwrap();
        let tags: Vec<u32> = unroll(&p, DEFAULT_UNROLL_LIMIT)
            .unwrap()
            .iter()
            .map(|s| match s {
                Flat::Assign { iter, .. } | Flat::If { iter, .. } => *iter,
            })
            .collect();
        assert_eq!(tags, [0, 1, 2, 3]);
    }
}
