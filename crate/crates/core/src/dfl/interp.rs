//! Reference interpreter executing a program directly on concrete values.

use std::collections::{BTreeMap, HashMap};

use num_bigint::BigInt;
use num_traits::{ToPrimitive, Zero};

use super::ast::{Expr, LValue, Program, Stmt};
use super::eval::eval;
use super::lower::sanitize;
use super::unroll::elem_name;
use super::{input_flats, output_flats};
use crate::error::{Error, Result};

/// Runs `p` with input values keyed by input symbol (`a`, or `a0` for
/// element 0 of array `a`). Returns outputs by logical name. `limit` bounds
/// the number of executed statements.
pub fn interpret(p: &Program, inputs: &HashMap<String, BigInt>, limit: usize) -> Result<BTreeMap<String, BigInt>> {
    let mut st = State { p, vars: HashMap::new(), counters: Vec::new(), steps: 0, limit };
    for (flat, _) in input_flats(p) {
        let sym = sanitize(&flat);
        let v = inputs.get(&sym).ok_or_else(|| Error::MissingAssignment(sym.clone()))?;
        st.vars.insert(flat, v.clone());
    }
    st.block(&p.body)?;
    output_flats(p)
        .into_iter()
        .map(|(flat, _)| {
            let v = st.vars.get(&flat).cloned().ok_or_else(|| Error::ReadBeforeWrite(flat.clone()))?;
            Ok((sanitize(&flat), v))
        })
        .collect()
}

struct State<'a> {
    p: &'a Program,
    vars: HashMap<String, BigInt>,
    counters: Vec<(String, BigInt)>,
    steps: usize,
    limit: usize,
}

impl State<'_> {
    fn lookup(&self, n: &str) -> Option<BigInt> {
        if let Some((_, v)) = self.counters.iter().rev().find(|(c, _)| c == n) {
            return Some(v.clone());
        }
        self.vars.get(n).cloned()
    }

    fn value(&self, e: &Expr) -> Result<BigInt> {
        let flat = self.resolve_indices(e)?;
        eval(&flat, &|n| self.lookup(n))
    }

    fn resolve_indices(&self, e: &Expr) -> Result<Expr> {
        Ok(match e {
            Expr::Index(a, i) => Expr::Var(self.element(a, i)?),
            Expr::Int(_) | Expr::Var(_) => e.clone(),
            Expr::Bit(a, b) => Expr::Bit(Box::new(self.resolve_indices(a)?), Box::new(self.resolve_indices(b)?)),
            Expr::Unary(op, a) => Expr::Unary(*op, Box::new(self.resolve_indices(a)?)),
            Expr::Binary(op, a, b) => {
                Expr::Binary(*op, Box::new(self.resolve_indices(a)?), Box::new(self.resolve_indices(b)?))
            }
            Expr::Mux(g, a, b) => Expr::Mux(
                Box::new(self.resolve_indices(g)?),
                Box::new(self.resolve_indices(a)?),
                Box::new(self.resolve_indices(b)?),
            ),
        })
    }

    fn element(&self, a: &str, i: &Expr) -> Result<String> {
        let k = self.value(i)?;
        let len = self.p.decl(a).and_then(|d| d.len).unwrap_or(0);
        match k.to_usize() {
            Some(k) if k < len => Ok(elem_name(a, k)),
            _ => Err(Error::Eval(format!("index {k} is out of bounds for `{a}[{len}]`"))),
        }
    }

    fn tick(&mut self) -> Result<()> {
        self.steps += 1;
        if self.steps > self.limit {
            return Err(Error::UnrollLimit(self.limit));
        }
        Ok(())
    }

    fn block(&mut self, stmts: &[Stmt]) -> Result<()> {
        for s in stmts {
            self.stmt(s)?;
        }
        Ok(())
    }

    fn stmt(&mut self, s: &Stmt) -> Result<()> {
        match s {
            Stmt::Cycle => Ok(()),
            Stmt::Assign { lhs, rhs, .. } => {
                self.tick()?;
                let v = self.value(rhs)?;
                let name = match lhs {
                    LValue::Scalar(n) => n.clone(),
                    LValue::Elem(a, i) => self.element(a, i)?,
                };
                self.vars.insert(name, v);
                Ok(())
            }
            Stmt::If { cond, then, els, .. } => {
                if self.value(cond)?.is_zero() {
                    self.block(els)
                } else {
                    self.block(then)
                }
            }
            Stmt::For { var, init, cond, step, body, .. } => {
                let start = self.value(init)?;
                self.counters.push((var.clone(), start));
                while !self.value(cond)?.is_zero() {
                    self.tick()?;
                    self.block(body)?;
                    let next = self.value(step)?;
                    self.counters.last_mut().expect("pushed above").1 = next;
                }
                self.counters.pop();
                Ok(())
            }
        }
    }
}
