//! Lowering of branches with symbolic guards into straight-line code.
//!
//! Inside a branch every assigned variable is renamed to a fresh
//! branch-local name (plain copies are propagated instead), so the values
//! visible before the `if` stay intact until the merge point. After the
//! branch each assigned variable `v` is merged:
//!
//! * single-bit guard `g`: `v := g * v_then + (1 - g) * v_else`;
//! * word guard: `v := mux(g, v_then, v_else)`, recorded as an assumption
//!   because the checker treats such selections as uninterpreted.
//!
//! A variable with no value before the `if` and no assignment on one side
//! reads as `0` on that side.

use std::collections::{HashMap, HashSet};

use super::ast::{BinOp, Expr};
use super::control::assigned;
use super::eval::is_bool;
use super::unroll::Flat;

/// A straight-line assignment over flat names.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Lowered {
    pub lhs: String,
    pub rhs: Expr,
    pub iter: u32,
}

pub struct LowerResult {
    pub stmts: Vec<Lowered>,
    pub assumptions: Vec<String>,
}

/// `inputs` maps each input name to whether it is a single bit; `taken`
/// lists every name already used by the program (fresh names avoid them).
pub fn lower_conditionals(stmts: &[Flat], inputs: &HashMap<String, bool>, taken: &HashSet<String>) -> LowerResult {
    let mut l = Lowerer {
        out: Vec::new(),
        assumptions: Vec::new(),
        bools: inputs.clone(),
        defined: inputs.keys().cloned().collect(),
        taken: taken.clone(),
        counters: HashMap::new(),
    };
    let mut rename = HashMap::new();
    l.block(stmts, false, &mut rename);
    LowerResult { stmts: l.out, assumptions: l.assumptions }
}

struct Lowerer {
    out: Vec<Lowered>,
    assumptions: Vec<String>,
    bools: HashMap<String, bool>,
    defined: HashSet<String>,
    taken: HashSet<String>,
    counters: HashMap<String, u32>,
}

pub(crate) fn sanitize(name: &str) -> String {
    name.chars().filter(|c| c.is_ascii_alphanumeric() || *c == '_').collect()
}

impl Lowerer {
    fn fresh(&mut self, base: &str) -> String {
        let base = sanitize(base);
        loop {
            let k = self.counters.entry(base.clone()).or_insert(0);
            *k += 1;
            let name = format!("{base}_{k}");
            if self.taken.insert(name.clone()) {
                return name;
            }
        }
    }

    fn is_bool(&self, e: &Expr) -> bool {
        is_bool(e, &|n| self.bools.get(n).copied().unwrap_or(false))
    }

    fn emit(&mut self, lhs: String, rhs: Expr, iter: u32) {
        let b = self.is_bool(&rhs);
        self.bools.insert(lhs.clone(), b);
        self.defined.insert(lhs.clone());
        self.out.push(Lowered { lhs, rhs, iter });
    }

    /// Current value of `v` as seen through `rename`.
    fn current(&self, v: &str, rename: &HashMap<String, Expr>) -> Expr {
        match rename.get(v) {
            Some(e) => e.clone(),
            None if self.defined.contains(v) => Expr::var(v),
            None => Expr::int(0),
        }
    }

    fn block(&mut self, stmts: &[Flat], in_branch: bool, rename: &mut HashMap<String, Expr>) {
        for s in stmts {
            match s {
                Flat::Assign { lhs, rhs, iter, .. } => {
                    let rhs = rhs.map_vars(&mut |n| rename.get(n).cloned().unwrap_or_else(|| Expr::var(n)));
                    if !in_branch {
                        self.emit(lhs.clone(), rhs, *iter);
                    } else if rhs.is_atom() {
                        rename.insert(lhs.clone(), rhs);
                    } else {
                        let f = self.fresh(lhs);
                        self.emit(f.clone(), rhs, *iter);
                        rename.insert(lhs.clone(), Expr::Var(f));
                    }
                }
                Flat::If { cond, then, els, iter, pos } => {
                    let mut g = cond.map_vars(&mut |n| rename.get(n).cloned().unwrap_or_else(|| Expr::var(n)));
                    let boolean = self.is_bool(&g);
                    if !g.is_atom() {
                        let t = self.fresh("_g");
                        self.emit(t.clone(), g, *iter);
                        g = Expr::Var(t);
                    }
                    if !boolean {
                        self.assumptions.push(format!(
                            "{pos}: guard `{cond}` is a word; merged values are selected by an uninterpreted mux"
                        ));
                    }
                    let mut rt = rename.clone();
                    self.block(then, true, &mut rt);
                    let mut re = rename.clone();
                    self.block(els, true, &mut re);
                    let mut names = assigned(then);
                    names.extend(assigned(els));
                    let mut seen = HashSet::new();
                    names.retain(|n| seen.insert(n.clone()));
                    for v in names {
                        let vt = rt.get(&v).cloned().unwrap_or_else(|| self.current(&v, rename));
                        let ve = re.get(&v).cloned().unwrap_or_else(|| self.current(&v, rename));
                        let merged = if vt == ve {
                            vt
                        } else if boolean {
                            let not_g = Expr::bin(BinOp::Sub, Expr::int(1), g.clone());
                            Expr::bin(
                                BinOp::Add,
                                Expr::bin(BinOp::Mul, g.clone(), vt),
                                Expr::bin(BinOp::Mul, not_g, ve),
                            )
                        } else {
                            Expr::Mux(Box::new(g.clone()), Box::new(vt), Box::new(ve))
                        };
                        if !in_branch {
                            self.emit(v.clone(), merged, *iter);
                        } else if merged.is_atom() {
                            rename.insert(v.clone(), merged);
                        } else {
                            let f = self.fresh(&v);
                            self.emit(f.clone(), merged, *iter);
                            rename.insert(v.clone(), Expr::Var(f));
                        }
                    }
                }
            }
        }
    }
}
