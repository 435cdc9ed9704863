//! Loop-pipelined implementations, mutants and reference checks for the
//! test corpus.
//!
//! [`pipeline_transform`] lowers an assignment list to three-address
//! operations, list-schedules them under a latency and resource model with
//! iteration `k` released at cycle `k * II`, and emits the operations in
//! schedule order under fresh names (`mul0`, `add3`, ...). Only
//! dependence-respecting reordering and renaming happen, so the result is
//! equivalent by construction.

pub mod corpus;
mod emit;
mod mutate;
mod oracle;

use std::collections::{BTreeMap, BTreeSet, HashMap};

use num_bigint::BigInt;
use serde::{Deserialize, Serialize};

use crate::dfl::ast::{BinOp, Expr, UnOp};
use crate::dfl::eval::{apply_binary, apply_bit, apply_unary, is_bool};
use crate::dfl::{Assignment, AssignmentList, OutputVar};
use crate::error::{Error, Result};

pub use emit::to_dfl;
pub use mutate::{mutate, MutationDescriptor, MutationKind};
pub use oracle::{concrete_check, expand, expand_outputs, oracle_check, Concrete, Witness, EXHAUSTIVE_BITS};

/// Functional-unit classes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OpClass {
    /// Adders, subtractors, logic, shifts, comparators and selectors.
    Add,
    Mul,
}

/// Operator latencies and, optionally, functional-unit counts.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct LatencyModel {
    pub add_latency: u32,
    pub mul_latency: u32,
    /// Units per cycle; unlimited when absent.
    #[serde(default)]
    pub adders: Option<u32>,
    #[serde(default)]
    pub multipliers: Option<u32>,
}

impl Default for LatencyModel {
    fn default() -> Self {
        LatencyModel { add_latency: 1, mul_latency: 2, adders: None, multipliers: None }
    }
}

impl LatencyModel {
    /// Five multipliers and two adders.
    pub fn five_mul_two_add() -> Self {
        LatencyModel { adders: Some(2), multipliers: Some(5), ..LatencyModel::default() }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let lm: LatencyModel = serde_json::from_str(text).map_err(|e| Error::Invalid(format!("latency model: {e}")))?;
        lm.validate()?;
        Ok(lm)
    }

    pub fn validate(&self) -> Result<()> {
        if self.add_latency == 0 || self.mul_latency == 0 {
            return Err(Error::Invalid("latencies must be at least 1".into()));
        }
        if self.adders == Some(0) || self.multipliers == Some(0) {
            return Err(Error::Invalid("resource counts must be at least 1".into()));
        }
        Ok(())
    }

    pub fn latency(&self, c: OpClass) -> u32 {
        match c {
            OpClass::Add => self.add_latency,
            OpClass::Mul => self.mul_latency,
        }
    }

    pub fn units(&self, c: OpClass) -> Option<u32> {
        match c {
            OpClass::Add => self.adders,
            OpClass::Mul => self.multipliers,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ScheduledOp {
    pub name: String,
    pub class: OpClass,
    pub cycle: u32,
    pub latency: u32,
    /// Ordinal of the source iteration.
    pub iteration: u32,
    /// Indices (into the schedule) of the operations read.
    pub deps: Vec<usize>,
}

/// Operations in emission order, one per statement of the emitted list.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Schedule {
    pub ii: u32,
    pub ops: Vec<ScheduledOp>,
}

impl Schedule {
    /// Cycles after the last operation completes.
    pub fn length(&self) -> u32 {
        self.ops.iter().map(|o| o.cycle + o.latency).max().unwrap_or(0)
    }

    pub fn cycles(&self) -> Vec<u32> {
        self.ops.iter().map(|o| o.cycle).collect()
    }

    /// Checks dependences, iteration release times and per-cycle resource
    /// usage.
    pub fn audit(&self, lm: &LatencyModel) -> std::result::Result<(), String> {
        let mut usage: HashMap<(u32, OpClass), u32> = HashMap::new();
        for (k, op) in self.ops.iter().enumerate() {
            if op.cycle < op.iteration * self.ii {
                return Err(format!("`{}` issues before its iteration is released", op.name));
            }
            for &d in &op.deps {
                let dep = &self.ops[d];
                if d >= k || dep.cycle + dep.latency > op.cycle {
                    return Err(format!("`{}` reads `{}` before it is ready", op.name, dep.name));
                }
            }
            let u = usage.entry((op.cycle, op.class)).or_default();
            *u += 1;
            if lm.units(op.class).is_some_and(|n| *u > n) {
                return Err(format!("cycle {} uses more {:?} units than available", op.cycle, op.class));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct PipelineResult {
    pub list: AssignmentList,
    pub schedule: Schedule,
}

/// Operand of a three-address operation.
#[derive(Clone, Debug, PartialEq, Eq)]
enum Atom {
    Op(usize),
    Input(String),
    Const(BigInt),
}

impl Atom {
    fn expr(&self) -> Expr {
        match self {
            Atom::Op(k) => Expr::Var(placeholder(*k)),
            Atom::Input(n) => Expr::Var(n.clone()),
            Atom::Const(v) => Expr::Int(v.clone()),
        }
    }
}

fn placeholder(k: usize) -> String {
    format!("%{k}")
}

struct Op {
    expr: Expr,
    prefix: &'static str,
    class: OpClass,
    iter: u32,
    deps: Vec<usize>,
}

fn prefix(e: &Expr) -> (&'static str, OpClass) {
    match e {
        Expr::Binary(op, ..) => match op {
            BinOp::Add => ("add", OpClass::Add),
            BinOp::Sub => ("sub", OpClass::Add),
            BinOp::Mul => ("mul", OpClass::Mul),
            BinOp::Shl => ("shl", OpClass::Add),
            BinOp::Shr => ("shr", OpClass::Add),
            BinOp::And => ("and", OpClass::Add),
            BinOp::Or => ("or", OpClass::Add),
            BinOp::Xor => ("xor", OpClass::Add),
            _ => ("cmp", OpClass::Add),
        },
        Expr::Unary(UnOp::Neg, _) => ("neg", OpClass::Add),
        Expr::Unary(UnOp::Not, _) => ("not", OpClass::Add),
        Expr::Mux(..) => ("mux", OpClass::Add),
        Expr::Bit(..) => ("bit", OpClass::Add),
        Expr::Int(_) | Expr::Var(_) | Expr::Index(..) => ("cst", OpClass::Add),
    }
}

struct Lowering {
    ops: Vec<Op>,
    alias: HashMap<String, Atom>,
}

impl Lowering {
    fn atom(&mut self, e: &Expr, iter: u32) -> Result<Atom> {
        Ok(match e {
            Expr::Int(v) => Atom::Const(v.clone()),
            Expr::Var(n) => self.alias.get(n).cloned().unwrap_or_else(|| Atom::Input(n.clone())),
            Expr::Index(a, _) => return Err(Error::Unresolved(format!("{a}[...]"))),
            Expr::Unary(op, a) => match self.atom(a, iter)? {
                Atom::Const(v) => Atom::Const(apply_unary(*op, &v)),
                a => self.push(Expr::Unary(*op, Box::new(a.expr())), &[a], iter),
            },
            Expr::Binary(op, a, b) => {
                let (a, b) = (self.atom(a, iter)?, self.atom(b, iter)?);
                if let (Atom::Const(x), Atom::Const(y)) = (&a, &b) {
                    Atom::Const(apply_binary(*op, x, y)?)
                } else {
                    self.push(Expr::bin(*op, a.expr(), b.expr()), &[a, b], iter)
                }
            }
            Expr::Bit(a, i) => {
                let (a, i) = (self.atom(a, iter)?, self.atom(i, iter)?);
                if let (Atom::Const(x), Atom::Const(k)) = (&a, &i) {
                    Atom::Const(apply_bit(x, k)?)
                } else {
                    self.push(Expr::Bit(Box::new(a.expr()), Box::new(i.expr())), &[a, i], iter)
                }
            }
            Expr::Mux(g, a, b) => {
                let (g, a, b) = (self.atom(g, iter)?, self.atom(a, iter)?, self.atom(b, iter)?);
                match &g {
                    Atom::Const(v) if num_traits::Zero::is_zero(v) => b,
                    Atom::Const(_) => a,
                    _ => self.push(
                        Expr::Mux(Box::new(g.expr()), Box::new(a.expr()), Box::new(b.expr())),
                        &[g, a, b],
                        iter,
                    ),
                }
            }
        })
    }

    fn push(&mut self, expr: Expr, args: &[Atom], iter: u32) -> Atom {
        let (prefix, class) = prefix(&expr);
        let mut deps: Vec<usize> = args
            .iter()
            .filter_map(|a| match a {
                Atom::Op(k) => Some(*k),
                _ => None,
            })
            .collect();
        deps.dedup();
        self.ops.push(Op { expr, prefix, class, iter, deps });
        Atom::Op(self.ops.len() - 1)
    }
}

/// Three-address form: operations, and the atom holding each output.
type Lowered = (Vec<Op>, Vec<(String, Atom)>);

fn lower(list: &AssignmentList) -> Result<Lowered> {
    let mut l = Lowering { ops: Vec::new(), alias: HashMap::new() };
    for st in &list.stmts {
        let a = l.atom(&st.rhs, st.iter)?;
        l.alias.insert(st.lhs.clone(), a);
    }
    let mut outs = Vec::new();
    for o in &list.outputs {
        let mut a = l.alias.get(&o.ssa).cloned().unwrap_or_else(|| Atom::Input(o.ssa.clone()));
        if let Atom::Const(v) = &a {
            let iter = list.stmts.last().map_or(0, |s| s.iter);
            a = l.push(Expr::Int(v.clone()), &[], iter);
        }
        outs.push((o.name.clone(), a));
    }
    Ok((l.ops, outs))
}

/// Live operations (reachable from an output) and their iteration ordinals.
fn live_ops(ops: &[Op], outs: &[(String, Atom)]) -> (Vec<bool>, HashMap<u32, u32>) {
    let mut live = vec![false; ops.len()];
    let mut stack: Vec<usize> = outs
        .iter()
        .filter_map(|(_, a)| match a {
            Atom::Op(k) => Some(*k),
            _ => None,
        })
        .collect();
    while let Some(k) = stack.pop() {
        if !std::mem::replace(&mut live[k], true) {
            stack.extend(&ops[k].deps);
        }
    }
    let tags: BTreeSet<u32> = ops.iter().zip(&live).filter(|(_, l)| **l).map(|(o, _)| o.iter).collect();
    let ordinal = tags.into_iter().enumerate().map(|(i, t)| (t, i as u32)).collect();
    (live, ordinal)
}

/// Smallest initiation interval the resource model sustains: the busiest
/// iteration's operations per unit, or 1 when there is a single iteration
/// or no resource limit.
pub fn min_feasible_ii(list: &AssignmentList, lm: &LatencyModel) -> Result<u32> {
    let (ops, outs) = lower(list)?;
    let (live, ordinal) = live_ops(&ops, &outs);
    Ok(res_mii(&ops, &live, &ordinal, lm))
}

fn res_mii(ops: &[Op], live: &[bool], ordinal: &HashMap<u32, u32>, lm: &LatencyModel) -> u32 {
    if ordinal.len() < 2 {
        return 1;
    }
    let mut count: BTreeMap<(u32, OpClass), u32> = BTreeMap::new();
    for (op, _) in ops.iter().zip(live).filter(|(_, l)| **l) {
        *count.entry((ordinal[&op.iter], op.class)).or_default() += 1;
    }
    count.iter().filter_map(|(&(_, c), &n)| lm.units(c).map(|u| n.div_ceil(u))).max().unwrap_or(1).max(1)
}

/// Pipelined re-implementation of `list` at initiation interval `ii`.
pub fn pipeline_transform(list: &AssignmentList, lm: &LatencyModel, ii: u32) -> Result<PipelineResult> {
    lm.validate()?;
    let (ops, outs) = lower(list)?;
    let (live, ordinal) = live_ops(&ops, &outs);
    let minimum = res_mii(&ops, &live, &ordinal, lm);
    if ii == 0 || ii < minimum {
        return Err(Error::InfeasibleII { requested: ii, minimum });
    }

    // List scheduling in program order, which is topological.
    let mut cycle = vec![0u32; ops.len()];
    let mut usage: HashMap<(u32, OpClass), u32> = HashMap::new();
    for (k, op) in ops.iter().enumerate().filter(|(k, _)| live[*k]) {
        let release = ordinal[&op.iter] * ii;
        let ready = op.deps.iter().map(|&d| cycle[d] + lm.latency(ops[d].class)).max().unwrap_or(0);
        let mut c = release.max(ready);
        if let Some(units) = lm.units(op.class) {
            while usage.get(&(c, op.class)).copied().unwrap_or(0) >= units {
                c += 1;
            }
        }
        *usage.entry((c, op.class)).or_default() += 1;
        cycle[k] = c;
    }

    let mut order: Vec<usize> = (0..ops.len()).filter(|&k| live[k]).collect();
    order.sort_by_key(|&k| (cycle[k], k));
    let inputs: std::collections::HashSet<&str> = list.inputs.iter().map(|i| i.name.as_str()).collect();
    let mut counters: HashMap<&str, u32> = HashMap::new();
    let mut names: HashMap<usize, String> = HashMap::new();
    let mut position: HashMap<usize, usize> = HashMap::new();
    for (pos, &k) in order.iter().enumerate() {
        let n = counters.entry(ops[k].prefix).or_default();
        let mut name = format!("{}{n}", ops[k].prefix);
        *n += 1;
        while inputs.contains(name.as_str()) {
            name.push('_');
        }
        names.insert(k, name);
        position.insert(k, pos);
    }
    let rename = |e: &Expr| {
        e.map_vars(&mut |v| match v.strip_prefix('%') {
            Some(k) => Expr::Var(names[&k.parse::<usize>().expect("placeholder")].clone()),
            None => Expr::var(v),
        })
    };

    let mut bools: HashMap<String, bool> = list.inputs.iter().map(|i| (i.name.clone(), i.width == Some(1))).collect();
    let mut stmts = Vec::with_capacity(order.len());
    let mut sched = Vec::with_capacity(order.len());
    for &k in &order {
        let op = &ops[k];
        let rhs = rename(&op.expr);
        let boolean = is_bool(&rhs, &|n| bools.get(n).copied().unwrap_or(false));
        bools.insert(names[&k].clone(), boolean);
        stmts.push(Assignment { lhs: names[&k].clone(), rhs, iter: op.iter, boolean });
        sched.push(ScheduledOp {
            name: names[&k].clone(),
            class: op.class,
            cycle: cycle[k],
            latency: lm.latency(op.class),
            iteration: ordinal[&op.iter],
            deps: op.deps.iter().map(|d| position[d]).collect(),
        });
    }
    let outputs = outs
        .into_iter()
        .map(|(name, a)| {
            let ssa = match a {
                Atom::Op(k) => names[&k].clone(),
                Atom::Input(n) => n,
                Atom::Const(_) => unreachable!("constant outputs get an operation"),
            };
            OutputVar { name, ssa }
        })
        .collect();
    let out = AssignmentList { inputs: list.inputs.clone(), stmts, outputs, assumptions: list.assumptions.clone() };
    out.validate()?;
    Ok(PipelineResult { list: out, schedule: Schedule { ii, ops: sched } })
}
