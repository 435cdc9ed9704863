//! The dataflow language (DFL) front end: parsing, symbolic simulation into
//! single-assignment lists, and a reference interpreter.
//!
//! Symbolic simulation runs `parse -> unroll -> resolve_control ->
//! lower_conditionals -> ssa_rename`.

pub mod ast;
pub mod control;
pub mod eval;
pub mod interp;
mod lexer;
pub mod lower;
mod parser;
mod print;
pub mod ssa;
pub mod unroll;

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt::Write;

use num_bigint::BigInt;
use serde::{Serialize, Serializer};

pub use ast::{BinOp, Decl, DeclKind, Expr, LValue, Program, Stmt, UnOp};
pub use parser::parse;

use crate::error::{Error, Result};
use unroll::{elem_name, Flat};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SymSimConfig {
    pub unroll_limit: usize,
}

impl Default for SymSimConfig {
    fn default() -> Self {
        SymSimConfig { unroll_limit: unroll::DEFAULT_UNROLL_LIMIT }
    }
}

/// One single-assignment statement.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Assignment {
    pub lhs: String,
    #[serde(serialize_with = "as_text")]
    pub rhs: Expr,
    /// Loop-iteration tag from unrolling.
    pub iter: u32,
    /// Statically known to be 0/1-valued.
    pub boolean: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct InputVar {
    pub name: String,
    pub width: Option<u32>,
}

/// A design output: its logical name and the SSA name holding its final
/// value.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct OutputVar {
    pub name: String,
    pub ssa: String,
}

/// Ordered single-assignment statements plus the input and output sets.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct AssignmentList {
    pub inputs: Vec<InputVar>,
    pub stmts: Vec<Assignment>,
    pub outputs: Vec<OutputVar>,
    /// Diagnostics about uninterpreted constructs introduced by lowering.
    pub assumptions: Vec<String>,
}

fn as_text<S: Serializer>(e: &Expr, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&e.to_string())
}

impl AssignmentList {
    pub fn output(&self, name: &str) -> Option<&OutputVar> {
        self.outputs.iter().find(|o| o.name == name)
    }

    pub fn input_width(&self, name: &str) -> Option<Option<u32>> {
        self.inputs.iter().find(|i| i.name == name).map(|i| i.width)
    }

    /// Checks single assignment, definition before use and that inputs are
    /// never written.
    pub fn validate(&self) -> Result<()> {
        let inputs: HashSet<&str> = self.inputs.iter().map(|i| i.name.as_str()).collect();
        let mut defined: HashSet<&str> = HashSet::new();
        for s in &self.stmts {
            for r in s.rhs.reads() {
                if !defined.contains(r) && !inputs.contains(r) {
                    return Err(Error::ReadBeforeWrite(r.to_string()));
                }
            }
            if inputs.contains(s.lhs.as_str()) || !defined.insert(&s.lhs) {
                return Err(Error::Invalid(format!("`{}` is assigned more than once", s.lhs)));
            }
        }
        for o in &self.outputs {
            if !defined.contains(o.ssa.as_str()) && !inputs.contains(o.ssa.as_str()) {
                return Err(Error::Invalid(format!("output `{}` has no definition", o.name)));
            }
        }
        Ok(())
    }

    /// Concrete evaluation; returns output values by logical name.
    pub fn evaluate(&self, inputs: &HashMap<String, BigInt>) -> Result<BTreeMap<String, BigInt>> {
        let mut env: HashMap<&str, BigInt> = HashMap::new();
        for i in &self.inputs {
            let v = inputs.get(&i.name).ok_or_else(|| Error::MissingAssignment(i.name.clone()))?;
            env.insert(&i.name, v.clone());
        }
        for s in &self.stmts {
            let v = eval::eval(&s.rhs, &|n| env.get(n).cloned())?;
            env.insert(&s.lhs, v);
        }
        self.outputs
            .iter()
            .map(|o| {
                let v = env.get(o.ssa.as_str()).cloned().ok_or_else(|| Error::ReadBeforeWrite(o.ssa.clone()))?;
                Ok((o.name.clone(), v))
            })
            .collect()
    }

    /// Statements as `lhs := rhs;` lines followed by the output mapping.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let names: Vec<&str> = self.inputs.iter().map(|i| i.name.as_str()).collect();
        writeln!(out, "// inputs: {}", names.join(", ")).unwrap();
        for s in &self.stmts {
            writeln!(out, "{} := {};", s.lhs, s.rhs).unwrap();
        }
        for o in &self.outputs {
            writeln!(out, "// output {} = {}", o.name, o.ssa).unwrap();
        }
        for a in &self.assumptions {
            writeln!(out, "// assumption: {a}").unwrap();
        }
        out
    }
}

/// Variable family of an SSA name: the name without its version suffix.
fn family(name: &str) -> &str {
    let mut base = name.trim_end_matches('_');
    while let Some((stem, v)) = base.rsplit_once('_') {
        if stem.is_empty() || v.is_empty() || !v.bytes().all(|b| b.is_ascii_digit()) {
            break;
        }
        base = stem.trim_end_matches('_');
    }
    base
}

/// First difference between two lists once statement names are replaced by
/// statement positions; `None` when they agree up to SSA renaming.
///
/// Statements are compared in order: the variable family assigned, then
/// the right-hand side with references to earlier statements numbered.
pub fn structural_diff(a: &AssignmentList, b: &AssignmentList) -> Option<String> {
    fn numbered(list: &AssignmentList) -> (Vec<(String, Expr)>, BTreeMap<String, Expr>) {
        let mut pos: HashMap<&str, usize> = HashMap::new();
        let rename = |e: &Expr, pos: &HashMap<&str, usize>| {
            e.map_vars(&mut |v| Expr::Var(pos.get(v).map_or_else(|| v.to_string(), |k| format!("#{k}"))))
        };
        let mut stmts = Vec::new();
        for (k, s) in list.stmts.iter().enumerate() {
            stmts.push((family(&s.lhs).to_string(), rename(&s.rhs, &pos)));
            pos.insert(&s.lhs, k);
        }
        let outs = list.outputs.iter().map(|o| (o.name.clone(), rename(&Expr::var(o.ssa.clone()), &pos))).collect();
        (stmts, outs)
    }
    let names = |l: &AssignmentList| l.inputs.iter().map(|i| i.name.clone()).collect::<HashSet<_>>();
    if names(a) != names(b) {
        return Some("input sets differ".into());
    }
    let (sa, oa) = numbered(a);
    let (sb, ob) = numbered(b);
    for (k, (x, y)) in sa.iter().zip(&sb).enumerate() {
        if x != y {
            return Some(format!("statement {k}: `{} := {}` vs `{} := {}`", x.0, x.1, y.0, y.1));
        }
    }
    if sa.len() != sb.len() {
        return Some(format!("{} statements vs {}", sa.len(), sb.len()));
    }
    if oa != ob {
        return Some("outputs differ".into());
    }
    None
}

/// Flat input names (scalars and array elements) with widths.
pub fn input_flats(p: &Program) -> Vec<(String, Option<u32>)> {
    let mut out = Vec::new();
    for d in p.decls.iter().filter(|d| d.is_input()) {
        match d.len {
            None => out.push((d.name.clone(), d.width)),
            Some(n) => out.extend((0..n).map(|i| (elem_name(&d.name, i), d.width))),
        }
    }
    out
}

/// Flat output names with whether they pass an input value through when
/// never written.
pub fn output_flats(p: &Program) -> Vec<(String, bool)> {
    let mut out = Vec::new();
    for d in p.decls.iter().filter(|d| d.is_output()) {
        let passthrough = d.kind == DeclKind::Inout;
        match d.len {
            None => out.push((d.name.clone(), passthrough)),
            Some(n) => out.extend((0..n).map(|i| (elem_name(&d.name, i), passthrough))),
        }
    }
    out
}

fn flat_base(flat: &str) -> &str {
    flat.split('[').next().unwrap_or(flat)
}

fn flat_names(stmts: &[Flat], out: &mut HashSet<String>) {
    for s in stmts {
        match s {
            Flat::Assign { lhs, rhs, .. } => {
                out.insert(lhs.clone());
                out.extend(rhs.reads().into_iter().map(str::to_string));
            }
            Flat::If { cond, then, els, .. } => {
                out.extend(cond.reads().into_iter().map(str::to_string));
                flat_names(then, out);
                flat_names(els, out);
            }
        }
    }
}

/// Symbolic simulation of a parsed program.
pub fn sym_sim(p: &Program, cfg: &SymSimConfig) -> Result<AssignmentList> {
    let flat = unroll::unroll(p, cfg.unroll_limit)?;
    let keep = |n: &str| p.decl(flat_base(n)).is_some_and(|d| d.is_output());
    let resolved = control::resolve_control(&flat, &keep)?;
    let inputs = input_flats(p);
    let input_bits: HashMap<String, bool> = inputs.iter().map(|(n, w)| (n.clone(), *w == Some(1))).collect();
    let mut taken: HashSet<String> = p.decls.iter().map(|d| d.name.clone()).collect();
    taken.extend(inputs.iter().map(|(n, _)| n.clone()));
    flat_names(&resolved, &mut taken);
    let lowered = lower::lower_conditionals(&resolved, &input_bits, &taken);
    let outputs = output_flats(p);
    let list = ssa::ssa_rename(
        ssa::SsaInput { stmts: &lowered.stmts, inputs: &inputs, outputs: &outputs },
        lowered.assumptions,
    )?;
    debug_assert!(list.validate().is_ok());
    Ok(list)
}

/// Parses and symbolically simulates `src`.
pub fn sym_sim_source(src: &str, cfg: &SymSimConfig) -> Result<AssignmentList> {
    sym_sim(&parse(src)?, cfg)
}
