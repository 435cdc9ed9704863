//! Single-assignment renaming.
//!
//! Array elements become scalars named after their concrete index (`a[2]`
//! becomes `a2`). A name assigned exactly once, and not an input, keeps its
//! plain name; otherwise every write gets a version suffix (`x_1`, `x_2`,
//! ...), and inputs keep their plain symbol for the initial value. Generated
//! names never collide with each other or with plain names.

use std::collections::{HashMap, HashSet};

use super::ast::Expr;
use super::eval::is_bool;
use super::lower::{sanitize, Lowered};
use super::{Assignment, AssignmentList, InputVar, OutputVar};
use crate::error::{Error, Result};

pub struct SsaInput<'a> {
    pub stmts: &'a [Lowered],
    /// Input flat names with declared widths, in declaration order.
    pub inputs: &'a [(String, Option<u32>)],
    /// Output flat names in declaration order, with whether an unassigned
    /// output may pass its input value through.
    pub outputs: &'a [(String, bool)],
}

pub fn ssa_rename(input: SsaInput<'_>, assumptions: Vec<String>) -> Result<AssignmentList> {
    let mut taken: HashSet<String> = HashSet::new();
    let unique = |candidate: String, taken: &mut HashSet<String>| {
        let mut name = candidate;
        while !taken.insert(name.clone()) {
            name.push('_');
        }
        name
    };

    let mut input_sym: HashMap<&str, String> = HashMap::new();
    let mut inputs = Vec::new();
    for (flat, width) in input.inputs {
        let sym = unique(sanitize(flat), &mut taken);
        input_sym.insert(flat, sym.clone());
        inputs.push(InputVar { name: sym, width: *width });
    }

    let mut writes: HashMap<&str, usize> = HashMap::new();
    for s in input.stmts {
        *writes.entry(&s.lhs).or_default() += 1;
    }
    let versioned = |flat: &str| writes.get(flat).copied().unwrap_or(0) > 1 || input_sym.contains_key(flat);

    // Plain names first so versioned names steer around them.
    let mut plain: HashMap<&str, String> = HashMap::new();
    for s in input.stmts {
        if !versioned(&s.lhs) && !plain.contains_key(s.lhs.as_str()) {
            plain.insert(&s.lhs, unique(sanitize(&s.lhs), &mut taken));
        }
    }

    let mut current: HashMap<&str, String> = input_sym.clone();
    let mut version: HashMap<&str, u32> = HashMap::new();
    let mut bools: HashMap<String, bool> = inputs.iter().map(|i| (i.name.clone(), i.width == Some(1))).collect();
    let mut stmts = Vec::with_capacity(input.stmts.len());
    for s in input.stmts {
        let mut missing = None;
        let rhs = s.rhs.map_vars(&mut |n| match current.get(n) {
            Some(v) => Expr::Var(v.clone()),
            None => {
                missing.get_or_insert_with(|| n.to_string());
                Expr::var(n)
            }
        });
        if let Some(n) = missing {
            return Err(Error::ReadBeforeWrite(n));
        }
        let lhs = if versioned(&s.lhs) {
            let k = version.entry(&s.lhs).or_insert(0);
            *k += 1;
            unique(format!("{}_{k}", sanitize(&s.lhs)), &mut taken)
        } else {
            plain[s.lhs.as_str()].clone()
        };
        let boolean = is_bool(&rhs, &|n| bools.get(n).copied().unwrap_or(false));
        bools.insert(lhs.clone(), boolean);
        current.insert(&s.lhs, lhs.clone());
        stmts.push(Assignment { lhs, rhs, iter: s.iter, boolean });
    }

    let mut outputs = Vec::new();
    for (flat, passthrough) in input.outputs {
        let assigned = writes.contains_key(flat.as_str());
        if !assigned && !passthrough {
            return Err(Error::Invalid(format!("output `{flat}` is never assigned")));
        }
        let ssa = current[flat.as_str()].clone();
        outputs.push(OutputVar { name: sanitize(flat), ssa });
    }
    Ok(AssignmentList { inputs, stmts, outputs, assumptions })
}
