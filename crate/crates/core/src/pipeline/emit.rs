//! Rendering an assignment list back into DFL source over the interface of
//! an existing program.

use std::collections::{HashMap, HashSet};
use std::fmt::Write;

use crate::dfl::{input_flats, output_flats, AssignmentList, DeclKind, Expr, Program};

/// DFL source computing `list` with the inputs and outputs of `program`.
///
/// Statements become `var` temporaries (renamed away from declared names);
/// outputs are written at the end so every statement reads the original
/// input values. `cycles`, when given, places a `cycle;` marker between
/// statements issued in different cycles.
pub fn to_dfl(list: &AssignmentList, program: &Program, cycles: Option<&[u32]>) -> String {
    let mut out = String::new();
    let mut declared: HashSet<&str> = HashSet::new();
    for d in program.decls.iter().filter(|d| d.kind != DeclKind::Var) {
        writeln!(out, "{d}").unwrap();
        declared.insert(&d.name);
    }

    // Input symbols of the list, in declaration order, map back to the
    // program's flat names (`aar[2]`).
    let mut names: HashMap<String, String> =
        list.inputs.iter().zip(input_flats(program)).map(|(i, (flat, _))| (i.name.clone(), flat)).collect();
    let mut used: HashSet<String> = declared.iter().map(|s| s.to_string()).collect();
    for s in &list.stmts {
        let mut name = s.lhs.clone();
        while used.contains(&name) {
            name.push('_');
        }
        used.insert(name.clone());
        writeln!(out, "var {name};").unwrap();
        names.insert(s.lhs.clone(), name);
    }
    let rename = |e: &Expr| e.map_vars(&mut |v| Expr::Var(names.get(v).cloned().unwrap_or_else(|| v.to_string())));

    for (k, s) in list.stmts.iter().enumerate() {
        if let Some(c) = cycles {
            if k > 0 && c.get(k) != c.get(k - 1) {
                writeln!(out, "cycle;").unwrap();
            }
        }
        writeln!(out, "{} := {};", names[&s.lhs], rename(&s.rhs)).unwrap();
    }

    for ((flat, _), o) in output_flats(program).iter().zip(&list.outputs) {
        // An in-place element never written reads back its own input.
        if list.input_width(&o.ssa).is_some() && names[&o.ssa] == *flat {
            continue;
        }
        writeln!(out, "{flat} := {};", names[&o.ssa]).unwrap();
    }
    out
}
