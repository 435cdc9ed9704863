//! Debug renderings: Graphviz DOT and an indented node listing.

use std::collections::{BTreeSet, HashSet};
use std::fmt::Write;

use super::{HedRef, Manager, Node, NodeId};

impl Manager {
    /// DOT graph of the diagrams rooted at `roots`. Constant edges are dashed,
    /// linear edges solid; edge labels carry weights other than one.
    pub fn to_dot(&self, roots: &[(&str, &HedRef)]) -> String {
        let mut out = String::from("digraph hed {\n  node [shape=circle];\n");
        let reachable = self.reachable(roots.iter().map(|(_, r)| r.node()));
        for id in &reachable {
            match self.node(*id) {
                Node::Zero => writeln!(out, "  n0 [shape=box,label=\"0\"];").unwrap(),
                Node::One => writeln!(out, "  n1 [shape=box,label=\"1\"];").unwrap(),
                Node::Var { var, lo, hi } => {
                    writeln!(out, "  n{} [label=\"{}\"];", id.0, escape(self.var_name(*var))).unwrap();
                    for (e, style) in [(lo, "dashed"), (hi, "solid")] {
                        writeln!(out, "  n{} -> n{} [style={style}{}];", id.0, e.node.0, label(&e.weight)).unwrap();
                    }
                }
                Node::Free => {}
            }
        }
        for (i, (name, r)) in roots.iter().enumerate() {
            writeln!(out, "  r{i} [shape=plaintext,label=\"{}\"];", escape(name)).unwrap();
            writeln!(out, "  r{i} -> n{}[style=bold{}];", r.node().0, label(r.weight())).unwrap();
        }
        out.push_str("}\n");
        out
    }

    /// One line per node: `n<id>: <var> const=<w>*n<id> linear=<w>*n<id>`,
    /// children before parents.
    pub fn dump_nodes(&self, r: &HedRef) -> String {
        let mut out = format!("root: {}*n{}\n", r.weight(), r.node().0);
        for id in self.reachable([r.node()]) {
            if let Node::Var { var, lo, hi } = self.node(id) {
                writeln!(
                    out,
                    "n{}: {} const={}*n{} linear={}*n{}",
                    id.0,
                    self.var_name(*var),
                    lo.weight,
                    lo.node.0,
                    hi.weight,
                    hi.node.0
                )
                .unwrap();
            }
        }
        out
    }

    /// Adds the nodes reachable from `r` to `seen`; returns how many were
    /// new.
    pub(crate) fn mark_reachable(&self, r: &HedRef, seen: &mut HashSet<NodeId>) -> usize {
        let before = seen.len();
        let mut stack = vec![r.edge.node];
        while let Some(id) = stack.pop() {
            if id.is_terminal() || !seen.insert(id) {
                continue;
            }
            if let Node::Var { lo, hi, .. } = self.node(id) {
                stack.push(lo.node);
                stack.push(hi.node);
            }
        }
        seen.len() - before
    }

    /// Reachable nodes in ascending id order (children are always created
    /// before their parents, except for recycled slots, which is harmless
    /// for rendering).
    pub(crate) fn reachable(&self, roots: impl IntoIterator<Item = NodeId>) -> BTreeSet<NodeId> {
        let mut seen = HashSet::new();
        let mut stack: Vec<NodeId> = roots.into_iter().collect();
        while let Some(id) = stack.pop() {
            if !seen.insert(id) {
                continue;
            }
            if let Node::Var { lo, hi, .. } = self.node(id) {
                stack.push(lo.node);
                stack.push(hi.node);
            }
        }
        seen.into_iter().collect()
    }
}

fn label(w: &num_bigint::BigInt) -> String {
    if *w == num_bigint::BigInt::from(1) {
        String::new()
    } else {
        format!(",label=\"{w}\"")
    }
}

fn escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}
