//! Sequential equivalence checking of two assignment lists with dynamic cut
//! points.
//!
//! Each design keeps an environment mapping every discharged name to a
//! diagram over the shared basis (primary inputs plus cut variables). A round
//! selects a segment from each list, builds it over the environment, and
//! matches segment outputs by canonical identity. Each matched value gets one
//! shared cut variable installed on both sides; matched statements and their
//! exclusive fan-in leave the segments. When nothing matches, segment outputs
//! are peeled back onto the unprocessed list to expose internal values.
//!
//! Corresponding design outputs are finally compared through their bindings.
//! Pairs that cannot be confirmed that way are re-checked by a rebuild over
//! the primary inputs without cut points, which decides the verdict.

pub(crate) mod build;
mod report;

use std::collections::{HashMap, HashSet, VecDeque};

use web_time::Instant;

use crate::dfl::AssignmentList;
use crate::error::{Error, Result};
use crate::hed::{HedRef, Manager, NodeId, VarId};
use crate::modular::{reduce_mod, RingConfig};

use build::{boolean_names, build_all, output_value, register_inputs_ordered, ring_only, Scope};
pub use report::{Counters, MatchRecord, Mismatch, Report, Verdict, SCHEMA_VERSION};

/// How much of an assignment list one segment may take.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SegmentLimit {
    /// The whole remaining list.
    Unbounded,
    /// Diagram nodes reachable from the segment's values.
    Nodes(usize),
    /// Statements per segment.
    Statements(usize),
}

#[derive(Clone, Debug)]
pub struct SecConfig {
    /// Compare modulo `2^w` when set, over the integers otherwise.
    pub ring: Option<RingConfig>,
    pub limit: SegmentLimit,
    /// Separate limit for the implementation side; `limit` when absent.
    pub impl_limit: Option<SegmentLimit>,
    /// Explicit `(spec output, impl output)` correspondence; by name when
    /// absent.
    pub output_map: Option<Vec<(String, String)>>,
    pub input_order: InputOrder,
}

/// Order of the primary input variables in the diagrams. Verdicts do not
/// depend on it; diagram sizes do.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum InputOrder {
    /// By first read in the specification, then the implementation.
    #[default]
    FirstAppearance,
    /// By declaration in the specification, then the implementation.
    Declaration,
}

impl Default for SecConfig {
    fn default() -> Self {
        SecConfig {
            ring: None,
            limit: SegmentLimit::Unbounded,
            impl_limit: None,
            output_map: None,
            input_order: InputOrder::FirstAppearance,
        }
    }
}

/// Pairs of `(spec logical output, impl logical output)`.
fn correspondence(
    spec: &AssignmentList,
    imp: &AssignmentList,
    map: Option<&[(String, String)]>,
) -> Result<Vec<(String, String)>> {
    let pairs: Vec<(String, String)> = match map {
        Some(m) => m.to_vec(),
        None => spec.outputs.iter().map(|o| (o.name.clone(), o.name.clone())).collect(),
    };
    let mut seen_s = HashSet::new();
    let mut seen_i = HashSet::new();
    for (s, i) in &pairs {
        if spec.output(s).is_none() || !seen_s.insert(s.as_str()) {
            return Err(Error::Correspondence(s.clone()));
        }
        if imp.output(i).is_none() || !seen_i.insert(i.as_str()) {
            return Err(Error::Correspondence(i.clone()));
        }
    }
    if let Some(o) = spec.outputs.iter().find(|o| !seen_s.contains(o.name.as_str())) {
        return Err(Error::Correspondence(o.name.clone()));
    }
    if let Some(o) = imp.outputs.iter().find(|o| !seen_i.contains(o.name.as_str())) {
        return Err(Error::Correspondence(o.name.clone()));
    }
    Ok(pairs)
}

struct Side<'a> {
    list: &'a AssignmentList,
    pending: VecDeque<usize>,
    seg: Vec<usize>,
    done: Vec<bool>,
    env: HashMap<String, HedRef>,
    /// Values of the current segment's statements.
    built: HashMap<String, HedRef>,
    bools: HashMap<String, bool>,
    readers: HashMap<String, Vec<usize>>,
    index: HashMap<String, usize>,
    exported: HashSet<String>,
}

impl<'a> Side<'a> {
    fn new(list: &'a AssignmentList) -> Self {
        let mut readers: HashMap<String, Vec<usize>> = HashMap::new();
        let mut index = HashMap::new();
        for (k, st) in list.stmts.iter().enumerate() {
            index.insert(st.lhs.clone(), k);
            for r in st.rhs.reads() {
                let e = readers.entry(r.to_string()).or_default();
                if e.last() != Some(&k) {
                    e.push(k);
                }
            }
        }
        let exported: HashSet<String> = list.outputs.iter().map(|o| o.ssa.clone()).collect();
        // Only statements in the cone of influence of the outputs matter.
        let mut live = vec![false; list.stmts.len()];
        let mut stack: Vec<usize> = exported.iter().filter_map(|n| index.get(n).copied()).collect();
        while let Some(k) = stack.pop() {
            if std::mem::replace(&mut live[k], true) {
                continue;
            }
            stack.extend(list.stmts[k].rhs.reads().into_iter().filter_map(|r| index.get(r).copied()));
        }
        Side {
            list,
            pending: (0..list.stmts.len()).filter(|&k| live[k]).collect(),
            seg: Vec::new(),
            done: live.iter().map(|l| !l).collect(),
            env: HashMap::new(),
            built: HashMap::new(),
            bools: boolean_names(list),
            readers,
            index,
            exported,
        }
    }

    fn lhs(&self, k: usize) -> &str {
        &self.list.stmts[k].lhs
    }

    fn is_empty(&self) -> bool {
        self.pending.is_empty() && self.seg.is_empty()
    }

    /// Output statements of the sub-segment `ts`: exported names and names
    /// not read later within `ts`.
    fn outputs(&self, ts: &[usize]) -> Vec<usize> {
        let members: HashSet<usize> = ts.iter().copied().collect();
        ts.iter()
            .copied()
            .filter(|&k| {
                let lhs = self.lhs(k);
                self.exported.contains(lhs)
                    || !self.readers.get(lhs).is_some_and(|rs| rs.iter().any(|r| *r > k && members.contains(r)))
            })
            .collect()
    }

    /// Statements of `ts` not read later within `ts`; removing them keeps
    /// the rest of `ts` closed under its own reads.
    fn sinks(&self, ts: &[usize]) -> Vec<usize> {
        let members: HashSet<usize> = ts.iter().copied().collect();
        ts.iter()
            .copied()
            .filter(|&k| {
                !self.readers.get(self.lhs(k)).is_some_and(|rs| rs.iter().any(|r| *r > k && members.contains(r)))
            })
            .collect()
    }
}

/// A set of outputs from both segments sharing one canonical value.
struct Group {
    spec: Vec<usize>,
    imp: Vec<usize>,
    value: HedRef,
}

struct Engine<'a> {
    m: Manager,
    cfg: &'a SecConfig,
    inputs: HashMap<String, (VarId, HedRef)>,
    spec: Side<'a>,
    imp: Side<'a>,
    /// Whether internal values may be matched modulo `2^w`.
    modular_cuts: bool,
    counters: Counters,
    matched: Vec<MatchRecord>,
    inexact: Vec<String>,
    last_live: usize,
}

/// Checks `spec` against `imp`.
pub fn sec_piped(spec: &AssignmentList, imp: &AssignmentList, cfg: &SecConfig) -> Result<Report> {
    let start = Instant::now();
    spec.validate()?;
    imp.validate()?;
    let pairs = correspondence(spec, imp, cfg.output_map.as_deref())?;
    let mut m = Manager::new();
    let inputs = register_inputs_ordered(&mut m, &[spec, imp], cfg.input_order)?;
    let ring_safe = |list: &AssignmentList| {
        let bools = boolean_names(list);
        let is_bool = |n: &str| bools.get(n).copied().unwrap_or(false);
        let is_input = |n: &str| inputs.contains_key(n);
        list.stmts.iter().all(|s| ring_only(&s.rhs, &is_bool, &is_input))
    };
    let modular_cuts = cfg.ring.is_some() && ring_safe(spec) && ring_safe(imp);
    let mut e = Engine {
        m,
        cfg,
        inputs,
        spec: Side::new(spec),
        imp: Side::new(imp),
        modular_cuts,
        counters: Counters::default(),
        matched: Vec::new(),
        inexact: Vec::new(),
        last_live: 0,
    };
    e.run()?;
    let unmatched = e.decide(&pairs)?;
    e.counters.peak_node_count = e.m.peak_node_count();
    let mut assumptions: Vec<String> = spec.assumptions.iter().map(|a| format!("spec: {a}")).collect();
    assumptions.extend(imp.assumptions.iter().map(|a| format!("impl: {a}")));
    e.inexact.sort();
    e.inexact.dedup();
    Ok(Report {
        schema_version: SCHEMA_VERSION,
        verdict: if unmatched.is_empty() { Verdict::Equivalent } else { Verdict::Unequivalent },
        width: cfg.ring.as_ref().map(|r| r.width),
        matched: e.matched,
        unmatched,
        counters: e.counters,
        inexact: e.inexact,
        assumptions,
        elapsed_ms: start.elapsed().as_millis() as u64,
    })
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Which {
    Spec,
    Impl,
}

impl<'a> Engine<'a> {
    fn side(&self, w: Which) -> &Side<'a> {
        match w {
            Which::Spec => &self.spec,
            Which::Impl => &self.imp,
        }
    }

    fn run(&mut self) -> Result<()> {
        while !(self.spec.is_empty() && self.imp.is_empty()) {
            self.counters.segments += 1;
            self.select(Which::Spec)?;
            self.select(Which::Impl)?;
            let so = self.spec.outputs(&self.spec.seg);
            let io = self.imp.outputs(&self.imp.seg);
            let mut groups = self.equ(&so, &io)?;
            if groups.is_empty() {
                if self.spec.pending.is_empty() && self.imp.pending.is_empty() {
                    // Nothing is left to construct, so nothing is blocked:
                    // the residual outputs are decided by the final
                    // comparison.
                    break;
                }
                // Internal search frees room so construction can go on.
                groups = self.internal_equ()?;
            }
            if groups.is_empty() {
                continue;
            }
            self.update(groups)?;
            self.maybe_collect();
        }
        Ok(())
    }

    /// Builds the residual segment and extends it from the unprocessed list
    /// within the limit, always taking at least one new statement.
    fn select(&mut self, w: Which) -> Result<()> {
        let Engine { m, inputs, spec, imp, inexact, counters, cfg, .. } = self;
        let (side, limit) = match w {
            Which::Spec => (spec, cfg.limit),
            Which::Impl => (imp, cfg.impl_limit.unwrap_or(cfg.limit)),
        };
        side.built.clear();
        let mut seen: HashSet<NodeId> = HashSet::new();
        let seg = side.seg.clone();
        for k in seg {
            let v = build_stmt(m, side, inputs, k, inexact)?;
            m.mark_reachable(&v, &mut seen);
            side.built.insert(side.lhs(k).to_string(), v);
        }
        let mut added = 0usize;
        while let Some(&k) = side.pending.front() {
            if let SegmentLimit::Statements(n) = limit {
                if added > 0 && side.seg.len() >= n {
                    break;
                }
            }
            let v = build_stmt(m, side, inputs, k, inexact)?;
            if let SegmentLimit::Nodes(budget) = limit {
                m.mark_reachable(&v, &mut seen);
                if seen.len() > budget {
                    if added > 0 {
                        break;
                    }
                    counters.budget_overruns += 1;
                }
            }
            side.pending.pop_front();
            side.seg.push(k);
            side.built.insert(side.lhs(k).to_string(), v);
            added += 1;
        }
        counters.max_segment_nodes = counters.max_segment_nodes.max(segment_size(m, side));
        Ok(())
    }

    /// Canonical key under which values are matched.
    fn key(&mut self, v: &HedRef) -> Result<HedRef> {
        match &self.cfg.ring {
            Some(ring) if self.modular_cuts => reduce_mod(&mut self.m, v, ring),
            _ => Ok(v.clone()),
        }
    }

    fn equ(&mut self, so: &[usize], io: &[usize]) -> Result<Vec<Group>> {
        let mut by_key: HashMap<HedRef, usize> = HashMap::new();
        let mut groups: Vec<Group> = Vec::new();
        for &k in so {
            let v = self.spec.built[self.spec.lhs(k)].clone();
            let key = self.key(&v)?;
            match by_key.get(&key) {
                Some(&g) => groups[g].spec.push(k),
                None => {
                    by_key.insert(key.clone(), groups.len());
                    groups.push(Group { spec: vec![k], imp: Vec::new(), value: key });
                }
            }
        }
        for &k in io {
            let v = self.imp.built[self.imp.lhs(k)].clone();
            let key = self.key(&v)?;
            if let Some(&g) = by_key.get(&key) {
                groups[g].imp.push(k);
            }
        }
        groups.retain(|g| !g.imp.is_empty());
        Ok(groups)
    }

    /// Peels the segment layer by layer, first on the spec side and then on
    /// the impl side, until some exposed value matches. A layer is the set of
    /// statements no remaining segment statement reads, so an exported value
    /// that is still read stays until its readers are gone. Peeled statements
    /// return to the front of their unprocessed list.
    fn internal_equ(&mut self) -> Result<Vec<Group>> {
        self.counters.internal_equ_calls += 1;
        for w in [Which::Spec, Which::Impl] {
            let mut ts = self.side(w).seg.clone();
            let mut peeled: Vec<usize> = Vec::new();
            loop {
                let outs = self.side(w).sinks(&ts);
                ts.retain(|k| !outs.contains(k));
                peeled.extend(outs);
                if ts.is_empty() {
                    break;
                }
                self.counters.peel_rounds += 1;
                let (so, io) = match w {
                    Which::Spec => (self.spec.outputs(&ts), self.imp.outputs(&self.imp.seg)),
                    Which::Impl => (self.spec.outputs(&self.spec.seg), self.imp.outputs(&ts)),
                };
                let groups = self.equ(&so, &io)?;
                if !groups.is_empty() {
                    let side = match w {
                        Which::Spec => &mut self.spec,
                        Which::Impl => &mut self.imp,
                    };
                    side.seg = ts;
                    peeled.sort_unstable();
                    for k in peeled.into_iter().rev() {
                        side.pending.push_front(k);
                    }
                    return Ok(groups);
                }
            }
        }
        Ok(Vec::new())
    }

    fn update(&mut self, groups: Vec<Group>) -> Result<()> {
        let mut spec_bind: HashMap<usize, HedRef> = HashMap::new();
        let mut imp_bind: HashMap<usize, HedRef> = HashMap::new();
        for g in groups {
            let atomic = g.value.as_const().is_some() || self.is_single_var(&g.value)?;
            let (binding, cut) = if atomic {
                (g.value.clone(), None)
            } else {
                let boolean = g.spec.iter().any(|&k| self.spec.list.stmts[k].boolean)
                    || g.imp.iter().any(|&k| self.imp.list.stmts[k].boolean);
                let c = self.m.new_cut_var(boolean);
                self.counters.cut_vars += 1;
                (self.m.mk_var(c)?, Some(self.m.var_name(c).to_string()))
            };
            for &s in &g.spec {
                for &i in &g.imp {
                    self.matched.push(MatchRecord {
                        spec: self.spec.lhs(s).to_string(),
                        implementation: self.imp.lhs(i).to_string(),
                        cut_var: cut.clone(),
                    });
                }
                spec_bind.insert(s, binding.clone());
            }
            for &i in &g.imp {
                imp_bind.insert(i, binding.clone());
            }
        }
        discharge(&mut self.spec, spec_bind);
        discharge(&mut self.imp, imp_bind);
        Ok(())
    }

    fn is_single_var(&mut self, v: &HedRef) -> Result<bool> {
        match self.m.top(v) {
            Some(x) => Ok(self.m.mk_var(x)? == *v),
            None => Ok(false),
        }
    }

    fn maybe_collect(&mut self) {
        if self.m.node_count() <= (2 * self.last_live).max(1 << 14) {
            return;
        }
        let mut roots: Vec<HedRef> = Vec::new();
        for side in [&self.spec, &self.imp] {
            let mut names: Vec<&String> = side.env.keys().collect();
            names.sort();
            roots.extend(names.into_iter().map(|n| side.env[n].clone()));
        }
        self.m.collect(roots.iter());
        self.last_live = self.m.node_count();
    }

    /// Compares corresponding outputs; unresolved pairs are confirmed by a
    /// rebuild over the primary inputs.
    fn decide(&mut self, pairs: &[(String, String)]) -> Result<Vec<Mismatch>> {
        let mut unresolved = Vec::new();
        for (so, io) in pairs {
            let ss = self.spec.list.output(so).expect("checked").ssa.clone();
            let is = self.imp.list.output(io).expect("checked").ssa.clone();
            let vs = self.current_value(Which::Spec, &ss)?;
            let vi = self.current_value(Which::Impl, &is)?;
            if !self.same(&vs, &vi)? {
                unresolved.push((so.clone(), io.clone(), ss, is));
            }
        }
        if unresolved.is_empty() {
            return Ok(Vec::new());
        }
        self.counters.confirmation_reruns += 1;
        let full_s = build_all(&mut self.m, self.spec.list, &self.inputs, &mut self.inexact)?;
        let full_i = build_all(&mut self.m, self.imp.list, &self.inputs, &mut self.inexact)?;
        let mut out = Vec::new();
        for (so, io, ss, is) in unresolved {
            let vs = output_value(&ss, &full_s, &self.inputs).ok_or_else(|| Error::Unresolved(ss.clone()))?;
            let vi = output_value(&is, &full_i, &self.inputs).ok_or_else(|| Error::Unresolved(is.clone()))?;
            if self.same(&vs, &vi)? {
                self.counters.recovered_outputs += 1;
                continue;
            }
            let d = self.m.sub(&vs, &vi)?;
            let d = match &self.cfg.ring {
                Some(ring) => reduce_mod(&mut self.m, &d, ring)?,
                None => d,
            };
            out.push(Mismatch {
                output: if so == io { so } else { format!("{so}/{io}") },
                spec: ss,
                implementation: is,
                difference: truncate(self.m.format(&d)?, 240),
            });
        }
        Ok(out)
    }

    fn current_value(&mut self, w: Which, ssa: &str) -> Result<HedRef> {
        let side = self.side(w);
        if let Some(v) = side.env.get(ssa).or_else(|| side.built.get(ssa)) {
            return Ok(v.clone());
        }
        if let Some((_, v)) = self.inputs.get(ssa) {
            return Ok(v.clone());
        }
        // Left in an unprocessed position; build it over the environment.
        let k = *side.index.get(ssa).ok_or_else(|| Error::Unresolved(ssa.to_string()))?;
        let Engine { m, inputs, spec, imp, inexact, .. } = self;
        let side = match w {
            Which::Spec => spec,
            Which::Impl => imp,
        };
        build_stmt(m, side, inputs, k, inexact)
    }

    fn same(&mut self, a: &HedRef, b: &HedRef) -> Result<bool> {
        if a == b {
            return Ok(true);
        }
        match &self.cfg.ring {
            Some(ring) => {
                let d = self.m.sub(a, b)?;
                Ok(reduce_mod(&mut self.m, &d, ring)?.is_zero())
            }
            None => Ok(false),
        }
    }
}

fn segment_size(m: &Manager, side: &Side<'_>) -> usize {
    let mut seen = HashSet::new();
    for k in &side.seg {
        if let Some(v) = side.built.get(side.lhs(*k)) {
            m.mark_reachable(v, &mut seen);
        }
    }
    seen.len()
}

/// Builds statement `k` over the segment values, the environment and the
/// inputs.
fn build_stmt(
    m: &mut Manager,
    side: &Side<'_>,
    inputs: &HashMap<String, (VarId, HedRef)>,
    k: usize,
    notes: &mut Vec<String>,
) -> Result<HedRef> {
    let st = &side.list.stmts[k];
    let lookup = |n: &str| {
        side.built.get(n).or_else(|| side.env.get(n)).cloned().or_else(|| inputs.get(n).map(|(_, r)| r.clone()))
    };
    let boolean = |n: &str| side.bools.get(n).copied().unwrap_or(false);
    let input = |n: &str| inputs.get(n).map(|(v, _)| *v);
    let scope = Scope { value: &lookup, boolean: &boolean, input: &input };
    let mut local = Vec::new();
    let v = build::build(m, &st.rhs, &scope, &mut local)?;
    notes.extend(local.into_iter().map(|n| format!("{}: {n}", st.lhs)));
    Ok(v)
}

/// Removes matched statements and their exclusive fan-in from the segment.
/// Matched names are rebound to their binding; discharged intermediates
/// still read elsewhere keep their value over the basis.
fn discharge(side: &mut Side<'_>, bind: HashMap<usize, HedRef>) {
    let members: HashSet<usize> = side.seg.iter().copied().collect();
    let mut fanin: HashSet<usize> = HashSet::new();
    let mut stack: Vec<usize> = bind.keys().copied().collect();
    while let Some(k) = stack.pop() {
        for r in side.list.stmts[k].rhs.reads() {
            if let Some(&d) = side.index.get(r) {
                if members.contains(&d) && fanin.insert(d) {
                    stack.push(d);
                }
            }
        }
    }
    let mut gone: HashSet<usize> = bind.keys().copied().collect();
    for &k in side.seg.iter().rev() {
        if gone.contains(&k) || !fanin.contains(&k) || side.exported.contains(side.lhs(k)) {
            continue;
        }
        let exclusive =
            side.readers.get(side.lhs(k)).is_none_or(|rs| rs.iter().all(|r| !members.contains(r) || gone.contains(r)));
        if exclusive {
            gone.insert(k);
        }
    }
    for &k in &gone {
        side.done[k] = true;
    }
    for &k in &gone {
        let lhs = side.list.stmts[k].lhs.clone();
        let value = match bind.get(&k) {
            Some(b) => b.clone(),
            None => side.built[&lhs].clone(),
        };
        let needed =
            side.exported.contains(&lhs) || side.readers.get(&lhs).is_some_and(|rs| rs.iter().any(|r| !side.done[*r]));
        if needed {
            side.env.insert(lhs, value);
        }
    }
    side.seg.retain(|k| !gone.contains(k));
    // Drop bindings nobody will read again.
    let Side { env, readers, done, exported, .. } = side;
    env.retain(|n, _| exported.contains(n) || readers.get(n).is_some_and(|rs| rs.iter().any(|r| !done[*r])));
}

fn truncate(mut s: String, n: usize) -> String {
    if s.len() > n {
        let mut cut = n;
        while !s.is_char_boundary(cut) {
            cut -= 1;
        }
        s.truncate(cut);
        s.push_str(" ...");
    }
    s
}

#[cfg(test)]
mod tests;
