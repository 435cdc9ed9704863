//! Horner expansion diagrams.
//!
//! A polynomial `F` over integer variables is decomposed with respect to its
//! top variable `x` as `F = F(x=0) + x * L`, where the constant part `F(x=0)`
//! no longer mentions `x` and the linear part `L` may (higher powers of `x`
//! become a chain of `x` nodes). Nodes are hash-consed in a unique table and
//! every edge carries a multiplicative integer weight. A node's two outgoing
//! weights are normalized so that their gcd is one and the first nonzero
//! weight, in (const, linear) order, is positive. Together with the rule that
//! a node whose linear part is zero is replaced by its constant part, this
//! makes a [`HedRef`] canonical: two references denote the same polynomial
//! over the integers iff they are equal.

mod algebra;
mod dump;
pub(crate) mod poly;

use std::collections::HashMap;
use std::sync::atomic::{AtomicU32, Ordering};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

pub use algebra::Division;
pub use poly::{Monomial, Polynomial, TermRecord};

static NEXT_MANAGER: AtomicU32 = AtomicU32::new(1);

/// Position of a variable in the manager's total order. Variables with a
/// larger index sit closer to the root.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VarId(pub(crate) u32);

impl VarId {
    pub fn index(self) -> u32 {
        self.0
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NodeId(pub(crate) u32);

impl NodeId {
    pub const ZERO: NodeId = NodeId(0);
    pub const ONE: NodeId = NodeId(1);

    pub fn is_terminal(self) -> bool {
        self.0 < 2
    }
}

/// Value range of a variable. Boolean variables are idempotent under
/// multiplication (`b * b = b`), so their diagrams stay multilinear.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum VarRange {
    /// Any integer (or any residue when checking modulo `2^w`).
    Full,
    /// `{0, 1}`.
    Boolean,
    /// `[0, 2^k)`.
    Bits(u32),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SlicePart {
    High,
    Bit,
    Low,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum VarKind {
    Input,
    Slice { source: VarId, bit: u32, part: SlicePart },
    Cut,
    Shift { base: VarId, amount: u32 },
    Opaque { op: String },
}

#[derive(Clone, Debug)]
pub struct VarInfo {
    pub name: String,
    pub kind: VarKind,
    pub range: VarRange,
}

/// Weighted edge without manager tag; the internal currency of the apply
/// routines.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub(crate) struct Edge {
    pub(crate) weight: BigInt,
    pub(crate) node: NodeId,
}

impl Edge {
    pub(crate) fn zero() -> Edge {
        Edge { weight: BigInt::zero(), node: NodeId::ZERO }
    }

    pub(crate) fn constant(v: BigInt) -> Edge {
        if v.is_zero() {
            Edge::zero()
        } else {
            Edge { weight: v, node: NodeId::ONE }
        }
    }

    pub(crate) fn is_zero(&self) -> bool {
        self.weight.is_zero()
    }

    pub(crate) fn scaled(&self, k: &BigInt) -> Edge {
        if k.is_zero() || self.is_zero() {
            Edge::zero()
        } else {
            Edge { weight: &self.weight * k, node: self.node }
        }
    }
}

/// Weighted handle to a hash-consed node; the unit of canonical comparison.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct HedRef {
    pub(crate) edge: Edge,
    pub(crate) owner: u32,
}

impl HedRef {
    pub fn weight(&self) -> &BigInt {
        &self.edge.weight
    }

    pub fn node(&self) -> NodeId {
        self.edge.node
    }

    pub fn is_zero(&self) -> bool {
        self.edge.is_zero()
    }

    /// The constant value, if this reference has no variables.
    pub fn as_const(&self) -> Option<&BigInt> {
        self.edge.node.is_terminal().then_some(&self.edge.weight)
    }
}

#[derive(Clone, Debug)]
pub(crate) enum Node {
    Zero,
    One,
    Var { var: VarId, lo: Edge, hi: Edge },
    Free,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
struct UniqueKey {
    var: VarId,
    lo: Edge,
    hi: Edge,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub(crate) struct OpaqueKey {
    pub(crate) op: String,
    pub(crate) args: Vec<Edge>,
    pub(crate) imm: u64,
}

/// Owner of all nodes and variables for one checking session.
///
/// Single-threaded; references are only meaningful within the manager that
/// created them.
pub struct Manager {
    id: u32,
    nodes: Vec<Node>,
    free: Vec<u32>,
    unique: HashMap<UniqueKey, NodeId>,
    vars: Vec<VarInfo>,
    by_name: HashMap<String, VarId>,
    live: usize,
    peak: usize,
    caching: bool,
    pub(crate) add_cache: HashMap<(Edge, Edge), Edge>,
    pub(crate) mul_cache: HashMap<(NodeId, NodeId), Edge>,
    pub(crate) mod_cache: HashMap<(Edge, u32), Edge>,
    pinned: Vec<Edge>,
    slices: HashMap<(VarId, u32), (VarId, VarId, VarId)>,
    sliced: HashMap<VarId, u32>,
    shifts: HashMap<(VarId, u32), VarId>,
    opaque: HashMap<OpaqueKey, VarId>,
    cut_count: u32,
}

impl Default for Manager {
    fn default() -> Self {
        Self::new()
    }
}

impl Manager {
    pub fn new() -> Self {
        Manager {
            id: NEXT_MANAGER.fetch_add(1, Ordering::Relaxed),
            nodes: vec![Node::Zero, Node::One],
            free: Vec::new(),
            unique: HashMap::new(),
            vars: Vec::new(),
            by_name: HashMap::new(),
            live: 2,
            peak: 2,
            caching: true,
            add_cache: HashMap::new(),
            mul_cache: HashMap::new(),
            mod_cache: HashMap::new(),
            pinned: Vec::new(),
            slices: HashMap::new(),
            sliced: HashMap::new(),
            shifts: HashMap::new(),
            opaque: HashMap::new(),
            cut_count: 0,
        }
    }

    /// Registers `names` as inputs in the given order (later names sit closer
    /// to the root).
    pub fn with_order<S: AsRef<str>>(names: &[S]) -> Result<Self> {
        let mut m = Manager::new();
        for n in names {
            m.add_var(n.as_ref(), VarKind::Input, VarRange::Full)?;
        }
        Ok(m)
    }

    /// Enables or disables the apply caches. Results are identical either way.
    pub fn set_caching(&mut self, on: bool) {
        self.caching = on;
        if !on {
            self.clear_caches();
        }
    }

    pub(crate) fn caching(&self) -> bool {
        self.caching
    }

    fn clear_caches(&mut self) {
        self.add_cache.clear();
        self.mul_cache.clear();
        self.mod_cache.clear();
    }

    // ---- variables ----------------------------------------------------

    pub fn add_var(&mut self, name: &str, kind: VarKind, range: VarRange) -> Result<VarId> {
        if self.by_name.contains_key(name) {
            return Err(Error::DuplicateVar(name.to_string()));
        }
        let id = VarId(self.vars.len() as u32);
        self.vars.push(VarInfo { name: name.to_string(), kind, range });
        self.by_name.insert(name.to_string(), id);
        Ok(id)
    }

    /// Returns the input variable `name`, registering it with the next order
    /// index if it is new.
    pub fn input(&mut self, name: &str, range: VarRange) -> VarId {
        match self.by_name.get(name) {
            Some(&v) => v,
            None => self.add_var(name, VarKind::Input, range).expect("fresh name"),
        }
    }

    pub fn var_by_name(&self, name: &str) -> Option<VarId> {
        self.by_name.get(name).copied()
    }

    pub fn var_info(&self, v: VarId) -> &VarInfo {
        &self.vars[v.0 as usize]
    }

    pub fn var_name(&self, v: VarId) -> &str {
        &self.vars[v.0 as usize].name
    }

    pub fn var_count(&self) -> usize {
        self.vars.len()
    }

    pub fn is_boolean(&self, v: VarId) -> bool {
        self.vars[v.0 as usize].range == VarRange::Boolean
    }

    fn check_var(&self, v: VarId) -> Result<()> {
        if (v.0 as usize) < self.vars.len() {
            Ok(())
        } else {
            Err(Error::UnknownVar(format!("#{}", v.0)))
        }
    }

    /// Allocates a fresh cut variable.
    pub fn new_cut_var(&mut self, boolean: bool) -> VarId {
        let name = format!("cut#{}", self.cut_count);
        self.cut_count += 1;
        let range = if boolean { VarRange::Boolean } else { VarRange::Full };
        self.add_var(&name, VarKind::Cut, range).expect("cut names are unique")
    }

    pub fn cut_var_count(&self) -> u32 {
        self.cut_count
    }

    // ---- references ---------------------------------------------------

    pub(crate) fn wrap(&self, edge: Edge) -> HedRef {
        HedRef { edge, owner: self.id }
    }

    pub(crate) fn own<'a>(&self, r: &'a HedRef) -> Result<&'a Edge> {
        if r.owner == self.id {
            Ok(&r.edge)
        } else {
            Err(Error::CrossManager)
        }
    }

    pub fn zero(&self) -> HedRef {
        self.wrap(Edge::zero())
    }

    pub fn mk_const<T: Into<BigInt>>(&self, v: T) -> HedRef {
        self.wrap(Edge::constant(v.into()))
    }

    pub fn mk_var(&mut self, v: VarId) -> Result<HedRef> {
        self.check_var(v)?;
        let e = self.var_edge(v);
        Ok(self.wrap(e))
    }

    pub(crate) fn var_edge(&mut self, v: VarId) -> Edge {
        self.make_node(v, Edge::zero(), Edge::constant(BigInt::one()))
    }

    /// Builds `const_edge + v * linear_edge`, applying the reduction rules and
    /// weight normalization.
    pub fn mk_node(&mut self, v: VarId, const_edge: &HedRef, linear_edge: &HedRef) -> Result<HedRef> {
        self.check_var(v)?;
        let lo = self.own(const_edge)?.clone();
        let hi = self.own(linear_edge)?.clone();
        if let Some(t) = self.top_var(&lo) {
            if t >= v {
                return Err(Error::OrderViolation(format!(
                    "constant part of `{}` depends on `{}`",
                    self.var_name(v),
                    self.var_name(t)
                )));
            }
        }
        if let Some(t) = self.top_var(&hi) {
            if t > v || (t == v && self.is_boolean(v)) {
                return Err(Error::OrderViolation(format!(
                    "linear part of `{}` depends on `{}`",
                    self.var_name(v),
                    self.var_name(t)
                )));
            }
        }
        let e = self.make_node(v, lo, hi);
        Ok(self.wrap(e))
    }

    /// Rule 1, gcd/sign normalization and interning (Rule 2).
    pub(crate) fn make_node(&mut self, var: VarId, lo: Edge, hi: Edge) -> Edge {
        if hi.is_zero() {
            return lo;
        }
        let mut g = lo.weight.gcd(&hi.weight);
        let negative = if lo.weight.is_zero() { hi.weight.is_negative() } else { lo.weight.is_negative() };
        if negative {
            g = -g;
        }
        let lo = if lo.is_zero() { lo } else { Edge { weight: &lo.weight / &g, node: lo.node } };
        let hi = Edge { weight: &hi.weight / &g, node: hi.node };
        let key = UniqueKey { var, lo, hi };
        let id = match self.unique.get(&key) {
            Some(&id) => id,
            None => {
                let node = Node::Var { var, lo: key.lo.clone(), hi: key.hi.clone() };
                let id = match self.free.pop() {
                    Some(slot) => {
                        self.nodes[slot as usize] = node;
                        NodeId(slot)
                    }
                    None => {
                        self.nodes.push(node);
                        NodeId(self.nodes.len() as u32 - 1)
                    }
                };
                self.unique.insert(key, id);
                self.live += 1;
                self.peak = self.peak.max(self.live);
                id
            }
        };
        Edge { weight: g, node: id }
    }

    pub(crate) fn node(&self, id: NodeId) -> &Node {
        &self.nodes[id.0 as usize]
    }

    pub(crate) fn top_var(&self, e: &Edge) -> Option<VarId> {
        match self.node(e.node) {
            Node::Var { var, .. } => Some(*var),
            _ => None,
        }
    }

    /// Top variable of a reference (`None` for constants).
    pub fn top(&self, r: &HedRef) -> Option<VarId> {
        self.top_var(&r.edge)
    }

    /// Children of a variable node as references: `(var, const, linear)`.
    pub fn children(&self, id: NodeId) -> Option<(VarId, HedRef, HedRef)> {
        match self.node(id) {
            Node::Var { var, lo, hi } => Some((*var, self.wrap(lo.clone()), self.wrap(hi.clone()))),
            _ => None,
        }
    }

    /// Number of stored nodes, terminals included.
    pub fn node_count(&self) -> usize {
        self.live
    }

    pub fn peak_node_count(&self) -> usize {
        self.peak
    }

    pub fn reset_peak(&mut self) {
        self.peak = self.live;
    }

    /// Keeps `r` (and everything below it) alive across collections.
    pub fn pin(&mut self, r: &HedRef) {
        self.pinned.push(r.edge.clone());
    }

    pub(crate) fn pin_edge(&mut self, e: Edge) {
        self.pinned.push(e);
    }

    /// Mark-and-sweep collection. Everything unreachable from `roots` and the
    /// pinned set is reclaimed; apply caches are flushed. Returns the number
    /// of reclaimed nodes.
    pub fn collect<'a, I>(&mut self, roots: I) -> usize
    where
        I: IntoIterator<Item = &'a HedRef>,
    {
        let mut mark = vec![false; self.nodes.len()];
        mark[0] = true;
        mark[1] = true;
        let mut stack: Vec<NodeId> = self.pinned.iter().map(|e| e.node).collect();
        stack.extend(roots.into_iter().map(|r| r.edge.node));
        while let Some(id) = stack.pop() {
            if mark[id.0 as usize] {
                continue;
            }
            mark[id.0 as usize] = true;
            if let Node::Var { lo, hi, .. } = &self.nodes[id.0 as usize] {
                stack.push(lo.node);
                stack.push(hi.node);
            }
        }
        let mut freed = 0;
        for (i, m) in mark.iter().enumerate() {
            if *m {
                continue;
            }
            if let Node::Var { var, lo, hi } = std::mem::replace(&mut self.nodes[i], Node::Free) {
                self.unique.remove(&UniqueKey { var, lo, hi });
                self.free.push(i as u32);
                freed += 1;
            }
        }
        self.live -= freed;
        self.clear_caches();
        freed
    }

    /// Nodes reachable from `r`, terminals excluded.
    pub fn size(&self, r: &HedRef) -> usize {
        let mut seen = std::collections::HashSet::new();
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
        seen.len()
    }

    /// Variables occurring in `r`, ascending.
    pub fn support(&self, r: &HedRef) -> Vec<VarId> {
        let mut seen = std::collections::HashSet::new();
        let mut vars = std::collections::BTreeSet::new();
        let mut stack = vec![r.edge.node];
        while let Some(id) = stack.pop() {
            if id.is_terminal() || !seen.insert(id) {
                continue;
            }
            if let Node::Var { var, lo, hi } = self.node(id) {
                vars.insert(*var);
                stack.push(lo.node);
                stack.push(hi.node);
            }
        }
        vars.into_iter().collect()
    }

    /// Checks the normalization and ordering invariants of every stored node.
    pub fn audit(&self) -> std::result::Result<(), String> {
        for (i, n) in self.nodes.iter().enumerate() {
            let Node::Var { var, lo, hi } = n else { continue };
            if hi.is_zero() {
                return Err(format!("node {i}: zero linear edge"));
            }
            if lo.is_zero() && lo.node != NodeId::ZERO {
                return Err(format!("node {i}: zero weight on non-zero target"));
            }
            if !lo.weight.gcd(&hi.weight).is_one() {
                return Err(format!("node {i}: weights not coprime"));
            }
            let first = if lo.weight.is_zero() { &hi.weight } else { &lo.weight };
            if first.is_negative() {
                return Err(format!("node {i}: leading weight negative"));
            }
            if let Some(t) = self.top_var(lo) {
                if t >= *var {
                    return Err(format!("node {i}: constant child out of order"));
                }
            }
            if let Some(t) = self.top_var(hi) {
                if t > *var || (t == *var && self.is_boolean(*var)) {
                    return Err(format!("node {i}: linear child out of order"));
                }
            }
            if matches!(self.node(lo.node), Node::Free) || matches!(self.node(hi.node), Node::Free) {
                return Err(format!("node {i}: dangling child"));
            }
        }
        let stored = self.nodes.iter().filter(|n| !matches!(n, Node::Free)).count();
        if stored != self.live || self.unique.len() + 2 != self.live {
            return Err("node count out of sync with unique table".into());
        }
        Ok(())
    }

    // ---- evaluation ---------------------------------------------------

    /// Exact value of `r` at `point`.
    pub fn evaluate(&self, r: &HedRef, point: &HashMap<VarId, BigInt>) -> Result<BigInt> {
        let e = self.own(r)?;
        let mut memo = HashMap::new();
        let v = self.eval_node(e.node, point, &mut memo)?;
        Ok(&e.weight * v)
    }

    fn eval_node(
        &self,
        id: NodeId,
        point: &HashMap<VarId, BigInt>,
        memo: &mut HashMap<NodeId, BigInt>,
    ) -> Result<BigInt> {
        if let Some(v) = memo.get(&id) {
            return Ok(v.clone());
        }
        let v = match self.node(id) {
            Node::Zero => BigInt::zero(),
            Node::One => BigInt::one(),
            Node::Var { var, lo, hi } => {
                let x = point.get(var).ok_or_else(|| Error::MissingAssignment(self.var_name(*var).to_string()))?;
                let l = &lo.weight * self.eval_node(lo.node, point, memo)?;
                let h = &hi.weight * self.eval_node(hi.node, point, memo)?;
                l + x * h
            }
            Node::Free => unreachable!("dangling reference"),
        };
        memo.insert(id, v.clone());
        Ok(v)
    }

    // ---- bit slices and derived tokens ---------------------------------

    /// Splits word variable `v` around bit `i` into `(hi, bit, lo)` with
    /// `v = 2^(i+1)*hi + 2^i*bit + lo`. Idempotent per `(v, i)`.
    pub fn bit_slice_decompose(&mut self, v: VarId, i: u32) -> Result<(VarId, VarId, VarId)> {
        self.check_var(v)?;
        if let Some(&t) = self.slices.get(&(v, i)) {
            return Ok(t);
        }
        if let Some(&j) = self.sliced.get(&v) {
            return Err(Error::Decomposition(format!("`{}` is already decomposed at bit {j}", self.var_name(v))));
        }
        let info = self.var_info(v).clone();
        let (hi_range, lo_range) = match info.range {
            VarRange::Boolean => return Err(Error::Decomposition(format!("`{}` is a single bit", info.name))),
            VarRange::Bits(w) if i >= w => {
                return Err(Error::Decomposition(format!("bit {i} is outside the {w}-bit variable `{}`", info.name)))
            }
            VarRange::Bits(w) => (VarRange::Bits(w - i - 1), VarRange::Bits(i)),
            VarRange::Full => (VarRange::Full, VarRange::Bits(i)),
        };
        let mk = |part| VarKind::Slice { source: v, bit: i, part };
        let hi = self.add_var(&format!("{}.hi{i}", info.name), mk(SlicePart::High), hi_range)?;
        let bit = self.add_var(&format!("{}.b{i}", info.name), mk(SlicePart::Bit), VarRange::Boolean)?;
        let lo = self.add_var(&format!("{}.lo{i}", info.name), mk(SlicePart::Low), lo_range)?;
        self.slices.insert((v, i), (hi, bit, lo));
        self.sliced.insert(v, i);
        Ok((hi, bit, lo))
    }

    /// The decomposition of `v`, if any: `(bit index, (hi, bit, lo))`.
    pub fn decomposition(&self, v: VarId) -> Option<(u32, (VarId, VarId, VarId))> {
        let i = *self.sliced.get(&v)?;
        Some((i, self.slices[&(v, i)]))
    }

    /// The Boolean variable standing for bit `i` of `v`, decomposing `v` (or
    /// the slice of `v` that holds bit `i`) on demand.
    pub fn bit_var(&mut self, v: VarId, i: u32) -> Result<VarId> {
        match self.decomposition(v) {
            None => Ok(self.bit_slice_decompose(v, i)?.1),
            Some((j, (_, bit, _))) if j == i => Ok(bit),
            Some((j, (hi, _, _))) if i > j => self.bit_var(hi, i - j - 1),
            Some((_, (_, _, lo))) => self.bit_var(lo, i),
        }
    }

    /// `v` with every decomposition applied, as a polynomial over the slice
    /// variables.
    pub fn composite(&mut self, v: VarId) -> Result<HedRef> {
        match self.decomposition(v) {
            None => self.mk_var(v),
            Some((i, (hi, bit, lo))) => {
                let h = self.composite(hi)?;
                let h = self.shl(&h, i + 1)?;
                let b = self.mk_var(bit)?;
                let b = self.shl(&b, i)?;
                let l = self.composite(lo)?;
                let s = self.add(&h, &b)?;
                self.add(&s, &l)
            }
        }
    }

    /// The atomic token standing for `v >> n`, registered once per `(v, n)`.
    pub fn shift_token(&mut self, v: VarId, n: u32) -> VarId {
        if let Some(&t) = self.shifts.get(&(v, n)) {
            return t;
        }
        let info = self.var_info(v).clone();
        let range = match info.range {
            VarRange::Full => VarRange::Full,
            VarRange::Boolean => VarRange::Bits(0),
            VarRange::Bits(k) => VarRange::Bits(k.saturating_sub(n)),
        };
        let name = format!("{}>>{n}", info.name);
        let t =
            self.add_var(&name, VarKind::Shift { base: v, amount: n }, range).expect("shift token names are unique");
        self.shifts.insert((v, n), t);
        t
    }

    /// Uninterpreted application `op(args; imm)`: one variable per distinct
    /// canonical argument tuple.
    pub fn opaque(&mut self, op: &str, args: &[HedRef], imm: u64, range: VarRange) -> Result<VarId> {
        let mut edges = Vec::with_capacity(args.len());
        for a in args {
            edges.push(self.own(a)?.clone());
        }
        let key = OpaqueKey { op: op.to_string(), args: edges, imm };
        if let Some(&v) = self.opaque.get(&key) {
            return Ok(v);
        }
        let name = format!("{op}#{}", self.opaque.len());
        let v = self.add_var(&name, VarKind::Opaque { op: op.to_string() }, range)?;
        for e in &key.args {
            self.pin_edge(e.clone());
        }
        self.opaque.insert(key, v);
        Ok(v)
    }
}
