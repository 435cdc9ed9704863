//! Apply-style operations: arithmetic, Boolean connectives, shifts,
//! conditionals and substitution.

use std::collections::HashMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use super::{Edge, HedRef, Manager, Node, NodeId, VarId};
use crate::error::Result;

/// Result of [`Manager::div_pow2`]; `inexact` is set when a non-divisible
/// term was replaced by a shifted-variable token or floor-divided.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Division {
    pub value: HedRef,
    pub inexact: bool,
}

impl Manager {
    pub fn add(&mut self, a: &HedRef, b: &HedRef) -> Result<HedRef> {
        let (a, b) = (self.own(a)?.clone(), self.own(b)?.clone());
        let e = self.add_e(&a, &b);
        Ok(self.wrap(e))
    }

    pub fn neg(&self, a: &HedRef) -> Result<HedRef> {
        let a = self.own(a)?;
        Ok(self.wrap(Edge { weight: -&a.weight, node: a.node }))
    }

    pub fn sub(&mut self, a: &HedRef, b: &HedRef) -> Result<HedRef> {
        let nb = self.neg(b)?;
        self.add(a, &nb)
    }

    pub fn mul(&mut self, a: &HedRef, b: &HedRef) -> Result<HedRef> {
        let (a, b) = (self.own(a)?.clone(), self.own(b)?.clone());
        let e = self.mul_e(&a, &b);
        Ok(self.wrap(e))
    }

    /// `k * a`.
    pub fn scale(&self, a: &HedRef, k: &BigInt) -> Result<HedRef> {
        Ok(self.wrap(self.own(a)?.scaled(k)))
    }

    /// `1 - a`.
    pub fn b_not(&mut self, a: &HedRef) -> Result<HedRef> {
        let one = self.mk_const(1);
        self.sub(&one, a)
    }

    /// `a * b`.
    pub fn b_and(&mut self, a: &HedRef, b: &HedRef) -> Result<HedRef> {
        self.mul(a, b)
    }

    /// `a + b - a*b`.
    pub fn b_or(&mut self, a: &HedRef, b: &HedRef) -> Result<HedRef> {
        let s = self.add(a, b)?;
        let p = self.mul(a, b)?;
        self.sub(&s, &p)
    }

    /// `a + b - 2*a*b`.
    pub fn b_xor(&mut self, a: &HedRef, b: &HedRef) -> Result<HedRef> {
        let s = self.add(a, b)?;
        let p = self.mul(a, b)?;
        let p2 = self.scale(&p, &BigInt::from(2))?;
        self.sub(&s, &p2)
    }

    /// `2^n * a`.
    pub fn shl(&self, a: &HedRef, n: u32) -> Result<HedRef> {
        self.scale(a, &(BigInt::one() << n))
    }

    /// `c*t + (1-c)*e` for a 0/1-valued guard `c`.
    pub fn ite(&mut self, c: &HedRef, t: &HedRef, e: &HedRef) -> Result<HedRef> {
        let d = self.sub(t, e)?;
        let cd = self.mul(c, &d)?;
        self.add(e, &cd)
    }

    /// `a / 2^n`, exact when every coefficient is divisible. Otherwise the
    /// smallest non-divisible subterms are replaced: a non-divisible constant
    /// is floor-divided and a variable with a non-divisible linear
    /// coefficient is replaced by its shifted token `v>>m`.
    pub fn div_pow2(&mut self, a: &HedRef, n: u32) -> Result<Division> {
        let a = self.own(a)?.clone();
        let mut inexact = false;
        let mut memo = HashMap::new();
        let e = self.div_e(&a, n, &mut inexact, &mut memo);
        Ok(Division { value: self.wrap(e), inexact })
    }

    /// Replaces each variable in `map` by the associated reference.
    pub fn compose(&mut self, a: &HedRef, map: &HashMap<VarId, HedRef>) -> Result<HedRef> {
        let a = self.own(a)?.clone();
        let mut subst = HashMap::new();
        for (v, r) in map {
            subst.insert(*v, self.own(r)?.clone());
        }
        let mut memo = HashMap::new();
        let n = self.compose_node(a.node, &subst, &mut memo);
        Ok(self.wrap(n.scaled(&a.weight)))
    }

    // ---- edge-level kernels -------------------------------------------

    /// `(F(v=0), (F - F(v=0)) / v)` of `e` with respect to `v`, where `v` is
    /// at or above the top variable of `e`.
    fn cofactors(&self, e: &Edge, v: VarId) -> (Edge, Edge) {
        match self.node(e.node) {
            Node::Var { var, lo, hi } if *var == v => (lo.scaled(&e.weight), hi.scaled(&e.weight)),
            _ => (e.clone(), Edge::zero()),
        }
    }

    pub(crate) fn add_e(&mut self, a: &Edge, b: &Edge) -> Edge {
        if a.is_zero() {
            return b.clone();
        }
        if b.is_zero() {
            return a.clone();
        }
        if a.node == b.node {
            let w = &a.weight + &b.weight;
            return if w.is_zero() { Edge::zero() } else { Edge { weight: w, node: a.node } };
        }
        if a.node.is_terminal() && b.node.is_terminal() {
            return Edge::constant(&a.weight + &b.weight);
        }
        // Normalize the cache key: order operands by node and divide out a
        // common factor whose sign makes the first weight positive.
        let (a, b) = if a.node <= b.node { (a, b) } else { (b, a) };
        let mut g = a.weight.gcd(&b.weight);
        if a.weight.is_negative() {
            g = -g;
        }
        let ka = Edge { weight: &a.weight / &g, node: a.node };
        let kb = Edge { weight: &b.weight / &g, node: b.node };
        let key = (ka, kb);
        if self.caching() {
            if let Some(r) = self.add_cache.get(&key) {
                return r.scaled(&g);
            }
        }
        let (ka, kb) = (&key.0, &key.1);
        let v = self.top_var(ka).max(self.top_var(kb)).expect("non-terminal operand");
        let (al, ah) = self.cofactors(ka, v);
        let (bl, bh) = self.cofactors(kb, v);
        let lo = self.add_e(&al, &bl);
        let hi = self.add_e(&ah, &bh);
        let r = self.make_node(v, lo, hi);
        if self.caching() {
            self.add_cache.insert(key, r.clone());
        }
        r.scaled(&g)
    }

    pub(crate) fn mul_e(&mut self, a: &Edge, b: &Edge) -> Edge {
        if a.is_zero() || b.is_zero() {
            return Edge::zero();
        }
        let w = &a.weight * &b.weight;
        self.mul_nodes(a.node, b.node).scaled(&w)
    }

    fn mul_nodes(&mut self, x: NodeId, y: NodeId) -> Edge {
        if x == NodeId::ONE {
            return Edge { weight: BigInt::one(), node: y };
        }
        if y == NodeId::ONE {
            return Edge { weight: BigInt::one(), node: x };
        }
        let (x, y) = if x <= y { (x, y) } else { (y, x) };
        if self.caching() {
            if let Some(r) = self.mul_cache.get(&(x, y)) {
                return r.clone();
            }
        }
        let ex = Edge { weight: BigInt::one(), node: x };
        let ey = Edge { weight: BigInt::one(), node: y };
        let tx = self.top_var(&ex).expect("variable node");
        let ty = self.top_var(&ey).expect("variable node");
        let r = if tx == ty {
            let v = tx;
            let (al, ah) = self.cofactors(&ex, v);
            let (bl, bh) = self.cofactors(&ey, v);
            let lo = self.mul_e(&al, &bl);
            let c1 = self.mul_e(&al, &bh);
            let c2 = self.mul_e(&ah, &bl);
            let cross = self.add_e(&c1, &c2);
            let sq = self.mul_e(&ah, &bh);
            // Boolean variables are idempotent: v*v*sq = v*sq.
            let tail = if self.is_boolean(v) { sq } else { self.make_node(v, Edge::zero(), sq) };
            let hi = self.add_e(&cross, &tail);
            self.make_node(v, lo, hi)
        } else {
            let (hiside, other, v) = if tx > ty { (ex, ey, tx) } else { (ey, ex, ty) };
            let (al, ah) = self.cofactors(&hiside, v);
            let lo = self.mul_e(&al, &other);
            let hi = self.mul_e(&ah, &other);
            self.make_node(v, lo, hi)
        };
        if self.caching() {
            self.mul_cache.insert((x, y), r.clone());
        }
        r
    }

    fn div_e(&mut self, e: &Edge, n: u32, inexact: &mut bool, memo: &mut HashMap<(Edge, u32), Edge>) -> Edge {
        let m = BigInt::one() << n;
        if e.weight.is_multiple_of(&m) {
            return Edge { weight: &e.weight / &m, node: e.node };
        }
        if let Some(r) = memo.get(&(e.clone(), n)) {
            return r.clone();
        }
        let r = match self.node(e.node).clone() {
            Node::One => {
                *inexact = true;
                Edge::constant(e.weight.div_floor(&m))
            }
            Node::Var { var, lo, hi } => {
                let lo = lo.scaled(&e.weight);
                let hi = hi.scaled(&e.weight);
                let dl = self.div_e(&lo, n, inexact, memo);
                let term = if !hi.is_multiple_of_pow2(n) && hi.node == NodeId::ONE {
                    // c*v / 2^n with 2^j || c, j < n: (c / 2^j) * (v >> (n-j)).
                    *inexact = true;
                    let j = hi.weight.trailing_zeros().unwrap_or(0) as u32;
                    let tok = self.shift_token(var, n - j);
                    let t = self.var_edge(tok);
                    t.scaled(&(&hi.weight >> j))
                } else {
                    let dh = self.div_e(&hi, n, inexact, memo);
                    let x = self.var_edge(var);
                    self.mul_e(&x, &dh)
                };
                self.add_e(&dl, &term)
            }
            Node::Zero | Node::Free => unreachable!("zero weight handled above"),
        };
        memo.insert((e.clone(), n), r.clone());
        r
    }

    fn compose_node(&mut self, id: NodeId, subst: &HashMap<VarId, Edge>, memo: &mut HashMap<NodeId, Edge>) -> Edge {
        if let Some(r) = memo.get(&id) {
            return r.clone();
        }
        let r = match self.node(id).clone() {
            Node::Zero => Edge::zero(),
            Node::One => Edge::constant(BigInt::one()),
            Node::Var { var, lo, hi } => {
                let l = self.compose_node(lo.node, subst, memo).scaled(&lo.weight);
                let h = self.compose_node(hi.node, subst, memo).scaled(&hi.weight);
                let x = match subst.get(&var) {
                    Some(e) => e.clone(),
                    None => self.var_edge(var),
                };
                let xh = self.mul_e(&x, &h);
                self.add_e(&l, &xh)
            }
            Node::Free => unreachable!("dangling reference"),
        };
        memo.insert(id, r.clone());
        r
    }
}

impl Edge {
    fn is_multiple_of_pow2(&self, n: u32) -> bool {
        self.weight.is_zero() || self.weight.trailing_zeros().unwrap_or(0) >= n as u64
    }
}
