//! Sparse multivariate polynomials and conversion to and from diagrams.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde::Serialize;

use super::{Edge, HedRef, Manager, Node, NodeId, VarId};
use crate::error::{Error, Result};

/// A power product, stored as `(variable, exponent)` pairs sorted by variable
/// with strictly positive exponents. The empty monomial is `1`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Monomial(pub Vec<(VarId, u32)>);

impl Monomial {
    pub fn one() -> Self {
        Monomial(Vec::new())
    }

    pub fn var(v: VarId) -> Self {
        Monomial(vec![(v, 1)])
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().map(|&(_, e)| e).sum()
    }

    pub fn exponent(&self, v: VarId) -> u32 {
        self.0.iter().find(|&&(w, _)| w == v).map_or(0, |&(_, e)| e)
    }

    /// `self * v^k`.
    pub fn times_var(&self, v: VarId, k: u32) -> Monomial {
        let mut out = self.0.clone();
        match out.binary_search_by_key(&v, |&(w, _)| w) {
            Ok(i) => out[i].1 += k,
            Err(i) => out.insert(i, (v, k)),
        }
        Monomial(out)
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        let mut out = self.clone();
        for &(v, k) in &other.0 {
            out = out.times_var(v, k);
        }
        out
    }
}

/// Sparse polynomial with exact integer coefficients; zero coefficients are
/// never stored.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Polynomial {
    terms: BTreeMap<Monomial, BigInt>,
}

impl Polynomial {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant<T: Into<BigInt>>(c: T) -> Self {
        let mut p = Self::zero();
        p.add_term(Monomial::one(), c.into());
        p
    }

    pub fn var(v: VarId) -> Self {
        let mut p = Self::zero();
        p.add_term(Monomial::var(v), BigInt::one());
        p
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &BigInt)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, m: &Monomial) -> BigInt {
        self.terms.get(m).cloned().unwrap_or_default()
    }

    pub fn add_term(&mut self, m: Monomial, c: BigInt) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(m) {
            std::collections::btree_map::Entry::Vacant(slot) => {
                slot.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut slot) => {
                *slot.get_mut() += c;
                if slot.get().is_zero() {
                    slot.remove();
                }
            }
        }
    }

    pub fn add(&self, other: &Polynomial) -> Polynomial {
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }

    pub fn scale(&self, k: &BigInt) -> Polynomial {
        let mut out = Polynomial::zero();
        for (m, c) in &self.terms {
            out.add_term(m.clone(), c * k);
        }
        out
    }

    pub fn mul(&self, other: &Polynomial) -> Polynomial {
        let mut out = Polynomial::zero();
        for (m1, c1) in &self.terms {
            for (m2, c2) in &other.terms {
                out.add_term(m1.mul(m2), c1 * c2);
            }
        }
        out
    }

    /// Largest exponent of `v` over all terms.
    pub fn degree_in(&self, v: VarId) -> u32 {
        self.terms.keys().map(|m| m.exponent(v)).max().unwrap_or(0)
    }

    pub fn vars(&self) -> Vec<VarId> {
        let mut vs: Vec<VarId> = self.terms.keys().flat_map(|m| m.0.iter().map(|&(v, _)| v)).collect();
        vs.sort();
        vs.dedup();
        vs
    }

    /// Exact value at `point`.
    pub fn evaluate(&self, point: &HashMap<VarId, BigInt>) -> Option<BigInt> {
        let mut acc = BigInt::zero();
        for (m, c) in &self.terms {
            let mut t = c.clone();
            for &(v, k) in &m.0 {
                t *= num_traits::pow(point.get(&v)?.clone(), k as usize);
            }
            acc += t;
        }
        Some(acc)
    }

    /// Value modulo `2^64` at a point, for fast brute-force enumeration.
    pub fn evaluate_wrapping(&self, point: &HashMap<VarId, u64>) -> Option<u64> {
        let mut acc = 0u64;
        for (m, c) in &self.terms {
            let mut t = low_u64(c);
            for &(v, k) in &m.0 {
                t = t.wrapping_mul(point.get(&v)?.wrapping_pow(k));
            }
            acc = acc.wrapping_add(t);
        }
        Some(acc)
    }

    /// Renders the polynomial with `name` supplying variable names; terms are
    /// sorted by ascending degree and then by variable order.
    pub fn display_with<'a>(&'a self, name: impl Fn(VarId) -> String + 'a) -> impl fmt::Display + 'a {
        PolyDisplay { poly: self, name: Box::new(name) }
    }
}

/// Two's-complement low 64 bits of an arbitrary-precision integer.
pub(crate) fn low_u64(c: &BigInt) -> u64 {
    let (sign, digits) = c.to_u64_digits();
    let low = digits.first().copied().unwrap_or(0);
    if sign == num_bigint::Sign::Minus {
        low.wrapping_neg()
    } else {
        low
    }
}

struct PolyDisplay<'a> {
    poly: &'a Polynomial,
    name: Box<dyn Fn(VarId) -> String + 'a>,
}

impl fmt::Display for PolyDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.poly.is_zero() {
            return write!(f, "0");
        }
        let mut terms: Vec<_> = self.poly.terms.iter().collect();
        terms.sort_by(|a, b| a.0.degree().cmp(&b.0.degree()).then_with(|| b.0.cmp(a.0)));
        for (i, (m, c)) in terms.into_iter().enumerate() {
            let mag = c.abs();
            if i == 0 {
                if c.is_negative() {
                    write!(f, "-")?;
                }
            } else if c.is_negative() {
                write!(f, " - ")?;
            } else {
                write!(f, " + ")?;
            }
            let mut factors = Vec::new();
            if !mag.is_one() || m.0.is_empty() {
                factors.push(mag.to_string());
            }
            for &(v, k) in m.0.iter().rev() {
                let n = (self.name)(v);
                factors.push(if k == 1 { n } else { format!("{n}^{k}") });
            }
            write!(f, "{}", factors.join("*"))?;
        }
        Ok(())
    }
}

/// Serializable term listing (`coefficient`, `[[var, exponent], ...]`).
#[derive(Clone, Debug, Serialize, PartialEq, Eq)]
pub struct TermRecord {
    pub coefficient: String,
    pub monomial: Vec<(String, u32)>,
}

impl Manager {
    /// Expands `r` into a sparse polynomial.
    pub fn to_polynomial(&self, r: &HedRef) -> Result<Polynomial> {
        let e = self.own(r)?;
        let mut memo = HashMap::new();
        let p = self.node_poly(e.node, &mut memo);
        Ok(p.scale(&e.weight))
    }

    fn node_poly(&self, id: NodeId, memo: &mut HashMap<NodeId, Polynomial>) -> Polynomial {
        if let Some(p) = memo.get(&id) {
            return p.clone();
        }
        let p = match self.node(id) {
            Node::Zero => Polynomial::zero(),
            Node::One => Polynomial::constant(1),
            Node::Var { var, lo, hi } => {
                let l = self.node_poly(lo.node, memo).scale(&lo.weight);
                let h = self.node_poly(hi.node, memo).scale(&hi.weight);
                let mut out = l;
                for (m, c) in h.terms {
                    out.add_term(m.times_var(*var, 1), c);
                }
                out
            }
            Node::Free => unreachable!("dangling reference"),
        };
        memo.insert(id, p.clone());
        p
    }

    /// Builds the canonical diagram of `p`. Exponents of Boolean variables
    /// collapse to one.
    pub fn from_polynomial(&mut self, p: &Polynomial) -> Result<HedRef> {
        for v in p.vars() {
            if v.0 as usize >= self.var_count() {
                return Err(Error::UnknownVar(format!("#{}", v.0)));
            }
        }
        let terms: Vec<(Monomial, BigInt)> = p.terms().map(|(m, c)| (m.clone(), c.clone())).collect();
        let e = self.build_terms(terms);
        Ok(self.wrap(e))
    }

    /// Horner construction: split on the highest variable, group by its
    /// exponent and chain `F_0 + v*(F_1 + v*(F_2 + ...))`.
    fn build_terms(&mut self, terms: Vec<(Monomial, BigInt)>) -> Edge {
        let Some(top) = terms.iter().filter_map(|(m, _)| m.0.last().map(|&(v, _)| v)).max() else {
            let c: BigInt = terms.into_iter().map(|(_, c)| c).sum();
            return Edge::constant(c);
        };
        let boolean = self.is_boolean(top);
        let mut groups: BTreeMap<u32, Vec<(Monomial, BigInt)>> = BTreeMap::new();
        for (mut m, c) in terms {
            let k = match m.0.last() {
                Some(&(v, k)) if v == top => {
                    m.0.pop();
                    if boolean {
                        1
                    } else {
                        k
                    }
                }
                _ => 0,
            };
            groups.entry(k).or_default().push((m, c));
        }
        let max_k = *groups.keys().next_back().expect("non-empty");
        let mut acc = Edge::zero();
        for k in (0..=max_k).rev() {
            let part = match groups.remove(&k) {
                Some(ts) => self.build_terms(ts),
                None => Edge::zero(),
            };
            acc = if k == max_k { part } else { self.make_node(top, part, acc) };
        }
        acc
    }

    /// Term listing with variable names, for machine-readable output.
    pub fn term_records(&self, p: &Polynomial) -> Vec<TermRecord> {
        p.terms()
            .map(|(m, c)| TermRecord {
                coefficient: c.to_string(),
                monomial: m.0.iter().map(|&(v, k)| (self.var_name(v).to_string(), k)).collect(),
            })
            .collect()
    }

    /// Human-readable polynomial text for `r`.
    pub fn format(&self, r: &HedRef) -> Result<String> {
        let p = self.to_polynomial(r)?;
        Ok(self.format_poly(&p))
    }

    pub fn format_poly(&self, p: &Polynomial) -> String {
        p.display_with(|v| self.var_name(v).to_string()).to_string()
    }
}
