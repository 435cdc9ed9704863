//! Reference equivalence checks: full symbolic substitution without cut
//! points, and concrete evaluation over the input space.

use std::collections::{BTreeMap, HashMap};

use num_bigint::BigInt;
use num_integer::Integer;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Serialize, Serializer};

use crate::dfl::AssignmentList;
use crate::error::{Error, Result};
use crate::hed::{HedRef, Manager};
use crate::modular::{equiv_mod, RingConfig};
use crate::sec::build::{build_all, output_value, register_inputs};

/// Corresponding outputs of `spec` and `imp` (matched by name), each
/// expanded fully over the primary inputs in `m`.
pub fn expand_outputs(
    m: &mut Manager,
    spec: &AssignmentList,
    imp: &AssignmentList,
) -> Result<Vec<(String, HedRef, HedRef)>> {
    let inputs = register_inputs(m, &[spec, imp])?;
    let mut notes = Vec::new();
    let vs = build_all(m, spec, &inputs, &mut notes)?;
    let vi = build_all(m, imp, &inputs, &mut notes)?;
    let mut out = Vec::new();
    for o in &spec.outputs {
        let other = imp.output(&o.name).ok_or_else(|| Error::Correspondence(o.name.clone()))?;
        let a = output_value(&o.ssa, &vs, &inputs).ok_or_else(|| Error::Unresolved(o.ssa.clone()))?;
        let b = output_value(&other.ssa, &vi, &inputs).ok_or_else(|| Error::Unresolved(other.ssa.clone()))?;
        out.push((o.name.clone(), a, b));
    }
    Ok(out)
}

/// Every output of `list`, expanded fully over its primary inputs in `m`.
pub fn expand(m: &mut Manager, list: &AssignmentList) -> Result<Vec<(String, HedRef)>> {
    let inputs = register_inputs(m, &[list])?;
    let mut notes = Vec::new();
    let values = build_all(m, list, &inputs, &mut notes)?;
    list.outputs
        .iter()
        .map(|o| {
            let v = output_value(&o.ssa, &values, &inputs).ok_or_else(|| Error::Unresolved(o.ssa.clone()))?;
            Ok((o.name.clone(), v))
        })
        .collect()
}

/// Outputs (by name) whose values differ when both lists are expanded
/// fully over the primary inputs; compared modulo `2^w` when `ring` is set.
pub fn oracle_check(spec: &AssignmentList, imp: &AssignmentList, ring: Option<&RingConfig>) -> Result<Vec<String>> {
    let mut m = Manager::new();
    let mut differing = Vec::new();
    for (name, a, b) in expand_outputs(&mut m, spec, imp)? {
        let same = match ring {
            Some(r) => equiv_mod(&mut m, &a, &b, r)?,
            None => a == b,
        };
        if !same {
            differing.push(name);
        }
    }
    Ok(differing)
}

/// An input point on which two lists disagree.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Witness {
    #[serde(serialize_with = "decimal_map")]
    pub inputs: BTreeMap<String, BigInt>,
    pub output: String,
    #[serde(serialize_with = "decimal")]
    pub spec: BigInt,
    #[serde(rename = "impl", serialize_with = "decimal")]
    pub implementation: BigInt,
}

fn decimal<S: Serializer>(v: &BigInt, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&v.to_string())
}

fn decimal_map<S: Serializer>(m: &BTreeMap<String, BigInt>, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_map(m.iter().map(|(k, v)| (k, v.to_string())))
}

/// Outcome of [`concrete_check`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Concrete {
    pub points: u64,
    /// Every input point was evaluated.
    pub exhaustive: bool,
    pub witness: Option<Witness>,
}

/// Largest input space, in bits, that is enumerated exhaustively.
pub const EXHAUSTIVE_BITS: u32 = 20;

/// Evaluates both lists on inputs in `[0, 2^k)` (`k` the smaller of the
/// declared width and `width`) and compares outputs modulo `2^width`.
///
/// Spaces of at most [`EXHAUSTIVE_BITS`] bits are enumerated; larger ones
/// are sampled at `samples` points drawn from `seed`.
pub fn concrete_check(
    spec: &AssignmentList,
    imp: &AssignmentList,
    width: u32,
    samples: u64,
    seed: u64,
) -> Result<Concrete> {
    if width == 0 {
        return Err(Error::ZeroWidth(width));
    }
    if width > 63 {
        return Err(Error::Invalid("concrete checks support widths up to 63".into()));
    }
    let mut domain: Vec<(String, u32)> = Vec::new();
    for i in spec.inputs.iter().chain(&imp.inputs) {
        let bits = i.width.map_or(width, |w| w.min(width));
        match domain.iter().find(|(n, _)| *n == i.name) {
            Some((_, b)) if *b != bits => {
                return Err(Error::Invalid(format!("input `{}` is declared with different widths", i.name)))
            }
            Some(_) => {}
            None => domain.push((i.name.clone(), bits)),
        }
    }
    for o in &spec.outputs {
        imp.output(&o.name).ok_or_else(|| Error::Correspondence(o.name.clone()))?;
    }
    let modulus = BigInt::from(1) << width;
    let total: u32 = domain.iter().map(|(_, b)| b).sum();
    let exhaustive = total <= EXHAUSTIVE_BITS;
    let points = if exhaustive { 1u64 << total } else { samples };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut point: HashMap<String, BigInt> = HashMap::new();
    for p in 0..points {
        let mut rest = p;
        for (n, b) in &domain {
            let v = if exhaustive {
                let v = rest & ((1u64 << b) - 1);
                rest >>= b;
                v
            } else {
                rng.gen_range(0..(1u64 << b))
            };
            point.insert(n.clone(), BigInt::from(v));
        }
        let a = spec.evaluate(&point)?;
        let b = imp.evaluate(&point)?;
        for (name, va) in &a {
            let vb = &b[name];
            if !(va - vb).mod_floor(&modulus).eq(&BigInt::from(0)) {
                let inputs = point.iter().map(|(k, v)| (k.clone(), v.clone())).collect();
                let witness = Witness { inputs, output: name.clone(), spec: va.clone(), implementation: vb.clone() };
                return Ok(Concrete { points: p + 1, exhaustive, witness: Some(witness) });
            }
        }
    }
    Ok(Concrete { points, exhaustive, witness: None })
}
