//! Canonical forms of polynomial functions over `Z_{2^w}`.
//!
//! A polynomial vanishes on `Z_{2^w}` exactly when, written in the falling
//! factorial basis `Y_k(x) = x(x-1)...(x-k+1)`, every coefficient of
//! `prod_i Y_{k_i}(x_i)` is divisible by `2^w / gcd(2^w, prod_i k_i!)`.
//! Reducing each coefficient to its least non-negative residue modulo that
//! number therefore yields a unique representative per function, which is
//! rebuilt as an ordinary diagram so that handle equality decides equality
//! modulo `2^w`.
//!
//! The reduction assumes every variable ranges over all of `Z_{2^w}`. For
//! Boolean variables the diagram is already multilinear, where the reduction
//! is still canonical. For narrower bit-slices it stays sound but may miss
//! identities that only hold on the narrower domain; the brute-force oracle
//! honours declared ranges.

use std::collections::{BTreeMap, HashMap};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::hed::poly::low_u64;
use crate::hed::{HedRef, Manager, Monomial, Polynomial, VarId, VarRange};

/// Largest number of points the exhaustive oracle will enumerate.
pub const EXHAUSTIVE_LIMIT: u128 = 1 << 24;

/// The ring `Z_{2^width}`, with optional narrower per-variable widths (by
/// variable name) used by the brute-force oracle.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RingConfig {
    pub width: u32,
    pub var_widths: BTreeMap<String, u32>,
}

impl RingConfig {
    pub fn new(width: u32) -> Result<Self> {
        if width == 0 {
            return Err(Error::ZeroWidth(width));
        }
        Ok(RingConfig { width, var_widths: BTreeMap::new() })
    }

    pub fn modulus(&self) -> BigInt {
        BigInt::one() << self.width
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BruteForceMode {
    Exhaustive,
    Sampled { samples: u64, seed: u64 },
}

/// 2-adic valuation of `k!` (Legendre): `k - popcount(k)`.
pub fn v2_factorial(k: u32) -> u32 {
    k - k.count_ones()
}

/// Least `k` with `2^w | k!`; canonical forms have degree below this in
/// every variable.
pub fn smarandache_pow2(w: u32) -> u32 {
    let mut k = 0;
    while v2_factorial(k) < w {
        k += 1;
    }
    k
}

/// Rows of Stirling numbers: `second[n][k]` (second kind) and `first[n][k]`
/// (signed, first kind) for `n, k <= max`.
struct Stirling {
    second: Vec<Vec<BigInt>>,
    first: Vec<Vec<BigInt>>,
}

impl Stirling {
    fn new(max: usize) -> Self {
        let mut second = vec![vec![BigInt::zero(); max + 1]; max + 1];
        let mut first = vec![vec![BigInt::zero(); max + 1]; max + 1];
        second[0][0] = BigInt::one();
        first[0][0] = BigInt::one();
        for n in 1..=max {
            for k in 1..=n {
                second[n][k] = &second[n - 1][k - 1] + BigInt::from(k) * &second[n - 1][k];
                first[n][k] = &first[n - 1][k - 1] - BigInt::from(n - 1) * &first[n - 1][k];
            }
        }
        Stirling { second, first }
    }
}

/// Rewrites `p` by mapping each variable power through `table[k][j]`:
/// `x^k -> sum_j table[k][j] * x^j` (with the meaning of `x^j` changing
/// between bases).
fn change_basis(p: &Polynomial, table: &[Vec<BigInt>]) -> Polynomial {
    let mut out = Polynomial::zero();
    for (m, c) in p.terms() {
        let mut partial: Vec<(Monomial, BigInt)> = vec![(Monomial::one(), c.clone())];
        for &(v, k) in &m.0 {
            let row = &table[k as usize];
            let mut next = Vec::new();
            for (pm, pc) in &partial {
                for (j, s) in row.iter().enumerate().take(k as usize + 1) {
                    if j == 0 || s.is_zero() {
                        continue;
                    }
                    next.push((pm.times_var(v, j as u32), pc * s));
                }
            }
            partial = next;
        }
        for (pm, pc) in partial {
            out.add_term(pm, pc);
        }
    }
    out
}

fn max_degree(p: &Polynomial) -> usize {
    p.terms().flat_map(|(m, _)| m.0.iter().map(|&(_, k)| k as usize)).max().unwrap_or(0)
}

/// Canonical representative of `r` modulo `2^w`.
pub fn reduce_mod(m: &mut Manager, r: &HedRef, cfg: &RingConfig) -> Result<HedRef> {
    if cfg.width == 0 {
        return Err(Error::ZeroWidth(0));
    }
    let key = (m.own(r)?.clone(), cfg.width);
    if m.caching() {
        if let Some(e) = m.mod_cache.get(&key) {
            return Ok(m.wrap(e.clone()));
        }
    }
    let p = m.to_polynomial(r)?;
    let stirling = Stirling::new(max_degree(&p));
    let ff = change_basis(&p, &stirling.second);
    let mut reduced = Polynomial::zero();
    for (mono, c) in ff.terms() {
        let s: u32 = mono.0.iter().map(|&(_, k)| v2_factorial(k)).sum();
        if s >= cfg.width {
            continue;
        }
        let modulus = BigInt::one() << (cfg.width - s);
        let c = c.mod_floor(&modulus);
        reduced.add_term(mono.clone(), c);
    }
    let back = change_basis(&reduced, &Stirling::new(max_degree(&reduced)).first);
    let out = m.from_polynomial(&back)?;
    if m.caching() {
        m.mod_cache.insert(key, out.edge.clone());
    }
    Ok(out)
}

/// Whether `a` and `b` denote the same function on `Z_{2^w}`.
pub fn equiv_mod(m: &mut Manager, a: &HedRef, b: &HedRef, cfg: &RingConfig) -> Result<bool> {
    if a == b {
        m.own(a)?;
        return Ok(true);
    }
    let d = m.sub(a, b)?;
    Ok(reduce_mod(m, &d, cfg)?.is_zero())
}

/// Whether `r` is zero at every point of `Z_{2^w}`.
pub fn vanishes(m: &mut Manager, r: &HedRef, cfg: &RingConfig) -> Result<bool> {
    Ok(reduce_mod(m, r, cfg)?.is_zero())
}

/// Point-wise comparison of `a` and `b` modulo `2^w`, over each variable's
/// declared range.
pub fn brute_force_equiv(m: &Manager, a: &HedRef, b: &HedRef, cfg: &RingConfig, mode: BruteForceMode) -> Result<bool> {
    Ok(brute_force_witness(m, a, b, cfg, mode)?.is_none())
}

/// Like [`brute_force_equiv`], returning a distinguishing point if one is
/// found.
pub fn brute_force_witness(
    m: &Manager,
    a: &HedRef,
    b: &HedRef,
    cfg: &RingConfig,
    mode: BruteForceMode,
) -> Result<Option<Vec<(VarId, u64)>>> {
    if cfg.width == 0 {
        return Err(Error::ZeroWidth(0));
    }
    if cfg.width > 64 {
        return Err(Error::Invalid(format!("brute-force evaluation supports widths up to 64, not {}", cfg.width)));
    }
    let diff = m.to_polynomial(a)?.add(&m.to_polynomial(b)?.scale(&BigInt::from(-1)));
    let vars = diff.vars();
    let sizes: Vec<u128> = vars.iter().map(|&v| 1u128 << domain_bits(m, v, cfg).min(127)).collect();
    let mask = if cfg.width == 64 { u64::MAX } else { (1u64 << cfg.width) - 1 };
    // Reduce coefficients once so evaluation can wrap in u64.
    let mut compact = Polynomial::zero();
    for (mono, c) in diff.terms() {
        let c = low_u64(c) & mask;
        if c != 0 {
            compact.add_term(mono.clone(), BigInt::from(c));
        }
    }
    let check = |point: &HashMap<VarId, u64>| compact.evaluate_wrapping(point).map(|x| x & mask != 0);
    let witness = |point: &HashMap<VarId, u64>| vars.iter().map(|v| (*v, point[v])).collect::<Vec<_>>();
    match mode {
        BruteForceMode::Exhaustive => {
            let total = sizes.iter().try_fold(1u128, |acc, &s| acc.checked_mul(s)).unwrap_or(u128::MAX);
            if total > EXHAUSTIVE_LIMIT {
                return Err(Error::StateSpace { points: total, limit: EXHAUSTIVE_LIMIT });
            }
            let mut digits = vec![0u64; vars.len()];
            let mut point: HashMap<VarId, u64> = vars.iter().map(|&v| (v, 0)).collect();
            loop {
                if check(&point).expect("every variable assigned") {
                    return Ok(Some(witness(&point)));
                }
                let mut i = 0;
                loop {
                    if i == digits.len() {
                        return Ok(None);
                    }
                    digits[i] += 1;
                    if u128::from(digits[i]) < sizes[i] {
                        point.insert(vars[i], digits[i]);
                        break;
                    }
                    digits[i] = 0;
                    point.insert(vars[i], 0);
                    i += 1;
                }
            }
        }
        BruteForceMode::Sampled { samples, seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut point = HashMap::new();
            for _ in 0..samples {
                for (i, &v) in vars.iter().enumerate() {
                    let x = if sizes[i] > u128::from(u64::MAX) {
                        rng.gen::<u64>()
                    } else {
                        rng.gen_range(0..sizes[i] as u64)
                    };
                    point.insert(v, x);
                }
                if check(&point).expect("every variable assigned") {
                    return Ok(Some(witness(&point)));
                }
            }
            Ok(None)
        }
    }
}

/// Number of bits in the domain of `v` under `cfg`.
fn domain_bits(m: &Manager, v: VarId, cfg: &RingConfig) -> u32 {
    let info = m.var_info(v);
    if let Some(&w) = cfg.var_widths.get(&info.name) {
        return w.min(cfg.width);
    }
    match info.range {
        VarRange::Boolean => 1,
        VarRange::Bits(k) => k.min(cfg.width),
        VarRange::Full => cfg.width,
    }
}
