//! Prime points on `x_1^k + ... + x_n^k = λ`, the normalized surface measure
//! and its Fourier transform, the singular series, and the major-arc
//! approximation of the transform.
//!
//! Enumeration is meet-in-the-middle: the first ⌈n/2⌉ coordinates are tabled
//! by their partial power sum, the remaining ⌊n/2⌋ are enumerated and joined.
//! [`PointEnumerator`] keeps the table so a sweep over many λ reuses it.
//!
//! [`SweepTables`] is an independent route to the same numbers for every
//! λ ≤ Λ at once: the coefficients of `Π_j Σ_p (ln p) e(p ξ_j) z^{p^k}`.

use crate::arcs::arc_candidates;
use crate::error::{input, Result, WgError};
use crate::expsums::pow_mod;
use crate::numtheory::{euler_phi, gcd, iroot, mobius, sieve_primes, units, PrimeTable};
use crate::oscint::{i1_row, sampling_period, singular_integral_with, SurfaceOptions};
use crate::phase::{e, e_ratio, frac, frac_mul};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ProblemInstance {
    pub k: u32,
    pub n: usize,
    pub lambda: u64,
}

impl ProblemInstance {
    pub fn new(k: u32, n: usize, lambda: u64) -> Result<Self> {
        if k < 2 || n < 2 {
            return input(format!("need k >= 2 and n >= 2, got k={k} n={n}"));
        }
        if lambda < 1 {
            return input("lambda must be positive");
        }
        Ok(ProblemInstance { k, n, lambda })
    }
}

// ---------------------------------------------------------------- gates

pub fn n0(k: u32) -> u64 {
    match k {
        0 | 1 => 1,
        2..=4 => (1u64 << k) + 1,
        _ => {
            let k = k as i64;
            let best = (1..=k - 2)
                .map(|j| {
                    let num = k * j - (1i64 << j).min(j * j + j);
                    let den = k - j + 1;
                    // ceiling for possibly negative numerators
                    num.div_euclid(den) + i64::from(num.rem_euclid(den) != 0)
                })
                .max()
                .unwrap();
            (k * k + 3 - best) as u64
        }
    }
}

pub fn n1(k: u32) -> u64 {
    match k {
        2 => 7,
        3 => 13,
        _ => (k * k + k + 3) as u64,
    }
}

pub fn n2(k: u32) -> u64 {
    let k64 = k as u64;
    if k >= 7 {
        k64 * k64 * (k64 - 1) + 1
    } else {
        k64 * (1u64 << (k - 1)) + 1
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DimensionGates {
    pub n0: u64,
    pub n1: u64,
    pub n2: u64,
    /// p_crit = 2n / (2n - n2) as (numerator, denominator) in lowest terms;
    /// the denominator is not positive when 2n <= n2.
    pub p_crit: (i64, i64),
}

impl DimensionGates {
    pub fn p_crit_f64(&self) -> f64 {
        self.p_crit.0 as f64 / self.p_crit.1 as f64
    }
}

pub fn dimension_gates(k: u32, n: usize) -> DimensionGates {
    let n2v = n2(k) as i64;
    let num = 2 * n as i64;
    let den = 2 * n as i64 - n2v;
    let g = gcd(num.unsigned_abs(), den.unsigned_abs()).max(1) as i64;
    DimensionGates {
        n0: n0(k),
        n1: n1(k),
        n2: n2v as u64,
        p_crit: (num / g, den / g),
    }
}

// ---------------------------------------------------------------- Γ membership

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Membership {
    Member,
    NonMember,
    HeuristicMember,
    HeuristicNonMember,
}

impl Membership {
    pub fn is_member(&self) -> bool {
        matches!(self, Membership::Member | Membership::HeuristicMember)
    }
    pub fn is_heuristic(&self) -> bool {
        matches!(self, Membership::HeuristicMember | Membership::HeuristicNonMember)
    }
}

/// Exponent of the local test modulus p^γ: γ = τ + 2, or τ + 3 for p = 2,
/// where p^τ exactly divides k.
pub fn local_exponent(p: u64, k: u32) -> u32 {
    let mut tau = 0;
    let mut kk = k as u64;
    while kk % p == 0 {
        kk /= p;
        tau += 1;
    }
    if p == 2 {
        tau + 3
    } else {
        tau + 2
    }
}

/// Is λ a sum of n k-th powers of units modulo m?
pub fn unit_congruence_solvable(k: u32, n: usize, lambda: u64, m: u64) -> bool {
    let us = units(m).unwrap().elements;
    let mut powers: Vec<u64> = us.iter().map(|&u| pow_mod(u, k, m)).collect();
    powers.sort_unstable();
    powers.dedup();
    let mut reach = vec![false; m as usize];
    reach[0] = true;
    for _ in 0..n {
        let mut next = vec![false; m as usize];
        for (s, &ok) in reach.iter().enumerate() {
            if ok {
                for &p in &powers {
                    next[(s as u64 + p) as usize % m as usize] = true;
                }
            }
        }
        reach = next;
    }
    reach[(lambda % m) as usize]
}

pub fn gamma_membership(inst: &ProblemInstance) -> Membership {
    let ProblemInstance { k, n, lambda } = *inst;
    let exact = |ok: bool| if ok { Membership::Member } else { Membership::NonMember };
    if k % 2 == 1 {
        return exact(lambda % 2 == n as u64 % 2);
    }
    if k == 2 && n == 5 {
        return exact(lambda % 24 == 5);
    }
    if k == 4 && n == 17 {
        return exact(lambda % 240 == 17);
    }
    let table = sieve_primes((k + 1) as u64).unwrap();
    let ok = table.primes.iter().all(|&p| {
        let m = p.pow(local_exponent(p, k));
        unit_congruence_solvable(k, n, lambda, m)
    });
    if ok {
        Membership::HeuristicMember
    } else {
        Membership::HeuristicNonMember
    }
}

// ---------------------------------------------------------------- enumeration

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurfaceMeasure {
    pub instance: ProblemInstance,
    /// Ordered tuples, lexicographically sorted.
    pub representations: Vec<Vec<u64>>,
    /// Π ln p_i per tuple (all ones for integer points).
    pub weights: Vec<f64>,
    /// Σ weights.
    pub big_r: f64,
    /// Number of tuples.
    pub r: u64,
}

impl SurfaceMeasure {
    fn from_tuples(instance: ProblemInstance, mut tuples: Vec<Vec<u64>>, log_weights: bool) -> Self {
        tuples.sort_unstable();
        tuples.dedup();
        let weights: Vec<f64> = if log_weights {
            tuples.iter().map(|t| t.iter().map(|&p| (p as f64).ln()).product()).collect()
        } else {
            vec![1.0; tuples.len()]
        };
        let big_r = weights.iter().sum();
        SurfaceMeasure {
            instance,
            r: tuples.len() as u64,
            representations: tuples,
            weights,
            big_r,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.r == 0
    }
}

/// Meet-in-the-middle enumerator over a fixed base set (primes or integers)
/// for all λ up to `lambda_max`.
pub struct PointEnumerator {
    k: u32,
    n: usize,
    lambda_max: u64,
    base: Vec<u64>,
    powers: Vec<u64>,
    log_weights: bool,
    /// left tuples grouped by partial sum
    left: HashMap<u64, Vec<Vec<u32>>>,
    /// right tuples as base indices with their partial sums
    right: Vec<(u64, Vec<u32>)>,
}

fn for_each_tuple(len: usize, powers: &[u64], cap: u64, f: &mut dyn FnMut(u64, &[u32])) {
    let mut idx: Vec<u32> = Vec::with_capacity(len);
    fn rec(len: usize, powers: &[u64], cap: u64, sum: u64, idx: &mut Vec<u32>, f: &mut dyn FnMut(u64, &[u32])) {
        if idx.len() == len {
            f(sum, idx);
            return;
        }
        for (i, &p) in powers.iter().enumerate() {
            if sum + p > cap {
                break;
            }
            idx.push(i as u32);
            rec(len, powers, cap, sum + p, idx, f);
            idx.pop();
        }
    }
    rec(len, powers, cap, 0, &mut idx, f);
}

impl PointEnumerator {
    fn build(k: u32, n: usize, lambda_max: u64, base: Vec<u64>, log_weights: bool) -> Result<Self> {
        if k < 2 || n < 2 {
            return input(format!("need k >= 2 and n >= 2, got k={k} n={n}"));
        }
        let powers: Vec<u64> = base.iter().map(|&p| p.pow(k)).collect();
        let min = powers.first().copied().unwrap_or(u64::MAX);
        let nl = n.div_ceil(2);
        let nr = n / 2;
        let mut left: HashMap<u64, Vec<Vec<u32>>> = HashMap::new();
        let cap_left = lambda_max.saturating_sub((nr as u64).saturating_mul(min));
        for_each_tuple(nl, &powers, cap_left, &mut |s, t| left.entry(s).or_default().push(t.to_vec()));
        let mut right = Vec::new();
        let cap_right = lambda_max.saturating_sub((nl as u64).saturating_mul(min));
        for_each_tuple(nr, &powers, cap_right, &mut |s, t| right.push((s, t.to_vec())));
        Ok(PointEnumerator {
            k,
            n,
            lambda_max,
            base,
            powers,
            log_weights,
            left,
            right,
        })
    }

    /// Enumerator over primes up to lambda_max^{1/k}.
    pub fn primes(k: u32, n: usize, lambda_max: u64) -> Result<Self> {
        let lim = iroot(lambda_max, k).max(2);
        let table = sieve_primes(lim)?;
        Self::build(k, n, lambda_max, table.primes, true)
    }

    pub fn primes_from_table(k: u32, n: usize, lambda_max: u64, table: &PrimeTable) -> Result<Self> {
        let lim = iroot(lambda_max, k);
        if table.limit < lim {
            return input(format!("prime table limit {} below lambda^(1/k) = {lim}", table.limit));
        }
        Self::build(k, n, lambda_max, table.up_to(lim).to_vec(), true)
    }

    /// Enumerator over positive integers.
    pub fn integers(k: u32, n: usize, lambda_max: u64) -> Result<Self> {
        let lim = iroot(lambda_max, k).max(1);
        Self::build(k, n, lambda_max, (1..=lim).collect(), false)
    }

    pub fn measure(&self, lambda: u64) -> Result<SurfaceMeasure> {
        if lambda > self.lambda_max {
            return input(format!("lambda {lambda} above enumerator range {}", self.lambda_max));
        }
        let inst = ProblemInstance::new(self.k, self.n, lambda)?;
        let tuples: Vec<Vec<u64>> = self
            .right
            .par_iter()
            .filter(|(s, _)| *s <= lambda)
            .flat_map_iter(|(s, rt)| {
                self.left
                    .get(&(lambda - s))
                    .into_iter()
                    .flatten()
                    .map(move |lt| lt.iter().chain(rt.iter()).map(|&i| self.base[i as usize]).collect())
            })
            .collect();
        Ok(SurfaceMeasure::from_tuples(inst, tuples, self.log_weights))
    }

    pub fn base(&self) -> &[u64] {
        &self.base
    }

    pub fn powers(&self) -> &[u64] {
        &self.powers
    }
}

pub fn enumerate_prime_points(inst: &ProblemInstance, table: &PrimeTable) -> Result<SurfaceMeasure> {
    let lim = iroot(inst.lambda, inst.k);
    if table.limit < lim {
        return input(format!("prime table limit {} below lambda^(1/k) = {lim}", table.limit));
    }
    PointEnumerator::build(inst.k, inst.n, inst.lambda, table.up_to(lim).to_vec(), true)?.measure(inst.lambda)
}

pub fn enumerate_integer_points(inst: &ProblemInstance) -> Result<SurfaceMeasure> {
    PointEnumerator::integers(inst.k, inst.n, inst.lambda)?.measure(inst.lambda)
}

// ---------------------------------------------------------------- cache

/// Version written at the head of every cache document.
pub const CACHE_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct CacheDoc {
    version: u32,
    k: u32,
    n: usize,
    lambda: u64,
    tuples: Vec<Vec<u64>>,
}

pub fn cache_file_name(inst: &ProblemInstance) -> String {
    format!("wg_k{}_n{}_lam{}", inst.k, inst.n, inst.lambda)
}

/// Cache directory: WG_CACHE_DIR if set, else `fallback`.
pub fn cache_dir(fallback: &Path) -> PathBuf {
    std::env::var_os("WG_CACHE_DIR").map(PathBuf::from).unwrap_or_else(|| fallback.to_path_buf())
}

pub fn load_cached(dir: &Path, inst: &ProblemInstance) -> Result<Option<SurfaceMeasure>> {
    let path = dir.join(cache_file_name(inst));
    let text = match std::fs::read_to_string(&path) {
        Ok(t) => t,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(None),
        Err(e) => return Err(WgError::Cache(format!("{}: {e}", path.display()))),
    };
    let doc: CacheDoc = serde_json::from_str(&text).map_err(|e| WgError::Cache(format!("{}: {e}", path.display())))?;
    if doc.version != CACHE_VERSION || doc.k != inst.k || doc.n != inst.n || doc.lambda != inst.lambda {
        return Ok(None);
    }
    Ok(Some(SurfaceMeasure::from_tuples(*inst, doc.tuples, true)))
}

/// Writes through a temporary file and a rename so readers never see a
/// partial document.
pub fn store_cached(dir: &Path, m: &SurfaceMeasure) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| WgError::Cache(format!("{}: {e}", dir.display())))?;
    let doc = CacheDoc {
        version: CACHE_VERSION,
        k: m.instance.k,
        n: m.instance.n,
        lambda: m.instance.lambda,
        tuples: m.representations.clone(),
    };
    let path = dir.join(cache_file_name(&m.instance));
    let tmp = dir.join(format!("{}.tmp{}", cache_file_name(&m.instance), std::process::id()));
    let text = serde_json::to_string(&doc).map_err(|e| WgError::Cache(e.to_string()))?;
    std::fs::write(&tmp, text).map_err(|e| WgError::Cache(format!("{}: {e}", tmp.display())))?;
    std::fs::rename(&tmp, &path).map_err(|e| WgError::Cache(format!("{}: {e}", path.display())))?;
    Ok(())
}

/// Prime-point measure, from the cache when present.
pub fn prime_points_cached(inst: &ProblemInstance, dir: &Path) -> Result<SurfaceMeasure> {
    if let Some(m) = load_cached(dir, inst)? {
        return Ok(m);
    }
    let table = sieve_primes(iroot(inst.lambda, inst.k).max(2))?;
    let m = enumerate_prime_points(inst, &table)?;
    store_cached(dir, &m)?;
    Ok(m)
}

// ---------------------------------------------------------------- ω̂

pub fn omega_hat(m: &SurfaceMeasure, xi: &[f64]) -> Result<Complex64> {
    if xi.len() != m.instance.n {
        return input(format!("xi has {} coordinates, instance has n={}", xi.len(), m.instance.n));
    }
    if m.big_r <= 0.0 {
        return Err(WgError::UndefinedMeasure);
    }
    let mut cache: Vec<HashMap<u64, f64>> = vec![HashMap::new(); xi.len()];
    let mut acc = Complex64::new(0.0, 0.0);
    for (t, &w) in m.representations.iter().zip(&m.weights) {
        let mut ph = 0.0;
        for (j, &p) in t.iter().enumerate() {
            ph += *cache[j].entry(p).or_insert_with(|| frac_mul(xi[j], p));
        }
        acc += e(frac(ph)) * w;
    }
    Ok(acc / m.big_r)
}

/// Unnormalized Σ (weight) e(p·ξ) for every λ ≤ Λ, from the generating function.
pub struct SweepTables {
    pub k: u32,
    pub n: usize,
    pub lambda_max: u64,
    base: Vec<u64>,
    base_weight: Vec<f64>,
}

impl SweepTables {
    pub fn primes(k: u32, n: usize, lambda_max: u64) -> Result<Self> {
        let lim = iroot(lambda_max, k).max(2);
        let base = sieve_primes(lim)?.primes;
        let base_weight = base.iter().map(|&p| (p as f64).ln()).collect();
        Ok(SweepTables { k, n, lambda_max, base, base_weight })
    }

    /// Same base, weight (ln p)^s per coordinate; used for ℓ^p sums of
    /// point masses.
    pub fn with_weight_power(&self, s: f64) -> Self {
        SweepTables {
            k: self.k,
            n: self.n,
            lambda_max: self.lambda_max,
            base: self.base.clone(),
            base_weight: self.base.iter().map(|&p| (p as f64).ln().powf(s)).collect(),
        }
    }

    /// Real coefficients Σ Π w(p_i) over f(p) = λ.
    pub fn counts(&self) -> Vec<f64> {
        let len = self.lambda_max as usize + 1;
        let sparse: Vec<(usize, f64)> = self
            .base
            .iter()
            .zip(&self.base_weight)
            .map(|(&p, &w)| (p.pow(self.k) as usize, w))
            .filter(|&(i, _)| i < len)
            .collect();
        let mut acc = vec![0.0; len];
        acc[0] = 1.0;
        for _ in 0..self.n {
            let mut next = vec![0.0; len];
            for &(i, w) in &sparse {
                for (dst, &src) in next[i..].iter_mut().zip(&acc[..len - i]) {
                    *dst += w * src;
                }
            }
            acc = next;
        }
        acc
    }

    /// Complex coefficients Σ Π w(p_i) e(p_i ξ_i) over f(p) = λ.
    pub fn transforms(&self, xi: &[f64]) -> Result<Vec<Complex64>> {
        if xi.len() != self.n {
            return input("xi length differs from n");
        }
        let len = self.lambda_max as usize + 1;
        let mut acc = vec![Complex64::new(0.0, 0.0); len];
        acc[0] = Complex64::new(1.0, 0.0);
        for &x in xi {
            let sparse: Vec<(usize, Complex64)> = self
                .base
                .iter()
                .zip(&self.base_weight)
                .map(|(&p, &w)| (p.pow(self.k) as usize, e(frac_mul(x, p)) * w))
                .filter(|&(i, _)| i < len)
                .collect();
            let mut next = vec![Complex64::new(0.0, 0.0); len];
            for &(i, w) in &sparse {
                for (dst, &src) in next[i..].iter_mut().zip(&acc[..len - i]) {
                    *dst += w * src;
                }
            }
            acc = next;
        }
        Ok(acc)
    }
}

// ---------------------------------------------------------------- singular series

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeriesValue {
    pub value: Complex64,
    /// C · Qsing^{2 - n/2 + ε} / (n/2 - 2 - ε), with C fitted on the terms in
    /// (Qsing/2, Qsing]; infinite when n <= 4.
    pub tail: f64,
    pub qsing: u64,
}

/// ε in the tail shape.
pub const SERIES_EPS: f64 = 0.01;

/// Table of g(a, q; b, q) for all residues a, b modulo q.
struct GTable {
    q: u64,
    vals: Vec<Complex64>,
}

impl GTable {
    fn new(q: u64, k: u32) -> Self {
        let us = units(q).unwrap().elements;
        let phi = us.len() as f64;
        let mut vals = vec![Complex64::new(0.0, 0.0); (q * q) as usize];
        let pw: Vec<u64> = us.iter().map(|&x| pow_mod(x, k, q)).collect();
        let roots: Vec<Complex64> = (0..q).map(|j| e_ratio(j as i128, q)).collect();
        for a in 0..q {
            if q > 1 && gcd(a, q) != 1 {
                continue;
            }
            for b in 0..q {
                let mut s = Complex64::new(0.0, 0.0);
                for (&x, &xk) in us.iter().zip(&pw) {
                    s += roots[((a * xk + b * x) % q) as usize];
                }
                vals[(a * q + b) as usize] = s / phi;
            }
        }
        GTable { q, vals }
    }

    fn get(&self, a: u64, b: u64) -> Complex64 {
        self.vals[((a % self.q) * self.q + b % self.q) as usize]
    }
}

/// Cache of complete sums g(a', q'; b, r) for q' up to a bound, evaluated
/// through the reduction to modulus q'.
pub struct GCache {
    k: u32,
    tables: Vec<GTable>,
}

impl GCache {
    pub fn new(k: u32, qmax: u64) -> Self {
        GCache {
            k,
            tables: (1..=qmax).map(|q| GTable::new(q, k)).collect(),
        }
    }

    pub fn qmax(&self) -> u64 {
        self.tables.len() as u64
    }

    /// g(a, q; b, r) for a unit a mod q (q <= qmax) and b a unit mod r.
    pub fn g(&self, a: u64, q: u64, b: u64, r: u64) -> Complex64 {
        let d = gcd(q, r);
        let r0 = r / d;
        if gcd(r0, q) > 1 {
            return Complex64::new(0.0, 0.0);
        }
        let mu = mobius(r0).unwrap();
        if mu == 0 {
            return Complex64::new(0.0, 0.0);
        }
        let scale = mu as f64 / euler_phi(r0).unwrap() as f64;
        let t = &self.tables[(q - 1) as usize];
        let a2 = (a as u128 * pow_mod(r0, self.k, q) as u128 % q as u128) as u64;
        let b2 = ((b % r) as u128 * (q / d) as u128 % q as u128) as u64;
        t.get(a2, b2) * scale
    }
}

/// Terms A(q') = Σ_{a' ∈ U_q'} e(-λa'/q') Π_i g(a', q'; a_i, q_i) for q' = 1..=qsing.
pub fn singular_series_terms(inst: &ProblemInstance, avec: &[i64], qvec: &[u64], qsing: u64) -> Result<Vec<Complex64>> {
    check_vec(inst, avec, qvec)?;
    let cache = GCache::new(inst.k, qsing);
    Ok(series_terms_with(&cache, inst, avec, qvec, qsing))
}

fn check_vec(inst: &ProblemInstance, avec: &[i64], qvec: &[u64]) -> Result<()> {
    if avec.len() != inst.n || qvec.len() != inst.n {
        return input("avec and qvec must have n entries");
    }
    for (&a, &q) in avec.iter().zip(qvec) {
        if q == 0 {
            return input("denominators must be positive");
        }
        let ar = a.rem_euclid(q as i64) as u64;
        if q > 1 && gcd(ar, q) != 1 {
            return input(format!("{a}/{q} is not reduced"));
        }
    }
    Ok(())
}

fn series_terms_with(cache: &GCache, inst: &ProblemInstance, avec: &[i64], qvec: &[u64], qsing: u64) -> Vec<Complex64> {
    let bs: Vec<u64> = avec.iter().zip(qvec).map(|(&a, &q)| a.rem_euclid(q as i64) as u64).collect();
    (1..=qsing)
        .map(|qq| {
            let mut acc = Complex64::new(0.0, 0.0);
            for &a in &units(qq).unwrap().elements {
                let mut prod = e_ratio(-(inst.lambda as i128) * a as i128, qq);
                for (&b, &r) in bs.iter().zip(qvec) {
                    prod *= cache.g(a, qq, b, r);
                    if prod.norm_sqr() == 0.0 {
                        break;
                    }
                }
                acc += prod;
            }
            acc
        })
        .collect()
}

fn series_tail(terms: &[Complex64], n: usize) -> f64 {
    let qs = terms.len() as f64;
    let expo = n as f64 / 2.0 - 1.0 - SERIES_EPS;
    if expo <= 1.0 {
        return f64::INFINITY;
    }
    let lo = terms.len() / 2;
    let c = terms
        .iter()
        .enumerate()
        .skip(lo)
        .map(|(i, t)| t.norm() * ((i + 1) as f64).powf(expo))
        .fold(0.0f64, f64::max);
    c * qs.powf(1.0 - expo) / (expo - 1.0)
}

pub fn singular_series(inst: &ProblemInstance, avec: &[i64], qvec: &[u64], qsing: u64) -> Result<SeriesValue> {
    if qsing < 1 {
        return input("Qsing must be >= 1");
    }
    let terms = singular_series_terms(inst, avec, qvec, qsing)?;
    Ok(SeriesValue {
        value: terms.iter().sum(),
        tail: series_tail(&terms, inst.n),
        qsing,
    })
}

/// The pure singular series: qvec = 1, avec = 0.
pub fn singular_series_pure(inst: &ProblemInstance, qsing: u64) -> Result<SeriesValue> {
    singular_series(inst, &vec![0; inst.n], &vec![1; inst.n], qsing)
}

// ---------------------------------------------------------------- approximation

/// Smooth cutoff: 1 on [-inner, inner], 0 outside (-outer, outer), C^∞ in
/// between.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bump {
    pub inner: f64,
    pub outer: f64,
}

impl Default for Bump {
    fn default() -> Self {
        Bump { inner: 1.0, outer: 2.0 }
    }
}

impl Bump {
    /// One-dimensional profile.
    pub fn eval(&self, t: f64) -> f64 {
        let s = t.abs();
        if s <= self.inner {
            return 1.0;
        }
        if s >= self.outer {
            return 0.0;
        }
        let u = (s - self.inner) / (self.outer - self.inner);
        let f = |x: f64| if x > 0.0 { (-1.0 / x).exp() } else { 0.0 };
        f(1.0 - u) / (f(1.0 - u) + f(u))
    }

    /// ψ(x) = Π_j η(x_j).
    pub fn eval_vec(&self, x: &[f64]) -> f64 {
        x.iter().map(|&t| self.eval(t)).product()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ApproxParams {
    /// Q = (ln N)^C.
    pub c: f64,
    /// Target exponent in the error bound (log Λ)^{-B}; reported only.
    pub b: f64,
    /// Scale N; `None` means λ^{1/k}.
    pub n_scale: Option<f64>,
    /// Truncation of the q-series in G_λ.
    pub qsing: u64,
    pub bump: Bump,
    /// θ truncation for the dσ̃ factor; `None` picks 2·max|η| + 64.
    pub theta: Option<f64>,
}

impl Default for ApproxParams {
    fn default() -> Self {
        ApproxParams {
            c: 2.0,
            b: 1.0,
            n_scale: None,
            qsing: 100,
            bump: Bump::default(),
            theta: None,
        }
    }
}

impl ApproxParams {
    pub fn scale(&self, inst: &ProblemInstance) -> f64 {
        self.n_scale.unwrap_or_else(|| (inst.lambda as f64).powf(1.0 / inst.k as f64))
    }

    pub fn big_q(&self, inst: &ProblemInstance) -> f64 {
        self.scale(inst).ln().powf(self.c)
    }

    pub fn validate(&self, inst: &ProblemInstance) -> Result<()> {
        let base = (inst.lambda as f64).powf(1.0 / inst.k as f64);
        let n = self.scale(inst);
        if !(n >= base * (1.0 - 1e-12) && n <= 2.0 * base) {
            return input(format!("N must lie in [λ^(1/k), 2λ^(1/k)] = [{base}, {}], got {n}", 2.0 * base));
        }
        if !(self.c > 0.0) || !(self.b > 0.0) || self.qsing < 1 {
            return input("C, B must be positive and Qsing >= 1");
        }
        if !(self.bump.inner > 0.0 && self.bump.outer > self.bump.inner) {
            return input("bump needs 0 < inner < outer");
        }
        Ok(())
    }
}

/// One rational a/q near ξ_j with its bump value and rescaled offset.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ArcCandidate {
    /// a mod q
    pub a: u64,
    pub q: u64,
    pub psi: f64,
    /// N (ξ_j - a/q) using the lift of a nearest to q ξ_j
    pub eta: f64,
}

/// Rationals a/q with q <= Q and ψ_{N/Q}(qξ - a) > 0 in one coordinate.
pub fn coordinate_candidates(xi: f64, n_scale: f64, big_q: f64, bump: &Bump) -> Vec<ArcCandidate> {
    let qmax = big_q.floor().max(1.0) as u64;
    let h = n_scale / big_q;
    arc_candidates(xi, qmax, bump.outer / h, true)
        .into_iter()
        .filter_map(|(c, d)| {
            let psi = bump.eval(h * d);
            (psi > 0.0).then(|| ArcCandidate {
                a: c.a.rem_euclid(c.q as i64) as u64,
                q: c.q,
                psi,
                eta: n_scale * d / c.q as f64,
            })
        })
        .collect()
}

/// Precomputed pieces shared by every ξ for one instance.
pub struct MainTermEngine {
    pub inst: ProblemInstance,
    pub params: ApproxParams,
    pub n_scale: f64,
    pub lambda0: f64,
    pub big_q: f64,
    cache: GCache,
    /// e(-λ a'/q') for every (a', q') with q' <= Qsing, grouped by q'
    phases: Vec<Vec<(u64, Complex64)>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MainTermValue {
    pub value: Complex64,
    /// Candidates per coordinate.
    pub candidates: Vec<usize>,
    pub theta: f64,
}

impl MainTermEngine {
    pub fn new(inst: ProblemInstance, params: ApproxParams) -> Result<Self> {
        params.validate(&inst)?;
        let n_scale = params.scale(&inst);
        let lambda0 = inst.lambda as f64 / n_scale.powi(inst.k as i32);
        if !(lambda0 > 0.0 && lambda0 < inst.n as f64) {
            return input(format!("λ/N^k = {lambda0} outside (0, n)"));
        }
        let big_q = params.big_q(&inst);
        let cache = GCache::new(inst.k, params.qsing.max(big_q.floor() as u64));
        let phases = (1..=params.qsing)
            .map(|qq| {
                units(qq)
                    .unwrap()
                    .elements
                    .iter()
                    .map(|&a| (a, e_ratio(-(inst.lambda as i128) * a as i128, qq)))
                    .collect()
            })
            .collect();
        Ok(MainTermEngine {
            inst,
            params,
            n_scale,
            lambda0,
            big_q,
            cache,
            phases,
        })
    }

    pub fn candidates(&self, xi: &[f64]) -> Vec<Vec<ArcCandidate>> {
        xi.iter()
            .map(|&x| coordinate_candidates(x, self.n_scale, self.big_q, &self.params.bump))
            .collect()
    }

    /// Σ_{q ≤ Q} Σ_a G_λ(a,q) ψ_{N/Q}(qξ - a) dσ̃_λ0(N(ξ - a/q)), without the
    /// N^{n-k}/R factor.
    pub fn unnormalized(&self, xi: &[f64]) -> Result<MainTermValue> {
        let n = self.inst.n;
        if xi.len() != n {
            return input("xi length differs from n");
        }
        let cands = self.candidates(xi);
        let counts: Vec<usize> = cands.iter().map(|c| c.len()).collect();
        if counts.iter().any(|&c| c == 0) {
            return Ok(MainTermValue {
                value: Complex64::new(0.0, 0.0),
                candidates: counts,
                theta: 0.0,
            });
        }
        let eta_max = cands.iter().flatten().fold(0.0f64, |m, c| m.max(c.eta.abs()));
        let theta = self.params.theta.unwrap_or(2.0 * eta_max + 64.0);
        let l = sampling_period(n);
        let step = 1.0 / l;
        let m_max = (theta * l).ceil() as usize;
        let len = 2 * m_max + 1;
        // rows ψ_c · I_1(m/L, η_c), one per distinct (η, ψ)
        let mut rows: Vec<Vec<Vec<Complex64>>> = Vec::with_capacity(n);
        let mut memo: Vec<(f64, Vec<Complex64>)> = Vec::new();
        for cs in &cands {
            let mut rj = Vec::with_capacity(cs.len());
            for c in cs {
                let base = match memo.iter().find(|(h, _)| *h == c.eta) {
                    Some((_, r)) => r.clone(),
                    None => {
                        let r = i1_row(self.inst.k, c.eta, step, m_max);
                        memo.push((c.eta, r.clone()));
                        r
                    }
                };
                rj.push(base.into_iter().map(|v| v * c.psi).collect());
            }
            rows.push(rj);
        }
        let mut s = vec![Complex64::new(0.0, 0.0); len];
        let mut v = vec![vec![Complex64::new(0.0, 0.0); len]; n];
        let mut gs: Vec<Complex64> = Vec::new();
        for (qi, group) in self.phases.iter().enumerate() {
            let qq = qi as u64 + 1;
            'terms: for &(a, ph) in group {
                for j in 0..n {
                    gs.clear();
                    gs.extend(cands[j].iter().map(|c| self.cache.g(a, qq, c.a, c.q)));
                    if gs.iter().all(|g| g.norm_sqr() == 0.0) {
                        continue 'terms;
                    }
                    let vj = &mut v[j];
                    vj.iter_mut().for_each(|x| *x = Complex64::new(0.0, 0.0));
                    for (g, row) in gs.iter().zip(&rows[j]) {
                        if g.norm_sqr() == 0.0 {
                            continue;
                        }
                        for (dst, &src) in vj.iter_mut().zip(row) {
                            *dst += g * src;
                        }
                    }
                }
                for (m, sm) in s.iter_mut().enumerate() {
                    let mut p = ph;
                    for vj in &v {
                        p *= vj[m];
                    }
                    *sm += p;
                }
            }
        }
        let mut total = Complex64::new(0.0, 0.0);
        for (idx, sm) in s.iter().enumerate() {
            let m = idx as f64 - m_max as f64;
            total += sm * e(frac(-m * self.lambda0 / l));
        }
        Ok(MainTermValue {
            value: total / l,
            candidates: counts,
            theta: m_max as f64 * step,
        })
    }

    /// Full main term given R(λ).
    pub fn value(&self, big_r: f64, xi: &[f64]) -> Result<MainTermValue> {
        if big_r <= 0.0 {
            return Err(WgError::UndefinedMeasure);
        }
        let mut v = self.unnormalized(xi)?;
        v.value *= self.n_scale.powi(self.inst.n as i32 - self.inst.k as i32) / big_r;
        Ok(v)
    }

    /// Main term at ξ = 0 through the singular series and singular integral;
    /// equals [`Self::value`] at the origin whenever N > 2Q.
    pub fn value_at_origin(&self, big_r: f64) -> Result<Complex64> {
        if big_r <= 0.0 {
            return Err(WgError::UndefinedMeasure);
        }
        let s: Complex64 = series_terms_with(
            &self.cache,
            &self.inst,
            &vec![0; self.inst.n],
            &vec![1; self.inst.n],
            self.params.qsing,
        )
        .iter()
        .sum();
        let mu = singular_integral_with(self.inst.n, self.inst.k, self.lambda0, &SurfaceOptions::default())?.value.re;
        Ok(s * mu * self.n_scale.powi(self.inst.n as i32 - self.inst.k as i32) / big_r)
    }
}

pub fn main_term(m: &SurfaceMeasure, params: &ApproxParams, xi: &[f64]) -> Result<Complex64> {
    if m.big_r <= 0.0 {
        return Err(WgError::UndefinedMeasure);
    }
    MainTermEngine::new(m.instance, *params)?.value(m.big_r, xi).map(|v| v.value)
}

pub fn error_term(m: &SurfaceMeasure, params: &ApproxParams, xi: &[f64]) -> Result<Complex64> {
    Ok(omega_hat(m, xi)? - main_term(m, params, xi)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HuaRatio {
    pub ratio: f64,
    pub series: f64,
    pub series_tail: f64,
    pub mu_inf: f64,
}

/// R(λ) / (𝔖_trunc(λ) μ∞ λ^{n/k-1}) with μ∞ = dσ̃_1(0).
pub fn hua_ratio(m: &SurfaceMeasure, qsing: u64) -> Result<f64> {
    hua_ratio_detailed(m, qsing, None).map(|h| h.ratio)
}

pub fn hua_ratio_detailed(m: &SurfaceMeasure, qsing: u64, mu_inf: Option<f64>) -> Result<HuaRatio> {
    if m.big_r <= 0.0 {
        return Err(WgError::UndefinedMeasure);
    }
    let inst = m.instance;
    let s = singular_series_pure(&inst, qsing)?;
    let mu = match mu_inf {
        Some(v) => v,
        None => singular_integral_with(inst.n, inst.k, 1.0, &SurfaceOptions::default())?.value.re,
    };
    let scale = (inst.lambda as f64).powf(inst.n as f64 / inst.k as f64 - 1.0);
    Ok(HuaRatio {
        ratio: m.big_r / (s.value.re * mu * scale),
        series: s.value.re,
        series_tail: s.tail,
        mu_inf: mu,
    })
}

// ---------------------------------------------------------------- sweeps

/// Smallest λ >= from in the residue class `residue` mod `modulus` with
/// R(λ) > 0, together with its measure.
pub fn next_nonempty(e: &PointEnumerator, from: u64, modulus: u64, residue: u64) -> Result<Option<SurfaceMeasure>> {
    let mut lam = from + (modulus + residue % modulus - from % modulus) % modulus;
    while lam <= e.lambda_max {
        let m = e.measure(lam)?;
        if m.big_r > 0.0 {
            return Ok(Some(m));
        }
        lam += modulus;
    }
    Ok(None)
}

/// Progression used for sampling Γ: the listed exact family when there is
/// one, else the parity class for odd k, else every λ.
pub fn gamma_progression(k: u32, n: usize) -> (u64, u64) {
    match (k, n) {
        (2, 5) => (24, 5),
        (4, 17) => (240, 17),
        _ if k % 2 == 1 => (2, n as u64 % 2),
        _ => (1, 0),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HuaSample {
    pub lambda: u64,
    pub ratio: f64,
    pub series: f64,
}

/// Hua ratios at `samples` points evenly spaced in [lo, hi], each moved to
/// the next nonempty member of the Γ progression.
pub fn hua_sweep(k: u32, n: usize, lo: u64, hi: u64, samples: usize, qsing: u64) -> Result<Vec<HuaSample>> {
    if lo >= hi || samples == 0 {
        return input("need lo < hi and samples >= 1");
    }
    let e = PointEnumerator::primes(k, n, hi)?;
    let mu = singular_integral_with(n, k, 1.0, &SurfaceOptions::default())?.value.re;
    let (md, res) = gamma_progression(k, n);
    let mut out: Vec<HuaSample> = Vec::new();
    for i in 0..samples as u64 {
        let target = lo + (hi - lo) * i / samples as u64;
        if let Some(m) = next_nonempty(&e, target, md, res)? {
            if out.last().is_some_and(|s| s.lambda == m.instance.lambda) {
                continue;
            }
            let h = hua_ratio_detailed(&m, qsing, Some(mu))?;
            out.push(HuaSample {
                lambda: m.instance.lambda,
                ratio: h.ratio,
                series: h.series,
            });
        }
    }
    Ok(out)
}

/// Fixed ξ sample: `uniform` points in [0,1)^n and `rational` points whose
/// coordinates are a/q with q <= 4.
pub fn xi_sample(n: usize, uniform: usize, rational: usize, seed: u64) -> Vec<Vec<f64>> {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut out: Vec<Vec<f64>> = (0..uniform).map(|_| (0..n).map(|_| rng.gen::<f64>()).collect()).collect();
    for _ in 0..rational {
        out.push(
            (0..n)
                .map(|_| {
                    let q = rng.gen_range(1..=4u64);
                    let a = loop {
                        let a = rng.gen_range(0..q);
                        if q == 1 || gcd(a, q) == 1 {
                            break a;
                        }
                    };
                    a as f64 / q as f64
                })
                .collect(),
        );
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ApproxBlock {
    pub block: u64,
    pub lambdas: Vec<u64>,
    /// per ξ, the sup over the block's λ of |Ê_λ(ξ)|
    pub sup_per_xi: Vec<f64>,
    pub median: f64,
    /// |Ê_λ(0)| for each λ in `lambdas`
    pub origin: Vec<f64>,
}

fn median_of(v: &[f64]) -> f64 {
    let mut s = v.to_vec();
    s.sort_by(|a, b| a.total_cmp(b));
    let n = s.len();
    if n == 0 {
        f64::NAN
    } else if n % 2 == 1 {
        s[n / 2]
    } else {
        0.5 * (s[n / 2 - 1] + s[n / 2])
    }
}

/// For each dyadic block [Λ, 2Λ]: `per_block` members of the Γ progression
/// evenly spaced, |Ê_λ(ξ)| on the ξ sample, sup over λ, median over ξ.
/// `n_factor` sets N = n_factor · λ^{1/k}.
pub fn approx_sweep(
    k: u32,
    n: usize,
    blocks: &[u64],
    per_block: usize,
    xis: &[Vec<f64>],
    params: &ApproxParams,
    n_factor: f64,
) -> Result<Vec<ApproxBlock>> {
    if blocks.is_empty() || per_block == 0 || xis.is_empty() {
        return input("need blocks, per_block >= 1 and a nonempty ξ sample");
    }
    let top = 2 * *blocks.iter().max().unwrap();
    let e = PointEnumerator::primes(k, n, top)?;
    let (md, res) = gamma_progression(k, n);
    let zero = vec![0.0; n];
    blocks
        .iter()
        .map(|&big| {
            let mut sup = vec![0.0f64; xis.len()];
            let mut lambdas = Vec::new();
            let mut origin = Vec::new();
            for i in 0..per_block as u64 {
                let target = big + big * (2 * i + 1) / (2 * per_block as u64);
                let Some(m) = next_nonempty(&e, target, md, res)? else {
                    continue;
                };
                let p = ApproxParams {
                    n_scale: Some(n_factor * (m.instance.lambda as f64).powf(1.0 / k as f64)),
                    ..*params
                };
                let eng = MainTermEngine::new(m.instance, p)?;
                let err = |xi: &[f64]| -> Result<f64> { Ok((omega_hat(&m, xi)? - eng.value(m.big_r, xi)?.value).norm()) };
                origin.push(err(&zero)?);
                for (s, xi) in sup.iter_mut().zip(xis) {
                    *s = s.max(err(xi)?);
                }
                lambdas.push(m.instance.lambda);
            }
            Ok(ApproxBlock {
                block: big,
                median: median_of(&sup),
                lambdas,
                sup_per_xi: sup,
                origin,
            })
        })
        .collect()
}
