//! Complete and prime-indexed exponential sums.
//!
//! `g(a,q;b,r)` is the normalized sum over units modulo `[q,r]` of
//! `e(a x^k / q + b x / r)`. Phases are reduced with exact integer arithmetic
//! modulo `[q,r]` before calling [`e`](crate::phase::e), so large `a x^k` never
//! reaches floating point.

use crate::error::{input, Result, WgError};
use crate::numtheory::{divisor_count, euler_phi, gcd, lcm, mobius, rem, units, PrimeTable};
use crate::phase::{e, e_ratio, frac, frac_mul};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GSumQuery {
    pub a: i64,
    pub q: u64,
    pub b: i64,
    pub r: u64,
    pub k: u32,
}

impl GSumQuery {
    pub fn new(a: i64, q: u64, b: i64, r: u64, k: u32) -> Self {
        GSumQuery { a, q, b, r, k }
    }
}

/// x^k mod m without overflow.
pub fn pow_mod(x: u64, k: u32, m: u64) -> u64 {
    if m == 1 {
        return 0;
    }
    let m = m as u128;
    let mut acc = 1u128;
    let mut base = x as u128 % m;
    let mut k = k;
    while k > 0 {
        if k & 1 == 1 {
            acc = acc * base % m;
        }
        base = base * base % m;
        k >>= 1;
    }
    acc as u64
}

/// Direct evaluation of g(a,q;b,r); any integers a, b are accepted.
pub fn g_sum(query: &GSumQuery) -> Result<Complex64> {
    let GSumQuery { a, q, b, r, k } = *query;
    if q == 0 || r == 0 {
        return input("g_sum needs q, r >= 1");
    }
    let m = lcm(q, r);
    let ca = rem(a, q) * (m / q) % m;
    let cb = rem(b, r) * (m / r) % m;
    let us = units(m)?;
    let mut acc = Complex64::new(0.0, 0.0);
    for &x in &us.elements {
        let t = (ca as u128 * pow_mod(x, k, m) as u128 + cb as u128 * x as u128) % m as u128;
        acc += e(t as f64 / m as f64);
    }
    Ok(acc / us.elements.len() as f64)
}

/// g(a,q;b,r) through the reduction to modulus q.
///
/// With `d = (q,r)`, `r0 = r/d`, `q0 = q/d`: zero when `(r0,q) > 1`, otherwise
/// `mu(r0)/phi(r0) * g(a r0^k, q; b q0, q)`.
pub fn g_via_lemma(query: &GSumQuery) -> Result<Complex64> {
    let GSumQuery { a, q, b, r, k } = *query;
    if q == 0 || r == 0 {
        return input("g_via_lemma needs q, r >= 1");
    }
    if gcd(rem(a, q), q) != 1 || gcd(rem(b, r), r) != 1 {
        return input(format!("g_via_lemma needs (a,q)=(b,r)=1, got a={a} q={q} b={b} r={r}"));
    }
    let d = gcd(q, r);
    let r0 = r / d;
    let q0 = q / d;
    if gcd(r0, q) > 1 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let mu = mobius(r0)? as f64;
    if mu == 0.0 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let phi = euler_phi(r0)? as f64;
    let a2 = (rem(a, q) as u128 * pow_mod(r0, k, q) as u128 % q as u128) as i64;
    let b2 = (rem(b, r) as u128 * q0 as u128 % q as u128) as i64;
    Ok(g_sum(&GSumQuery::new(a2, q, b2, q, k))? * (mu / phi))
}

/// Ramanujan sum c_q(m), by the closed form `mu(q/d) phi(q) / phi(q/d)` with d=(q,m).
pub fn ramanujan_sum(q: u64, m: i64) -> Result<f64> {
    if q == 0 {
        return input("ramanujan_sum needs q >= 1");
    }
    let d = gcd(rem(m, q), q);
    let t = q / d;
    Ok((mobius(t)? * euler_phi(q)? as i64 / euler_phi(t)? as i64) as f64)
}

/// Sum over b in U_r of g(a,q;b,r) e(-u b / r).
pub fn aggregate_g(a: i64, q: u64, r: u64, u: i64, k: u32) -> Result<Complex64> {
    if q == 0 || r == 0 {
        return input("aggregate_g needs q, r >= 1");
    }
    if gcd(rem(a, q), q) != 1 {
        return input("aggregate_g needs (a,q)=1");
    }
    let mut acc = Complex64::new(0.0, 0.0);
    for &b in &units(r)?.elements {
        let g = g_sum(&GSumQuery::new(a, q, b as i64, r, k))?;
        acc += g * e_ratio(-(u as i128) * b as i128, r);
    }
    Ok(acc)
}

/// sum over u in Z_r of |aggregate_g|, returned with the bound tau(r) r / phi(r0).
pub fn aggregate_total_variation(a: i64, q: u64, r: u64, k: u32) -> Result<(f64, f64)> {
    let mut tv = 0.0;
    // each aggregate is a linear combination of the g values; compute them once
    let us = units(r)?.elements;
    let gs: Vec<Complex64> = us
        .iter()
        .map(|&b| g_sum(&GSumQuery::new(a, q, b as i64, r, k)))
        .collect::<Result<_>>()?;
    for u in 0..r {
        let mut acc = Complex64::new(0.0, 0.0);
        for (g, &b) in gs.iter().zip(&us) {
            acc += g * e_ratio(-(u as i128) * b as i128, r);
        }
        tv += acc.norm();
    }
    let r0 = r / gcd(q, r);
    let bound = (divisor_count(r)? * r) as f64 / euler_phi(r0)? as f64;
    Ok((tv, bound))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PrimeSumQuery {
    pub theta: f64,
    pub xi: f64,
    pub k: u32,
    pub n: u64,
}

/// S_N(theta, xi) = sum over p <= N of (ln p) e(theta p^k + xi p).
pub fn prime_exp_sum(query: &PrimeSumQuery, table: &PrimeTable) -> Result<Complex64> {
    let PrimeSumQuery { theta, xi, k, n } = *query;
    if n < 2 {
        return input("prime_exp_sum needs N >= 2");
    }
    if table.limit < n {
        return input(format!("prime table limit {} below N={n}", table.limit));
    }
    let mut acc = Complex64::new(0.0, 0.0);
    for &p in table.up_to(n) {
        let pk = p
            .checked_pow(k)
            .ok_or_else(|| WgError::Input(format!("p^k overflows for p={p}, k={k}")))?;
        let ph = frac(frac_mul(theta, pk) + frac_mul(xi, p));
        acc += e(ph) * (p as f64).ln();
    }
    Ok(acc)
}

/// S_N(a/q, b/r) with the phase reduced exactly modulo [q,r].
pub fn prime_exp_sum_rational(
    a: i64,
    q: u64,
    b: i64,
    r: u64,
    k: u32,
    n: u64,
    table: &PrimeTable,
) -> Result<Complex64> {
    if n < 2 || q == 0 || r == 0 {
        return input("prime_exp_sum_rational needs N >= 2 and q, r >= 1");
    }
    if table.limit < n {
        return input(format!("prime table limit {} below N={n}", table.limit));
    }
    let m = lcm(q, r);
    let ca = rem(a, q) * (m / q) % m;
    let cb = rem(b, r) * (m / r) % m;
    let mut acc = Complex64::new(0.0, 0.0);
    for &p in table.up_to(n) {
        let t = (ca as u128 * pow_mod(p, k, m) as u128 + cb as u128 * p as u128) % m as u128;
        acc += e(t as f64 / m as f64) * (p as f64).ln();
    }
    Ok(acc)
}

/// F(a) = product over i of g(a,q; a_i, q_i).
pub fn f_product(a: i64, q: u64, avec: &[i64], qvec: &[u64], k: u32) -> Result<Complex64> {
    if avec.len() != qvec.len() {
        return input("avec and qvec differ in length");
    }
    let mut acc = Complex64::new(1.0, 0.0);
    for (&ai, &qi) in avec.iter().zip(qvec) {
        acc *= g_sum(&GSumQuery::new(a, q, ai, qi, k))?;
        if acc == Complex64::new(0.0, 0.0) {
            break;
        }
    }
    Ok(acc)
}

/// Largest admissible N for [`count_vinogradov_system`].
pub const VINOGRADOV_MAX_N: u64 = 30;
/// Largest admissible s for [`count_vinogradov_system`].
pub const VINOGRADOV_MAX_S: u32 = 3;

/// Number of pairs x, y in [1,N]^s with equal sums of k-th powers and equal
/// plain sums. Counted as the sum of squared multiplicities of the key
/// (sum x_i^k, sum x_i).
pub fn count_vinogradov_system(n: u64, s: u32, k: u32) -> Result<u64> {
    if n > VINOGRADOV_MAX_N || s > VINOGRADOV_MAX_S {
        return Err(WgError::Refused(format!(
            "brute force limited to N <= {VINOGRADOV_MAX_N}, s <= {VINOGRADOV_MAX_S}; got N={n}, s={s}"
        )));
    }
    if n == 0 || s == 0 {
        return input("count_vinogradov_system needs N, s >= 1");
    }
    let mut counts: HashMap<(u64, u64), u64> = HashMap::new();
    let mut idx = vec![1u64; s as usize];
    loop {
        let key = idx.iter().fold((0, 0), |(pk, p1), &x| (pk + x.pow(k), p1 + x));
        *counts.entry(key).or_insert(0) += 1;
        let mut i = 0;
        loop {
            if i == idx.len() {
                return Ok(counts.values().map(|c| c * c).sum());
            }
            idx[i] += 1;
            if idx[i] <= n {
                break;
            }
            idx[i] = 1;
            i += 1;
        }
    }
}

/// max over a, b in U_q of |sum over x in U_q of e((a x^k + b x)/q)|.
///
/// Substituting x -> ux shows the modulus depends on a only through its coset
/// modulo k-th powers, so one representative per coset is scanned; for each a
/// all b are obtained from one length-q DFT.
pub fn complete_sum_max(q: u64, k: u32) -> Result<f64> {
    use rustfft::FftPlanner;
    let us = units(q)?.elements;
    if q == 1 {
        return Ok(1.0);
    }
    let powers: std::collections::HashSet<u64> = us.iter().map(|&u| pow_mod(u, k, q)).collect();
    let mut covered = std::collections::HashSet::new();
    let mut reps = Vec::new();
    for &a in &us {
        if covered.contains(&a) {
            continue;
        }
        reps.push(a);
        for &p in &powers {
            covered.insert((a as u128 * p as u128 % q as u128) as u64);
        }
    }
    let mut planner = FftPlanner::<f64>::new();
    let fft = planner.plan_fft_inverse(q as usize);
    let mut best: f64 = 0.0;
    for a in reps {
        let mut buf = vec![Complex64::new(0.0, 0.0); q as usize];
        for &x in &us {
            buf[x as usize] = e_ratio(a as i128 * pow_mod(x, k, q) as i128, q);
        }
        fft.process(&mut buf);
        for &b in &us {
            best = best.max(buf[b as usize].norm());
        }
    }
    Ok(best)
}

/// Chebyshev theta(N) from a prime table.
pub fn chebyshev_theta(n: u64, table: &PrimeTable) -> f64 {
    table.chebyshev_theta(n)
}
