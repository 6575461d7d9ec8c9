//! Elementary arithmetic: prime tables, multiplicative functions and unit
//! groups modulo q.
//!
//! The sieve is a plain Eratosthenes table up to [`SEGMENT_THRESHOLD`]; above
//! that it switches to a segmented sieve so memory stays at one segment plus
//! the base primes up to sqrt(limit).

use crate::error::{input, Result};
use serde::{Deserialize, Serialize};

/// Above this limit [`sieve_primes`] runs segmented.
pub const SEGMENT_THRESHOLD: u64 = 10_000_000;
const SEGMENT_LEN: u64 = 1 << 18;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PrimeTable {
    pub limit: u64,
    pub primes: Vec<u64>,
}

impl PrimeTable {
    pub fn contains(&self, p: u64) -> bool {
        p <= self.limit && self.primes.binary_search(&p).is_ok()
    }

    /// Primes not exceeding `x`.
    pub fn up_to(&self, x: u64) -> &[u64] {
        let end = self.primes.partition_point(|&p| p <= x);
        &self.primes[..end]
    }

    /// Chebyshev theta(x) = sum of ln p over p <= x.
    pub fn chebyshev_theta(&self, x: u64) -> f64 {
        self.up_to(x).iter().map(|&p| (p as f64).ln()).sum()
    }
}

pub fn sieve_primes(limit: u64) -> Result<PrimeTable> {
    if limit < 2 {
        return input(format!("sieve limit must be >= 2, got {limit}"));
    }
    let primes = if limit <= SEGMENT_THRESHOLD {
        simple_sieve(limit)
    } else {
        segmented_sieve(limit)
    };
    Ok(PrimeTable { limit, primes })
}

fn simple_sieve(limit: u64) -> Vec<u64> {
    let n = limit as usize;
    let mut composite = vec![false; n + 1];
    let mut out = Vec::with_capacity(estimate_count(limit));
    let mut i = 2usize;
    while i <= n {
        if !composite[i] {
            out.push(i as u64);
            let mut j = i.saturating_mul(i);
            while j <= n {
                composite[j] = true;
                j += i;
            }
        }
        i += 1;
    }
    out
}

fn segmented_sieve(limit: u64) -> Vec<u64> {
    let root = isqrt(limit);
    let base = if root >= 2 { simple_sieve(root) } else { Vec::new() };
    let mut out = Vec::with_capacity(estimate_count(limit));
    out.extend_from_slice(&base);
    let mut lo = (root + 1).max(2);
    let mut seg = vec![false; SEGMENT_LEN as usize];
    while lo <= limit {
        let hi = (lo + SEGMENT_LEN - 1).min(limit);
        let len = (hi - lo + 1) as usize;
        seg[..len].iter_mut().for_each(|c| *c = false);
        for &p in &base {
            if p * p > hi {
                break;
            }
            let mut m = (lo + p - 1) / p * p;
            if m < p * p {
                m = p * p;
            }
            while m <= hi {
                seg[(m - lo) as usize] = true;
                m += p;
            }
        }
        for (i, &c) in seg[..len].iter().enumerate() {
            if !c {
                out.push(lo + i as u64);
            }
        }
        lo = hi + 1;
    }
    out
}

fn estimate_count(limit: u64) -> usize {
    let x = limit as f64;
    if x < 17.0 {
        8
    } else {
        (1.26 * x / x.ln()) as usize
    }
}

pub fn isqrt(n: u64) -> u64 {
    let mut r = (n as f64).sqrt() as u64;
    while r * r > n {
        r -= 1;
    }
    while (r + 1) * (r + 1) <= n {
        r += 1;
    }
    r
}

/// Largest x with x^k <= n.
pub fn iroot(n: u64, k: u32) -> u64 {
    if k == 1 || n < 2 {
        return n;
    }
    let mut r = (n as f64).powf(1.0 / k as f64).round() as u64;
    while r > 0 && checked_pow(r, k).map_or(true, |v| v > n) {
        r -= 1;
    }
    while checked_pow(r + 1, k).is_some_and(|v| v <= n) {
        r += 1;
    }
    r
}

pub fn checked_pow(x: u64, k: u32) -> Option<u64> {
    x.checked_pow(k)
}

pub fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

pub fn lcm(a: u64, b: u64) -> u64 {
    a / gcd(a, b) * b
}

/// Reduce an integer into [0, q).
pub fn rem(a: i64, q: u64) -> u64 {
    a.rem_euclid(q as i64) as u64
}

/// Prime factorization by trial division, as (prime, exponent) pairs.
pub fn factorize(mut m: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut p = 2u64;
    while p * p <= m {
        if m % p == 0 {
            let mut e = 0;
            while m % p == 0 {
                m /= p;
                e += 1;
            }
            out.push((p, e));
        }
        p += if p == 2 { 1 } else { 2 };
    }
    if m > 1 {
        out.push((m, 1));
    }
    out
}

fn check_positive(m: u64) -> Result<()> {
    if m < 1 {
        return input("argument must be >= 1");
    }
    Ok(())
}

pub fn euler_phi(m: u64) -> Result<u64> {
    check_positive(m)?;
    Ok(factorize(m)
        .into_iter()
        .map(|(p, e)| (p - 1) * p.pow(e - 1))
        .product())
}

pub fn mobius(m: u64) -> Result<i64> {
    check_positive(m)?;
    let f = factorize(m);
    if f.iter().any(|&(_, e)| e > 1) {
        return Ok(0);
    }
    Ok(if f.len() % 2 == 0 { 1 } else { -1 })
}

pub fn divisor_count(m: u64) -> Result<u64> {
    check_positive(m)?;
    Ok(factorize(m).into_iter().map(|(_, e)| e as u64 + 1).product())
}

pub fn divisors(m: u64) -> Vec<u64> {
    let mut out = vec![1u64];
    for (p, e) in factorize(m) {
        let cur = out.len();
        let mut pk = 1;
        for _ in 0..e {
            pk *= p;
            for i in 0..cur {
                out.push(out[i] * pk);
            }
        }
    }
    out.sort_unstable();
    out
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct UnitGroup {
    pub modulus: u64,
    pub elements: Vec<u64>,
}

/// The reduced residues mod q; for q = 1 this is the single residue 0.
pub fn units(q: u64) -> Result<UnitGroup> {
    check_positive(q)?;
    let elements = if q == 1 {
        vec![0]
    } else {
        (1..q).filter(|&x| gcd(x, q) == 1).collect()
    };
    Ok(UnitGroup {
        modulus: q,
        elements,
    })
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    factorize(n).len() == 1 && factorize(n)[0].1 == 1
}

#[cfg(test)]
mod tests {
    use super::*;

    fn trial_division_primes(limit: u64) -> Vec<u64> {
        (2..=limit)
            .filter(|&n| (2..n).take_while(|d| d * d <= n).all(|d| n % d != 0))
            .collect()
    }

    #[test]
    fn sieve_examples() {
        assert_eq!(sieve_primes(2).unwrap().primes, vec![2]);
        assert_eq!(sieve_primes(10).unwrap().primes, vec![2, 3, 5, 7]);
        assert_eq!(
            sieve_primes(30).unwrap().primes,
            vec![2, 3, 5, 7, 11, 13, 17, 19, 23, 29]
        );
        assert!(sieve_primes(1).is_err());
        assert!(sieve_primes(0).is_err());
    }

    #[test]
    fn sieve_matches_trial_division() {
        assert_eq!(sieve_primes(5000).unwrap().primes, trial_division_primes(5000));
    }

    #[test]
    fn segmented_matches_simple() {
        for limit in [2u64, 3, 100, 1000, 262_144, 262_145, 1_000_003] {
            assert_eq!(segmented_sieve(limit), simple_sieve(limit), "limit {limit}");
        }
    }

    #[test]
    fn segmented_path_above_threshold() {
        let t = sieve_primes(SEGMENT_THRESHOLD + 1000).unwrap();
        // pi(10^7) = 664579
        assert_eq!(t.up_to(SEGMENT_THRESHOLD).len(), 664_579);
        assert!(t.primes.windows(2).all(|w| w[0] < w[1]));
        assert!(t.primes.iter().rev().take(20).all(|&p| is_prime(p)));
    }

    #[test]
    fn multiplicative_examples() {
        assert_eq!(euler_phi(1).unwrap(), 1);
        assert_eq!(mobius(1).unwrap(), 1);
        assert_eq!(divisor_count(1).unwrap(), 1);
        assert_eq!(euler_phi(12).unwrap(), 4);
        assert_eq!(mobius(12).unwrap(), 0);
        assert_eq!(divisor_count(12).unwrap(), 6);
        assert_eq!(mobius(30).unwrap(), -1);
        assert!(euler_phi(0).is_err());
        assert!(mobius(0).is_err());
        assert!(divisor_count(0).is_err());
    }

    #[test]
    fn units_examples() {
        assert_eq!(units(1).unwrap().elements, vec![0]);
        assert_eq!(units(8).unwrap().elements, vec![1, 3, 5, 7]);
        assert_eq!(units(7).unwrap().elements, vec![1, 2, 3, 4, 5, 6]);
    }

    #[test]
    fn divisor_sums_identities() {
        for m in 1..=10_000u64 {
            let ds = divisors(m);
            assert_eq!(ds.len() as u64, divisor_count(m).unwrap());
            let phi_sum: u64 = ds.iter().map(|&d| euler_phi(d).unwrap()).sum();
            assert_eq!(phi_sum, m);
            let mu_sum: i64 = ds.iter().map(|&d| mobius(d).unwrap()).sum();
            assert_eq!(mu_sum, i64::from(m == 1));
        }
    }

    #[test]
    fn multiplicativity_on_coprime_pairs() {
        for a in 1..=10_000u64 {
            for b in 1..=10_000 / a {
                if gcd(a, b) != 1 {
                    continue;
                }
                let ab = a * b;
                assert_eq!(euler_phi(ab).unwrap(), euler_phi(a).unwrap() * euler_phi(b).unwrap());
                assert_eq!(mobius(ab).unwrap(), mobius(a).unwrap() * mobius(b).unwrap());
                assert_eq!(
                    divisor_count(ab).unwrap(),
                    divisor_count(a).unwrap() * divisor_count(b).unwrap()
                );
            }
        }
    }

    #[test]
    fn unit_group_cardinality() {
        for q in 1..=10_000u64 {
            assert_eq!(units(q).unwrap().elements.len() as u64, euler_phi(q).unwrap());
        }
    }

    #[test]
    fn roots() {
        assert_eq!(isqrt(24), 4);
        assert_eq!(isqrt(25), 5);
        assert_eq!(iroot(26, 3), 2);
        assert_eq!(iroot(27, 3), 3);
        assert_eq!(iroot(u64::MAX, 2), 4_294_967_295);
    }
}
