//! Major and minor arcs, Dirichlet approximation and continued fractions.
//!
//! Points of the circle are reduced to [0, 1) before any arc test. The arc
//! around a/q is `{θ : |qθ - a| ≤ Q/X}` with `a` allowed to be any integer
//! lift, so the arc around 0/1 also covers a neighbourhood of 1.

use crate::error::{input, Result};
use crate::numtheory::{euler_phi, gcd};
use crate::phase::frac;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ArcSystem {
    pub x: f64,
    pub q: f64,
}

impl ArcSystem {
    pub fn new(x: f64, q: f64) -> Result<Self> {
        if !(1.0 <= q && q <= x) {
            return input(format!("arc system needs 1 <= Q <= X, got Q={q} X={x}"));
        }
        Ok(ArcSystem { x, q })
    }

    /// Arc half-width in units of |qθ - a|.
    pub fn radius(&self) -> f64 {
        self.q / self.x
    }

    /// Arcs around a/q and a'/q' meet only if Q(q + q') >= X, so 2Q^2 < X
    /// makes the whole family disjoint. 2Q < X alone does not.
    pub fn is_disjoint_regime(&self) -> bool {
        2.0 * self.q * self.q < self.x
    }
}

/// A reduced fraction. Arc centres are kept in `0 <= a < q` (0/1 for the
/// origin); convergents keep their true numerator, so 1/1 can occur.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct RationalPoint {
    pub a: i64,
    pub q: u64,
}

impl RationalPoint {
    pub fn new(a: i64, q: u64) -> Self {
        RationalPoint { a, q }
    }

    pub fn value(&self) -> f64 {
        self.a as f64 / self.q as f64
    }

    /// Representative with 0 <= a < q.
    pub fn on_circle(&self) -> Self {
        RationalPoint {
            a: self.a.rem_euclid(self.q as i64),
            q: self.q,
        }
    }
}

/// Distance from t to the nearest integer.
pub fn circle_norm(t: f64) -> f64 {
    let f = frac(t);
    f.min(1.0 - f)
}

/// θ in [0,1) as an exact dyadic fraction `num / 2^shift`; `None` when the
/// shift does not fit in u128 arithmetic (θ below about 2^-74).
pub fn dyadic(theta: f64) -> Option<(u128, u32)> {
    if theta == 0.0 {
        return Some((0, 0));
    }
    let bits = theta.to_bits();
    let exp = ((bits >> 52) & 0x7ff) as i32;
    if exp == 0 {
        return None;
    }
    let mut mant = ((bits & ((1u64 << 52) - 1)) | (1u64 << 52)) as u128;
    let mut shift = (1075 - exp) as u32;
    while mant & 1 == 0 && shift > 0 {
        mant >>= 1;
        shift -= 1;
    }
    if shift > 126 {
        None
    } else {
        Some((mant, shift))
    }
}

/// Continued-fraction convergents of θ reduced to [0, 1).
///
/// The expansion is that of the exact binary value of θ, so it terminates.
/// Stops after `count` terms or once a denominator would exceed 2^53.
pub fn convergents(xi: f64, count: usize) -> Result<Vec<RationalPoint>> {
    if count == 0 || count > 64 {
        return input(format!("convergent count must be in 1..=64, got {count}"));
    }
    if !xi.is_finite() {
        return input("convergents of a non-finite number");
    }
    let theta = frac(xi);
    let mut out = vec![RationalPoint::new(0, 1)];
    let Some((num, shift)) = dyadic(theta) else {
        // first partial quotient alone exceeds 2^53
        return Ok(out);
    };
    // Euclid on num / den; p_{-1}/q_{-1} = 1/0, p_0/q_0 = 0/1
    let (mut x, mut y) = (1u128 << shift, num);
    let (mut p1, mut q1, mut p0, mut q0) = (1u128, 0u128, 0u128, 1u128);
    while out.len() < count && y != 0 {
        let a = x / y;
        (x, y) = (y, x % y);
        let p = a.checked_mul(p0).and_then(|v| v.checked_add(p1));
        let q = a.checked_mul(q0).and_then(|v| v.checked_add(q1));
        let (Some(p), Some(q)) = (p, q) else { break };
        if q > 1u128 << 53 {
            break;
        }
        out.push(RationalPoint::new(p as i64, q as u64));
        (p1, q1, p0, q0) = (p0, q0, p, q);
    }
    Ok(out)
}

/// Reduced a/q with q <= Qbound and ||qθ|| <= 1/Qbound, taken as the last
/// convergent with denominator at most Qbound.
pub fn dirichlet_approx(theta: f64, qbound: f64) -> Result<RationalPoint> {
    if !(qbound >= 1.0) {
        return input(format!("Dirichlet bound must be >= 1, got {qbound}"));
    }
    let cs = convergents(theta, 64)?;
    let best = cs
        .iter()
        .take_while(|c| c.q as f64 <= qbound)
        .last()
        .copied()
        .unwrap_or(RationalPoint::new(0, 1));
    Ok(best.on_circle())
}

/// All (a, q) with q <= qmax, a mod q a unit, and |qθ - a| <= radius (or
/// `< radius` when `strict`), for θ reduced to [0,1). Ordered by q then a.
/// The returned `a` is the integer lift actually within range.
pub fn arc_candidates(theta: f64, qmax: u64, radius: f64, strict: bool) -> Vec<(RationalPoint, f64)> {
    let t = frac(theta);
    let mut out = Vec::new();
    for q in 1..=qmax {
        let qt = q as f64 * t;
        let lo = (qt - radius).ceil() as i64;
        let hi = (qt + radius).floor() as i64;
        for a in lo..=hi {
            let d = qt - a as f64;
            let inside = if strict { d.abs() < radius } else { d.abs() <= radius };
            if !inside {
                continue;
            }
            if q > 1 && gcd(a.rem_euclid(q as i64) as u64, q) != 1 {
                continue;
            }
            out.push((RationalPoint::new(a, q), d));
        }
    }
    out
}

/// The arc centre containing θ, smallest q first, then smallest a; `None` on
/// the minor arcs.
pub fn major_arc_membership(theta: f64, system: &ArcSystem) -> Option<RationalPoint> {
    let qmax = system.q.floor() as u64;
    arc_candidates(theta, qmax, system.radius(), false)
        .into_iter()
        .map(|(c, _)| c.on_circle())
        .min_by_key(|c| (c.q, c.a))
}

/// Every arc centre (on the circle) whose arc contains θ.
pub fn arcs_containing(theta: f64, system: &ArcSystem) -> Vec<RationalPoint> {
    let mut v: Vec<RationalPoint> = arc_candidates(theta, system.q.floor() as u64, system.radius(), false)
        .into_iter()
        .map(|(c, _)| c.on_circle())
        .collect();
    v.sort();
    v.dedup();
    v
}

/// Lebesgue measure of the union of major arcs, by merging intervals.
pub fn major_arc_measure(system: &ArcSystem) -> f64 {
    let qmax = system.q.floor() as u64;
    let mut iv: Vec<(f64, f64)> = Vec::new();
    for q in 1..=qmax {
        let w = system.radius() / q as f64;
        let lifts: Vec<i64> = if q == 1 { vec![0, 1] } else { (1..q as i64).collect() };
        for a in lifts {
            if q > 1 && gcd(a as u64, q) != 1 {
                continue;
            }
            let c = a as f64 / q as f64;
            let (lo, hi) = ((c - w).max(0.0), (c + w).min(1.0));
            if lo < hi {
                iv.push((lo, hi));
            }
        }
    }
    iv.sort_by(|x, y| x.0.partial_cmp(&y.0).unwrap());
    let mut total = 0.0;
    let mut cur: Option<(f64, f64)> = None;
    for (lo, hi) in iv {
        match cur {
            Some((cl, ch)) if lo <= ch => cur = Some((cl, ch.max(hi))),
            Some((cl, ch)) => {
                total += ch - cl;
                cur = Some((lo, hi));
            }
            None => cur = Some((lo, hi)),
        }
    }
    if let Some((cl, ch)) = cur {
        total += ch - cl;
    }
    total
}

/// Sum of arc lengths without merging: Σ_{q ≤ Q} φ(q) 2Q/(qX).
pub fn major_arc_length_sum(system: &ArcSystem) -> f64 {
    let qmax = system.q.floor() as u64;
    (1..=qmax)
        .map(|q| euler_phi(q).unwrap() as f64 * 2.0 * system.radius() / q as f64)
        .sum()
}
