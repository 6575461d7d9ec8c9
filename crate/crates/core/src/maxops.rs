//! Convolution with surface measures on finite boxes of ℤ^n, the pointwise
//! maximal function over a family of λ, and ℓ^p diagnostics.
//!
//! Grids are dense, indexed by {-K,…,K}^n with the first coordinate varying
//! fastest, and zero outside the box.

use crate::error::{input, Result, WgError};
use crate::wgsurface::{PointEnumerator, SurfaceMeasure, SweepTables};
use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridFunction {
    pub n: usize,
    pub radius: i64,
    pub values: Vec<Complex64>,
}

impl GridFunction {
    pub fn zeros(n: usize, radius: i64) -> Result<Self> {
        if n == 0 || radius < 1 {
            return input("grid needs n >= 1 and K >= 1");
        }
        let side = (2 * radius + 1) as usize;
        let len = side
            .checked_pow(n as u32)
            .filter(|&l| l <= 1 << 28)
            .ok_or_else(|| WgError::Input(format!("grid (2K+1)^n = {side}^{n} too large")))?;
        Ok(GridFunction {
            n,
            radius,
            values: vec![Complex64::new(0.0, 0.0); len],
        })
    }

    pub fn delta(n: usize, radius: i64) -> Result<Self> {
        let mut g = Self::zeros(n, radius)?;
        let origin = g.index(&vec![0; n]).unwrap();
        g.values[origin] = Complex64::new(1.0, 0.0);
        Ok(g)
    }

    pub fn constant(n: usize, radius: i64, c: Complex64) -> Result<Self> {
        let mut g = Self::zeros(n, radius)?;
        g.values.iter_mut().for_each(|v| *v = c);
        Ok(g)
    }

    pub fn side(&self) -> usize {
        (2 * self.radius + 1) as usize
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn index(&self, x: &[i64]) -> Option<usize> {
        if x.len() != self.n {
            return None;
        }
        let side = self.side();
        let mut idx = 0usize;
        for &c in x.iter().rev() {
            if c.abs() > self.radius {
                return None;
            }
            idx = idx * side + (c + self.radius) as usize;
        }
        Some(idx)
    }

    pub fn point(&self, mut idx: usize) -> Vec<i64> {
        let side = self.side();
        (0..self.n)
            .map(|_| {
                let c = (idx % side) as i64 - self.radius;
                idx /= side;
                c
            })
            .collect()
    }

    pub fn get(&self, x: &[i64]) -> Complex64 {
        self.index(x).map_or(Complex64::new(0.0, 0.0), |i| self.values[i])
    }

    fn same_shape(&self, other: &GridFunction) -> bool {
        self.n == other.n && self.radius == other.radius
    }
}

/// Which algorithm [`convolve_with`] uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConvolvePath {
    Direct,
    Transform,
}

/// Points of the measure with their (possibly normalized) weights that can
/// move mass inside the box: every coordinate within [-2K, 2K].
fn usable_points(f: &GridFunction, m: &SurfaceMeasure, normalized: bool) -> Result<Vec<(Vec<i64>, f64)>> {
    if m.instance.n != f.n {
        return input(format!("measure has n={} but grid has n={}", m.instance.n, f.n));
    }
    let scale = if normalized {
        if m.big_r <= 0.0 {
            return Err(WgError::UndefinedMeasure);
        }
        1.0 / m.big_r
    } else {
        1.0
    };
    let reach = 2 * f.radius;
    Ok(m.representations
        .iter()
        .zip(&m.weights)
        .filter(|(t, _)| t.iter().all(|&p| p as i64 <= reach))
        .map(|(t, &w)| (t.iter().map(|&p| p as i64).collect(), w * scale))
        .collect())
}

/// (ω ⋆ f)(x) = Σ_p weight(p) f(x - p), with weights divided by R when
/// `normalized`. Picks the transform path for large boxes.
pub fn convolve(f: &GridFunction, m: &SurfaceMeasure, normalized: bool) -> Result<GridFunction> {
    let pts = usable_points(f, m, normalized)?;
    let path = if (pts.len() as f64) < 4.0 * (4 * f.radius + 1) as f64 * f.n as f64 {
        ConvolvePath::Direct
    } else {
        ConvolvePath::Transform
    };
    convolve_points(f, &pts, path)
}

pub fn convolve_with(f: &GridFunction, m: &SurfaceMeasure, normalized: bool, path: ConvolvePath) -> Result<GridFunction> {
    let pts = usable_points(f, m, normalized)?;
    convolve_points(f, &pts, path)
}

fn convolve_points(f: &GridFunction, pts: &[(Vec<i64>, f64)], path: ConvolvePath) -> Result<GridFunction> {
    match path {
        ConvolvePath::Direct => Ok(convolve_direct(f, pts)),
        ConvolvePath::Transform => convolve_fft(f, pts),
    }
}

fn convolve_direct(f: &GridFunction, pts: &[(Vec<i64>, f64)]) -> GridFunction {
    let k = f.radius;
    let side = f.side() as i64;
    let mut out = GridFunction {
        n: f.n,
        radius: k,
        values: vec![Complex64::new(0.0, 0.0); f.len()],
    };
    // scatter from the nonzero entries: out[u + p] += w f[u]
    for (i, v) in f.values.iter().enumerate() {
        if v.norm_sqr() == 0.0 {
            continue;
        }
        let u = f.point(i);
        'pts: for (p, w) in pts {
            let mut idx = 0i64;
            for (&uc, &pc) in u.iter().zip(p).rev() {
                let c = uc + pc;
                if c > k {
                    continue 'pts;
                }
                idx = idx * side + c + k;
            }
            out.values[idx as usize] += v * *w;
        }
    }
    out
}

/// n-dimensional in-place FFT on a cube of side `m`.
fn fft_nd(data: &mut [Complex64], n: usize, m: usize, inverse: bool) {
    let mut planner = FftPlanner::new();
    let fft = if inverse {
        planner.plan_fft_inverse(m)
    } else {
        planner.plan_fft_forward(m)
    };
    let mut line = vec![Complex64::new(0.0, 0.0); m];
    let mut stride = 1usize;
    for _ in 0..n {
        let block = stride * m;
        for start in (0..data.len()).step_by(block) {
            for off in 0..stride {
                let base = start + off;
                for (j, v) in line.iter_mut().enumerate() {
                    *v = data[base + j * stride];
                }
                fft.process(&mut line);
                for (j, v) in line.iter().enumerate() {
                    data[base + j * stride] = *v;
                }
            }
        }
        stride *= m;
    }
}

fn convolve_fft(f: &GridFunction, pts: &[(Vec<i64>, f64)]) -> Result<GridFunction> {
    let k = f.radius as usize;
    let side = f.side();
    // f on [0, 2K], measure on [0, 2K]: linear convolution fits in 4K + 1
    let m = 4 * k + 1;
    let total = m
        .checked_pow(f.n as u32)
        .filter(|&t| t <= 1 << 26)
        .ok_or_else(|| WgError::Input("enlarged transform box too large".into()))?;
    let mut a = vec![Complex64::new(0.0, 0.0); total];
    let mut b = vec![Complex64::new(0.0, 0.0); total];
    let embed = |idx: usize, from: usize| {
        let mut rest = idx;
        let mut out = 0usize;
        let mut stride = 1usize;
        for _ in 0..f.n {
            out += (rest % from) * stride;
            rest /= from;
            stride *= m;
        }
        out
    };
    for (i, v) in f.values.iter().enumerate() {
        a[embed(i, side)] = *v;
    }
    for (p, w) in pts {
        let mut idx = 0usize;
        for &c in p.iter().rev() {
            idx = idx * m + c as usize;
        }
        b[idx] += *w;
    }
    fft_nd(&mut a, f.n, m, false);
    fft_nd(&mut b, f.n, m, false);
    a.iter_mut().zip(&b).for_each(|(x, y)| *x *= y);
    fft_nd(&mut a, f.n, m, true);
    let norm = 1.0 / total as f64;
    // output x ∈ [-K, K] sits at transform index x + K
    let values = (0..f.len()).map(|i| a[embed(i, side)] * norm).collect();
    Ok(GridFunction {
        n: f.n,
        radius: f.radius,
        values,
    })
}

/// sup over the family of |A_λ f|, pointwise.
pub fn maximal(f: &GridFunction, measures: &[SurfaceMeasure]) -> Result<GridFunction> {
    if measures.is_empty() {
        return input("empty λ family");
    }
    let k0 = measures[0].instance;
    if measures.iter().any(|m| m.instance.k != k0.k || m.instance.n != k0.n) {
        return input("measures mix different (k, n)");
    }
    let outs: Vec<GridFunction> = measures
        .par_iter()
        .map(|m| convolve(f, m, true))
        .collect::<Result<_>>()?;
    let mut sup = vec![0.0f64; f.len()];
    for o in &outs {
        for (s, v) in sup.iter_mut().zip(&o.values) {
            *s = s.max(v.norm());
        }
    }
    Ok(GridFunction {
        n: f.n,
        radius: f.radius,
        values: sup.into_iter().map(|s| Complex64::new(s, 0.0)).collect(),
    })
}

/// Discrete ℓ^p norm over the box; `p = f64::INFINITY` gives the max.
pub fn lp_norm(f: &GridFunction, p: f64) -> Result<f64> {
    lp_norm_values(f.values.iter().map(|v| v.norm()), p)
}

fn lp_norm_values(vals: impl Iterator<Item = f64>, p: f64) -> Result<f64> {
    if !(p >= 1.0) {
        return input(format!("p must be >= 1, got {p}"));
    }
    if p.is_infinite() {
        return Ok(vals.fold(0.0, f64::max));
    }
    // scale by the max to keep large p from overflowing
    let v: Vec<f64> = vals.collect();
    let mx = v.iter().copied().fold(0.0, f64::max);
    if mx == 0.0 {
        return Ok(0.0);
    }
    let s: f64 = v.iter().map(|x| (x / mx).powf(p)).sum();
    Ok(mx * s.powf(1.0 / p))
}

pub fn add_scaled(f: &GridFunction, g: &GridFunction, c: Complex64) -> Result<GridFunction> {
    if !f.same_shape(g) {
        return input("grid shapes differ");
    }
    Ok(GridFunction {
        n: f.n,
        radius: f.radius,
        values: f.values.iter().zip(&g.values).map(|(a, b)| a + b * c).collect(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OperatorReport {
    pub k: u32,
    pub n: usize,
    pub p: f64,
    /// n / (n - k); the probe is meant for p below it
    pub threshold: f64,
    pub lambdas: Vec<u64>,
    /// ‖sup_{λ ≤ Λ} A_λ δ_0‖_p for each Λ
    pub maximal_norms: Vec<f64>,
    /// ‖A_λ δ_0‖_p for the largest λ ≤ Λ with R(λ) > 0
    pub single_norms: Vec<f64>,
    /// least-squares slope of ln(maximal norm) against ln Λ
    pub slope: f64,
}

pub fn regression_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

/// Norms of the maximal function of a delta at the origin.
///
/// The measures ω_λ have disjoint supports (a point x lies only on the
/// surface 𝔣 = 𝔣(x)), so sup_λ A_λ δ_0(x) = w(x)/R(𝔣(x)) and
/// ‖·‖_p^p = Σ_{λ ≤ Λ} Σ_{𝔣(x)=λ} w(x)^p / R(λ)^p.
/// All of that comes from two generating functions.
pub fn delta_scaling_probe(k: u32, n: usize, p: f64, lambdas: &[u64]) -> Result<OperatorReport> {
    if !(p >= 1.0) {
        return input(format!("p must be >= 1, got {p}"));
    }
    if lambdas.len() < 2 || lambdas.windows(2).any(|w| w[0] >= w[1]) {
        return input("need at least two increasing Λ values");
    }
    let top = *lambdas.last().unwrap();
    let threshold = if n > k as usize {
        n as f64 / (n - k as usize) as f64
    } else {
        f64::INFINITY
    };
    let (maximal_norms, single_norms) = if p.is_infinite() {
        delta_sup_norms(k, n, lambdas)?
    } else {
        let base = SweepTables::primes(k, n, top)?;
        let r = base.counts();
        let wp = base.with_weight_power(p).counts();
        let mut acc = 0.0;
        let mut last_single = 0.0;
        let mut maxn = Vec::new();
        let mut single = Vec::new();
        let mut li = 0;
        for lam in 0..=top as usize {
            if r[lam] > 0.0 {
                let term = wp[lam] / r[lam].powf(p);
                acc += term;
                last_single = term.powf(1.0 / p);
            }
            if lam as u64 == lambdas[li] {
                maxn.push(acc.powf(1.0 / p));
                single.push(last_single);
                li += 1;
                if li == lambdas.len() {
                    break;
                }
            }
        }
        (maxn, single)
    };
    let xs: Vec<f64> = lambdas.iter().map(|&l| (l as f64).ln()).collect();
    let ys: Vec<f64> = maximal_norms.iter().map(|v| v.ln()).collect();
    Ok(OperatorReport {
        k,
        n,
        p,
        threshold,
        lambdas: lambdas.to_vec(),
        slope: regression_slope(&xs, &ys),
        maximal_norms,
        single_norms,
    })
}

/// p = ∞: the largest point mass w(x)/R(λ) over λ <= Λ, by enumeration.
fn delta_sup_norms(k: u32, n: usize, lambdas: &[u64]) -> Result<(Vec<f64>, Vec<f64>)> {
    let top = *lambdas.last().unwrap();
    let e = PointEnumerator::primes(k, n, top)?;
    let mut best = 0.0f64;
    let mut last = 0.0f64;
    let mut maxn = Vec::new();
    let mut single = Vec::new();
    let mut li = 0;
    for lam in 1..=top {
        let m = e.measure(lam)?;
        if m.big_r > 0.0 {
            last = m.weights.iter().fold(0.0f64, |a, &w| a.max(w)) / m.big_r;
            best = best.max(last);
        }
        if lam == lambdas[li] {
            maxn.push(best);
            single.push(last);
            li += 1;
            if li == lambdas.len() {
                break;
            }
        }
    }
    Ok((maxn, single))
}
