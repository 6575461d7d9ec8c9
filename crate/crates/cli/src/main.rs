mod output;
mod plot;

use clap::{Args, Parser, Subcommand, ValueEnum};
use output::{PlotSpec, Report, Val};
use serde::Serialize;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use wg_core::arcs::{arcs_containing, convergents, dirichlet_approx, major_arc_measure, major_arc_membership, ArcSystem};
use wg_core::ergodic::{discrepancy, ergodic_average, orbit_points, weyl_decay_scan, TorusSystem, TrigPolynomial};
use wg_core::expsums::{count_vinogradov_system, g_sum, g_via_lemma, GSumQuery};
use wg_core::maxops::{delta_scaling_probe, lp_norm, maximal, GridFunction};
use wg_core::numtheory::iroot;
use wg_core::oscint::{surface_transform, SurfaceQuery};
use wg_core::wgsurface::{
    approx_sweep, cache_dir, dimension_gates, enumerate_prime_points, gamma_membership, hua_sweep, omega_hat,
    prime_points_cached, singular_series_terms, xi_sample, ApproxParams, Bump, ProblemInstance, SurfaceMeasure,
};
use wg_core::{Complex64, WgError};

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum Format {
    Json,
    Csv,
}

#[derive(Debug, Parser, Serialize)]
#[command(name = "wg", version, about = "Waring–Goldbach circle-method laboratory")]
struct Cli {
    /// Output encoding.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Worker threads for internal parallelism (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Representation cache; WG_CACHE_DIR overrides, default ./wg-cache.
    #[arg(long, global = true)]
    cache_dir: Option<PathBuf>,
    /// Skip the representation cache entirely.
    #[arg(long, global = true)]
    no_cache: bool,
    /// Also write an SVG line chart of the main series here.
    #[arg(long, global = true)]
    plot: Option<PathBuf>,
    /// Write the report here instead of stdout.
    #[arg(long, short, global = true)]
    output: Option<PathBuf>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Debug, Args, Serialize, Clone, Copy)]
struct Inst {
    #[arg(long)]
    k: u32,
    #[arg(long)]
    n: usize,
    #[arg(long)]
    lambda: u64,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
enum Cmd {
    /// Prime points of x_1^k + … + x_n^k = λ.
    ///
    /// Columns: x1..xn, weight (Π ln p_i). Summary: r, R, gamma, gates.
    Points(Inst),
    /// ω̂_λ(ξ) at one or more points.
    ///
    /// Columns: point (index), xi (text), omega (complex).
    Fourier {
        #[command(flatten)]
        inst: Inst,
        /// Comma-separated ξ; repeat the flag for several points.
        #[arg(long, required = true, allow_hyphen_values = true)]
        xi: Vec<String>,
    },
    /// g(a,q; b,r), directly and through the reduction lemma.
    ///
    /// Columns: a, q, b, r, k, direct (complex), lemma (complex).
    Gsum {
        #[arg(long, allow_hyphen_values = true)]
        a: i64,
        #[arg(long)]
        q: u64,
        #[arg(long, allow_hyphen_values = true)]
        b: i64,
        #[arg(long)]
        r: u64,
        #[arg(long)]
        k: u32,
    },
    /// Partial sums of G_λ(a,q), the pure singular series by default.
    ///
    /// Columns: q, term (complex), partial (complex). Summary: value, tail.
    Singular {
        #[command(flatten)]
        inst: Inst,
        #[arg(long, default_value_t = 100)]
        qsing: u64,
        /// Numerators a_i (default all 0).
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        avec: Option<Vec<i64>>,
        /// Denominators q_i (default all 1).
        #[arg(long, value_delimiter = ',')]
        qvec: Option<Vec<u64>>,
    },
    /// dσ̃_λ0(η), the Fourier transform of the real surface measure.
    ///
    /// Columns: value (complex), tail, tail_bound, theta, warning.
    Surface {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        k: u32,
        #[arg(long, default_value_t = 1.0)]
        lambda0: f64,
        /// Comma-separated η (default 0).
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        eta: Option<Vec<f64>>,
    },
    /// Major arcs |qθ − a| ≤ Q/X around θ, and its convergents.
    ///
    /// Columns: kind (arc|convergent), a, q, value, offset (qθ − a).
    /// Summary: membership, dirichlet, measure, disjoint_regime.
    Arcs {
        #[arg(long, allow_hyphen_values = true)]
        theta: f64,
        #[arg(long)]
        x: f64,
        #[arg(long)]
        q: f64,
        #[arg(long, default_value_t = 12)]
        convergents: usize,
    },
    /// λ-sweep of the approximation error Ê_λ with a per-block sup over a ξ sample.
    ///
    /// Columns: block, lambdas, median (of per-ξ sup), max, origin_max (max |Ê_λ(0)|).
    Approx {
        #[arg(long, default_value_t = 2)]
        k: u32,
        #[arg(long, default_value_t = 5)]
        n: usize,
        /// First block Λ; blocks are Λ·2^j.
        #[arg(long, default_value_t = 4096)]
        block_min: u64,
        #[arg(long, default_value_t = 5)]
        blocks: u32,
        #[arg(long, default_value_t = 3)]
        per_block: usize,
        #[arg(long, default_value_t = 24)]
        uniform: usize,
        #[arg(long, default_value_t = 8)]
        rational: usize,
        #[arg(long, default_value_t = 4)]
        seed: u64,
        #[command(flatten)]
        approx: ApproxArgs,
    },
    /// Hua ratios R(λ)/(𝔖_trunc μ∞ λ^{n/k−1}) along the Γ progression.
    ///
    /// Columns: lambda, ratio, series.
    Hua {
        #[arg(long, default_value_t = 2)]
        k: u32,
        #[arg(long, default_value_t = 5)]
        n: usize,
        #[arg(long, default_value_t = 10_000)]
        lo: u64,
        #[arg(long, default_value_t = 100_000)]
        hi: u64,
        #[arg(long, default_value_t = 60)]
        samples: usize,
        #[arg(long, default_value_t = 100)]
        qsing: u64,
    },
    /// sup over λ of |A_λ f| on a box {−K..K}^n.
    ///
    /// Columns: x1..xn, value (nonzero entries only). Summary: norms.
    Maximal {
        #[arg(long)]
        k: u32,
        #[arg(long)]
        n: usize,
        /// λ values (comma-separated).
        #[arg(long, value_delimiter = ',', required = true)]
        lambdas: Vec<u64>,
        #[arg(long, default_value_t = 4)]
        radius: i64,
        #[arg(long, value_enum, default_value_t = Input::Delta)]
        input: Input,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// ℓ^p exponents to report; "inf" allowed.
        #[arg(long, value_delimiter = ',', default_values_t = vec![1.0, 1.2, 2.0, f64::INFINITY])]
        p: Vec<f64>,
    },
    /// ‖sup_{λ≤Λ} A_λ δ_0‖_p over dyadic Λ, with the log-log slope.
    ///
    /// Columns: lambda, maximal_norm, single_norm. Summary: slope, threshold.
    DeltaProbe {
        #[arg(long, default_value_t = 2)]
        k: u32,
        #[arg(long, default_value_t = 5)]
        n: usize,
        #[arg(long, default_value_t = 1.2)]
        p: f64,
        #[arg(long, default_value_t = 4096)]
        lambda_min: u64,
        #[arg(long, default_value_t = 65_536)]
        lambda_max: u64,
    },
    /// 𝒜_λ e(m·x) on a torus rotation, with the matching ω̂ value.
    ///
    /// Columns: average (complex), omega (complex), abs_average, abs_omega.
    Ergodic {
        #[command(flatten)]
        inst: Inst,
        #[arg(long, value_delimiter = ',', required = true)]
        alpha: Vec<f64>,
        #[arg(long, value_delimiter = ',', required = true, allow_hyphen_values = true)]
        m: Vec<i64>,
        #[arg(long, value_delimiter = ',')]
        x: Option<Vec<f64>>,
    },
    /// Block maxima of |ω̂_λ(ξ)| over λ ∈ [Λ, 2Λ] ∩ Γ.
    ///
    /// Columns: lo, hi, count, max, argmax.
    Weyl {
        #[arg(long, default_value_t = 2)]
        k: u32,
        #[arg(long, default_value_t = 5)]
        n: usize,
        #[arg(long, value_delimiter = ',', required = true, allow_hyphen_values = true)]
        xi: Vec<f64>,
        #[arg(long, default_value_t = 1000)]
        block_min: u64,
        #[arg(long, default_value_t = 7)]
        blocks: u32,
    },
    /// Discrepancy estimate of the orbit {p α : 𝔣(p) = λ} on the torus.
    ///
    /// Columns: lambda, points, discrepancy.
    Equidist {
        #[command(flatten)]
        inst: Inst,
        #[arg(long, value_delimiter = ',', required = true)]
        alpha: Vec<f64>,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
    /// Brute-force count of the mean-value system in s variables up to N.
    ///
    /// Columns: big_n, s, k, count.
    Meanvalue {
        #[arg(long = "big-n")]
        big_n: u64,
        #[arg(long)]
        s: u32,
        #[arg(long)]
        k: u32,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum Input {
    Delta,
    Ones,
    Random,
}

#[derive(Debug, Args, Serialize, Clone, Copy)]
struct ApproxArgs {
    /// Q = (ln N)^C.
    #[arg(long, default_value_t = 2.0)]
    c: f64,
    #[arg(long, default_value_t = 1.0)]
    b: f64,
    /// N = factor · λ^{1/k}, factor in [1, 2].
    #[arg(long, default_value_t = 1.0)]
    n_factor: f64,
    #[arg(long, default_value_t = 100)]
    qsing: u64,
}

impl ApproxArgs {
    fn params(&self) -> ApproxParams {
        ApproxParams {
            c: self.c,
            b: self.b,
            n_scale: None,
            qsing: self.qsing,
            bump: Bump::default(),
            theta: None,
        }
    }
}

enum Failure {
    Usage(String),
    Numeric(String),
}

impl From<WgError> for Failure {
    fn from(e: WgError) -> Self {
        match e {
            WgError::Input(m) => Failure::Usage(m),
            other => Failure::Numeric(other.to_string()),
        }
    }
}

type Res<T> = std::result::Result<T, Failure>;

fn parse_vec(s: &str) -> Res<Vec<f64>> {
    s.split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|_| Failure::Usage(format!("bad number {t:?} in {s:?}"))))
        .collect()
}

fn instance(i: &Inst) -> Res<ProblemInstance> {
    Ok(ProblemInstance::new(i.k, i.n, i.lambda)?)
}

struct Ctx {
    cache: Option<PathBuf>,
}

impl Ctx {
    fn measure(&self, inst: &ProblemInstance) -> Res<SurfaceMeasure> {
        Ok(match &self.cache {
            Some(dir) => prime_points_cached(inst, dir)?,
            None => {
                let t = wg_core::numtheory::sieve_primes(iroot(inst.lambda, inst.k).max(2))?;
                enumerate_prime_points(inst, &t)?
            }
        })
    }
}

fn dyadic(min: u64, count: u32) -> Res<Vec<u64>> {
    if min == 0 || count == 0 {
        return Err(Failure::Usage("need a positive first block and at least one block".into()));
    }
    (0..count)
        .map(|j| min.checked_mul(1 << j).ok_or_else(|| Failure::Usage("block range overflows".into())))
        .collect()
}

fn xcols(n: usize) -> Vec<String> {
    (1..=n).map(|i| format!("x{i}")).collect()
}

fn dispatch(cmd: &Cmd, config: serde_json::Value, ctx: &Ctx) -> Res<Report> {
    let name = serde_json::to_value(cmd).ok().and_then(|v| v.as_object().and_then(|o| o.keys().next().cloned())).unwrap_or_default();
    match cmd {
        Cmd::Points(i) => {
            let inst = instance(i)?;
            let m = ctx.measure(&inst)?;
            let mut cols = xcols(inst.n);
            cols.push("weight".into());
            let cols: Vec<&str> = cols.iter().map(|s| s.as_str()).collect();
            let mut r = Report::new(&name, config, &cols);
            let g = dimension_gates(inst.k, inst.n);
            r.sum("r", m.r)
                .sum("R", m.big_r)
                .sum("gamma", format!("{:?}", gamma_membership(&inst)).to_lowercase())
                .sum("n0", g.n0)
                .sum("n1", g.n1)
                .sum("n2", g.n2)
                .sum("p_crit", format!("{}/{}", g.p_crit.0, g.p_crit.1));
            for (t, w) in m.representations.iter().zip(&m.weights) {
                let mut row: Vec<Val> = t.iter().map(|&p| Val::from(p)).collect();
                row.push((*w).into());
                r.row(row);
            }
            Ok(r)
        }
        Cmd::Fourier { inst: i, xi } => {
            let inst = instance(i)?;
            let m = ctx.measure(&inst)?;
            let mut r = Report::new(&name, config, &["point", "xi", "omega"]);
            r.sum("R", m.big_r).sum("r", m.r);
            for (j, s) in xi.iter().enumerate() {
                let v = parse_vec(s)?;
                r.row(vec![j.into(), s.clone().into(), omega_hat(&m, &v)?.into()]);
            }
            Ok(r)
        }
        Cmd::Gsum { a, q, b, r: rr, k } => {
            let qy = GSumQuery::new(*a, *q, *b, *rr, *k);
            let mut r = Report::new(&name, config, &["a", "q", "b", "r", "k", "direct", "lemma"]);
            let lemma = match g_via_lemma(&qy) {
                Ok(v) => Val::Cx(v),
                Err(WgError::Input(m)) => Val::Text(format!("n/a: {m}")),
                Err(e) => return Err(e.into()),
            };
            r.row(vec![(*a).into(), (*q).into(), (*b).into(), (*rr).into(), (*k as u64).into(), g_sum(&qy)?.into(), lemma]);
            Ok(r)
        }
        Cmd::Singular { inst: i, qsing, avec, qvec } => {
            let inst = instance(i)?;
            let avec = avec.clone().unwrap_or_else(|| vec![0; inst.n]);
            let qvec = qvec.clone().unwrap_or_else(|| vec![1; inst.n]);
            let s = wg_core::wgsurface::singular_series(&inst, &avec, &qvec, *qsing)?;
            let terms = singular_series_terms(&inst, &avec, &qvec, *qsing)?;
            let mut r = Report::new(&name, config, &["q", "term", "partial"]);
            r.sum("value", s.value).sum("tail", s.tail);
            let mut acc = Complex64::new(0.0, 0.0);
            for (j, t) in terms.iter().enumerate() {
                acc += t;
                r.row(vec![(j as u64 + 1).into(), (*t).into(), acc.into()]);
            }
            r.plot = Some(PlotSpec { x: "q".into(), ys: vec!["partial".into()], log_x: false, log_y: false });
            Ok(r)
        }
        Cmd::Surface { n, k, lambda0, eta } => {
            let eta = eta.clone().unwrap_or_else(|| vec![0.0; *n]);
            let s = surface_transform(&SurfaceQuery { n: *n, k: *k, lambda0: *lambda0, eta })?;
            let mut r = Report::new(&name, config, &["value", "tail", "tail_bound", "theta", "warning"]);
            r.row(vec![s.value.into(), s.tail.into(), s.tail_bound.into(), s.theta.into(), s.warning.into()]);
            Ok(r)
        }
        Cmd::Arcs { theta, x, q, convergents: c } => {
            let sys = ArcSystem::new(*x, *q)?;
            let mut r = Report::new(&name, config, &["kind", "a", "q", "value", "offset"]);
            let mem = major_arc_membership(*theta, &sys).map_or("minor".to_string(), |p| format!("{}/{}", p.a, p.q));
            let d = dirichlet_approx(*theta, *q)?;
            r.sum("membership", mem)
                .sum("dirichlet", format!("{}/{}", d.a, d.q))
                .sum("measure", major_arc_measure(&sys))
                .sum("disjoint_regime", sys.is_disjoint_regime());
            for p in arcs_containing(*theta, &sys) {
                r.row(vec!["arc".into(), p.a.into(), p.q.into(), p.value().into(), (p.q as f64 * theta - p.a as f64).into()]);
            }
            for p in convergents(*theta, *c)? {
                r.row(vec!["convergent".into(), p.a.into(), p.q.into(), p.value().into(), (p.q as f64 * theta - p.a as f64).into()]);
            }
            Ok(r)
        }
        Cmd::Approx { k, n, block_min, blocks, per_block, uniform, rational, seed, approx } => {
            let bl = dyadic(*block_min, *blocks)?;
            let xis = xi_sample(*n, *uniform, *rational, *seed);
            if !(1.0..=2.0).contains(&approx.n_factor) {
                return Err(Failure::Usage("--n-factor must lie in [1, 2]".into()));
            }
            let res = approx_sweep(*k, *n, &bl, *per_block, &xis, &approx.params(), approx.n_factor)?;
            let mut r = Report::new(&name, config, &["block", "lambdas", "median", "max", "origin_max"]);
            for b in &res {
                let lams = b.lambdas.iter().map(|l| l.to_string()).collect::<Vec<_>>().join(" ");
                let mx = b.sup_per_xi.iter().copied().fold(0.0, f64::max);
                let o = b.origin.iter().copied().fold(0.0, f64::max);
                r.row(vec![b.block.into(), lams.into(), b.median.into(), mx.into(), o.into()]);
            }
            r.plot = Some(PlotSpec { x: "block".into(), ys: vec!["median".into(), "origin_max".into()], log_x: true, log_y: true });
            Ok(r)
        }
        Cmd::Hua { k, n, lo, hi, samples, qsing } => {
            let res = hua_sweep(*k, *n, *lo, *hi, *samples, *qsing)?;
            let mut r = Report::new(&name, config, &["lambda", "ratio", "series"]);
            let mut ratios: Vec<f64> = res.iter().map(|s| s.ratio).collect();
            ratios.sort_by(|a, b| a.total_cmp(b));
            if !ratios.is_empty() {
                r.sum("median", ratios[ratios.len() / 2]);
                r.sum("in_band", ratios.iter().filter(|v| (0.7..=1.3).contains(*v)).count());
            }
            for s in &res {
                r.row(vec![s.lambda.into(), s.ratio.into(), s.series.into()]);
            }
            r.plot = Some(PlotSpec { x: "lambda".into(), ys: vec!["ratio".into()], log_x: true, log_y: false });
            Ok(r)
        }
        Cmd::Maximal { k, n, lambdas, radius, input, seed, p } => {
            let ms: Vec<SurfaceMeasure> = lambdas
                .iter()
                .map(|&l| ctx.measure(&ProblemInstance::new(*k, *n, l)?))
                .collect::<Res<Vec<_>>>()?
                .into_iter()
                .filter(|m| m.r > 0)
                .collect();
            let f = match input {
                Input::Delta => GridFunction::delta(*n, *radius)?,
                Input::Ones => GridFunction::constant(*n, *radius, Complex64::new(1.0, 0.0))?,
                Input::Random => {
                    use rand::{Rng, SeedableRng};
                    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(*seed);
                    let mut g = GridFunction::zeros(*n, *radius)?;
                    g.values.iter_mut().for_each(|v| *v = Complex64::new(rng.gen::<f64>(), 0.0));
                    g
                }
            };
            let sup = maximal(&f, &ms)?;
            let mut cols = xcols(*n);
            cols.push("value".into());
            let cols: Vec<&str> = cols.iter().map(|s| s.as_str()).collect();
            let mut r = Report::new(&name, config, &cols);
            r.sum("lambdas_nonempty", ms.len());
            for &pp in p {
                r.sum(&format!("norm_p{pp}"), lp_norm(&sup, pp)?);
            }
            for (i, v) in sup.values.iter().enumerate() {
                if v.re != 0.0 {
                    let mut row: Vec<Val> = sup.point(i).into_iter().map(Val::from).collect();
                    row.push(v.re.into());
                    r.row(row);
                }
            }
            Ok(r)
        }
        Cmd::DeltaProbe { k, n, p, lambda_min, lambda_max } => {
            let mut lams = Vec::new();
            let mut l = *lambda_min;
            while l <= *lambda_max && l > 0 {
                lams.push(l);
                l *= 2;
            }
            let rep = delta_scaling_probe(*k, *n, *p, &lams)?;
            let mut r = Report::new(&name, config, &["lambda", "maximal_norm", "single_norm"]);
            r.sum("slope", rep.slope).sum("threshold", rep.threshold).sum("below_threshold", rep.p < rep.threshold);
            for ((l, a), b) in rep.lambdas.iter().zip(&rep.maximal_norms).zip(&rep.single_norms) {
                r.row(vec![(*l).into(), (*a).into(), (*b).into()]);
            }
            r.plot = Some(PlotSpec { x: "lambda".into(), ys: vec!["maximal_norm".into()], log_x: true, log_y: true });
            Ok(r)
        }
        Cmd::Ergodic { inst: i, alpha, m, x } => {
            let inst = instance(i)?;
            let meas = ctx.measure(&inst)?;
            let sys = TorusSystem::new(alpha.clone(), vec![false; alpha.len()])?;
            let x = x.clone().unwrap_or_else(|| vec![0.0; inst.n]);
            let avg = ergodic_average(&sys, &TrigPolynomial::harmonic(m.clone()), &meas, &x)?;
            let xi: Vec<f64> = m.iter().zip(alpha).map(|(&mi, &a)| mi as f64 * a).collect();
            let om = omega_hat(&meas, &xi)?;
            let mut r = Report::new(&name, config, &["average", "omega", "abs_average", "abs_omega"]);
            r.row(vec![avg.into(), om.into(), avg.norm().into(), om.norm().into()]);
            Ok(r)
        }
        Cmd::Weyl { k, n, xi, block_min, blocks } => {
            let res = weyl_decay_scan(*k, *n, xi, &dyadic(*block_min, *blocks)?)?;
            let mut r = Report::new(&name, config, &["lo", "hi", "count", "max", "argmax"]);
            for b in &res {
                r.row(vec![b.lo.into(), b.hi.into(), b.count.into(), b.max.into(), b.argmax.into()]);
            }
            r.plot = Some(PlotSpec { x: "lo".into(), ys: vec!["max".into()], log_x: true, log_y: false });
            Ok(r)
        }
        Cmd::Equidist { inst: i, alpha, seed } => {
            let inst = instance(i)?;
            let meas = ctx.measure(&inst)?;
            let sys = TorusSystem::new(alpha.clone(), vec![false; alpha.len()])?;
            if sys.dim() != inst.n {
                return Err(Failure::Usage("alpha needs n entries".into()));
            }
            let pts = orbit_points(&sys, &meas);
            let d = discrepancy(&pts, *seed)?;
            let mut r = Report::new(&name, config, &["lambda", "points", "discrepancy"]);
            r.sum("estimator", "random general boxes, lower estimate");
            r.row(vec![inst.lambda.into(), pts.len().into(), d.into()]);
            Ok(r)
        }
        Cmd::Meanvalue { big_n, s, k } => {
            let c = count_vinogradov_system(*big_n, *s, *k)?;
            let mut r = Report::new(&name, config, &["big_n", "s", "k", "count"]);
            r.row(vec![(*big_n).into(), (*s as u64).into(), (*k as u64).into(), c.into()]);
            Ok(r)
        }
    }
}

fn write_out(path: Option<&Path>, text: &str) -> Res<()> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| Failure::Numeric(format!("{}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn real_main() -> Res<()> {
    let cli = Cli::try_parse().map_err(|e| {
        // help and version are not errors
        if matches!(e.kind(), clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion) {
            let _ = e.print();
            std::process::exit(0);
        }
        Failure::Usage(e.to_string())
    })?;
    if let Some(t) = cli.threads {
        if t == 0 {
            return Err(Failure::Usage("--threads must be >= 1".into()));
        }
        rayon::ThreadPoolBuilder::new().num_threads(t).build_global().map_err(|e| Failure::Numeric(e.to_string()))?;
    }
    let cache = if cli.no_cache {
        None
    } else {
        Some(cache_dir(cli.cache_dir.as_deref().unwrap_or(Path::new("wg-cache"))))
    };
    let mut config = serde_json::to_value(&cli).unwrap();
    if let Some(obj) = config.as_object_mut() {
        obj.insert(
            "resolved_cache_dir".into(),
            serde_json::json!(cache.as_ref().map(|p| p.display().to_string())),
        );
    }
    let ctx = Ctx { cache };
    let report = dispatch(&cli.cmd, config, &ctx)?;
    let text = match cli.format {
        Format::Json => report.to_json(),
        Format::Csv => report.to_csv(),
    };
    write_out(cli.output.as_deref(), &text)?;
    if let Some(p) = &cli.plot {
        match &report.plot {
            Some(spec) => {
                let svg = plot::svg(&report, spec).map_err(Failure::Numeric)?;
                std::fs::write(p, svg).map_err(|e| Failure::Numeric(format!("{}: {e}", p.display())))?;
            }
            None => eprintln!("wg: {} has no series to plot; --plot ignored", report.command),
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match real_main() {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(m)) => {
            eprintln!("{m}");
            ExitCode::from(2)
        }
        Err(Failure::Numeric(m)) => {
            eprintln!("wg: {m}");
            ExitCode::from(1)
        }
    }
}
