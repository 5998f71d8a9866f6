//! Experiment drivers: sweeps over the horizon, rate-model fits and the
//! two-step worst-case landscape.

use std::fmt::Write;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::conic::{verify_certificate, CERTIFICATE_TOLERANCE};
use crate::design::{run, run_am, worst_case, DesignConfig, Method};
use crate::error::{Error, Result};
use crate::pep::{ProblemSpec, StepSchedule};
use crate::schedules::{AlgorithmTemplate, Family};

/// How each row of a sweep obtains its schedule.
#[derive(Clone, Debug, PartialEq)]
pub enum SweepMode {
    /// Every free parameter set to `step`.
    Fixed { step: f64 },
    /// A designer run from the family's classical constant step; the config's `init` is replaced per row.
    Design(DesignConfig),
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepRow {
    pub n: usize,
    pub w: Option<f64>,
    pub seconds: f64,
    pub schedule_id: String,
    pub schedule: Option<StepSchedule<f64>>,
    pub verified: bool,
    pub error: Option<String>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepResult {
    pub family: Family,
    pub spec: ProblemSpec<f64>,
    pub rows: Vec<SweepRow>,
}

/// Classical constant step of a family, in units of `1 / L`: `1`, or `2 / (1 + mu / L)` for cyclic methods.
pub fn default_step(family: Family, spec: &ProblemSpec<f64>) -> f64 {
    match family {
        Family::Cgd => 2.0 / (1.0 + spec.class.mu() / spec.class.l()),
        _ => 1.0,
    }
}

fn thread_pool(jobs: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| Error::Precondition(format!("cannot start {jobs} worker threads: {e}")))
}

fn sweep_row(family: Family, core_length: Option<usize>, spec: &ProblemSpec<f64>, n: usize, mode: &SweepMode) -> SweepRow {
    let start = Instant::now();
    let tag = match mode {
        SweepMode::Fixed { step } => format!("fixed{step}"),
        SweepMode::Design(c) => c.method.as_str().to_string(),
    };
    let schedule_id = format!("{family}-N{n}-{tag}");
    let outcome = (|| -> Result<(f64, StepSchedule<f64>, bool)> {
        let template = AlgorithmTemplate::new(family, n, core_length)?;
        template.check_class(&spec.class)?;
        let (schedule, cert) = match mode {
            SweepMode::Fixed { step } => {
                let s = template.constant(*step)?;
                let wc = worst_case(&s, spec, crate::conic::DEFAULT_TOLERANCE)?;
                (s, wc.certificate)
            }
            SweepMode::Design(config) => {
                let mut c = config.clone();
                c.init = template.constant(default_step(family, spec))?;
                let r = run(&c, spec)?;
                let cert = r.certificate.ok_or_else(|| Error::Solver("designer returned no certificate".into()))?;
                (r.final_schedule, cert)
            }
        };
        let verified = verify_certificate(&cert, &schedule, spec, CERTIFICATE_TOLERANCE).passed;
        Ok((cert.bound, schedule, verified))
    })();
    let seconds = start.elapsed().as_secs_f64();
    match outcome {
        Ok((w, schedule, verified)) => {
            SweepRow { n, w: Some(w), seconds, schedule_id, schedule: Some(schedule), verified, error: None }
        }
        Err(e) => {
            log::warn!("sweep row N = {n} failed: {e}");
            SweepRow { n, w: None, seconds, schedule_id, schedule: None, verified: false, error: Some(e.to_string()) }
        }
    }
}

/// One row per horizon in `ns` (strictly increasing). Failed rows are kept with `w = None`.
pub fn sweep(
    family: Family,
    core_length: Option<usize>,
    spec: &ProblemSpec<f64>,
    ns: &[usize],
    mode: &SweepMode,
    jobs: usize,
) -> Result<SweepResult> {
    if ns.is_empty() {
        return Err(Error::Precondition("the list of horizons is empty".into()));
    }
    if ns.windows(2).any(|w| w[0] >= w[1]) || ns[0] == 0 {
        return Err(Error::Precondition("horizons must be positive and strictly increasing".into()));
    }
    let rows = thread_pool(jobs)?.install(|| {
        ns.par_iter().map(|&n| sweep_row(family, core_length, spec, n, mode)).collect::<Vec<_>>()
    });
    Ok(SweepResult { family, spec: *spec, rows })
}

impl SweepResult {
    /// CSV with header `N,w,seconds,schedule_id`; failed rows leave `w` empty.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("N,w,seconds,schedule_id\n");
        for r in &self.rows {
            let w = r.w.map(|w| format!("{w:.10e}")).unwrap_or_default();
            let _ = writeln!(s, "{},{},{:.6},{}", r.n, w, r.seconds, r.schedule_id);
        }
        s
    }

    /// `(N, w)` of the successful rows.
    pub fn points(&self) -> Vec<(usize, f64)> {
        self.rows.iter().filter_map(|r| r.w.map(|w| (r.n, w))).collect()
    }

    pub fn from_csv(text: &str) -> Result<Vec<(usize, f64)>> {
        let mut lines = text.lines();
        let header = lines.next().unwrap_or_default();
        let cols: Vec<&str> = header.split(',').map(str::trim).collect();
        let (ni, wi) = match (cols.iter().position(|c| *c == "N"), cols.iter().position(|c| *c == "w")) {
            (Some(a), Some(b)) => (a, b),
            _ => return Err(Error::Parse("line 1: expected a header with N and w columns".into())),
        };
        let mut out = Vec::new();
        for (k, line) in lines.enumerate().filter(|(_, l)| !l.trim().is_empty()) {
            let f: Vec<&str> = line.split(',').map(str::trim).collect();
            let bad = || Error::Parse(format!("line {}: '{line}'", k + 2));
            let n = f.get(ni).and_then(|v| v.parse().ok()).ok_or_else(bad)?;
            match f.get(wi) {
                Some(v) if v.is_empty() => continue,
                Some(v) => out.push((n, v.parse().map_err(|_| bad())?)),
                None => return Err(bad()),
            }
        }
        Ok(out)
    }
}

/// `w(N) ~ 1 / (alpha N^nu + beta)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RateFit {
    pub alpha: f64,
    pub beta: f64,
    pub nu: f64,
    /// Largest relative error of the model over the fitted points.
    pub residual: f64,
    /// Set when the data cannot be explained with `alpha > 0`.
    #[serde(skip)]
    pub flagged: bool,
}

const NU_MIN: f64 = 0.25;
const NU_MAX: f64 = 3.0;
const NU_STEP: f64 = 0.005;

/// Least squares of `1/w` against `alpha x + beta` with `x = N^nu`: `(alpha, beta, sse)`.
fn linear_fit(points: &[(usize, f64)], nu: f64) -> (f64, f64, f64) {
    let n = points.len() as f64;
    let xs: Vec<f64> = points.iter().map(|&(k, _)| (k as f64).powf(nu)).collect();
    let ys: Vec<f64> = points.iter().map(|&(_, w)| 1.0 / w).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let alpha = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let beta = my - alpha * mx;
    let sse = xs.iter().zip(&ys).map(|(x, y)| (alpha * x + beta - y).powi(2)).sum();
    (alpha, beta, sse)
}

/// Grid search over `nu` in `[0.25, 3]` (step 0.005) with closed-form `(alpha, beta)`,
/// refined by golden-section search around the grid winner.
pub fn fit_rate(points: &[(usize, f64)]) -> Result<RateFit> {
    if points.len() < 4 {
        return Err(Error::Precondition(format!("a rate fit needs at least 4 points, got {}", points.len())));
    }
    if points.iter().any(|&(_, w)| !(w > 0.0) || !w.is_finite()) {
        return Err(Error::Precondition("all bounds must be positive and finite".into()));
    }
    let steps = ((NU_MAX - NU_MIN) / NU_STEP).round() as usize;
    let (mut nu, mut best) = (NU_MIN, f64::INFINITY);
    for k in 0..=steps {
        let v = NU_MIN + NU_STEP * k as f64;
        let sse = linear_fit(points, v).2;
        if sse < best {
            (nu, best) = (v, sse);
        }
    }
    let (mut a, mut b) = ((nu - NU_STEP).max(NU_MIN), (nu + NU_STEP).min(NU_MAX));
    let g = 0.5 * (5f64.sqrt() - 1.0);
    for _ in 0..80 {
        let c = b - g * (b - a);
        let d = a + g * (b - a);
        if linear_fit(points, c).2 <= linear_fit(points, d).2 {
            b = d;
        } else {
            a = c;
        }
    }
    let refined = 0.5 * (a + b);
    if linear_fit(points, refined).2 < best {
        nu = refined;
    }
    let (alpha, beta, _) = linear_fit(points, nu);
    let residual = points
        .iter()
        .map(|&(k, w)| ((1.0 / (alpha * (k as f64).powf(nu) + beta)) - w).abs() / w)
        .fold(0.0, f64::max);
    Ok(RateFit { alpha, beta, nu, residual, flagged: !(alpha > 0.0) || !residual.is_finite() })
}

/// `n` interior points of `(lo, hi)`: `lo + (hi - lo) k / (n + 1)` for `k = 1..=n`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Grid {
    pub lo: f64,
    pub hi: f64,
    pub n: usize,
}

impl Grid {
    pub fn values(&self) -> Vec<f64> {
        (1..=self.n).map(|k| self.lo + (self.hi - self.lo) * k as f64 / (self.n + 1) as f64).collect()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Landscape {
    pub h1: Vec<f64>,
    pub h2: Vec<f64>,
    /// `w[a][b]` at `(h1[a], h2[b])`; `None` where the solve failed.
    pub w: Vec<Vec<Option<f64>>>,
    /// One cell per grid-local minimum (see [`grid_minima`]): `(a, b, w)`.
    pub minima: Vec<(usize, usize, f64)>,
    /// Alternating-minimization iterates from `(1, 1)`: `(h1, h2, w)`.
    pub am_trajectory: Vec<(f64, f64, f64)>,
}

/// Values closer than this are treated as equal when locating minima.
pub const TIE_TOLERANCE: f64 = 1e-7;

/// Grid-local minima, one per plateau.
///
/// Cells whose values agree within [`TIE_TOLERANCE`] and touch in the
/// 8-neighbourhood form a plateau; a plateau is a minimum when every
/// existing cell bordering it is strictly higher. Each minimum is reported
/// at its first cell in row-major order.
pub fn grid_minima(w: &[Vec<Option<f64>>]) -> Vec<(usize, usize, f64)> {
    let rows = w.len();
    let mut seen: Vec<Vec<bool>> = w.iter().map(|r| vec![false; r.len()]).collect();
    let mut out = Vec::new();
    for a in 0..rows {
        for b in 0..w[a].len() {
            let Some(v) = w[a][b] else { continue };
            if seen[a][b] {
                continue;
            }
            seen[a][b] = true;
            let mut stack = vec![(a, b)];
            let mut lowest = true;
            while let Some((x, y)) = stack.pop() {
                for dx in -1i64..=1 {
                    for dy in -1i64..=1 {
                        let (p, q) = (x as i64 + dx, y as i64 + dy);
                        if (dx, dy) == (0, 0) || p < 0 || q < 0 {
                            continue;
                        }
                        let (p, q) = (p as usize, q as usize);
                        let Some(Some(u)) = w.get(p).and_then(|r| r.get(q)).copied() else { continue };
                        if (u - v).abs() <= TIE_TOLERANCE {
                            if !seen[p][q] {
                                seen[p][q] = true;
                                stack.push((p, q));
                            }
                        } else if u < v {
                            lowest = false;
                        }
                    }
                }
            }
            if lowest {
                out.push((a, b, v));
            }
        }
    }
    out
}

/// Worst case of two-step gradient descent over a grid of step pairs.
pub fn landscape(spec: &ProblemSpec<f64>, g1: Grid, g2: Grid, jobs: usize, tol: f64) -> Result<Landscape> {
    if spec.class.mu() != 0.0 || spec.class.is_inexact() {
        return Err(Error::Precondition("the landscape is defined for smooth convex functions with exact gradients".into()));
    }
    let (h1, h2) = (g1.values(), g2.values());
    let cells: Vec<(usize, usize)> = (0..h1.len()).flat_map(|a| (0..h2.len()).map(move |b| (a, b))).collect();
    let values = thread_pool(jobs)?.install(|| {
        cells
            .par_iter()
            .map(|&(a, b)| {
                StepSchedule::memoryless(&[h1[a], h2[b]])
                    .and_then(|s| worst_case(&s, spec, tol))
                    .map(|wc| wc.value)
                    .map_err(|e| log::warn!("cell ({}, {}) failed: {e}", h1[a], h2[b]))
                    .ok()
            })
            .collect::<Vec<_>>()
    });
    let mut w = vec![vec![None; h2.len()]; h1.len()];
    for (&(a, b), v) in cells.iter().zip(values) {
        w[a][b] = v;
    }
    let minima = grid_minima(&w);

    let mut config = DesignConfig::new(Method::Am, StepSchedule::memoryless(&[1.0, 1.0])?);
    config.solver_tol = tol;
    let report = run_am(&config, spec)?;
    let mut am_trajectory = vec![(1.0, 1.0, report.initial_w)];
    am_trajectory.extend(report.iterations.iter().map(|r| (r.coeffs[0][0], r.coeffs[1][1], r.w)));
    Ok(Landscape { h1, h2, w, minima, am_trajectory })
}

impl Landscape {
    /// CSV `h1,h2,w`; failed cells leave `w` empty.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("h1,h2,w\n");
        for (a, &x) in self.h1.iter().enumerate() {
            for (b, &y) in self.h2.iter().enumerate() {
                let w = self.w[a][b].map(|v| format!("{v:.10e}")).unwrap_or_default();
                let _ = writeln!(s, "{x},{y},{w}");
            }
        }
        s
    }

    pub fn grid_min(&self) -> Option<f64> {
        self.w.iter().flatten().flatten().copied().reduce(f64::min)
    }

    pub fn at(&self, h1: f64, h2: f64) -> Option<f64> {
        let a = self.h1.iter().position(|&v| v == h1)?;
        let b = self.h2.iter().position(|&v| v == h2)?;
        self.w[a][b]
    }
}
