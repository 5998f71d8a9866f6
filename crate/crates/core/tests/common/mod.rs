//! Independent oracles for smooth convex worst cases in two dimensions.
//!
//! Points are `x_0 .. x_N` plus the minimizer `x_* = 0` with `g_* = 0` and
//! `f_* = 0`. For fixed gradients the interpolation inequalities are
//! difference constraints on the function values, so the largest feasible
//! `f_N` is a shortest-path distance from `*`. The gradients are then
//! searched directly with a multi-start compass search.
#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type V2 = [f64; 2];

fn dot(a: V2, b: V2) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

fn sub(a: V2, b: V2) -> V2 {
    [a[0] - b[0], a[1] - b[1]]
}

/// Iterates `x_i = x_0 - sum_{k<i} alpha_{i,k} g_k / L`.
pub fn iterates(coeffs: &[Vec<f64>], l: f64, x0: V2, g: &[V2]) -> Vec<V2> {
    let mut xs = vec![x0];
    for row in coeffs {
        let mut x = x0;
        for (k, a) in row.iter().enumerate() {
            x[0] -= a * g[k][0] / l;
            x[1] -= a * g[k][1] / l;
        }
        xs.push(x);
    }
    xs
}

/// Largest feasible value of every `f_i` given points and gradients, or
/// `None` when the interpolation system has no solution.
///
/// Node `n` (the last) is the minimizer.
pub fn max_fvals(xs: &[V2], gs: &[V2], l: f64) -> Option<Vec<f64>> {
    let mut x = xs.to_vec();
    let mut g = gs.to_vec();
    x.push([0.0, 0.0]);
    g.push([0.0, 0.0]);
    let n = x.len();
    // f_j - f_i <= -q_ij with q_ij = <g_j, x_i - x_j> + |g_i - g_j|^2 / (2L)
    let mut dist = vec![f64::INFINITY; n];
    dist[n - 1] = 0.0;
    for round in 0..=n {
        let mut changed = false;
        for i in 0..n {
            if !dist[i].is_finite() {
                continue;
            }
            for j in 0..n {
                if i == j {
                    continue;
                }
                let dg = sub(g[i], g[j]);
                let q = dot(g[j], sub(x[i], x[j])) + dot(dg, dg) / (2.0 * l);
                let cand = dist[i] - q;
                if !dist[j].is_finite() || cand < dist[j] - 1e-15 * (1.0 + dist[j].abs()) {
                    dist[j] = cand;
                    changed = true;
                }
            }
        }
        if !changed {
            break;
        }
        if round == n {
            return None;
        }
    }
    if dist[n - 1] < -1e-12 {
        return None;
    }
    dist.pop();
    Some(dist)
}

/// `f_N - f_*` for gradients packed as `[g_0x, g_0y, g_1x, ...]`.
fn gap_objective(coeffs: &[Vec<f64>], l: f64, dim: usize, flat: &[f64]) -> f64 {
    let g: Vec<V2> = flat.chunks(dim).map(|c| [c[0], if dim == 2 { c[1] } else { 0.0 }]).collect();
    let xs = iterates(coeffs, l, [1.0, 0.0], &g);
    match max_fvals(&xs, &g, l) {
        Some(f) => f[f.len() - 1],
        None => f64::NEG_INFINITY,
    }
}

/// Pattern search along the coordinate axes plus random directions, which
/// keeps it moving along the ridges where the objective has kinks.
fn pattern_search(
    f: impl Fn(&[f64]) -> f64,
    start: Vec<f64>,
    step0: f64,
    min_step: f64,
    rng: &mut ChaCha8Rng,
) -> (Vec<f64>, f64) {
    let dim = start.len();
    let mut x = start;
    let mut fx = f(&x);
    let mut step = step0;
    while step > min_step {
        let mut dirs: Vec<Vec<f64>> = (0..dim)
            .map(|d| {
                let mut e = vec![0.0; dim];
                e[d] = 1.0;
                e
            })
            .collect();
        for _ in 0..16 * dim {
            let v: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let norm = v.iter().map(|a| a * a).sum::<f64>().sqrt();
            dirs.push(v.iter().map(|a| a / norm).collect());
        }
        let mut improved = false;
        for d in &dirs {
            for s in [1.0, -1.0] {
                let y: Vec<f64> = x.iter().zip(d).map(|(a, b)| a + s * step * b).collect();
                let fy = f(&y);
                if fy > fx {
                    x = y;
                    fx = fy;
                    improved = true;
                }
            }
        }
        step *= if improved { 1.5 } else { 0.5 };
    }
    (x, fx)
}

/// Gradients of the quadratic `c |x|^2 / 2` along the method, a feasible start.
fn quadratic_start(coeffs: &[Vec<f64>], l: f64, c: f64) -> Vec<V2> {
    let mut g: Vec<V2> = vec![[c, 0.0]];
    for row in coeffs {
        let mut x = [1.0, 0.0];
        for (k, a) in row.iter().enumerate() {
            x[0] -= a * g[k][0] / l;
            x[1] -= a * g[k][1] / l;
        }
        g.push([c * x[0], c * x[1]]);
    }
    g
}

/// Brute-force lower estimate of the worst-case gap `f(x_N) - f_*` over
/// `L`-smooth convex functions with `||x_0 - x_*|| = 1`, in dimension `dim` (1 or 2).
pub fn brute_force_gap(coeffs: &[Vec<f64>], l: f64, dim: usize, starts: usize, seed: u64) -> f64 {
    assert!(dim == 1 || dim == 2);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let obj = |p: &[f64]| gap_objective(coeffs, l, dim, p);
    let mut best = (Vec::new(), f64::NEG_INFINITY);
    for _ in 0..starts {
        let c = l * rng.gen_range(0.05..1.0);
        let mut start: Vec<f64> = quadratic_start(coeffs, l, c).iter().flat_map(|g| g[..dim].to_vec()).collect();
        let noisy: Vec<f64> = start.iter().map(|v| v + 0.02 * l * rng.gen_range(-1.0..1.0)).collect();
        if obj(&noisy).is_finite() {
            start = noisy;
        }
        let run = pattern_search(obj, start, 0.1 * l, 1e-10, &mut rng);
        if run.1 > best.1 {
            best = run;
        }
    }
    for _ in 0..4 {
        best = pattern_search(obj, best.0, 1e-3 * l, 1e-12, &mut rng);
    }
    best.1
}

/// Random `L`-smooth convex function on the plane with minimizer `0` and
/// minimum `0`: a weighted sum of Huber ridges `c_j huber_d(<a_j, x>)`.
pub struct RandomSmoothConvex {
    ridges: Vec<(V2, f64, f64)>,
}

impl RandomSmoothConvex {
    pub fn sample(l: f64, rng: &mut ChaCha8Rng) -> Self {
        let k = rng.gen_range(1..=3);
        let weights: Vec<f64> = (0..k).map(|_| rng.gen_range(0.05..1.0)).collect();
        let total: f64 = weights.iter().sum();
        let budget = l * rng.gen_range(0.3..1.0);
        let ridges = weights
            .iter()
            .map(|w| {
                let th: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
                let delta = if rng.gen_bool(0.5) { f64::INFINITY } else { rng.gen_range(0.01..1.0) };
                ([th.cos(), th.sin()], budget * w / total, delta)
            })
            .collect();
        Self { ridges }
    }

    pub fn value(&self, x: V2) -> f64 {
        self.ridges
            .iter()
            .map(|&(a, c, d)| {
                let t = dot(a, x).abs();
                c * if t <= d { 0.5 * t * t } else { d * t - 0.5 * d * d }
            })
            .sum()
    }

    pub fn grad(&self, x: V2) -> V2 {
        let mut g = [0.0, 0.0];
        for &(a, c, d) in &self.ridges {
            let t = dot(a, x);
            let s = c * t.clamp(-d, d);
            g[0] += s * a[0];
            g[1] += s * a[1];
        }
        g
    }
}

/// Runs the method on `f` from a random `x_0` with `||x_0|| <= 1` and
/// returns `f(x_N) - f_*`.
pub fn run_method(coeffs: &[Vec<f64>], l: f64, f: &RandomSmoothConvex, rng: &mut ChaCha8Rng) -> f64 {
    let r: f64 = rng.gen_range(0.0..1.0f64).sqrt();
    let th: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
    let x0 = [r * th.cos(), r * th.sin()];
    let mut g = vec![f.grad(x0)];
    let mut x = x0;
    for row in coeffs {
        x = x0;
        for (k, a) in row.iter().enumerate() {
            x[0] -= a * g[k][0] / l;
            x[1] -= a * g[k][1] / l;
        }
        g.push(f.grad(x));
    }
    f.value(x)
}
