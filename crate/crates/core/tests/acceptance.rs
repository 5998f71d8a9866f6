//! One line per acceptance criterion, written straight to stdout so the
//! lines survive output capture. Gating criteria fail the test; the soft
//! acceleration checks only report.

mod common;

use std::io::Write;
use std::time::{Duration, Instant};

use pepforge::analysis::{fit_rate, landscape, sweep, Grid, SweepMode};
use pepforge::conic::{verify_certificate, CERTIFICATE_TOLERANCE, DEFAULT_TOLERANCE};
use pepforge::design::{dual_gradient, run_slm, worst_case, DesignConfig, DesignReport, Method};
use pepforge::pep::{
    CriterionKind, DualCertificate, FunctionClassSpec, InitKind, InitSpec, ProblemSpec, ScheduleKind, StepSchedule,
};
use pepforge::schedules::{cycle_spec, cyclic_rate, Family};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

type Evidence = (DualCertificate<f64>, StepSchedule<f64>, ProblemSpec<f64>);

fn line(text: String) {
    let mut out = std::io::stdout().lock();
    let _ = writeln!(out, "{text}");
    let _ = out.flush();
}

fn verdict(id: &str, pass: bool, elapsed: Duration, limit: Duration, detail: String) -> bool {
    let ok = pass && elapsed <= limit;
    line(format!(
        "[{}] criterion {id}: {detail} ({:.1}s, limit {:.0}s)",
        if ok { "PASS" } else { "FAIL" },
        elapsed.as_secs_f64(),
        limit.as_secs_f64()
    ));
    ok
}

fn gap_spec() -> ProblemSpec<f64> {
    ProblemSpec::smooth_convex_gap(1.0, 1.0)
}

fn evidence(report: &DesignReport) -> Evidence {
    (report.certificate.clone().expect("designs carry a certificate"), report.final_schedule.clone(), report.spec)
}

fn slm(init: &[f64], spec: &ProblemSpec<f64>) -> DesignReport {
    run_slm(&DesignConfig::new(Method::Slm, StepSchedule::memoryless(init).unwrap()), spec).unwrap()
}

/// SLM from the constant step `1`, then `restarts` more runs from steps drawn
/// uniformly in `[1, 2]`; the best final bound wins.
fn slm_with_restarts(n: usize, restarts: usize) -> DesignReport {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut inits = vec![vec![1.0; n]];
    for _ in 0..restarts {
        inits.push((0..n).map(|_| rng.gen_range(1.0..2.0)).collect());
    }
    inits
        .par_iter()
        .map(|init| slm(init, &gap_spec()))
        .collect::<Vec<_>>()
        .into_iter()
        .min_by(|a, b| a.final_w.total_cmp(&b.final_w))
        .unwrap()
}

fn round3(v: &[f64]) -> Vec<f64> {
    v.iter().map(|x| (x * 1000.0).round() / 1000.0).collect()
}

fn criterion_1(ev: &mut Vec<Evidence>) -> bool {
    let start = Instant::now();
    let mut pass = true;
    let mut parts = Vec::new();
    for n in 1..=3 {
        let s = StepSchedule::memoryless(&vec![1.0; n]).unwrap();
        let wc = worst_case(&s, &gap_spec(), DEFAULT_TOLERANCE).unwrap();
        let expected = 1.0 / (4.0 * n as f64 + 2.0);
        let brute = common::brute_force_gap(s.coeffs(), 1.0, 1, 20, n as u64);
        pass &= (wc.value - expected).abs() <= 1e-5 && (brute - wc.value).abs() <= 1e-5;
        parts.push(format!("N={n} w={:.7} brute={brute:.7} target={expected:.7}", wc.value));
        ev.push((wc.certificate, s, gap_spec()));
    }
    verdict("1", pass, start.elapsed(), Duration::from_secs(5), parts.join("; "))
}

fn criterion_2(ev: &mut Vec<Evidence>) -> bool {
    let start = Instant::now();
    let report = slm(&[1.0], &gap_spec());
    let h = report.final_schedule.diagonal()[0];
    let pass = (h - 1.5).abs() <= 0.01 && (report.final_w - 0.125).abs() <= 1e-3;
    ev.push(evidence(&report));
    verdict("2", pass, start.elapsed(), Duration::from_secs(10), format!("step={h:.4} w={:.6}", report.final_w))
}

fn criterion_3(ev: &mut Vec<Evidence>) -> bool {
    let start = Instant::now();
    let targets = [(6, 0.020098, 0.019895), (8, 0.014055, 0.013962), (9, 0.012282, 0.012184)];
    let mut pass = true;
    let mut parts = Vec::new();
    for (n, bnb, slm_ref) in targets {
        let report = slm_with_restarts(n, 5);
        let w = report.final_w;
        let ok = w <= bnb && (w - slm_ref).abs() <= 0.02 * slm_ref;
        pass &= ok;
        parts.push(format!("N={n} w={w:.6} (bnb {bnb}, ref {slm_ref}, {:+.2}%)", 100.0 * (w - slm_ref) / slm_ref));
        ev.push(evidence(&report));
    }
    verdict("3", pass, start.elapsed(), Duration::from_secs(600), parts.join("; "))
}

fn criterion_4(ev: &mut Vec<Evidence>) -> bool {
    let start = Instant::now();
    let reference: [&[f64]; 3] = [&[1.414, 1.877], &[1.414, 1.601, 2.189], &[1.414, 1.601, 1.702, 2.459]];
    let mut pass = true;
    let mut parts = Vec::new();
    for steps in reference {
        let n = steps.len();
        let report = slm(&vec![1.0; n], &gap_spec());
        let got = report.final_schedule.diagonal();
        let entrywise = got.iter().zip(steps).all(|(a, b)| (a - b).abs() <= 0.02);
        let reference_w = worst_case(&StepSchedule::memoryless(steps).unwrap(), &gap_spec(), DEFAULT_TOLERANCE).unwrap().value;
        let dominates = report.final_w < reference_w;
        pass &= entrywise || dominates;
        let how = if entrywise { "matches reference" } else if dominates { "dominates reference" } else { "neither" };
        parts.push(format!("N={n} {:?} w={:.6} vs reference w={reference_w:.6} {how}", round3(&got), report.final_w));
        ev.push(evidence(&report));
    }
    verdict("4", pass, start.elapsed(), Duration::from_secs(600), parts.join("; "))
}

fn criterion_5(ev: &mut Vec<Evidence>) -> bool {
    let start = Instant::now();
    let mut pass = true;
    let mut parts = Vec::new();
    for eps in [0.1, 0.3] {
        let class = FunctionClassSpec::new(1.0, 0.0, eps).unwrap();
        let spec = ProblemSpec::new(
            class,
            CriterionKind::MinGradientNormSq,
            InitSpec::new(InitKind::ObjectiveGap, 1.0).unwrap(),
        )
        .unwrap();
        let s = StepSchedule::memoryless(&[1.0; 5]).unwrap();
        let wc = worst_case(&s, &spec, DEFAULT_TOLERANCE).unwrap();
        let expected = 1.0 / (0.5 + 5.0 * (1.0 - eps));
        pass &= (wc.value - expected).abs() <= 1e-4;
        parts.push(format!("eps={eps} w={:.7} target={expected:.7}", wc.value));
        ev.push((wc.certificate, s, spec));
    }
    verdict("5", pass, start.elapsed(), Duration::from_secs(60), parts.join("; "))
}

fn criterion_6(ev: &mut Vec<Evidence>) -> bool {
    let start = Instant::now();
    let class = FunctionClassSpec::new(1.0, 0.1, 0.0).unwrap();
    let spec = cycle_spec(&class).unwrap();
    let h = 2.0 / 1.1;
    let constant = StepSchedule::memoryless(&[h; 4]).unwrap();
    let base = cyclic_rate(&constant, &class, DEFAULT_TOLERANCE).unwrap();
    ev.push((worst_case(&constant, &spec, DEFAULT_TOLERANCE).unwrap().certificate, constant, spec));
    let report = slm(&[h; 4], &spec);
    let tuned = cyclic_rate(&report.final_schedule, &class, DEFAULT_TOLERANCE).unwrap();
    ev.push(evidence(&report));
    let pass = (base.c - 0.2008).abs() <= 1e-3 && tuned.c <= 0.145;
    verdict(
        "6",
        pass,
        start.elapsed(),
        Duration::from_secs(300),
        format!("constant c={:.6}; optimized core {:?} c={:.6}", base.c, round3(&report.final_schedule.diagonal()), tuned.c),
    )
}

fn criterion_7() -> bool {
    let start = Instant::now();
    let g = Grid { lo: 0.0, hi: 2.0, n: 40 };
    let land = landscape(&gap_spec(), g, g, 4, DEFAULT_TOLERANCE).unwrap();
    let grid_min = land.grid_min().unwrap();
    let &(h1, h2, am_w) = land.am_trajectory.last().unwrap();
    let missing = land.w.iter().flatten().filter(|v| v.is_none()).count();
    let minima: Vec<String> = land
        .minima
        .iter()
        .map(|&(a, b, w)| format!("({:.4}, {:.4}) w={w:.6}", land.h1[a], land.h2[b]))
        .collect();
    let pass = land.minima.len() == 2 && am_w > grid_min && missing == 0;
    verdict(
        "7",
        pass,
        start.elapsed(),
        Duration::from_secs(600),
        format!(
            "{} minima [{}]; AM ends at ({h1:.4}, {h2:.4}) w={am_w:.6} > grid min {grid_min:.6}; {missing} failed cells",
            land.minima.len(),
            minima.join(", ")
        ),
    )
}

fn criterion_8() -> bool {
    let start = Instant::now();
    let tol = 1e-10;
    let fd = 1e-5;
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let points: Vec<Vec<f64>> = (0..20).map(|_| (0..3).map(|_| rng.gen_range(0.3..2.5)).collect()).collect();
    let errors: Vec<f64> = points
        .par_iter()
        .map(|p| {
            let s = StepSchedule::memoryless(p).unwrap();
            let g = dual_gradient(&s, &gap_spec(), tol).unwrap();
            let num: Vec<f64> = (0..3)
                .map(|k| {
                    let mut up = p.clone();
                    let mut dn = p.clone();
                    up[k] += fd;
                    dn[k] -= fd;
                    let wu = worst_case(&StepSchedule::memoryless(&up).unwrap(), &gap_spec(), tol).unwrap().value;
                    let wd = worst_case(&StepSchedule::memoryless(&dn).unwrap(), &gap_spec(), tol).unwrap().value;
                    (wu - wd) / (2.0 * fd)
                })
                .collect();
            let diff = g.iter().zip(&num).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
            let scale = num.iter().map(|b| b * b).sum::<f64>().sqrt().max(1e-8);
            diff / scale
        })
        .collect();
    let good = errors.iter().filter(|&&e| e <= 1e-4).count();
    let worst_good = errors.iter().copied().filter(|&e| e <= 1e-4).fold(0.0, f64::max);
    verdict(
        "8",
        good >= 18,
        start.elapsed(),
        Duration::from_secs(120),
        format!("{good}/20 points within 1e-4 (largest accepted error {worst_good:.1e})"),
    )
}

fn criterion_9(ev: &[Evidence]) -> bool {
    let start = Instant::now();
    let mut failures = Vec::new();
    let mut worst_eig = 0.0f64;
    let mut worst_stat = 0.0f64;
    for (k, (cert, schedule, spec)) in ev.iter().enumerate() {
        let r = verify_certificate(cert, schedule, spec, CERTIFICATE_TOLERANCE);
        worst_eig = worst_eig.min(r.min_eigenvalue);
        worst_stat = worst_stat.max(r.stationarity_residual);
        if !r.passed || !r.sign_violations.is_empty() {
            failures.push(k);
        }
    }
    verdict(
        "9",
        failures.is_empty(),
        start.elapsed(),
        Duration::from_secs(60),
        format!(
            "{} certificates, {} failed; min eigenvalue {worst_eig:.1e}, max stationarity residual {worst_stat:.1e}",
            ev.len(),
            failures.len()
        ),
    )
}

fn fit_nu(family: Family, spec: &ProblemSpec<f64>, ns: &[usize]) -> Option<f64> {
    let kind = match family {
        Family::Figd | Family::Full => ScheduleKind::Full,
        _ => ScheduleKind::Memoryless,
    };
    let config = DesignConfig::new(Method::Slm, StepSchedule::constant(kind, 1, 1.0).unwrap());
    let result = sweep(family, None, spec, ns, &SweepMode::Design(config), 4).ok()?;
    fit_rate(&result.points()).ok().map(|f| f.nu)
}

fn criterion_10() {
    let start = Instant::now();
    let inexact = ProblemSpec::new(
        FunctionClassSpec::new(1.0, 0.0, 0.1).unwrap(),
        CriterionKind::MinGradientNormSq,
        InitSpec::new(InitKind::ObjectiveGap, 1.0).unwrap(),
    )
    .unwrap();
    let mgd_ns: Vec<usize> = (5..=25).step_by(2).collect();
    let inexact_ns: Vec<usize> = (2..=7).collect();
    let mgd = fit_nu(Family::Mgd, &gap_spec(), &mgd_ns);
    let igd = fit_nu(Family::Igd, &inexact, &inexact_ns);
    let figd = fit_nu(Family::Figd, &inexact, &inexact_ns);
    let fmt = |v: Option<f64>| v.map(|x| format!("{x:.3}")).unwrap_or_else(|| "n/a".into());
    let checks = [
        mgd.is_some_and(|v| v > 1.0),
        igd.is_some_and(|v| v > 1.0),
        matches!((figd, igd), (Some(f), Some(i)) if f > i),
    ];
    line(format!(
        "[{}] criterion 10 (soft): MGD N=5,7..25 nu={} (>1: {}); IGD eps=0.1 N=2..7 nu={} (>1: {}); FIGD eps=0.1 N=2..7 nu={} (> IGD: {}) ({:.1}s)",
        if checks.iter().all(|&c| c) { "PASS" } else { "SOFT-MISS" },
        fmt(mgd),
        checks[0],
        fmt(igd),
        checks[1],
        fmt(figd),
        checks[2],
        start.elapsed().as_secs_f64()
    ));
}

#[test]
fn acceptance() {
    let mut ev = Vec::new();
    let results = [
        criterion_1(&mut ev),
        criterion_2(&mut ev),
        criterion_3(&mut ev),
        criterion_4(&mut ev),
        criterion_5(&mut ev),
        criterion_6(&mut ev),
        criterion_7(),
        criterion_8(),
    ];
    let c9 = criterion_9(&ev);
    criterion_10();
    let failed: Vec<usize> = results.iter().chain([&c9]).enumerate().filter(|(_, &ok)| !ok).map(|(k, _)| k + 1).collect();
    assert!(failed.is_empty(), "failing criteria: {failed:?}");
}
