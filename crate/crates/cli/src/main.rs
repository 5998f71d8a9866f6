mod args;

use std::fs;
use std::path::Path;
use std::process::ExitCode;

use clap::Parser;
use pepforge::analysis::{default_step, fit_rate, landscape, sweep, Grid, SweepMode, SweepResult};
use pepforge::conic::{verify_certificate, CERTIFICATE_TOLERANCE, DEFAULT_TOLERANCE};
use pepforge::design::{self, worst_case, DesignConfig, Method, Termination};
use pepforge::pep::{
    CertificateDocument, CriterionKind, FunctionClassSpec, InitKind, InitSpec, ProblemSpec, ScheduleDocument,
    ScheduleKind, StepSchedule,
};
use pepforge::schedules::{AlgorithmTemplate, Family};
use pepforge::{Error, Result};
use serde_json::Value;

use args::{ClassArg, Cli, Command, CriterionArg, DesignArgs, InitArg, SpecArgs};

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Incompatible(_) | Error::Infeasible(_) | Error::Unbounded(_) => 3,
        Error::Unsupported(_) => 4,
        Error::Solver(_) => 5,
        _ => 2,
    }
}

fn run(command: Command) -> Result<u8> {
    let tol = solver_tol()?;
    match command {
        Command::Analyze { spec, out } => analyze(&spec, &out, tol),
        Command::Design { spec, design, out } => run_design(&spec, &design, &out, tol),
        Command::Sweep { spec, design, jobs, out } => run_sweep(&spec, &design, jobs, &out),
        Command::Fit { input, out } => fit(&input, &out),
        Command::Landscape { spec, res, lo, hi, jobs, out } => run_landscape(&spec, res, lo, hi, jobs, &out, tol),
        Command::Verify { certificate, spec } => verify(&certificate, &spec),
    }
}

fn solver_tol() -> Result<f64> {
    match std::env::var("PEPFORGE_SOLVER_TOL") {
        Err(_) => Ok(DEFAULT_TOLERANCE),
        Ok(v) => v
            .trim()
            .parse::<f64>()
            .ok()
            .filter(|t| *t > 0.0 && t.is_finite())
            .ok_or_else(|| Error::Parse(format!("PEPFORGE_SOLVER_TOL must be a positive number, got '{v}'"))),
    }
}

fn analyze(args: &SpecArgs, out: &Path, tol: f64) -> Result<u8> {
    let (schedule, spec) = resolve(args)?;
    let wc = worst_case(&schedule, &spec, tol)?;
    println!("{:.6}", wc.value);
    write_json(out, &serde_json::to_value(CertificateDocument::from(&wc.certificate))?)?;
    Ok(0)
}

fn run_design(args: &SpecArgs, d: &DesignArgs, out: &Path, tol: f64) -> Result<u8> {
    let (init, spec) = resolve(args)?;
    let config = design_config(d, init, tol)?;
    let report = design::run(&config, &spec)?;
    println!("{}", report.summary());
    write_json(out, &report.to_json())?;
    Ok(if report.termination == Termination::SolverFailure { 5 } else { 0 })
}

fn design_config(d: &DesignArgs, init: StepSchedule<f64>, tol: f64) -> Result<DesignConfig> {
    let mut config = DesignConfig::new(d.method.unwrap_or(Method::Slm), init);
    config.solver_tol = tol;
    if let Some(t) = d.t_max {
        config.t_max = t;
    }
    if let Some(v) = d.tolw {
        config.tol_w = v;
    }
    if let Some(v) = d.tola {
        config.tol_alpha = v;
    }
    if let Some(v) = d.d0 {
        config.d0 = v;
    }
    config.validate()?;
    Ok(config)
}

fn run_sweep(args: &SpecArgs, d: &DesignArgs, jobs: usize, out: &Path) -> Result<u8> {
    let doc = load_schedule_doc(args)?;
    let spec = resolve_spec(args, doc.as_ref())?;
    let family = resolve_family(args, doc.as_ref(), &spec);
    let ns = parse_horizons(args.n.as_deref())?;
    let mode = if d.method.is_some() {
        SweepMode::Design(design_config(d, StepSchedule::memoryless(&[1.0])?, DEFAULT_TOLERANCE)?)
    } else {
        match args.steps.as_deref() {
            None => SweepMode::Fixed { step: default_step(family, &spec) },
            Some([step]) => SweepMode::Fixed { step: *step },
            Some(_) => return Err(Error::InvalidSchedule("a fixed-step sweep takes a single --steps value".into())),
        }
    };
    let result = sweep(family, args.core_length, &spec, &ns, &mode, jobs)?;
    for row in &result.rows {
        match (row.w, &row.error) {
            (Some(w), _) => println!("N={} w={w:.6} verified={}", row.n, row.verified),
            (None, e) => println!("N={} failed: {}", row.n, e.as_deref().unwrap_or("unknown error")),
        }
    }
    write_text(out, &result.to_csv())?;
    Ok(0)
}

fn fit(input: &Path, out: &Path) -> Result<u8> {
    let points = SweepResult::from_csv(&read(input)?)?;
    let f = fit_rate(&points)?;
    let lo = points.iter().map(|p| p.0).min().unwrap_or(0);
    let hi = points.iter().map(|p| p.0).max().unwrap_or(0);
    println!("nu={:.4} alpha={:.6} beta={:.6} residual={:.3e} N={lo}..{hi}", f.nu, f.alpha, f.beta, f.residual);
    if f.flagged {
        eprintln!("warning: the data do not support a decaying rate; the fit is flagged");
    }
    write_json(out, &serde_json::to_value(f)?)?;
    Ok(0)
}

fn run_landscape(args: &SpecArgs, res: usize, lo: f64, hi: f64, jobs: usize, out: &Path, tol: f64) -> Result<u8> {
    if res == 0 || !(lo < hi) {
        return Err(Error::Precondition(format!("need --res >= 1 and --lo < --hi, got {res}, {lo}, {hi}")));
    }
    let spec = resolve_spec(args, None)?;
    let grid = Grid { lo, hi, n: res };
    let land = landscape(&spec, grid, grid, jobs, tol)?;
    for &(a, b, w) in &land.minima {
        println!("minimum h1={:.4} h2={:.4} w={w:.6}", land.h1[a], land.h2[b]);
    }
    if let Some(&(h1, h2, w)) = land.am_trajectory.last() {
        println!("am_end h1={h1:.4} h2={h2:.4} w={w:.6}");
    }
    write_text(out, &land.to_csv())?;
    Ok(0)
}

fn verify(certificate: &Path, args: &SpecArgs) -> Result<u8> {
    let value = read_value(certificate)?;
    let (cert_value, embedded) = match value.get("certificate") {
        Some(c) => (c.clone(), value.get("final").cloned()),
        None => (value, None),
    };
    let cert = serde_json::from_value::<CertificateDocument>(cert_value)
        .map_err(|e| Error::Parse(format!("{}: {e}", certificate.display())))?
        .certificate()?;
    let (schedule, spec) = match (embedded, &args.schedule) {
        (Some(doc), None) => {
            let doc: ScheduleDocument = serde_json::from_value(doc).map_err(|e| Error::Parse(e.to_string()))?;
            let spec = resolve_spec(args, Some(&doc))?;
            (resolve_schedule(args, Some(&doc), &spec)?, spec)
        }
        _ => resolve(args)?,
    };
    let report = verify_certificate(&cert, &schedule, &spec, CERTIFICATE_TOLERANCE);
    if let Some(why) = report.dimension_mismatch {
        return Err(Error::IndexOutOfRange(why));
    }
    println!("min_eigenvalue={:.3e}", report.min_eigenvalue);
    println!("stationarity_residual={:.3e}", report.stationarity_residual);
    println!("bound_residual={:.3e}", report.bound_residual);
    println!("slack_residual={:.3e}", report.slack_residual);
    for v in &report.sign_violations {
        println!("sign_violation {v}");
    }
    println!("{}", if report.passed { "PASS" } else { "FAIL" });
    Ok(if report.passed { 0 } else { 1 })
}

fn resolve(args: &SpecArgs) -> Result<(StepSchedule<f64>, ProblemSpec<f64>)> {
    let doc = load_schedule_doc(args)?;
    let spec = resolve_spec(args, doc.as_ref())?;
    let schedule = resolve_schedule(args, doc.as_ref(), &spec)?;
    Ok((schedule, spec))
}

fn load_schedule_doc(args: &SpecArgs) -> Result<Option<ScheduleDocument>> {
    let Some(path) = &args.schedule else { return Ok(None) };
    let text = read(path)?;
    let value: Value = serde_json::from_str(&text)
        .map_err(|e| Error::Parse(format!("{}: line {}, column {}: {e}", path.display(), e.line(), e.column())))?;
    let doc = match value.get("final") {
        Some(v) => serde_json::from_value(v.clone()).map_err(|e| Error::Parse(format!("{}: final: {e}", path.display())))?,
        None => ScheduleDocument::from_json(&text).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?,
    };
    Ok(Some(doc))
}

fn resolve_spec(args: &SpecArgs, doc: Option<&ScheduleDocument>) -> Result<ProblemSpec<f64>> {
    let base = doc.map(|d| (d.class, d.criterion, d.init));
    let l = args.l.or(base.map(|b| b.0.l)).unwrap_or(1.0);
    let mu = args.mu.or(base.map(|b| b.0.mu)).unwrap_or(0.0);
    let epsilon = args.epsilon.or(base.map(|b| b.0.epsilon)).unwrap_or(0.0);
    if let Some(class) = args.class {
        let consistent = match class {
            ClassArg::SmoothConvex => mu == 0.0 && epsilon == 0.0,
            ClassArg::SmoothStronglyConvex => mu > 0.0 && epsilon == 0.0,
            ClassArg::Inexact => epsilon > 0.0,
        };
        if !consistent {
            return Err(Error::InvalidSpec(format!("--class {class:?} does not match mu = {mu}, epsilon = {epsilon}")));
        }
    }
    let criterion = match args.criterion {
        Some(CriterionArg::Gap) => CriterionKind::FinalObjectiveGap,
        Some(CriterionArg::Dist) => CriterionKind::FinalDistanceSq,
        Some(CriterionArg::MinGrad) => CriterionKind::MinGradientNormSq,
        None => base.map(|b| b.1).unwrap_or(CriterionKind::FinalObjectiveGap),
    };
    let init = match args.init {
        Some(InitArg::Dist) => InitKind::DistanceToOpt,
        Some(InitArg::Gap) => InitKind::ObjectiveGap,
        None => base.map(|b| b.2.kind).unwrap_or(InitKind::DistanceToOpt),
    };
    let r = args.r.or(base.map(|b| b.2.r)).unwrap_or(1.0);
    ProblemSpec::new(FunctionClassSpec::new(l, mu, epsilon)?, criterion, InitSpec::new(init, r)?)
}

fn resolve_family(args: &SpecArgs, doc: Option<&ScheduleDocument>, spec: &ProblemSpec<f64>) -> Family {
    if let Some(f) = args.family {
        return f;
    }
    let inexact = spec.class.is_inexact();
    match doc.map(|d| d.kind.as_str()) {
        Some("full") if inexact => Family::Figd,
        Some("full") => Family::Full,
        Some("cyclic") => Family::Cgd,
        _ if inexact => Family::Igd,
        _ => Family::Mgd,
    }
}

fn resolve_schedule(args: &SpecArgs, doc: Option<&ScheduleDocument>, spec: &ProblemSpec<f64>) -> Result<StepSchedule<f64>> {
    let family = resolve_family(args, doc, spec);
    let schedule = match (doc, &args.coeffs, &args.steps) {
        (Some(d), None, None) => d.schedule()?,
        (_, Some(text), _) => {
            let coeffs: Vec<Vec<f64>> = serde_json::from_str(text)
                .map_err(|e| Error::Parse(format!("--coeffs: column {}: {e}", e.column())))?;
            let n = coeffs.len();
            check_horizon(args, n)?;
            let template = AlgorithmTemplate::new(family, n.max(1), core_length(args, family, n))?;
            StepSchedule::new(template.kind(), coeffs)?
        }
        (_, None, steps) => {
            let n = match args.n.as_deref() {
                Some(text) => parse_n(text)?,
                None => infer_horizon(family, steps.as_deref())?,
            };
            let template = AlgorithmTemplate::new(family, n, core_length(args, family, n))?;
            let count = template.param_count();
            let params = match steps.as_deref() {
                None => vec![default_step(family, spec); count],
                Some([v]) => vec![*v; count],
                Some(v) => v.to_vec(),
            };
            template.instantiate(&params)?
        }
    };
    let template = AlgorithmTemplate::new(
        family,
        schedule.n_steps(),
        match schedule.kind() {
            ScheduleKind::Cyclic { core_length } => Some(core_length),
            _ => None,
        },
    )?;
    template.check_class(&spec.class)?;
    Ok(schedule)
}

fn core_length(args: &SpecArgs, family: Family, n: usize) -> Option<usize> {
    if family != Family::Cgd {
        return args.core_length;
    }
    Some(args.core_length.or(args.steps.as_ref().filter(|s| s.len() > 1).map(Vec::len)).unwrap_or(n))
}

fn infer_horizon(family: Family, steps: Option<&[f64]>) -> Result<usize> {
    let missing = || Error::InvalidSchedule("--N is required unless it follows from --steps".into());
    let k = steps.map(<[f64]>::len).filter(|&k| k > 1).ok_or_else(missing)?;
    match family {
        Family::Full | Family::Figd => (1..=k).find(|n| n * (n + 1) / 2 == k).ok_or_else(missing),
        _ => Ok(k),
    }
}

fn check_horizon(args: &SpecArgs, n: usize) -> Result<()> {
    match args.n.as_deref() {
        Some(text) if parse_n(text)? != n => {
            Err(Error::InvalidSchedule(format!("--N {text} but --coeffs has {n} rows")))
        }
        _ => Ok(()),
    }
}

fn parse_n(text: &str) -> Result<usize> {
    text.trim()
        .parse()
        .map_err(|_| Error::Parse(format!("--N expects a positive integer, got '{text}'")))
}

/// `5`, `1,2,3` or `5..10` (inclusive).
fn parse_horizons(text: Option<&str>) -> Result<Vec<usize>> {
    let text = text.ok_or_else(|| Error::Precondition("--N is required".into()))?;
    if let Some((a, b)) = text.split_once("..") {
        let (a, b) = (parse_n(a)?, parse_n(b)?);
        return Ok((a..=b).collect());
    }
    text.split(',').map(parse_n).collect()
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
}

fn read_value(path: &Path) -> Result<Value> {
    let text = read(path)?;
    serde_json::from_str(&text)
        .map_err(|e| Error::Parse(format!("{}: line {}, column {}: {e}", path.display(), e.line(), e.column())))
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::Parse(format!("cannot write {}: {e}", path.display())))
}

fn write_json(path: &Path, value: &Value) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    write_text(path, &text)
}
