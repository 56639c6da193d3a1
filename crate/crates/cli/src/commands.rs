use std::ffi::OsString;
use std::path::{Path, PathBuf};

use kirchhoff_core::asymptotics::{
    fit_power_law, law_table, mass_limits, predict, thresholds, AsymptoticLaw, AsymptoticsError,
    MassLimits, PowerFit, Quantity, Regime, Slope, Thresholds,
};
use kirchhoff_core::curve::{
    count_normalized, solve_normalized, trace, Bracket, CurveError, CurveSample, MassCurve,
    PredictedCount, RootPrediction,
};
use kirchhoff_core::{
    Controls, CriticalLimits, IdentityResiduals, KirchhoffError, NormBundle, ProblemParams,
    ScalingDescriptor, Solver,
};
use serde::Serialize;

use crate::args::{
    CommonArgs, Format, GridArgs, GroundStateArgs, MassCurveArgs, NormalizedArgs, ProblemArgs,
};
use crate::CliError;

pub type Outcome = Result<Vec<PathBuf>, CliError>;

impl From<KirchhoffError> for CliError {
    fn from(e: KirchhoffError) -> Self {
        match e {
            KirchhoffError::Param(p) => CliError::Input(p.to_string()),
            other => CliError::Solver(other.to_string()),
        }
    }
}

impl From<CurveError> for CliError {
    fn from(e: CurveError) -> Self {
        match e {
            CurveError::InvalidGrid { .. } | CurveError::InvalidMass(_) => {
                CliError::Input(e.to_string())
            }
            CurveError::Solver(k) => k.into(),
            other => CliError::Solver(other.to_string()),
        }
    }
}

impl From<AsymptoticsError> for CliError {
    fn from(e: AsymptoticsError) -> Self {
        match e {
            AsymptoticsError::Numerical(k) => k.into(),
            other => CliError::Input(other.to_string()),
        }
    }
}

/// `base` with `ext` appended (not substituted): `run.v1` becomes `run.v1.json`.
pub fn with_ext(base: &Path, ext: &str) -> PathBuf {
    let mut s = OsString::from(base.as_os_str());
    s.push(".");
    s.push(ext);
    PathBuf::from(s)
}

pub fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)
            .map_err(|e| CliError::Input(format!("{}: {e}", dir.display())))?;
    }
    std::fs::write(path, text).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(value).map_err(|e| CliError::Solver(e.to_string()))?;
    write_file(path, &(text + "\n"))
}

pub fn load_controls(common: &CommonArgs) -> Result<Controls, CliError> {
    match &common.controls {
        None => Ok(Controls::default()),
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
            Controls::from_kv_str(&text)
                .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
        }
    }
}

/// Runs `f` on a pool with the requested worker count.
pub fn with_workers<T>(workers: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T, CliError>
where
    T: Send,
{
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = workers {
        if n == 0 {
            return Err(CliError::Input("--workers must be positive".into()));
        }
        builder = builder.num_threads(n);
    }
    let pool = builder
        .build()
        .map_err(|e| CliError::Solver(e.to_string()))?;
    Ok(pool.install(f))
}

fn problem(p: &ProblemArgs, lambda: f64) -> Result<ProblemParams, CliError> {
    ProblemParams::new(p.dim, p.a, p.b, p.q, p.p, lambda)
        .map_err(|e| CliError::Input(e.to_string()))
}

#[derive(Serialize)]
struct ProfileSample {
    r: f64,
    w: f64,
    w_prime: f64,
}

#[derive(Serialize)]
struct GroundStateReport {
    params: ProblemParams,
    controls: Controls,
    varpi: f64,
    scaling: ScalingDescriptor,
    /// Norms of `u_lambda`; `energy` is the Kirchhoff energy `m_lambda`.
    norms: NormBundle,
    energy: f64,
    /// Norms of the local profile `W`.
    local_norms: NormBundle,
    peak: f64,
    residuals: IdentityResiduals,
    /// Present with `--format json`.
    #[serde(skip_serializing_if = "Option::is_none")]
    profile: Option<Vec<ProfileSample>>,
}

pub fn ground_state(a: &GroundStateArgs) -> Outcome {
    let controls = load_controls(&a.common)?;
    let params = problem(&a.problem, a.lambda)?;
    let solver = Solver::new(controls);
    let g = with_workers(a.common.workers, || solver.ground_state(&params))??;
    let r_end = 2.0 * g.profile.r_match();
    let samples: Vec<ProfileSample> = (0..=400)
        .map(|i| {
            let r = r_end * i as f64 / 400.0;
            ProfileSample {
                r,
                w: g.profile.evaluate(r),
                w_prime: g.profile.evaluate_derivative(r),
            }
        })
        .collect();
    let mut report = GroundStateReport {
        params,
        controls,
        varpi: g.varpi,
        scaling: g.scaling,
        norms: g.norms,
        energy: g.norms.energy,
        local_norms: g.local,
        peak: g.peak,
        residuals: g.residuals,
        profile: None,
    };
    let json = with_ext(&a.common.out, "json");
    match a.common.format {
        Format::Json => {
            report.profile = Some(samples);
            write_json(&json, &report)?;
            Ok(vec![json])
        }
        Format::Csv => {
            let csv = with_ext(&a.common.out, "csv");
            let mut text = String::from("r,W,Wprime\n");
            for s in &samples {
                text.push_str(&format!("{:e},{:e},{:e}\n", s.r, s.w, s.w_prime));
            }
            write_file(&csv, &text)?;
            write_json(&json, &report)?;
            Ok(vec![csv, json])
        }
    }
}

fn grid(g: &GridArgs, controls: &Controls) -> (f64, f64, usize) {
    (
        g.lambda_min,
        g.lambda_max,
        g.points.unwrap_or(controls.curve_points),
    )
}

#[derive(Serialize)]
struct EndFit {
    regime: Regime,
    window: Option<(f64, f64)>,
    fit: Option<PowerFit>,
    /// Why the fit is missing.
    #[serde(skip_serializing_if = "Option::is_none")]
    omitted: Option<String>,
    law: Option<AsymptoticLaw>,
    /// Fitted over predicted exponent.
    exponent_ratio: Option<f64>,
    /// Outermost sample over the leading term of the law there.
    leading_ratio: Option<f64>,
}

#[derive(Serialize)]
struct SignCheck {
    end: Regime,
    declared: Slope,
    /// Sign of the finite difference of `M` over the two outermost samples.
    observed: Option<f64>,
    agrees: Option<bool>,
}

#[derive(Serialize)]
struct ClosedFormCheck {
    law_id: String,
    max_relative_deviation: f64,
}

#[derive(Serialize)]
struct MassCurveReport {
    params: ProblemParams,
    controls: Controls,
    grid: kirchhoff_core::curve::GridDescriptor,
    fits: Vec<EndFit>,
    limits: Option<MassLimits>,
    sign_checks: Vec<SignCheck>,
    closed_form: Option<ClosedFormCheck>,
    turning_points: Vec<(f64, f64)>,
    failures: Vec<kirchhoff_core::curve::CurveFailure>,
    #[serde(skip_serializing_if = "Option::is_none")]
    samples: Option<Vec<CurveSample>>,
}

fn end_fit(curve: &MassCurve, solver: &Solver, regime: Regime) -> EndFit {
    let law = predict(&curve.params, Quantity::Mass, regime, solver).ok();
    let n = curve.samples.len();
    let k = (n / 8).max(4);
    let mut out = EndFit {
        regime,
        window: None,
        fit: None,
        omitted: None,
        law,
        exponent_ratio: None,
        leading_ratio: None,
    };
    if n < 4 {
        out.omitted = Some(format!("{n} sample(s); a fit needs at least 4"));
        return out;
    }
    let slice = if regime == Regime::LambdaToZero {
        &curve.samples[..k.min(n)]
    } else {
        &curve.samples[n - k.min(n)..]
    };
    let pts: Vec<(f64, f64)> = slice.iter().map(|s| (s.lambda, s.mass)).collect();
    let window = (pts[0].0, pts[pts.len() - 1].0);
    out.window = Some(window);
    match fit_power_law(&pts, window, 0.0) {
        Ok(f) => {
            if let Some(l) = &out.law {
                if l.exponent != 0.0 {
                    out.exponent_ratio = Some(f.exponent / l.exponent);
                }
                let (x, m) = if regime == Regime::LambdaToZero {
                    pts[0]
                } else {
                    pts[pts.len() - 1]
                };
                out.leading_ratio = l.evaluate(x).map(|v| m / v);
            }
            out.fit = Some(f);
        }
        Err(e) => out.omitted = Some(e.to_string()),
    }
    out
}

pub fn mass_curve(a: &MassCurveArgs) -> Outcome {
    let controls = load_controls(&a.common)?;
    let params = problem(&a.problem, 1.0)?;
    let solver = Solver::new(controls);
    let (lo, hi, n) = grid(&a.grid, &controls);
    eprintln!("tracing {n} points on [{lo:e}, {hi:e}]");
    let curve = with_workers(a.common.workers, || trace(&solver, &params, lo, hi, n))??;
    eprintln!(
        "{} solved, {} failed",
        curve.samples.len(),
        curve.failures.len()
    );
    let limits = mass_limits(&params, &solver).ok();
    let mut sign_checks = Vec::new();
    if let Some(l) = &limits {
        let slopes = curve.end_slopes();
        for (end, declared, observed) in [
            (Regime::LambdaToZero, l.slope_zero, slopes.map(|s| s.0)),
            (
                Regime::LambdaToInfinity,
                l.slope_infinity,
                slopes.map(|s| s.1),
            ),
        ] {
            let expected = match declared {
                Slope::Positive => Some(1.0),
                Slope::Negative => Some(-1.0),
                Slope::Open => None,
            };
            let agrees = expected.zip(observed).map(|(e, o)| e == o);
            sign_checks.push(SignCheck {
                end,
                declared,
                observed,
                agrees,
            });
        }
    }
    let closed_form = predict(&params, Quantity::Mass, Regime::AllLambda, &solver)
        .ok()
        .filter(|l| l.regime == Regime::AllLambda && l.constant.is_some())
        .map(|law| {
            let dev = curve
                .samples
                .iter()
                .filter_map(|s| law.evaluate(s.lambda).map(|v| ((s.mass - v) / v).abs()))
                .fold(0.0, f64::max);
            ClosedFormCheck {
                law_id: law.id,
                max_relative_deviation: dev,
            }
        });
    let mut report = MassCurveReport {
        params,
        controls,
        grid: curve.grid,
        fits: vec![
            end_fit(&curve, &solver, Regime::LambdaToZero),
            end_fit(&curve, &solver, Regime::LambdaToInfinity),
        ],
        limits,
        sign_checks,
        closed_form,
        turning_points: curve.turning_points(),
        failures: curve.failures.clone(),
        samples: None,
    };
    let json = with_ext(&a.common.out, "json");
    match a.common.format {
        Format::Json => {
            report.samples = Some(curve.samples.clone());
            write_json(&json, &report)?;
            Ok(vec![json])
        }
        Format::Csv => {
            let csv = with_ext(&a.common.out, "csv");
            write_file(&csv, &curve.to_csv())?;
            write_json(&json, &report)?;
            Ok(vec![csv, json])
        }
    }
}

#[derive(Serialize)]
struct RootReport {
    lambda: f64,
    mass: f64,
    mass_residual: f64,
    varpi: f64,
    peak: f64,
    norms: NormBundle,
    bracket: BracketReport,
    prediction: Option<RootPrediction>,
}

/// Bracket with an open end written as `null`.
#[derive(Serialize)]
struct BracketReport {
    kind: kirchhoff_core::curve::BracketKind,
    lo: Option<f64>,
    hi: Option<f64>,
}

impl From<Bracket> for BracketReport {
    fn from(b: Bracket) -> Self {
        let finite = |x: f64| (x.is_finite() && x > 0.0).then_some(x);
        Self {
            kind: b.kind,
            lo: finite(b.lo),
            hi: finite(b.hi),
        }
    }
}

#[derive(Serialize)]
struct NormalizedReport {
    params: ProblemParams,
    controls: Controls,
    c: f64,
    count: usize,
    predicted: Option<PredictedCount>,
    thresholds: Option<Thresholds>,
    /// Local extrema of the traced mass curve, candidates for the count thresholds.
    turning_points: Vec<(f64, f64)>,
    brackets: Vec<BracketReport>,
    roots: Vec<RootReport>,
    critical_limits: Option<CriticalLimits>,
}

pub fn normalized(a: &NormalizedArgs) -> Outcome {
    let controls = load_controls(&a.common)?;
    let params = problem(&a.problem, 1.0)?;
    if !(a.c > 0.0 && a.c.is_finite()) {
        return Err(CliError::Input(format!(
            "--c must be positive, got {}",
            a.c
        )));
    }
    let solver = Solver::new(controls);
    let (lo, hi, n) = grid(&a.grid, &controls);
    let (curve, set) = with_workers(a.common.workers, || -> Result<_, CliError> {
        let curve = trace(&solver, &params, lo, hi, n)?;
        let limits = mass_limits(&params, &solver)?;
        let count = count_normalized(&curve, a.c, &limits)?;
        let set = solve_normalized(&solver, &curve, &count)?;
        Ok((curve, set))
    })??;
    eprintln!("{} normalized solution(s) for c = {}", set.roots.len(), a.c);
    let report = NormalizedReport {
        params,
        controls,
        c: a.c,
        count: set.roots.len(),
        predicted: set.predicted.clone(),
        thresholds: thresholds(&params, &solver).ok(),
        turning_points: curve.turning_points(),
        brackets: set.brackets.iter().map(|&b| b.into()).collect(),
        roots: set
            .roots
            .iter()
            .map(|r| RootReport {
                lambda: r.lambda,
                mass: r.solution.norms.mass,
                mass_residual: r.mass_residual,
                varpi: r.solution.varpi,
                peak: r.solution.peak,
                norms: r.solution.norms,
                bracket: r.bracket.into(),
                prediction: r.prediction.clone(),
            })
            .collect(),
        critical_limits: params
            .is_critical()
            .then(|| kirchhoff_core::critical_limits(params.dim(), params.a(), params.b()).ok())
            .flatten(),
    };
    let json = with_ext(&a.common.out, "json");
    write_json(&json, &report)?;
    Ok(vec![json])
}

pub fn export_laws(out: &Path) -> Outcome {
    let path = if out.extension().is_some() {
        out.to_path_buf()
    } else {
        with_ext(out, "json")
    };
    write_json(&path, &law_table())?;
    Ok(vec![path])
}
