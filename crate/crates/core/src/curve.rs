//! Mass curve `M(lambda) = |u_lambda|_2^2` on log-spaced grids and normalized
//! solutions `M(lambda_c) = c^2`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::asymptotics::{
    normalized_laws, predicted_counts, thresholds, AsymptoticsError, LimitClass, MassLimits,
    Quantity, Regime,
};
use crate::kirchhoff::{GroundStateSolution, KirchhoffError, Solver};
use crate::params::ProblemParams;

pub const CSV_HEADER: &str = "lambda,M,gradA,Lq,Lp,energy,varpi,peak";

/// Decades searched beyond the grid when a tail crossing is predicted.
const MAX_TAIL_DECADES: u32 = 40;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurveSample {
    pub lambda: f64,
    pub mass: f64,
    pub grad: f64,
    pub lq: f64,
    pub lp: f64,
    pub energy: f64,
    pub varpi: f64,
    pub peak: f64,
    /// Largest Nehari/Pohozaev residual of the assembled solution.
    pub residual: f64,
}

impl CurveSample {
    fn from_solution(s: &GroundStateSolution) -> Self {
        Self {
            lambda: s.params.lambda(),
            mass: s.norms.mass,
            grad: s.norms.grad,
            lq: s.norms.lq,
            lp: s.norms.lp,
            energy: s.norms.energy,
            varpi: s.varpi,
            peak: s.peak,
            residual: s.residuals.max(),
        }
    }

    pub fn get(&self, q: Quantity) -> Option<f64> {
        match q {
            Quantity::Mass => Some(self.mass),
            Quantity::Grad => Some(self.grad),
            Quantity::Lq => Some(self.lq),
            Quantity::Lp => Some(self.lp),
            Quantity::Peak => Some(self.peak),
            Quantity::Energy => Some(self.energy),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveFailure {
    pub lambda: f64,
    pub reason: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridDescriptor {
    pub lambda_min: f64,
    pub lambda_max: f64,
    pub points: usize,
}

impl GridDescriptor {
    pub fn lambdas(&self) -> Vec<f64> {
        log_grid(self.lambda_min, self.lambda_max, self.points)
    }
}

/// `n` log-spaced points from `lo` to `hi`, endpoints exact.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => {
            let (a, b) = (lo.ln(), hi.ln());
            (0..n)
                .map(|i| match i {
                    0 => lo,
                    i if i == n - 1 => hi,
                    i => (a + (b - a) * i as f64 / (n - 1) as f64).exp(),
                })
                .collect()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MassCurve {
    /// Parameters at the first grid point; only the `lambda`-independent part matters.
    pub params: ProblemParams,
    pub grid: GridDescriptor,
    pub samples: Vec<CurveSample>,
    pub failures: Vec<CurveFailure>,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CurveError {
    #[error("invalid grid [{lo}, {hi}] with {points} points")]
    InvalidGrid { lo: f64, hi: f64, points: usize },
    #[error("every grid point failed; first failure at lambda={}: {}", .0[0].lambda, .0[0].reason)]
    AllFailed(Vec<CurveFailure>),
    #[error("c must be positive and finite, got {0}")]
    InvalidMass(f64),
    #[error("root lost in [{lo}, {hi}]: {reason}; refine the curve near this interval")]
    RootLost { lo: f64, hi: f64, reason: String },
    #[error(transparent)]
    Solver(#[from] KirchhoffError),
    #[error(transparent)]
    Asymptotics(#[from] AsymptoticsError),
}

/// Ground states at `points` log-spaced frequencies in `[lambda_min, lambda_max]`.
/// Points are solved in parallel; the result is in grid order and does not
/// depend on the number of workers.
pub fn trace(
    solver: &Solver,
    params: &ProblemParams,
    lambda_min: f64,
    lambda_max: f64,
    points: usize,
) -> Result<MassCurve, CurveError> {
    let valid = lambda_min > 0.0
        && lambda_max.is_finite()
        && points >= 1
        && (lambda_min < lambda_max || (points == 1 && lambda_min <= lambda_max));
    if !valid {
        return Err(CurveError::InvalidGrid {
            lo: lambda_min,
            hi: lambda_max,
            points,
        });
    }
    let grid = GridDescriptor {
        lambda_min,
        lambda_max,
        points,
    };
    let results: Vec<Result<CurveSample, CurveFailure>> = grid
        .lambdas()
        .par_iter()
        .map(|&lambda| {
            params
                .with_lambda(lambda)
                .map_err(KirchhoffError::from)
                .and_then(|pp| solver.ground_state(&pp))
                .map(|s| CurveSample::from_solution(&s))
                .map_err(|e| CurveFailure {
                    lambda,
                    reason: e.to_string(),
                })
        })
        .collect();
    let mut samples = Vec::with_capacity(points);
    let mut failures = Vec::new();
    for r in results {
        match r {
            Ok(s) => samples.push(s),
            Err(f) => failures.push(f),
        }
    }
    if samples.is_empty() {
        return Err(CurveError::AllFailed(failures));
    }
    let params = params
        .with_lambda(lambda_min)
        .map_err(KirchhoffError::from)?;
    Ok(MassCurve {
        params,
        grid,
        samples,
        failures,
    })
}

impl MassCurve {
    /// `(lambda, value)` pairs of one column.
    pub fn series(&self, q: Quantity) -> Vec<(f64, f64)> {
        self.samples
            .iter()
            .filter_map(|s| s.get(q).map(|v| (s.lambda, v)))
            .collect()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from(CSV_HEADER);
        out.push('\n');
        for s in &self.samples {
            out.push_str(&format!(
                "{:e},{:e},{:e},{:e},{:e},{:e},{:e},{:e}\n",
                s.lambda, s.mass, s.grad, s.lq, s.lp, s.energy, s.varpi, s.peak
            ));
        }
        out
    }

    /// Sign of the finite difference of `M` over the first and last two samples.
    pub fn end_slopes(&self) -> Option<(f64, f64)> {
        let s = &self.samples;
        if s.len() < 2 {
            return None;
        }
        let n = s.len();
        Some((
            (s[1].mass - s[0].mass).signum(),
            (s[n - 1].mass - s[n - 2].mass).signum(),
        ))
    }

    /// Interior local extrema of `M`, candidates for the turning points that
    /// separate the count regimes.
    pub fn turning_points(&self) -> Vec<(f64, f64)> {
        self.samples
            .windows(3)
            .filter(|w| (w[1].mass - w[0].mass) * (w[2].mass - w[1].mass) < 0.0)
            .map(|w| (w[1].lambda, w[1].mass))
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BracketKind {
    /// Sign change between two samples.
    Interior,
    /// A sample hits `c^2` exactly; zero-width bracket.
    Exact,
    /// Crossing below the grid, inferred from the limit of `M` at zero.
    BelowGrid,
    /// Crossing above the grid, inferred from the limit of `M` at infinity.
    AboveGrid,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bracket {
    pub kind: BracketKind,
    pub lo: f64,
    pub hi: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormalizedCount {
    pub c: f64,
    pub count: usize,
    pub brackets: Vec<Bracket>,
}

fn limit_sign(limit: LimitClass, target: f64) -> Option<f64> {
    match limit {
        LimitClass::Zero => Some(-1.0),
        LimitClass::Infinity => Some(1.0),
        LimitClass::Finite(v) if v != target => Some((v - target).signum()),
        _ => None,
    }
}

/// Counts crossings of `M = c^2` on the curve, plus at most one crossing past
/// each end when the limit of `M` there lies on the other side of `c^2`.
pub fn count_normalized(
    curve: &MassCurve,
    c: f64,
    limits: &MassLimits,
) -> Result<NormalizedCount, CurveError> {
    if !(c > 0.0 && c.is_finite()) {
        return Err(CurveError::InvalidMass(c));
    }
    let target = c * c;
    let s = &curve.samples;
    let mut brackets = Vec::new();
    // c = sqrt(M) round-trips only up to a few ulps
    let sign = |m: f64| {
        if (m - target).abs() <= 4.0 * f64::EPSILON * target {
            0.0
        } else {
            (m - target).signum()
        }
    };
    let first = s.iter().map(|x| sign(x.mass)).find(|&v| v != 0.0);
    let last = s.iter().rev().map(|x| sign(x.mass)).find(|&v| v != 0.0);
    if let (Some(l0), Some(f)) = (limit_sign(limits.at_zero, target), first) {
        if l0 != f && sign(s[0].mass) != 0.0 {
            brackets.push(Bracket {
                kind: BracketKind::BelowGrid,
                lo: 0.0,
                hi: s[0].lambda,
            });
        }
    }
    let mut prev: Option<(f64, f64)> = None;
    for x in s {
        let sg = sign(x.mass);
        if sg == 0.0 {
            brackets.push(Bracket {
                kind: BracketKind::Exact,
                lo: x.lambda,
                hi: x.lambda,
            });
            prev = None;
            continue;
        }
        if let Some((pl, ps)) = prev {
            if ps != sg {
                brackets.push(Bracket {
                    kind: BracketKind::Interior,
                    lo: pl,
                    hi: x.lambda,
                });
            }
        }
        prev = Some((x.lambda, sg));
    }
    if let (Some(li), Some(l)) = (limit_sign(limits.at_infinity, target), last) {
        let end = s[s.len() - 1];
        if li != l && sign(end.mass) != 0.0 {
            brackets.push(Bracket {
                kind: BracketKind::AboveGrid,
                lo: end.lambda,
                hi: f64::INFINITY,
            });
        }
    }
    Ok(NormalizedCount {
        c,
        count: brackets.len(),
        brackets,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CountRegime {
    SmallC,
    LargeC,
    NearThreshold,
    Intermediate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictedCount {
    pub regime: CountRegime,
    pub count: Option<u32>,
    pub label: String,
}

/// Count predicted for mass `c`. `c` is small below `min(m1, m2)/g` and large
/// above `max(m1, m2) g`; within a factor `g` of either threshold the count is
/// flagged as unreliable. `g` is the guard band of the solver controls.
pub fn predicted_count(
    params: &ProblemParams,
    c: f64,
    solver: &Solver,
) -> Result<PredictedCount, CurveError> {
    let counts = predicted_counts(params).ok_or_else(|| {
        AsymptoticsError::NotCovered("counts need N = 3, b > 0 and 2 < q < p < 6".into())
    })?;
    let t = thresholds(params, solver)?;
    let g = solver.controls().guard_band;
    let near = |m: f64| c > m / g && c < m * g;
    let (regime, count, label) = if near(t.m1) || near(t.m2) {
        (
            CountRegime::NearThreshold,
            None,
            "unreliable: near threshold".to_string(),
        )
    } else if c < t.m1.min(t.m2) {
        (
            CountRegime::SmallC,
            Some(counts.small_c),
            "small c".to_string(),
        )
    } else if c > t.m1.max(t.m2) {
        (
            CountRegime::LargeC,
            Some(counts.large_c),
            "large c".to_string(),
        )
    } else {
        (
            CountRegime::Intermediate,
            None,
            "between thresholds: no prediction".to_string(),
        )
    };
    Ok(PredictedCount {
        regime,
        count,
        label,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RootPrediction {
    pub law_id: String,
    pub predicted_lambda: f64,
    pub ratio: f64,
}

#[derive(Debug, Clone)]
pub struct NormalizedRoot {
    pub lambda: f64,
    pub bracket: Bracket,
    /// `|M(lambda_c) - c^2| / c^2`.
    pub mass_residual: f64,
    pub solution: GroundStateSolution,
    pub prediction: Option<RootPrediction>,
}

#[derive(Debug, Clone)]
pub struct NormalizedSolutionSet {
    pub c: f64,
    pub roots: Vec<NormalizedRoot>,
    pub predicted: Option<PredictedCount>,
    pub brackets: Vec<Bracket>,
}

/// Brent's method on `[a, b]` with `f(a) f(b) <= 0`; stops when the bracket is
/// narrower than `tol`. The objective may fail.
pub fn brent<E>(
    mut f: impl FnMut(f64) -> Result<f64, E>,
    mut a: f64,
    mut b: f64,
    tol: f64,
    max_iter: usize,
) -> Result<Option<f64>, E> {
    let mut fa = f(a)?;
    let mut fb = f(b)?;
    if fa == 0.0 {
        return Ok(Some(a));
    }
    if fb == 0.0 {
        return Ok(Some(b));
    }
    if fa.signum() == fb.signum() {
        return Ok(None);
    }
    let (mut c, mut fc) = (a, fa);
    let mut d = b - a;
    let mut e = d;
    for _ in 0..max_iter {
        if fb.signum() == fc.signum() {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            (a, b, c) = (b, c, b);
            (fa, fb, fc) = (fb, fc, fb);
        }
        let tol1 = 2.0 * f64::EPSILON * b.abs() + 0.5 * tol;
        let m = 0.5 * (c - b);
        if m.abs() <= tol1 || fb == 0.0 {
            return Ok(Some(b));
        }
        if e.abs() >= tol1 && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q) = if a == c {
                (2.0 * m * s, 1.0 - s)
            } else {
                let qq = fa / fc;
                let r = fb / fc;
                (
                    s * (2.0 * m * qq * (qq - r) - (b - a) * (r - 1.0)),
                    (qq - 1.0) * (r - 1.0) * (s - 1.0),
                )
            };
            if p > 0.0 {
                q = -q;
            } else {
                p = -p;
            }
            if 2.0 * p < (3.0 * m * q - (tol1 * q).abs()).min((e * q).abs()) {
                e = d;
                d = p / q;
            } else {
                d = m;
                e = m;
            }
        } else {
            d = m;
            e = m;
        }
        a = b;
        fa = fb;
        b += if d.abs() > tol1 { d } else { tol1.copysign(m) };
        fb = f(b)?;
    }
    Ok(Some(b))
}

/// Refines every bracket to a normalized solution and compares each root
/// with the asymptotic `lambda_c` law of its regime when one applies.
pub fn solve_normalized(
    solver: &Solver,
    curve: &MassCurve,
    count: &NormalizedCount,
) -> Result<NormalizedSolutionSet, CurveError> {
    let c = count.c;
    let params = curve.params;
    let ln_target = 2.0 * c.ln();
    let tol = solver.controls().root_tol;
    let objective = |t: f64| -> Result<f64, KirchhoffError> {
        let pp = params.with_lambda(t.exp())?;
        Ok(solver.ground_state(&pp)?.norms.mass.ln() - ln_target)
    };
    let roots: Vec<Result<NormalizedRoot, CurveError>> = count
        .brackets
        .par_iter()
        .map(|&br| {
            let (lo, hi) = match br.kind {
                BracketKind::Exact | BracketKind::Interior => (br.lo, br.hi),
                BracketKind::BelowGrid => extend(&objective, br.hi, -1.0)?,
                BracketKind::AboveGrid => extend(&objective, br.lo, 1.0)?,
            };
            let lambda = if br.kind == BracketKind::Exact {
                lo
            } else {
                let lost = |reason: String| CurveError::RootLost { lo, hi, reason };
                brent(objective, lo.ln(), hi.ln(), tol, 200)
                    .map_err(|e| lost(e.to_string()))?
                    .ok_or_else(|| lost("no sign change at the bracket ends".into()))?
                    .exp()
            };
            let solution =
                solver.ground_state(&params.with_lambda(lambda).map_err(KirchhoffError::from)?)?;
            let mass_residual = (solution.norms.mass - c * c).abs() / (c * c);
            let prediction = root_prediction(&params, c, lambda, solver);
            Ok(NormalizedRoot {
                lambda,
                bracket: br,
                mass_residual,
                solution,
                prediction,
            })
        })
        .collect();
    let mut roots = roots.into_iter().collect::<Result<Vec<_>, _>>()?;
    roots.sort_by(|a, b| a.lambda.total_cmp(&b.lambda));
    let predicted = predicted_count(&params, c, solver).ok();
    Ok(NormalizedSolutionSet {
        c,
        roots,
        predicted,
        brackets: count.brackets.clone(),
    })
}

/// Walks from `lambda` by decades in direction `dir` until the objective
/// changes sign; returns the bracket in increasing order.
fn extend(
    f: &impl Fn(f64) -> Result<f64, KirchhoffError>,
    lambda: f64,
    dir: f64,
) -> Result<(f64, f64), CurveError> {
    let mut t = lambda.ln();
    let f0 = f(t)?;
    for _ in 0..MAX_TAIL_DECADES {
        let next = t + dir * std::f64::consts::LN_10;
        let fn_ = f(next)?;
        if fn_.signum() != f0.signum() || fn_ == 0.0 {
            let (a, b) = if dir < 0.0 { (next, t) } else { (t, next) };
            return Ok((a.exp(), b.exp()));
        }
        t = next;
    }
    Err(CurveError::RootLost {
        lo: lambda,
        hi: lambda,
        reason: format!("no crossing within {MAX_TAIL_DECADES} decades beyond the grid"),
    })
}

fn root_prediction(
    params: &ProblemParams,
    c: f64,
    lambda: f64,
    solver: &Solver,
) -> Option<RootPrediction> {
    let regime = if lambda < 1.0 {
        Regime::LambdaToZero
    } else {
        Regime::LambdaToInfinity
    };
    let laws = normalized_laws(params, regime, solver).ok()?;
    let law = laws.into_iter().find(|l| l.quantity == Quantity::LambdaC)?;
    if law.log_power.is_some() {
        return None;
    }
    let predicted_lambda = law.constant? * c.powf(law.exponent);
    Some(RootPrediction {
        law_id: law.id,
        predicted_lambda,
        ratio: lambda / predicted_lambda,
    })
}
