//! Problem parameters, admissibility checks and regime selection.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::quadrature;

/// Tolerance used to decide whether `p` sits on the critical Sobolev exponent.
pub const CRITICAL_TOL: f64 = 1e-12;

/// Critical Sobolev exponent `2N/(N-2)`.
pub fn critical_exponent(dim: u32) -> f64 {
    2.0 * dim as f64 / (dim as f64 - 2.0)
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParamError {
    #[error("dimension {0} is not supported (expected 3 or 4)")]
    UnsupportedDimension(f64),
    #[error("{name} must be finite (got {value})")]
    NonFinite { name: &'static str, value: f64 },
    #[error("{name} must be positive (got {value})")]
    NonPositive { name: &'static str, value: f64 },
    #[error("Kirchhoff coefficient b must be nonnegative (got {0})")]
    NegativeKirchhoff(f64),
    #[error("exponents must satisfy 2 < q <= p <= {critical} (got q={q}, p={p})")]
    ExponentOrder { q: f64, p: f64, critical: f64 },
    #[error("q = p = {critical} has no finite-energy positive solution")]
    PureCritical { critical: f64 },
    #[error("N=4 critical case needs b*S^2 < 1 (b={b}, S={sobolev}, b*S^2={product})")]
    CriticalCoupling { b: f64, sobolev: f64, product: f64 },
}

/// Structural class of an admissible parameter set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CaseTag {
    Subcritical,
    Critical,
    PqEqual,
}

/// Which local reduction is used to build `u_lambda`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NormalizationTag {
    /// `u = lambda^{1/(q-2)} w(x/l)`; the p-power carries the small coefficient.
    SmallLambda,
    /// `u = lambda^{1/(p-2)} w(x/l)`; the q-power carries the small coefficient.
    LargeLambda,
    /// p = q: one combined power.
    ExactPq,
}

/// Validated parameters of the Kirchhoff problem. Immutable after construction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProblemParams {
    dim: u32,
    a: f64,
    b: f64,
    q: f64,
    p: f64,
    lambda: f64,
}

impl ProblemParams {
    /// Validates and builds a parameter set. See [`validate_params`].
    pub fn new(dim: u32, a: f64, b: f64, q: f64, p: f64, lambda: f64) -> Result<Self, ParamError> {
        validate_params(dim as f64, a, b, q, p, lambda)
    }

    pub fn dim(&self) -> u32 {
        self.dim
    }
    pub fn a(&self) -> f64 {
        self.a
    }
    pub fn b(&self) -> f64 {
        self.b
    }
    pub fn q(&self) -> f64 {
        self.q
    }
    pub fn p(&self) -> f64 {
        self.p
    }
    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn critical_exponent(&self) -> f64 {
        critical_exponent(self.dim)
    }

    pub fn is_critical(&self) -> bool {
        (self.p - self.critical_exponent()).abs() < CRITICAL_TOL
    }

    pub fn is_pq_equal(&self) -> bool {
        (self.p - self.q).abs() < CRITICAL_TOL
    }

    pub fn case(&self) -> CaseTag {
        if self.is_pq_equal() {
            CaseTag::PqEqual
        } else if self.is_critical() {
            CaseTag::Critical
        } else {
            CaseTag::Subcritical
        }
    }

    /// Same problem at another frequency.
    pub fn with_lambda(&self, lambda: f64) -> Result<Self, ParamError> {
        check_positive("lambda", lambda)?;
        Ok(Self { lambda, ..*self })
    }
}

fn check_finite(name: &'static str, value: f64) -> Result<(), ParamError> {
    if value.is_finite() {
        Ok(())
    } else {
        Err(ParamError::NonFinite { name, value })
    }
}

fn check_positive(name: &'static str, value: f64) -> Result<(), ParamError> {
    check_finite(name, value)?;
    if value > 0.0 {
        Ok(())
    } else {
        Err(ParamError::NonPositive { name, value })
    }
}

/// Validates six raw reals `(N, a, b, q, p, lambda)`.
///
/// Every input yields exactly one of a valid [`ProblemParams`] or a named
/// violation. The N=4 critical case with `b > 0` additionally requires
/// `b S^2 < 1`, where `S` is the best Sobolev constant computed by quadrature
/// of the Talenti profile.
pub fn validate_params(
    dim: f64,
    a: f64,
    b: f64,
    q: f64,
    p: f64,
    lambda: f64,
) -> Result<ProblemParams, ParamError> {
    if !(dim == 3.0 || dim == 4.0) {
        return Err(ParamError::UnsupportedDimension(dim));
    }
    let dim = dim as u32;
    check_positive("a", a)?;
    check_finite("b", b)?;
    if b < 0.0 {
        return Err(ParamError::NegativeKirchhoff(b));
    }
    check_finite("q", q)?;
    check_finite("p", p)?;
    check_positive("lambda", lambda)?;

    let crit = critical_exponent(dim);
    let p = if (p - crit).abs() < CRITICAL_TOL {
        crit
    } else {
        p
    };
    let q = if (q - p).abs() < CRITICAL_TOL { p } else { q };
    if !(q > 2.0 && q <= p && p <= crit) {
        return Err(ParamError::ExponentOrder {
            q,
            p,
            critical: crit,
        });
    }
    if q == crit {
        return Err(ParamError::PureCritical { critical: crit });
    }
    if dim == 4 && p == crit && b > 0.0 {
        let s = quadrature::best_sobolev_constant(4);
        let product = b * s * s;
        if product >= 1.0 {
            return Err(ParamError::CriticalCoupling {
                b,
                sobolev: s,
                product,
            });
        }
    }
    Ok(ProblemParams {
        dim,
        a,
        b,
        q,
        p,
        lambda,
    })
}

/// Picks the better-conditioned local reduction: the subordinate power then
/// carries a coefficient no larger than one.
pub fn classify_regime(params: &ProblemParams) -> NormalizationTag {
    if params.is_pq_equal() {
        NormalizationTag::ExactPq
    } else if params.lambda() <= 1.0 {
        NormalizationTag::SmallLambda
    } else {
        NormalizationTag::LargeLambda
    }
}

/// Coefficient of the subordinate power in the reduced local equation.
///
/// Small-lambda reduction: `-w'' + w = w^{q-1} + eps w^{p-1}`, `eps = lambda^{(p-q)/(q-2)}`.
/// Large-lambda reduction: `-w'' + w = delta w^{q-1} + w^{p-1}`, `delta = lambda^{-(p-q)/(p-2)}`.
pub fn subordinate_coefficient(params: &ProblemParams, tag: NormalizationTag) -> f64 {
    let (q, p, l) = (params.q(), params.p(), params.lambda());
    match tag {
        NormalizationTag::SmallLambda => l.powf((p - q) / (q - 2.0)),
        NormalizationTag::LargeLambda => l.powf(-(p - q) / (p - 2.0)),
        NormalizationTag::ExactPq => 1.0,
    }
}

/// Describes `u(x) = lambda^alpha w(x / length)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalingDescriptor {
    pub amplitude_exponent: f64,
    pub length: f64,
    pub tag: NormalizationTag,
    /// `(2* - q)/(q - 2)`.
    pub sigma: f64,
}

impl ScalingDescriptor {
    /// Builds the descriptor with `length = sqrt(varpi / lambda)`.
    pub fn new(params: &ProblemParams, tag: NormalizationTag, varpi: f64) -> Self {
        let amplitude_exponent = match tag {
            NormalizationTag::SmallLambda => 1.0 / (params.q() - 2.0),
            NormalizationTag::LargeLambda | NormalizationTag::ExactPq => 1.0 / (params.p() - 2.0),
        };
        let sigma = (params.critical_exponent() - params.q()) / (params.q() - 2.0);
        Self {
            amplitude_exponent,
            length: (varpi / params.lambda()).sqrt(),
            tag,
            sigma,
        }
    }
}
