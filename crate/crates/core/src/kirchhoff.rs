//! Reduction of the Kirchhoff problem to a local scalar field equation and
//! assembly of ground states at the `u` level.

use std::collections::HashMap;
use std::sync::{Arc, RwLock};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::controls::Controls;
use crate::params::{
    classify_regime, subordinate_coefficient, CaseTag, NormalizationTag, ParamError, ProblemParams,
    ScalingDescriptor,
};
use crate::profile::LocalProfile;
use crate::quadrature::{
    self, identity_residuals, norm_bundle, relative_gap, IdentityResiduals, NormBundle,
    QuadratureError,
};
use crate::radial_ode::{solve_scalar_field, ScalarField, ShootError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum KirchhoffError {
    #[error(transparent)]
    Param(#[from] ParamError),
    #[error("local solve failed: {0}")]
    Shoot(#[from] ShootError),
    #[error(transparent)]
    Quadrature(#[from] QuadratureError),
    #[error("no positive solution of the varpi relation in N=4 (coupling {coupling} >= 1)")]
    VarpiNoSolution { coupling: f64 },
    #[error(
        "identity check failed (nehari {nehari:.3e}, pohozaev {pohozaev:.3e}, tolerance {tol:.1e})"
    )]
    IdentityViolation {
        nehari: f64,
        pohozaev: f64,
        tol: f64,
    },
    #[error("concentration regime at lambda={lambda}: {source}")]
    Concentration { lambda: f64, source: ShootError },
    #[error("{0}")]
    NotApplicable(String),
}

/// `varpi = a + coupling * varpi^{(N-2)/2}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VarpiEquation {
    pub dim: u32,
    pub a: f64,
    pub coupling: f64,
}

/// Unique positive root of the varpi relation.
pub fn solve_varpi(eq: &VarpiEquation) -> Result<f64, KirchhoffError> {
    let VarpiEquation { dim, a, coupling } = *eq;
    if coupling == 0.0 {
        return Ok(a);
    }
    match dim {
        3 => {
            let root = 0.5 * (coupling + (coupling * coupling + 4.0 * a).sqrt());
            Ok(root * root)
        }
        4 => {
            if coupling >= 1.0 {
                Err(KirchhoffError::VarpiNoSolution { coupling })
            } else {
                Ok(a / (1.0 - coupling))
            }
        }
        _ => Err(KirchhoffError::NotApplicable(format!(
            "varpi relation for N={dim}"
        ))),
    }
}

/// A positive solution `u(x) = lambda^alpha w(x / l)` of the Kirchhoff problem.
#[derive(Debug, Clone)]
pub struct GroundStateSolution {
    pub params: ProblemParams,
    /// The local profile `w`.
    pub profile: Arc<LocalProfile>,
    pub scaling: ScalingDescriptor,
    pub varpi: f64,
    /// Norms of `w` for the local equation it solves.
    pub local: NormBundle,
    /// Norms of `u`; `energy` is the action `m_lambda`.
    pub norms: NormBundle,
    pub peak: f64,
    /// Nehari and Pohozaev residuals of the Kirchhoff problem.
    pub residuals: IdentityResiduals,
}

impl GroundStateSolution {
    /// `u(|x|)`.
    pub fn evaluate(&self, r: f64) -> f64 {
        self.params.lambda().powf(self.scaling.amplitude_exponent)
            * self.profile.evaluate(r / self.scaling.length)
    }

    /// `u'(|x|)`.
    pub fn evaluate_derivative(&self, r: f64) -> f64 {
        let l = self.scaling.length;
        self.params.lambda().powf(self.scaling.amplitude_exponent)
            * self.profile.evaluate_derivative(r / l)
            / l
    }

    /// `varpi - a - b A_u`, relative to `varpi`.
    pub fn varpi_defect(&self) -> f64 {
        (self.varpi - self.params.a() - self.params.b() * self.norms.grad) / self.varpi
    }
}

/// `m = (a/2) A + (lambda/2) B + (b/4) A^2 - C/q - D/p`.
pub fn kirchhoff_energy(params: &ProblemParams, n: &NormBundle) -> f64 {
    let (a, b, l) = (params.a(), params.b(), params.lambda());
    0.5 * a * n.grad + 0.5 * l * n.mass + 0.25 * b * n.grad * n.grad
        - n.lq / params.q()
        - n.lp / params.p()
}

/// Nehari `aA + lambda B + b A^2 = C + D` and Pohozaev
/// `(N-2)/(2N) (aA + bA^2) + (lambda/2) B = C/q + D/p`.
pub fn kirchhoff_residuals(params: &ProblemParams, n: &NormBundle) -> IdentityResiduals {
    let (a, b, l) = (params.a(), params.b(), params.lambda());
    let d = params.dim() as f64;
    let k = a * n.grad + b * n.grad * n.grad;
    IdentityResiduals {
        nehari: relative_gap(k + l * n.mass, n.lq + n.lp),
        pohozaev: relative_gap(
            (d - 2.0) / (2.0 * d) * k + 0.5 * l * n.mass,
            n.lq / params.q() + n.lp / params.p(),
        ),
    }
}

/// Limit objects of the critical problem as `lambda -> infinity`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CriticalLimits {
    pub gamma: f64,
    pub energy: f64,
    pub grad: f64,
    pub critical_norm: f64,
}

pub fn critical_limits(dim: u32, a: f64, b: f64) -> Result<CriticalLimits, KirchhoffError> {
    let s = quadrature::best_sobolev_constant(dim);
    match dim {
        3 => {
            let root = (b * b * s.powi(3) + 4.0 * a).sqrt();
            let g = 0.5 * (b * s.powi(3) + s.powf(1.5) * root);
            Ok(CriticalLimits {
                gamma: 2.0 / (b * s.powf(1.5) + root),
                energy: a * g / 3.0 + b * g * g / 12.0,
                grad: g,
                critical_norm: (b * s * s + s.sqrt() * root).powi(3) / 8.0,
            })
        }
        4 => {
            let k = 1.0 - b * s * s;
            if k <= 0.0 {
                return Err(ParamError::CriticalCoupling {
                    b,
                    sobolev: s,
                    product: b * s * s,
                }
                .into());
            }
            Ok(CriticalLimits {
                gamma: (k / a).sqrt(),
                energy: a * a * s * s / (4.0 * k),
                grad: a * s * s / k,
                critical_norm: a * a * s * s / (k * k),
            })
        }
        _ => Err(KirchhoffError::NotApplicable(format!(
            "critical limits for N={dim}"
        ))),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
struct ProfileKey {
    dim: u32,
    q: u64,
    p: u64,
    mu_q: u64,
    mu_p: u64,
}

impl From<&ScalarField> for ProfileKey {
    fn from(e: &ScalarField) -> Self {
        Self {
            dim: e.dim,
            q: e.q.to_bits(),
            p: e.p.to_bits(),
            mu_q: e.mu_q.to_bits(),
            mu_p: e.mu_p.to_bits(),
        }
    }
}

/// Solver front end holding the numerical controls and a cache of local
/// profiles whose equation does not depend on `lambda`.
#[derive(Debug, Default)]
pub struct Solver {
    controls: Controls,
    cache: RwLock<HashMap<ProfileKey, Arc<LocalProfile>>>,
}

impl Solver {
    pub fn new(controls: Controls) -> Self {
        Self {
            controls,
            cache: RwLock::new(HashMap::new()),
        }
    }

    pub fn controls(&self) -> &Controls {
        &self.controls
    }

    /// Solves (or fetches) the profile of `eq`. Only lambda-independent
    /// equations (one power, or equal exponents) are cached.
    pub fn local_profile(&self, eq: &ScalarField) -> Result<Arc<LocalProfile>, ShootError> {
        let cacheable = eq.mu_q == 0.0 || eq.mu_p == 0.0 || eq.q == eq.p;
        if !cacheable {
            return solve_scalar_field(eq, &self.controls).map(Arc::new);
        }
        let key = ProfileKey::from(eq);
        if let Some(p) = self.cache.read().unwrap().get(&key) {
            return Ok(p.clone());
        }
        let prof = Arc::new(solve_scalar_field(eq, &self.controls)?);
        // deterministic solves make a racing insert harmless
        Ok(self
            .cache
            .write()
            .unwrap()
            .entry(key)
            .or_insert(prof)
            .clone())
    }

    /// Ground state of `-Lap W + W = W^{s-1}` in `R^dim`.
    pub fn single_power(&self, dim: u32, s: f64) -> Result<Arc<LocalProfile>, ShootError> {
        self.local_profile(&ScalarField::single(dim, s, 1.0))
    }

    /// `S_s = |W|_s^{s-2}` of the single-power ground state.
    pub fn sobolev_sq(&self, dim: u32, s: f64) -> Result<f64, KirchhoffError> {
        Ok(quadrature::sobolev_sq(&*self.single_power(dim, s)?, s)?)
    }

    pub fn best_sobolev(&self, dim: u32) -> f64 {
        quadrature::best_sobolev_constant(dim)
    }

    /// Local equation for the given reduction.
    pub fn local_equation(params: &ProblemParams, tag: NormalizationTag) -> ScalarField {
        let (d, q, p) = (params.dim(), params.q(), params.p());
        let c = subordinate_coefficient(params, tag);
        match tag {
            NormalizationTag::SmallLambda => ScalarField::new(d, q, p, 1.0, c),
            NormalizationTag::LargeLambda => ScalarField::new(d, q, p, c, 1.0),
            NormalizationTag::ExactPq => ScalarField::single(d, p, 2.0),
        }
    }

    /// Ground state with the reduction picked by [`classify_regime`].
    pub fn ground_state(
        &self,
        params: &ProblemParams,
    ) -> Result<GroundStateSolution, KirchhoffError> {
        self.ground_state_with_tag(params, classify_regime(params))
    }

    /// Ground state through a prescribed reduction. For `p = q` only the
    /// combined reduction is meaningful.
    pub fn ground_state_with_tag(
        &self,
        params: &ProblemParams,
        tag: NormalizationTag,
    ) -> Result<GroundStateSolution, KirchhoffError> {
        if params.is_pq_equal() != (tag == NormalizationTag::ExactPq) {
            return Err(KirchhoffError::NotApplicable(format!(
                "reduction {tag:?} does not match q={}, p={}",
                params.q(),
                params.p()
            )));
        }
        let eq = Self::local_equation(params, tag);
        let profile = match self.local_profile(&eq) {
            Ok(p) => p,
            Err(e)
                if params.case() == CaseTag::Critical && tag == NormalizationTag::LargeLambda =>
            {
                return Err(KirchhoffError::Concentration {
                    lambda: params.lambda(),
                    source: e,
                })
            }
            Err(e) => return Err(e.into()),
        };
        let local = norm_bundle(&profile, &eq)?;
        let local_res = identity_residuals(&local, &eq);
        let tol = self.controls.identity_tol;
        if local_res.max() > tol {
            return Err(KirchhoffError::IdentityViolation {
                nehari: local_res.nehari,
                pohozaev: local_res.pohozaev,
                tol,
            });
        }
        self.assemble(params, tag, profile, local)
    }

    fn assemble(
        &self,
        params: &ProblemParams,
        tag: NormalizationTag,
        profile: Arc<LocalProfile>,
        local: NormBundle,
    ) -> Result<GroundStateSolution, KirchhoffError> {
        let (d, l) = (params.dim() as f64, params.lambda());
        let alpha = ScalingDescriptor::new(params, tag, 1.0).amplitude_exponent;
        let half = (d - 2.0) / 2.0;
        let coupling = params.b() * l.powf(2.0 * alpha - half) * local.grad;
        let varpi = solve_varpi(&VarpiEquation {
            dim: params.dim(),
            a: params.a(),
            coupling,
        })?;
        let scaling = ScalingDescriptor::new(params, tag, varpi);
        let len = scaling.length;
        let amp = |power: f64| l.powf(power * alpha);
        let mut norms = NormBundle {
            grad: amp(2.0) * len.powf(d - 2.0) * local.grad,
            mass: amp(2.0) * len.powf(d) * local.mass,
            lq: amp(params.q()) * len.powf(d) * local.lq,
            lp: amp(params.p()) * len.powf(d) * local.lp,
            energy: 0.0,
        };
        norms.energy = kirchhoff_energy(params, &norms);
        let residuals = kirchhoff_residuals(params, &norms);
        let tol = self.controls.identity_tol;
        if residuals.max() > tol {
            return Err(KirchhoffError::IdentityViolation {
                nehari: residuals.nehari,
                pohozaev: residuals.pohozaev,
                tol,
            });
        }
        Ok(GroundStateSolution {
            params: *params,
            peak: amp(1.0) * profile.peak(),
            profile,
            scaling,
            varpi,
            local,
            norms,
            residuals,
        })
    }

    /// Closed-form solution for `p = q` in `N = 3`:
    /// `u(x) = (lambda/2)^{1/(p-2)} W0(sqrt(lambda/varpi) x)` with
    /// `sqrt(varpi) = kappa/2 + sqrt(kappa^2/4 + a)` and
    /// `kappa = b (3(p-2)/p) lambda^{(6-p)/(2(p-2))} (S_p/2)^{p/(p-2)}`.
    pub fn exact_pq_solution(
        &self,
        params: &ProblemParams,
    ) -> Result<GroundStateSolution, KirchhoffError> {
        if params.dim() != 3 || !params.is_pq_equal() {
            return Err(KirchhoffError::NotApplicable(
                "closed form needs N = 3 and p = q".to_string(),
            ));
        }
        let (a, b, p, l) = (params.a(), params.b(), params.p(), params.lambda());
        let w0 = self.single_power(3, p)?;
        let sp = quadrature::sobolev_sq(&w0, p)?;
        let h = (sp / 2.0).powf(p / (p - 2.0));
        let e = (6.0 - p) / (2.0 * (p - 2.0));
        let kappa = b * 3.0 * (p - 2.0) / p * l.powf(e) * h;
        let root = 0.5 * kappa + (0.25 * kappa * kappa + a).sqrt();
        let varpi = root * root;
        let lp = l.powf(e) * root.powi(3) * h;
        let mut norms = NormBundle {
            grad: l.powf(e) * 3.0 * (p - 2.0) / p * root * h,
            mass: l.powf((10.0 - 3.0 * p) / (2.0 * (p - 2.0))) * (6.0 - p) / p * root.powi(3) * h,
            lq: lp,
            lp,
            energy: 0.0,
        };
        norms.energy = kirchhoff_energy(params, &norms);
        let residuals = kirchhoff_residuals(params, &norms);
        // w = 2^{-1/(p-2)} W0 solves -Lap w + w = 2 w^{p-1}
        let c = 0.5f64.powf(1.0 / (p - 2.0));
        let profile = Arc::new(w0.scale_amplitude(c));
        let d_w = sp.powf(p / (p - 2.0)) * c.powf(p);
        let local = NormBundle {
            grad: 3.0 * (p - 2.0) / (2.0 * p) * 2.0 * d_w,
            mass: (6.0 - p) / (2.0 * p) * 2.0 * d_w,
            lq: d_w,
            lp: d_w,
            energy: (p - 2.0) / p * d_w,
        };
        Ok(GroundStateSolution {
            params: *params,
            peak: (l / 2.0).powf(1.0 / (p - 2.0)) * w0.peak(),
            profile,
            scaling: ScalingDescriptor::new(params, NormalizationTag::ExactPq, varpi),
            varpi,
            local,
            norms,
            residuals,
        })
    }
}
