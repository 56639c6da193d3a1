//! Radial ground states of the Kirchhoff problem
//! `-(a + b |grad u|_2^2) Lap u + lambda u = |u|^{q-2} u + |u|^{p-2} u` in `R^N`, `N = 3, 4`.

pub mod asymptotics;
pub mod controls;
pub mod curve;
pub mod kirchhoff;
pub mod ode;
pub mod params;
pub mod profile;
pub mod quadrature;
pub mod radial_ode;

pub use asymptotics::{
    fit_power_law, mass_limits, normalized_laws, predict, richardson_limit, thresholds,
    AsymptoticLaw, LimitClass, MassLimits, PowerFit, Quantity, Regime, Slope,
};
pub use controls::Controls;
pub use kirchhoff::{
    critical_limits, kirchhoff_energy, solve_varpi, CriticalLimits, GroundStateSolution,
    KirchhoffError, Solver, VarpiEquation,
};
pub use params::{
    classify_regime, validate_params, CaseTag, NormalizationTag, ParamError, ProblemParams,
    ScalingDescriptor,
};
pub use profile::{LocalProfile, Tail};
pub use quadrature::{IdentityResiduals, IntegralValue, NormBundle};
pub use radial_ode::{ScalarField, ShootError, ShotClass};
