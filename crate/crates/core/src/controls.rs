//! Numerical tunables shared by the solver, quadrature and curve tracing.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Controls {
    /// Relative tolerance of the adaptive integrator.
    pub ode_rtol: f64,
    /// Absolute tolerance of the adaptive integrator.
    pub ode_atol: f64,
    /// Bisection stops once the bracket is this narrow (relative) or cannot shrink.
    pub shoot_tol: f64,
    /// Below this value a monotone trajectory counts as having reached its tail.
    pub tail_threshold: f64,
    /// Allowed mismatch between the trajectory's and the tail's log-derivative.
    pub tail_tol: f64,
    /// Trajectories still unclassified past this radius are inconclusive.
    pub r_max: f64,
    /// Maximum number of bracket expansions.
    pub max_expand: u32,
    /// Nominal radius at which the series start hands over to the integrator.
    pub r_start: f64,
    /// Largest step of the integrator.
    pub h_max: f64,
    /// Tail is attached once the profile falls below this level.
    pub attach_level: f64,
    /// Relative spread of the final bracket trajectories that ends the trusted core.
    pub gap_tol: f64,
    /// Tolerance for the Nehari and Pohozaev residual checks.
    pub identity_tol: f64,
    /// Frequency-grid resolution used when tracing mass curves.
    pub curve_points: usize,
    /// Relative tolerance of root finding in `log lambda`.
    pub root_tol: f64,
    /// Normalized results whose mass is within this factor of a threshold are flagged.
    pub guard_band: f64,
}

impl Default for Controls {
    fn default() -> Self {
        Self {
            ode_rtol: 1e-10,
            ode_atol: 1e-12,
            shoot_tol: 1e-15,
            tail_threshold: 1e-8,
            tail_tol: 1e-3,
            r_max: 60.0,
            max_expand: 60,
            r_start: 1e-4,
            h_max: 0.25,
            attach_level: 1e-7,
            gap_tol: 1e-8,
            identity_tol: 1e-6,
            curve_points: 41,
            root_tol: 1e-11,
            guard_band: 2.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ControlsError {
    #[error("line {line}: expected key=value")]
    Syntax { line: usize },
    #[error("line {line}: unknown key `{key}`")]
    UnknownKey { line: usize, key: String },
    #[error("line {line}: bad value `{value}` for `{key}`")]
    BadValue {
        line: usize,
        key: String,
        value: String,
    },
}

impl Controls {
    /// Parses a flat `key = value` file. Blank lines and `#` comments are ignored;
    /// keys not present keep their defaults.
    pub fn from_kv_str(text: &str) -> Result<Self, ControlsError> {
        let mut c = Controls::default();
        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or(ControlsError::Syntax { line: line_no })?;
            let key = key.trim();
            let value = value.trim();
            let bad = || ControlsError::BadValue {
                line: line_no,
                key: key.to_string(),
                value: value.to_string(),
            };
            let real = || -> Result<f64, ControlsError> {
                let v: f64 = value.parse().map_err(|_| bad())?;
                if v.is_finite() && v > 0.0 {
                    Ok(v)
                } else {
                    Err(bad())
                }
            };
            match key {
                "ode_rtol" => c.ode_rtol = real()?,
                "ode_atol" => c.ode_atol = real()?,
                "shoot_tol" => c.shoot_tol = real()?,
                "tail_threshold" => c.tail_threshold = real()?,
                "tail_tol" => c.tail_tol = real()?,
                "r_max" => c.r_max = real()?,
                "max_expand" => c.max_expand = value.parse().map_err(|_| bad())?,
                "r_start" => c.r_start = real()?,
                "h_max" => c.h_max = real()?,
                "attach_level" => c.attach_level = real()?,
                "gap_tol" => c.gap_tol = real()?,
                "identity_tol" => c.identity_tol = real()?,
                "curve_points" => {
                    c.curve_points = value.parse().map_err(|_| bad())?;
                    if c.curve_points < 2 {
                        return Err(bad());
                    }
                }
                "root_tol" => c.root_tol = real()?,
                "guard_band" => {
                    c.guard_band = real()?;
                    if c.guard_band < 1.0 {
                        return Err(bad());
                    }
                }
                _ => {
                    return Err(ControlsError::UnknownKey {
                        line: line_no,
                        key: key.to_string(),
                    })
                }
            }
        }
        Ok(c)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_overrides_and_comments() {
        let c =
            Controls::from_kv_str("# tighter\node_rtol = 1e-11\n\ncurve_points=9 # few\n").unwrap();
        assert_eq!(c.ode_rtol, 1e-11);
        assert_eq!(c.curve_points, 9);
        assert_eq!(c.ode_atol, Controls::default().ode_atol);
    }

    #[test]
    fn rejects_garbage() {
        assert_eq!(
            Controls::from_kv_str("nonsense"),
            Err(ControlsError::Syntax { line: 1 })
        );
        assert!(matches!(
            Controls::from_kv_str("foo = 1"),
            Err(ControlsError::UnknownKey { .. })
        ));
        assert!(matches!(
            Controls::from_kv_str("ode_rtol = -1"),
            Err(ControlsError::BadValue { .. })
        ));
    }
}
