//! Shooting solver for positive decaying radial solutions of
//! `-W'' - (d-1)/r W' + W = mu_q W^{q-1} + mu_p W^{p-1}`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::controls::Controls;
use crate::ode::{DormandPrince, State, StepError, Tolerances};
use crate::profile::{quintic, LocalProfile, Tail};

/// Right-hand side data of the local scalar field equation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalarField {
    pub dim: u32,
    pub q: f64,
    pub p: f64,
    pub mu_q: f64,
    pub mu_p: f64,
}

impl ScalarField {
    pub fn new(dim: u32, q: f64, p: f64, mu_q: f64, mu_p: f64) -> Self {
        Self {
            dim,
            q,
            p,
            mu_q,
            mu_p,
        }
    }

    /// Single power `W^{p-1}` with coefficient `mu`.
    pub fn single(dim: u32, p: f64, mu: f64) -> Self {
        Self {
            dim,
            q: p,
            p,
            mu_q: 0.0,
            mu_p: mu,
        }
    }

    /// `mu_q |w|^{q-2} w + mu_p |w|^{p-2} w`.
    pub fn nonlinearity(&self, w: f64) -> f64 {
        let a = w.abs();
        let mut f = 0.0;
        if self.mu_q != 0.0 {
            f += self.mu_q * a.powf(self.q - 2.0) * w;
        }
        if self.mu_p != 0.0 {
            f += self.mu_p * a.powf(self.p - 2.0) * w;
        }
        f
    }

    pub fn nonlinearity_prime(&self, w: f64) -> f64 {
        let a = w.abs();
        let mut f = 0.0;
        if self.mu_q != 0.0 {
            f += self.mu_q * (self.q - 1.0) * a.powf(self.q - 2.0);
        }
        if self.mu_p != 0.0 {
            f += self.mu_p * (self.p - 1.0) * a.powf(self.p - 2.0);
        }
        f
    }

    fn friction(&self) -> f64 {
        self.dim as f64 - 1.0
    }

    /// `W''` from the equation; at the origin the friction term is replaced by its limit.
    pub fn second_derivative(&self, r: f64, w: f64, dw: f64) -> f64 {
        let g = w - self.nonlinearity(w);
        if r == 0.0 {
            g / self.dim as f64
        } else {
            g - self.friction() / r * dw
        }
    }

    /// `W'''` obtained by differentiating the equation.
    pub fn third_derivative(&self, r: f64, w: f64, dw: f64, d2w: f64) -> f64 {
        if r == 0.0 {
            return 0.0;
        }
        let k = self.friction();
        k / (r * r) * dw - k / r * d2w + dw - self.nonlinearity_prime(w) * dw
    }

    /// Decaying linearized tail `r^{-(d-1)/2} e^{-r} S(r)`.
    pub fn tail_model(&self) -> Tail {
        Tail::Exponential {
            r_match: 0.0,
            amplitude: 0.0,
            decay: 1.0,
            power: self.friction() / 2.0,
            order: self.dim as f64 / 2.0 - 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ShotClass {
    /// The trajectory crossed zero: the initial value is too large.
    Overshoot,
    /// The trajectory turned back up while still positive: too small.
    Undershoot,
    /// The trajectory decayed into the tail regime.
    Converged,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShotOutcome {
    pub class: ShotClass,
    /// Radius at which the classification was decided.
    pub radius: f64,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ShootError {
    #[error("initial value must be positive and finite (got {0})")]
    BadInitialValue(f64),
    #[error("trajectory from s={s} still unclassified at r={radius}")]
    Inconclusive { s: f64, radius: f64 },
    #[error("integrator step underflow at r={radius} (s={s})")]
    StepUnderflow { s: f64, radius: f64 },
    #[error("integrator produced non-finite values at r={radius} (s={s})")]
    NonFinite { s: f64, radius: f64 },
    #[error("no bracket found after {expansions} expansions (last interval [{lo}, {hi}])")]
    NoBracket { expansions: u32, lo: f64, hi: f64 },
}

#[derive(Debug, Clone, Default)]
struct Trajectory {
    r: Vec<f64>,
    w: Vec<f64>,
    dw: Vec<f64>,
}

impl Trajectory {
    fn push(&mut self, r: f64, y: &State) {
        self.r.push(r);
        self.w.push(y[0]);
        self.dw.push(y[1]);
    }
}

fn integrate(
    eq: &ScalarField,
    s: f64,
    c: &Controls,
    mut record: Option<&mut Trajectory>,
) -> Result<ShotOutcome, ShootError> {
    if !(s.is_finite() && s > 0.0) {
        return Err(ShootError::BadInitialValue(s));
    }
    if let Some(t) = record.as_deref_mut() {
        t.push(0.0, &[s, 0.0]);
    }
    let curv = eq.second_derivative(0.0, s, 0.0);
    if curv >= 0.0 {
        // W'' (0) >= 0: the trajectory rises or stays put from the start
        return Ok(ShotOutcome {
            class: ShotClass::Undershoot,
            radius: 0.0,
        });
    }
    // length scale of the core; keeps the quadratic start accurate for tall bubbles
    let core = (s / curv.abs()).sqrt();
    let r0 = c.r_start * core.min(1.0);
    // next Taylor term: W'''' (0) = 3/(d+2) * (1 - f'(s)) W''(0)
    let d = eq.dim as f64;
    let c4 = 3.0 / (d + 2.0) * (1.0 - eq.nonlinearity_prime(s)) * curv;
    let y0 = [
        s + 0.5 * curv * r0 * r0 + c4 * r0.powi(4) / 24.0,
        curv * r0 + c4 * r0.powi(3) / 6.0,
    ];
    if let Some(t) = record.as_deref_mut() {
        t.push(r0, &y0);
    }
    let rhs = |r: f64, y: &State| [y[1], eq.second_derivative(r, y[0], y[1])];
    let tol = Tolerances {
        rtol: c.ode_rtol,
        atol: c.ode_atol,
        h_max: c.h_max,
    };
    let mut dp = DormandPrince::new(rhs, r0, y0, r0, tol);
    let tail = eq.tail_model();
    loop {
        dp.step().map_err(|e| match e {
            StepError::Underflow { t } => ShootError::StepUnderflow { s, radius: t },
            StepError::NonFinite { t } => ShootError::NonFinite { s, radius: t },
        })?;
        let (r, w, dw) = (dp.t, dp.y[0], dp.y[1]);
        if let Some(t) = record.as_deref_mut() {
            t.push(r, &dp.y);
        }
        if w < 0.0 {
            return Ok(ShotOutcome {
                class: ShotClass::Overshoot,
                radius: r,
            });
        }
        if dw > 0.0 {
            let class = if w > c.tail_threshold {
                ShotClass::Undershoot
            } else {
                ShotClass::Converged
            };
            return Ok(ShotOutcome { class, radius: r });
        }
        if w <= c.tail_threshold && (dw / w - tail.log_derivative(r)).abs() <= c.tail_tol {
            return Ok(ShotOutcome {
                class: ShotClass::Converged,
                radius: r,
            });
        }
        if r >= c.r_max {
            return Err(ShootError::Inconclusive { s, radius: r });
        }
    }
}

/// Classifies the trajectory started at `W(0) = s`, `W'(0) = 0`.
pub fn shoot(eq: &ScalarField, s: f64, controls: &Controls) -> Result<ShotOutcome, ShootError> {
    integrate(eq, s, controls, None)
}

/// Bracket `[lo, hi]` with an undershoot at `lo` and an overshoot at `hi`,
/// or a value that already converged.
enum Bracket {
    Interval(f64, f64),
    Exact(f64),
}

/// Class of a bracketing shot. A trajectory still positive and unsettled at
/// `r_max` (e.g. one parked near the constant state `f(W) = W`) cannot be the
/// decaying solution and counts as an undershoot here; bisection stays strict.
fn bracket_shot(eq: &ScalarField, s: f64, c: &Controls) -> Result<ShotClass, ShootError> {
    match shoot(eq, s, c) {
        Ok(o) => Ok(o.class),
        Err(ShootError::Inconclusive { .. }) => Ok(ShotClass::Undershoot),
        Err(e) => Err(e),
    }
}

fn find_bracket(eq: &ScalarField, c: &Controls) -> Result<Bracket, ShootError> {
    let (mut lo, mut hi) = (1.0, 2.0);
    let mut expansions = 0;
    loop {
        match bracket_shot(eq, lo, c)? {
            ShotClass::Undershoot => break,
            ShotClass::Converged => return Ok(Bracket::Exact(lo)),
            ShotClass::Overshoot => {
                hi = lo;
                lo *= 0.5;
            }
        }
        expansions += 1;
        if expansions > c.max_expand {
            return Err(ShootError::NoBracket { expansions, lo, hi });
        }
    }
    loop {
        match bracket_shot(eq, hi, c)? {
            ShotClass::Overshoot => return Ok(Bracket::Interval(lo, hi)),
            ShotClass::Converged => return Ok(Bracket::Exact(hi)),
            ShotClass::Undershoot => {
                lo = hi;
                hi *= 2.0;
            }
        }
        expansions += 1;
        if expansions > c.max_expand {
            return Err(ShootError::NoBracket { expansions, lo, hi });
        }
    }
}

/// Bisects the shooting parameter until the bracket cannot shrink further.
/// Returns the final undershoot/overshoot pair (equal if a shot converged).
pub fn bisect_shooting(eq: &ScalarField, c: &Controls) -> Result<(f64, f64), ShootError> {
    let (mut lo, mut hi) = match find_bracket(eq, c)? {
        Bracket::Exact(s) => return Ok((s, s)),
        Bracket::Interval(lo, hi) => (lo, hi),
    };
    while hi - lo > c.shoot_tol * hi {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        match shoot(eq, mid, c)?.class {
            ShotClass::Undershoot => lo = mid,
            ShotClass::Overshoot => hi = mid,
            ShotClass::Converged => return Ok((mid, mid)),
        }
    }
    Ok((lo, hi))
}

/// `W` of a recorded trajectory at `r`, by quintic Hermite interpolation.
fn interpolate(eq: &ScalarField, t: &Trajectory, r: f64) -> Option<f64> {
    if r > *t.r.last()? {
        return None;
    }
    let i =
        t.r.partition_point(|&x| x <= r)
            .saturating_sub(1)
            .min(t.r.len() - 2);
    let (r0, r1) = (t.r[i], t.r[i + 1]);
    let h = r1 - r0;
    let s0 = eq.second_derivative(r0, t.w[i], t.dw[i]);
    let s1 = eq.second_derivative(r1, t.w[i + 1], t.dw[i + 1]);
    Some(quintic(
        h,
        (r - r0) / h,
        t.w[i],
        t.dw[i],
        s0,
        t.w[i + 1],
        t.dw[i + 1],
        s1,
    ))
}

/// Number of leading nodes of `lo` that are trusted: the trajectory is still
/// decreasing, agrees with the overshoot trajectory and has not yet reached a
/// level where the tail model is accurate.
fn trusted_length(
    eq: &ScalarField,
    lo: &Trajectory,
    hi: Option<&Trajectory>,
    c: &Controls,
) -> usize {
    let tail = eq.tail_model();
    let n = lo.r.len();
    let mut last = 1;
    for i in 2..n {
        let (r, w, dw) = (lo.r[i], lo.w[i], lo.dw[i]);
        if w <= 0.0 || dw >= 0.0 {
            break;
        }
        if let Some(hi) = hi {
            match interpolate(eq, hi, r) {
                Some(wh) if (wh - w).abs() <= c.gap_tol * w => {}
                _ => break,
            }
        }
        last = i;
        if w <= c.attach_level && (dw / w - tail.log_derivative(r)).abs() <= c.tail_tol {
            break;
        }
    }
    last + 1
}

fn build_profile(eq: &ScalarField, traj: &Trajectory, len: usize, s: f64) -> LocalProfile {
    let radii = traj.r[..len].to_vec();
    let values = traj.w[..len].to_vec();
    let first = traj.dw[..len].to_vec();
    let second: Vec<f64> = (0..len)
        .map(|i| eq.second_derivative(radii[i], values[i], first[i]))
        .collect();
    let third = (0..len)
        .map(|i| eq.third_derivative(radii[i], values[i], first[i], second[i]))
        .collect();
    let tail = eq.tail_model().matched(radii[len - 1], values[len - 1]);
    LocalProfile::from_nodes(eq.dim, radii, values, first, second, third, tail, s)
}

/// Finds the positive decaying radial solution by shooting on `W(0)`.
///
/// The final profile is the undershoot trajectory of the converged bracket,
/// trusted up to the radius where it separates from the overshoot trajectory or
/// reaches the tail level, whichever comes first; the analytic tail takes over
/// from there.
pub fn solve_scalar_field(
    eq: &ScalarField,
    controls: &Controls,
) -> Result<LocalProfile, ShootError> {
    let (lo, hi) = bisect_shooting(eq, controls)?;
    let mut t_lo = Trajectory::default();
    integrate(eq, lo, controls, Some(&mut t_lo))?;
    let len = if lo == hi {
        trusted_length(eq, &t_lo, None, controls)
    } else {
        let mut t_hi = Trajectory::default();
        integrate(eq, hi, controls, Some(&mut t_hi))?;
        trusted_length(eq, &t_lo, Some(&t_hi), controls)
    };
    Ok(build_profile(eq, &t_lo, len, lo))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn one_dim_quartic() -> ScalarField {
        ScalarField::single(1, 4.0, 1.0)
    }

    #[test]
    fn classification_examples() {
        let c = Controls::default();
        let eq = one_dim_quartic();
        assert_eq!(shoot(&eq, 2.0, &c).unwrap().class, ShotClass::Overshoot);
        assert_eq!(shoot(&eq, 1.0, &c).unwrap().class, ShotClass::Undershoot);
        let eq3 = ScalarField::single(3, 4.0, 1.0);
        assert_eq!(shoot(&eq3, 1.0, &c).unwrap().class, ShotClass::Undershoot);
        assert_eq!(shoot(&eq3, 10.0, &c).unwrap().class, ShotClass::Overshoot);
        assert!(matches!(
            shoot(&eq, -1.0, &c),
            Err(ShootError::BadInitialValue(_))
        ));
    }

    #[test]
    fn one_dimensional_quartic_matches_sech() {
        let c = Controls::default();
        let prof = solve_scalar_field(&one_dim_quartic(), &c).unwrap();
        prof.check().unwrap();
        let exact = |r: f64| 2f64.sqrt() / r.cosh();
        assert!(
            (prof.peak() - 2f64.sqrt()).abs() < 1e-10,
            "{}",
            prof.peak() - 2f64.sqrt()
        );
        let mut worst: f64 = 0.0;
        for k in 0..4000 {
            let r = k as f64 * 0.01;
            worst = worst.max((prof.evaluate(r) - exact(r)).abs());
        }
        assert!(worst < 1e-8, "sup error {worst}");
    }

    #[test]
    fn one_dimensional_family_peaks() {
        // -W'' + W = W^{p-1}: W = (p/2)^{1/(p-2)} sech^{2/(p-2)}((p-2) r / 2)
        let c = Controls::default();
        for &p in &[3.0, 4.0, 6.0] {
            let prof = solve_scalar_field(&ScalarField::single(1, p, 1.0), &c).unwrap();
            let k = 2.0 / (p - 2.0);
            let exact = |r: f64| {
                (p / 2.0).powf(1.0 / (p - 2.0)) * (1.0 / ((p - 2.0) * r / 2.0).cosh()).powf(k)
            };
            for k in 0..300 {
                let r = k as f64 * 0.1;
                assert!((prof.evaluate(r) - exact(r)).abs() < 1e-8, "p={p} r={r}");
            }
        }
    }

    #[test]
    fn three_dimensional_profile_is_valid() {
        let c = Controls::default();
        let prof = solve_scalar_field(&ScalarField::single(3, 4.0, 1.0), &c).unwrap();
        prof.check().unwrap();
        // classical value of the cubic ground state peak in three dimensions
        assert!((prof.peak() - 4.337_387).abs() < 1e-5, "{}", prof.peak());
    }

    #[test]
    fn nearly_pure_power_with_equilibrium_start() {
        // f(1) = 1 up to 5e-16: the first bracketing shot sits on the constant state
        let c = Controls::default();
        let eq = ScalarField::new(3, 3.5, 4.5, 1.0, 4.6e-16);
        let prof = solve_scalar_field(&eq, &c).unwrap();
        let pure = solve_scalar_field(&ScalarField::single(3, 3.5, 1.0), &c).unwrap();
        assert!((prof.peak() / pure.peak() - 1.0).abs() < 1e-9);
    }
}
