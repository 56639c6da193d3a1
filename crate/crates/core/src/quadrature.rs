//! Radial integrals of profiles, local identities and Sobolev-type constants.

use std::sync::OnceLock;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::profile::{quintic, LocalProfile, Tail};
use crate::radial_ode::ScalarField;

/// Result of an integral over `[0, inf)` that may fail to converge.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum IntegralValue {
    Finite(f64),
    Divergent,
}

impl IntegralValue {
    pub fn finite(self) -> Option<f64> {
        match self {
            IntegralValue::Finite(v) => Some(v),
            IntegralValue::Divergent => None,
        }
    }

    fn add(self, other: IntegralValue) -> IntegralValue {
        match (self, other) {
            (IntegralValue::Finite(a), IntegralValue::Finite(b)) => IntegralValue::Finite(a + b),
            _ => IntegralValue::Divergent,
        }
    }

    fn scale(self, c: f64) -> IntegralValue {
        match self {
            IntegralValue::Finite(a) => IntegralValue::Finite(a * c),
            IntegralValue::Divergent => IntegralValue::Divergent,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum QuadratureError {
    #[error("{0} integral diverges")]
    Divergent(&'static str),
    #[error("S_q formulas disagree: norm form {direct}, quotient form {quotient}")]
    SobolevMismatch { direct: f64, quotient: f64 },
}

/// Surface measure of the unit sphere in `R^d` (for `d = 1` the two-point "sphere").
pub fn sphere_measure(dim: u32) -> f64 {
    use std::f64::consts::PI;
    match dim {
        1 => 2.0,
        2 => 2.0 * PI,
        3 => 4.0 * PI,
        4 => 2.0 * PI * PI,
        d => {
            let h = d as f64 / 2.0;
            2.0 * PI.powf(h) / statrs::function::gamma::gamma(h)
        }
    }
}

/// Nodes and weights of the 8-point Gauss-Legendre rule on `[-1, 1]`.
fn gauss_legendre() -> &'static [(f64, f64); 8] {
    static RULE: OnceLock<[(f64, f64); 8]> = OnceLock::new();
    RULE.get_or_init(|| {
        let n = 8;
        let mut rule = [(0.0, 0.0); 8];
        for (i, slot) in rule.iter_mut().enumerate() {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (mut p0, mut p1) = (1.0, x);
                for k in 2..=n {
                    let kf = k as f64;
                    let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                    p0 = p1;
                    p1 = p2;
                }
                dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
                let dx = p1 / dp;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            *slot = (x, 2.0 / ((1.0 - x * x) * dp * dp));
        }
        rule
    })
}

/// `int_a^b f` by 8-point Gauss-Legendre.
fn gl(a: f64, b: f64, f: impl Fn(f64) -> f64) -> f64 {
    let (m, h) = (0.5 * (a + b), 0.5 * (b - a));
    gauss_legendre()
        .iter()
        .map(|&(x, w)| w * f(m + h * x))
        .sum::<f64>()
        * h
}

/// Interior part: `int_0^{r_K} g(W, W') r^{d-1} dr` on the quintic interpolants.
fn interior(profile: &LocalProfile, integrand: impl Fn(f64, f64) -> f64) -> f64 {
    let r = profile.radii();
    let (w, w1, w2, w3) = (
        profile.values(),
        profile.derivatives(),
        profile.second_derivatives(),
        profile.third_derivatives(),
    );
    let k = profile.dim() as i32 - 1;
    let mut total = 0.0;
    for i in 0..r.len() - 1 {
        let (r0, r1) = (r[i], r[i + 1]);
        let h = r1 - r0;
        total += gl(r0, r1, |x| {
            let t = (x - r0) / h;
            let v = quintic(h, t, w[i], w1[i], w2[i], w[i + 1], w1[i + 1], w2[i + 1]);
            let dv = quintic(h, t, w1[i], w2[i], w3[i], w1[i + 1], w2[i + 1], w3[i + 1]);
            integrand(v, dv) * x.powi(k)
        });
    }
    total
}

/// Tail part of `int |W|^s r^{d-1}` (`grad = false`) or `int |W'|^2 r^{d-1}` (`grad = true`).
fn tail_integral(tail: &Tail, dim: u32, s: f64, grad: bool) -> IntegralValue {
    let d = dim as f64;
    let rk = tail.r_match();
    match *tail {
        Tail::Algebraic {
            amplitude,
            exponent,
            ..
        } => {
            if amplitude == 0.0 {
                return IntegralValue::Finite(0.0);
            }
            let (coef, e) = if grad {
                ((exponent * amplitude).powi(2), d - 2.0 * exponent - 2.0)
            } else {
                (amplitude.abs().powf(s), d - exponent * s)
            };
            if e >= 0.0 {
                IntegralValue::Divergent
            } else {
                IntegralValue::Finite(coef * rk.powf(e) / (-e))
            }
        }
        Tail::Exponential {
            amplitude, decay, ..
        } => {
            if amplitude == 0.0 {
                return IntegralValue::Finite(0.0);
            }
            let rate = if grad { 2.0 * decay } else { s * decay };
            let width = 1.0 / rate;
            let k = dim as i32 - 1;
            let mut total = 0.0;
            for j in 0..60 {
                let a = rk + j as f64 * width;
                total += gl(a, a + width, |x| {
                    let v = if grad {
                        tail.derivative(x).powi(2)
                    } else {
                        tail.value(x).abs().powf(s)
                    };
                    v * x.powi(k)
                });
            }
            IntegralValue::Finite(total)
        }
    }
}

/// `omega_d int_0^inf |W|^s r^{d-1} dr`.
pub fn lp_power_integral(profile: &LocalProfile, s: f64) -> IntegralValue {
    let inner = interior(profile, |v, _| v.abs().powf(s));
    IntegralValue::Finite(inner)
        .add(tail_integral(profile.tail(), profile.dim(), s, false))
        .scale(sphere_measure(profile.dim()))
}

/// `omega_d int_0^inf |W'|^2 r^{d-1} dr`.
pub fn grad_integral(profile: &LocalProfile) -> IntegralValue {
    let inner = interior(profile, |_, dv| dv * dv);
    IntegralValue::Finite(inner)
        .add(tail_integral(profile.tail(), profile.dim(), 2.0, true))
        .scale(sphere_measure(profile.dim()))
}

/// `A = |grad W|_2^2`, `B = |W|_2^2`, `C = |W|_q^q`, `D = |W|_p^p` and the energy of the
/// functional the profile is a critical point of.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormBundle {
    pub grad: f64,
    pub mass: f64,
    pub lq: f64,
    pub lp: f64,
    pub energy: f64,
}

/// Norms of a profile solving the local equation `eq`; the energy is
/// `A/2 + B/2 - mu_q C/q - mu_p D/p`.
pub fn norm_bundle(
    profile: &LocalProfile,
    eq: &ScalarField,
) -> Result<NormBundle, QuadratureError> {
    let get = |v: IntegralValue, name| v.finite().ok_or(QuadratureError::Divergent(name));
    let grad = get(grad_integral(profile), "gradient")?;
    let mass = get(lp_power_integral(profile, 2.0), "L2")?;
    let lq = get(lp_power_integral(profile, eq.q), "Lq")?;
    let lp = if eq.p == eq.q {
        lq
    } else {
        get(lp_power_integral(profile, eq.p), "Lp")?
    };
    let energy = 0.5 * grad + 0.5 * mass - eq.mu_q * lq / eq.q - eq.mu_p * lp / eq.p;
    Ok(NormBundle {
        grad,
        mass,
        lq,
        lp,
        energy,
    })
}

/// Relative residuals `|L - R| / (|L| + |R|)` of the Nehari and Pohozaev identities.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IdentityResiduals {
    pub nehari: f64,
    pub pohozaev: f64,
}

impl IdentityResiduals {
    pub fn max(&self) -> f64 {
        self.nehari.max(self.pohozaev)
    }
}

pub(crate) fn relative_gap(lhs: f64, rhs: f64) -> f64 {
    let den = lhs.abs() + rhs.abs();
    if den == 0.0 {
        0.0
    } else {
        (lhs - rhs).abs() / den
    }
}

/// Nehari `A + B = mu_q C + mu_p D` and Pohozaev
/// `(d-2)/(2d) A + B/2 = mu_q C/q + mu_p D/p` for the local equation.
pub fn identity_residuals(n: &NormBundle, eq: &ScalarField) -> IdentityResiduals {
    let d = eq.dim as f64;
    IdentityResiduals {
        nehari: relative_gap(n.grad + n.mass, eq.mu_q * n.lq + eq.mu_p * n.lp),
        pohozaev: relative_gap(
            (d - 2.0) / (2.0 * d) * n.grad + 0.5 * n.mass,
            eq.mu_q * n.lq / eq.q + eq.mu_p * n.lp / eq.p,
        ),
    }
}

/// `S_s = |W|_s^{s-2}` for the ground state of `-W'' - (d-1)/r W' + W = W^{s-1}`,
/// cross-checked against the variational quotient `(A + B) / C^{2/s}`.
pub fn sobolev_sq(profile: &LocalProfile, s: f64) -> Result<f64, QuadratureError> {
    let eq = ScalarField::single(profile.dim(), s, 1.0);
    let n = norm_bundle(profile, &eq)?;
    let direct = n.lp.powf((s - 2.0) / s);
    let quotient = (n.grad + n.mass) / n.lp.powf(2.0 / s);
    if relative_gap(direct, quotient) > 5e-7 {
        return Err(QuadratureError::SobolevMismatch { direct, quotient });
    }
    Ok(direct)
}

/// Talenti bubble `[d(d-2)]^{(d-2)/4} (1 + r^2)^{-(d-2)/2}`, solving `-Lap W = W^{2*-1}`,
/// with its exact algebraic tail attached at `r = 1e4`.
pub fn talenti_profile(dim: u32) -> LocalProfile {
    let d = dim as f64;
    let c = (d * (d - 2.0)).powf((d - 2.0) / 4.0);
    let k = (d - 2.0) / 2.0;
    let mut radii: Vec<f64> = Vec::new();
    let mut r = 0.0;
    while r < 2.0 {
        radii.push(r);
        r += 0.01;
    }
    let mut r = 2.0;
    while r < 1e4 {
        radii.push(r);
        r *= 1.01;
    }
    radii.push(1e4);
    let mut w = Vec::with_capacity(radii.len());
    let mut w1 = Vec::with_capacity(radii.len());
    let mut w2 = Vec::with_capacity(radii.len());
    let mut w3 = Vec::with_capacity(radii.len());
    for &r in &radii {
        let u = 1.0 + r * r;
        w.push(c * u.powf(-k));
        w1.push(-2.0 * k * c * r * u.powf(-k - 1.0));
        w2.push(-2.0 * k * c * (u.powf(-k - 1.0) - 2.0 * (k + 1.0) * r * r * u.powf(-k - 2.0)));
        w3.push(
            -2.0 * k
                * c
                * (-6.0 * (k + 1.0) * r * u.powf(-k - 2.0)
                    + 4.0 * (k + 1.0) * (k + 2.0) * r.powi(3) * u.powf(-k - 3.0)),
        );
    }
    let last = *w.last().unwrap();
    let tail = Tail::Algebraic {
        r_match: 0.0,
        amplitude: 0.0,
        exponent: d - 2.0,
    }
    .matched(1e4, last);
    LocalProfile::from_nodes(dim, radii, w, w1, w2, w3, tail, c)
}

/// Best constant of `S |u|_{2*}^2 <= |grad u|_2^2`, computed by quadrature of the Talenti bubble.
pub fn best_sobolev_constant(dim: u32) -> f64 {
    static S3: OnceLock<f64> = OnceLock::new();
    static S4: OnceLock<f64> = OnceLock::new();
    let compute = || {
        let prof = talenti_profile(dim);
        let crit = 2.0 * dim as f64 / (dim as f64 - 2.0);
        let a = grad_integral(&prof)
            .finite()
            .expect("bubble gradient is finite");
        let c = lp_power_integral(&prof, crit)
            .finite()
            .expect("bubble critical norm is finite");
        a / c.powf(2.0 / crit)
    };
    match dim {
        3 => *S3.get_or_init(compute),
        4 => *S4.get_or_init(compute),
        _ => compute(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::controls::Controls;
    use crate::profile::Tail;
    use crate::radial_ode::solve_scalar_field;

    fn closed_form_sobolev(dim: u32) -> f64 {
        use statrs::function::gamma::gamma;
        let n = dim as f64;
        std::f64::consts::PI * n * (n - 2.0) * (gamma(n / 2.0) / gamma(n)).powf(2.0 / n)
    }

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        assert!((gl(0.0, 2.0, |x| x.powi(15)) - 2f64.powi(16) / 16.0).abs() < 1e-10);
        assert!((gl(0.0, 1.0, |x| x.exp()) - (1f64.exp() - 1.0)).abs() < 1e-14);
    }

    #[test]
    fn sech_norms() {
        let prof =
            solve_scalar_field(&ScalarField::single(1, 4.0, 1.0), &Controls::default()).unwrap();
        let n = norm_bundle(&prof, &ScalarField::single(1, 4.0, 1.0)).unwrap();
        assert!((n.energy - 4.0 / 3.0).abs() < 1e-8);
        assert!((n.mass - 4.0).abs() < 1e-8, "{}", n.mass);
        assert!((n.lp - 16.0 / 3.0).abs() < 1e-8, "{}", n.lp);
        assert!((n.grad - 4.0 / 3.0).abs() < 1e-8, "{}", n.grad);
    }

    #[test]
    fn talenti_quadrature_matches_closed_form() {
        for dim in [3, 4] {
            let s = best_sobolev_constant(dim);
            let exact = closed_form_sobolev(dim);
            assert!((s / exact - 1.0).abs() < 1e-8, "dim {dim}: {s} vs {exact}");
        }
        assert!((best_sobolev_constant(4) - 8.0 * std::f64::consts::PI / 6f64.sqrt()).abs() < 1e-7);
    }

    #[test]
    fn bubble_mass_diverges() {
        for dim in [3, 4] {
            assert_eq!(
                lp_power_integral(&talenti_profile(dim), 2.0),
                IntegralValue::Divergent
            );
        }
    }

    #[test]
    fn zero_profile_integrates_to_zero() {
        let radii = vec![0.0, 1.0, 2.0];
        let z = vec![0.0; 3];
        let tail = Tail::Exponential {
            r_match: 2.0,
            amplitude: 0.0,
            decay: 1.0,
            power: 1.0,
            order: 0.5,
        };
        let prof =
            LocalProfile::from_nodes(3, radii, z.clone(), z.clone(), z.clone(), z, tail, 0.0);
        assert_eq!(grad_integral(&prof), IntegralValue::Finite(0.0));
        assert_eq!(lp_power_integral(&prof, 3.0), IntegralValue::Finite(0.0));
    }

    #[test]
    fn dilation_scaling_of_integrals() {
        let prof =
            solve_scalar_field(&ScalarField::single(3, 4.0, 1.0), &Controls::default()).unwrap();
        let eq = ScalarField::new(3, 3.0, 4.0, 1.0, 1.0);
        let base = norm_bundle(&prof, &eq).unwrap();
        for t in [0.5, 2.0, 3.7] {
            let n = norm_bundle(&prof.dilate(t), &eq).unwrap();
            assert!((n.grad / (t * base.grad) - 1.0).abs() < 1e-12);
            assert!((n.mass / (t.powi(3) * base.mass) - 1.0).abs() < 1e-12);
            assert!((n.lq / (t.powi(3) * base.lq) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn cubic_ground_state_identities() {
        let eq = ScalarField::single(3, 4.0, 1.0);
        let prof = solve_scalar_field(&eq, &Controls::default()).unwrap();
        let n = norm_bundle(&prof, &eq).unwrap();
        let r = identity_residuals(&n, &eq);
        assert!(r.max() < 1e-8, "{r:?}");
        // Nehari closure A + B = C
        assert!((n.grad + n.mass - n.lp).abs() < 1e-6 * n.lp);
    }

    #[test]
    fn perturbed_profile_fails_identities() {
        let eq = ScalarField::single(3, 4.0, 1.0);
        let prof = solve_scalar_field(&eq, &Controls::default()).unwrap();
        let n = norm_bundle(&prof.scale_amplitude(1.05), &eq).unwrap();
        assert!(identity_residuals(&n, &eq).max() > 1e-3);
    }

    #[test]
    fn sobolev_constant_of_cubic_ground_state() {
        let c = Controls::default();
        let eq = ScalarField::single(3, 4.0, 1.0);
        let s4 = sobolev_sq(&solve_scalar_field(&eq, &c).unwrap(), 4.0).unwrap();
        let fine = Controls {
            ode_rtol: 1e-12,
            ode_atol: 1e-14,
            h_max: 0.1,
            shoot_tol: 1e-16,
            ..c
        };
        let s4_fine = sobolev_sq(&solve_scalar_field(&eq, &fine).unwrap(), 4.0).unwrap();
        assert!((s4 / s4_fine - 1.0).abs() < 1e-7, "{s4} {s4_fine}");
    }

    #[test]
    fn talenti_peaks() {
        assert_eq!(talenti_profile(3).peak(), 3f64.powf(0.25));
        assert_eq!(talenti_profile(4).peak(), 8f64.sqrt());
    }
}
