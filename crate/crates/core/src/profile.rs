//! Radial profiles sampled on a grid with an analytic far-field tail.

use serde::{Deserialize, Serialize};

/// Far-field model attached beyond the last grid node.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Tail {
    /// `amplitude * r^{-power} * exp(-decay r) * S(decay r)` where `S` is the
    /// large-argument series of the modified Bessel function of order `order`,
    /// normalized to `S(infinity) = 1`.
    Exponential {
        r_match: f64,
        amplitude: f64,
        decay: f64,
        power: f64,
        order: f64,
    },
    /// `amplitude * r^{-exponent}`.
    Algebraic {
        r_match: f64,
        amplitude: f64,
        exponent: f64,
    },
}

/// Large-argument series `sum_k a_k x^{-k}` of `sqrt(2x/pi) e^x K_order(x)` and its derivative.
fn bessel_series(order: f64, x: f64) -> (f64, f64) {
    let mu = 4.0 * order * order;
    let (mut s, mut ds) = (1.0, 0.0);
    let mut a = 1.0;
    let mut prev = f64::INFINITY;
    for k in 1..40 {
        let kf = k as f64;
        a *= (mu - (2.0 * kf - 1.0).powi(2)) / (8.0 * kf);
        if a == 0.0 {
            break;
        }
        let term = a * x.powf(-kf);
        if term.abs() >= prev {
            break;
        }
        s += term;
        ds -= kf * term / x;
        prev = term.abs();
        if term.abs() < 1e-17 * s.abs() {
            break;
        }
    }
    (s, ds)
}

impl Tail {
    pub fn r_match(&self) -> f64 {
        match *self {
            Tail::Exponential { r_match, .. } | Tail::Algebraic { r_match, .. } => r_match,
        }
    }

    /// Tail shape with unit amplitude and its logarithmic derivative.
    fn shape(&self, r: f64) -> (f64, f64) {
        match *self {
            Tail::Exponential {
                decay,
                power,
                order,
                ..
            } => {
                let x = decay * r;
                let (s, ds) = bessel_series(order, x);
                let g = r.powf(-power) * (-x).exp() * s;
                (g, -power / r - decay + decay * ds / s)
            }
            Tail::Algebraic { exponent, .. } => (r.powf(-exponent), -exponent / r),
        }
    }

    /// Logarithmic derivative of the tail shape at `r`.
    pub fn log_derivative(&self, r: f64) -> f64 {
        self.shape(r).1
    }

    fn amplitude(&self) -> f64 {
        match *self {
            Tail::Exponential { amplitude, .. } | Tail::Algebraic { amplitude, .. } => amplitude,
        }
    }

    pub fn value(&self, r: f64) -> f64 {
        self.amplitude() * self.shape(r).0
    }

    pub fn derivative(&self, r: f64) -> f64 {
        let (g, lg) = self.shape(r);
        self.amplitude() * g * lg
    }

    /// Returns the same tail shape with its amplitude fixed so that it passes
    /// through `value` at `r_match`.
    pub fn matched(self, r_match: f64, value: f64) -> Tail {
        let g = self.shape(r_match).0;
        let amplitude = if g > 0.0 { value / g } else { 0.0 };
        match self {
            Tail::Exponential {
                decay,
                power,
                order,
                ..
            } => Tail::Exponential {
                r_match,
                amplitude,
                decay,
                power,
                order,
            },
            Tail::Algebraic { exponent, .. } => Tail::Algebraic {
                r_match,
                amplitude,
                exponent,
            },
        }
    }

    /// Tail of `x -> W(x / t)`.
    pub fn dilated(self, t: f64) -> Tail {
        match self {
            Tail::Exponential {
                r_match,
                amplitude,
                decay,
                power,
                order,
            } => Tail::Exponential {
                r_match: r_match * t,
                amplitude: amplitude * t.powf(power),
                decay: decay / t,
                power,
                order,
            },
            Tail::Algebraic {
                r_match,
                amplitude,
                exponent,
            } => Tail::Algebraic {
                r_match: r_match * t,
                amplitude: amplitude * t.powf(exponent),
                exponent,
            },
        }
    }
}

/// Quintic Hermite interpolation on `[0, h]` at `t in [0, 1]` from values,
/// first and second derivatives at both ends.
#[allow(clippy::too_many_arguments)]
pub(crate) fn quintic(h: f64, t: f64, f0: f64, d0: f64, s0: f64, f1: f64, d1: f64, s1: f64) -> f64 {
    let t2 = t * t;
    let t3 = t2 * t;
    let t4 = t3 * t;
    let t5 = t4 * t;
    let h0 = 1.0 - 10.0 * t3 + 15.0 * t4 - 6.0 * t5;
    let h1 = t - 6.0 * t3 + 8.0 * t4 - 3.0 * t5;
    let h2 = 0.5 * (t2 - 3.0 * t3 + 3.0 * t4 - t5);
    let h3 = 10.0 * t3 - 15.0 * t4 + 6.0 * t5;
    let h4 = -4.0 * t3 + 7.0 * t4 - 3.0 * t5;
    let h5 = 0.5 * (t3 - 2.0 * t4 + t5);
    h0 * f0 + h * h1 * d0 + h * h * h2 * s0 + h3 * f1 + h * h4 * d1 + h * h * h5 * s1
}

/// A positive radial profile `W(r)` stored at grid nodes together with its first
/// three derivatives, continued past the last node by an analytic tail.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocalProfile {
    dim: u32,
    radii: Vec<f64>,
    values: Vec<f64>,
    first: Vec<f64>,
    second: Vec<f64>,
    third: Vec<f64>,
    tail: Tail,
    shoot_value: f64,
}

impl LocalProfile {
    /// Builds a profile from node data. The caller guarantees matching lengths
    /// and a strictly increasing grid starting at zero; see [`LocalProfile::check`].
    #[allow(clippy::too_many_arguments)]
    pub fn from_nodes(
        dim: u32,
        radii: Vec<f64>,
        values: Vec<f64>,
        first: Vec<f64>,
        second: Vec<f64>,
        third: Vec<f64>,
        tail: Tail,
        shoot_value: f64,
    ) -> Self {
        let n = radii.len();
        assert!(
            n >= 2
                && values.len() == n
                && first.len() == n
                && second.len() == n
                && third.len() == n
        );
        Self {
            dim,
            radii,
            values,
            first,
            second,
            third,
            tail,
            shoot_value,
        }
    }

    pub fn dim(&self) -> u32 {
        self.dim
    }
    pub fn radii(&self) -> &[f64] {
        &self.radii
    }
    pub fn values(&self) -> &[f64] {
        &self.values
    }
    pub fn derivatives(&self) -> &[f64] {
        &self.first
    }
    pub fn second_derivatives(&self) -> &[f64] {
        &self.second
    }
    pub fn third_derivatives(&self) -> &[f64] {
        &self.third
    }
    pub fn tail(&self) -> &Tail {
        &self.tail
    }
    /// Initial value found by shooting (equal to the peak for shot profiles).
    pub fn shoot_value(&self) -> f64 {
        self.shoot_value
    }
    pub fn peak(&self) -> f64 {
        self.values[0]
    }
    /// Radius of the last grid node; the tail takes over beyond it.
    pub fn r_match(&self) -> f64 {
        *self.radii.last().unwrap()
    }

    /// Verifies the structural invariants: grid from zero, strictly increasing,
    /// positive nonincreasing values, zero slope at the origin, and a tail that
    /// continues the last node.
    pub fn check(&self) -> Result<(), String> {
        if self.radii[0] != 0.0 {
            return Err("grid must start at r = 0".into());
        }
        if self.first[0] != 0.0 {
            return Err("slope at the origin must vanish".into());
        }
        if let Some(i) = self.radii.windows(2).position(|w| w[1] <= w[0]) {
            return Err(format!("grid not increasing at node {}", i + 1));
        }
        if let Some(i) = self.values.iter().position(|&v| !(v >= 0.0)) {
            return Err(format!("negative value at node {i}"));
        }
        let peak = self.peak();
        if let Some(i) = self
            .values
            .windows(2)
            .position(|w| w[1] > w[0] + 1e-12 * peak)
        {
            return Err(format!("profile increases at node {}", i + 1));
        }
        let r_k = self.r_match();
        let w_k = *self.values.last().unwrap();
        if (self.tail.value(r_k) - w_k).abs() > 1e-12 * peak.max(1e-300) {
            return Err("tail does not continue the last node".into());
        }
        Ok(())
    }

    fn locate(&self, r: f64) -> usize {
        let i = self.radii.partition_point(|&x| x <= r);
        i.saturating_sub(1).min(self.radii.len() - 2)
    }

    /// `W(r)`; negative radii are reflected.
    pub fn evaluate(&self, r: f64) -> f64 {
        let r = r.abs();
        if r > self.r_match() {
            return self.tail.value(r);
        }
        let i = self.locate(r);
        let (r0, r1) = (self.radii[i], self.radii[i + 1]);
        let h = r1 - r0;
        quintic(
            h,
            (r - r0) / h,
            self.values[i],
            self.first[i],
            self.second[i],
            self.values[i + 1],
            self.first[i + 1],
            self.second[i + 1],
        )
    }

    /// `W'(r)` for `r >= 0`.
    pub fn evaluate_derivative(&self, r: f64) -> f64 {
        if r > self.r_match() {
            return self.tail.derivative(r);
        }
        let i = self.locate(r);
        let (r0, r1) = (self.radii[i], self.radii[i + 1]);
        let h = r1 - r0;
        quintic(
            h,
            (r - r0) / h,
            self.first[i],
            self.second[i],
            self.third[i],
            self.first[i + 1],
            self.second[i + 1],
            self.third[i + 1],
        )
    }

    /// The profile `x -> W(x / t)`.
    pub fn dilate(&self, t: f64) -> LocalProfile {
        LocalProfile {
            dim: self.dim,
            radii: self.radii.iter().map(|r| r * t).collect(),
            values: self.values.clone(),
            first: self.first.iter().map(|v| v / t).collect(),
            second: self.second.iter().map(|v| v / (t * t)).collect(),
            third: self.third.iter().map(|v| v / (t * t * t)).collect(),
            tail: self.tail.dilated(t),
            shoot_value: self.shoot_value,
        }
    }

    /// The profile `x -> c W(x)`.
    pub fn scale_amplitude(&self, c: f64) -> LocalProfile {
        let sc = |v: &Vec<f64>| v.iter().map(|x| x * c).collect();
        let tail = self
            .tail
            .matched(self.r_match(), c * self.values.last().unwrap());
        LocalProfile {
            dim: self.dim,
            radii: self.radii.clone(),
            values: sc(&self.values),
            first: sc(&self.first),
            second: sc(&self.second),
            third: sc(&self.third),
            tail,
            shoot_value: self.shoot_value * c,
        }
    }
}
