//! Dormand-Prince 5(4) integrator for two-component systems.

pub type State = [f64; 2];

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;

const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

#[derive(Debug, Clone, Copy)]
pub struct Tolerances {
    pub rtol: f64,
    pub atol: f64,
    pub h_max: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StepError {
    /// The step size fell below the resolvable spacing at the current abscissa.
    Underflow {
        t: f64,
    },
    NonFinite {
        t: f64,
    },
}

/// Adaptive stepper with first-same-as-last reuse and a PI step controller.
pub struct DormandPrince<F: Fn(f64, &State) -> State> {
    rhs: F,
    tol: Tolerances,
    pub t: f64,
    pub y: State,
    pub dy: State,
    h: f64,
    err_prev: f64,
}

fn axpy(y: &State, h: f64, terms: &[(f64, &State)]) -> State {
    let mut out = *y;
    for (c, k) in terms {
        out[0] += h * c * k[0];
        out[1] += h * c * k[1];
    }
    out
}

impl<F: Fn(f64, &State) -> State> DormandPrince<F> {
    pub fn new(rhs: F, t0: f64, y0: State, h0: f64, tol: Tolerances) -> Self {
        let dy = rhs(t0, &y0);
        Self {
            rhs,
            tol,
            t: t0,
            y: y0,
            dy,
            h: h0.min(tol.h_max),
            err_prev: 1e-4,
        }
    }

    /// Advances by one accepted step and returns its size.
    pub fn step(&mut self) -> Result<f64, StepError> {
        let f = &self.rhs;
        let (t, y, k1) = (self.t, self.y, self.dy);
        loop {
            let h = self.h;
            if h <= 1e-14 * t.abs().max(1e-300) || h < 1e-300 {
                return Err(StepError::Underflow { t });
            }
            let k2 = f(t + C2 * h, &axpy(&y, h, &[(A21, &k1)]));
            let k3 = f(t + C3 * h, &axpy(&y, h, &[(A31, &k1), (A32, &k2)]));
            let k4 = f(
                t + C4 * h,
                &axpy(&y, h, &[(A41, &k1), (A42, &k2), (A43, &k3)]),
            );
            let k5 = f(
                t + C5 * h,
                &axpy(&y, h, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]),
            );
            let k6 = f(
                t + h,
                &axpy(
                    &y,
                    h,
                    &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)],
                ),
            );
            let y_new = axpy(
                &y,
                h,
                &[(A71, &k1), (A73, &k3), (A74, &k4), (A75, &k5), (A76, &k6)],
            );
            let k7 = f(t + h, &y_new);

            let mut err = 0.0;
            for i in 0..2 {
                let e = h
                    * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
                let sc = self.tol.atol + self.tol.rtol * y[i].abs().max(y_new[i].abs());
                err += (e / sc) * (e / sc);
            }
            let err = (err / 2.0).sqrt();

            if !err.is_finite() || !y_new[0].is_finite() || !y_new[1].is_finite() {
                self.h *= 0.1;
                if self.h < 1e-300 {
                    return Err(StepError::NonFinite { t });
                }
                continue;
            }

            if err <= 1.0 {
                let err_c = err.max(1e-10);
                let fac = 0.9 * err_c.powf(-0.7 / 5.0) * self.err_prev.powf(0.4 / 5.0);
                self.h = (h * fac.clamp(0.2, 5.0)).min(self.tol.h_max);
                self.err_prev = err_c;
                self.t = t + h;
                self.y = y_new;
                self.dy = k7;
                return Ok(h);
            }
            let fac = (0.9 * err.powf(-0.2)).clamp(0.1, 1.0);
            self.h = h * fac;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn harmonic_oscillator_phase() {
        let tol = Tolerances {
            rtol: 1e-11,
            atol: 1e-13,
            h_max: 0.5,
        };
        let mut dp = DormandPrince::new(|_, y: &State| [y[1], -y[0]], 0.0, [1.0, 0.0], 1e-3, tol);
        while dp.t < 10.0 {
            dp.step().unwrap();
        }
        let t = dp.t;
        assert!((dp.y[0] - t.cos()).abs() < 1e-9);
        assert!((dp.y[1] + t.sin()).abs() < 1e-9);
    }

    #[test]
    fn exponential_growth() {
        let tol = Tolerances {
            rtol: 1e-10,
            atol: 1e-12,
            h_max: 1.0,
        };
        let mut dp = DormandPrince::new(|_, y: &State| [y[0], 0.0], 0.0, [1.0, 0.0], 1e-2, tol);
        while dp.t < 5.0 {
            dp.step().unwrap();
        }
        assert!((dp.y[0] / dp.t.exp() - 1.0).abs() < 1e-8);
    }
}
