//! Table of asymptotic laws for norms, energies, the mass curve and normalized
//! solutions, plus power-law fitting of computed samples.

use num_rational::Ratio;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::kirchhoff::{critical_limits, CriticalLimits, KirchhoffError, Solver};
use crate::params::{CaseTag, ProblemParams};
use crate::quadrature::lp_power_integral;

/// Exact exponent arithmetic.
pub type Rat = Ratio<i128>;

const MAX_DENOMINATOR: i128 = 1_000_000;

/// Best continued-fraction approximation with denominator at most `10^6`.
/// Decimal inputs with up to six fractional digits and simple fractions such
/// as `10/3` are recovered exactly.
pub fn to_rational(x: f64) -> Rat {
    let sign = if x < 0.0 { -1 } else { 1 };
    let mut y = x.abs();
    let (mut h0, mut h1) = (0i128, 1i128);
    let (mut k0, mut k1) = (1i128, 0i128);
    for _ in 0..64 {
        let a = y.floor();
        if a > 1e15 {
            break;
        }
        let ai = a as i128;
        let (h2, k2) = (ai * h1 + h0, ai * k1 + k0);
        if k2 > MAX_DENOMINATOR {
            break;
        }
        (h0, h1, k0, k1) = (h1, h2, k1, k2);
        let frac = y - a;
        if frac.abs() < 1e-12
            || ((h1 as f64) / (k1 as f64) - x.abs()).abs() <= 1e-13 * x.abs().max(1.0)
        {
            break;
        }
        y = 1.0 / frac;
    }
    Rat::new(sign * h1, k1)
}

fn ri(n: i128) -> Rat {
    Rat::from_integer(n)
}

fn rf(r: Rat) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

fn rat_string(r: Rat) -> String {
    if *r.denom() == 1 {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Quantity {
    Mass,
    Grad,
    Lq,
    Lp,
    Peak,
    Energy,
    EnergyGap,
    GradGap,
    /// Frequency of a normalized solution as a function of `c`.
    LambdaC,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Regime {
    LambdaToZero,
    LambdaToInfinity,
    /// Holds for every `lambda` (closed forms).
    AllLambda,
}

/// Variable the law is a power of.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Variable {
    Lambda,
    /// Mass parameter `c` of a normalized solution, `M(lambda_c) = c^2`.
    C,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CorrectionKind {
    Exact,
    LittleO,
    BigO,
    Theta,
}

/// Relative size of the next term: `leading * (1 +- kind(lambda^exponent (ln lambda)^log_power))`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Correction {
    pub kind: CorrectionKind,
    pub negative: bool,
    pub exponent: Option<f64>,
    pub log_power: Option<f64>,
}

impl Correction {
    fn exact() -> Self {
        Self {
            kind: CorrectionKind::Exact,
            negative: false,
            exponent: None,
            log_power: None,
        }
    }
    fn little_o() -> Self {
        Self {
            kind: CorrectionKind::LittleO,
            negative: false,
            exponent: None,
            log_power: None,
        }
    }
    fn big_o(e: Rat) -> Self {
        Self {
            kind: CorrectionKind::BigO,
            negative: false,
            exponent: Some(rf(e)),
            log_power: None,
        }
    }
    fn theta(e: Rat, negative: bool) -> Self {
        Self {
            kind: CorrectionKind::Theta,
            negative,
            exponent: Some(rf(e)),
            log_power: None,
        }
    }
    fn with_log(mut self, k: Rat) -> Self {
        if k != ri(0) {
            self.log_power = Some(rf(k));
        }
        self
    }
}

/// An evaluated law `value ~ constant * x^exponent * (ln x)^log_power`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticLaw {
    pub id: String,
    pub quantity: Quantity,
    pub regime: Regime,
    pub variable: Variable,
    pub exponent: f64,
    pub exponent_exact: String,
    /// Power of `ln lambda` (of `ln lambda_c` for laws in `c`).
    pub log_power: Option<f64>,
    /// `None` when only the order of magnitude is known.
    pub constant: Option<f64>,
    pub constant_formula: String,
    pub correction: Option<Correction>,
    pub hypotheses: String,
    pub note: Option<String>,
}

impl AsymptoticLaw {
    pub fn is_ratio_only(&self) -> bool {
        self.constant.is_none()
    }

    /// Leading term at `x`, when a constant is known.
    pub fn evaluate(&self, x: f64) -> Option<f64> {
        let k = self.log_power.unwrap_or(0.0);
        self.constant
            .map(|c| c * x.powf(self.exponent) * x.ln().powf(k))
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AsymptoticsError {
    #[error("not covered: {0}")]
    NotCovered(String),
    #[error(transparent)]
    Numerical(#[from] KirchhoffError),
}

/// Parameters in exact form.
#[derive(Debug, Clone, Copy)]
struct Ctx {
    dim: u32,
    n: Rat,
    q: Rat,
    p: Rat,
    a: f64,
    b: f64,
    case: CaseTag,
}

impl Ctx {
    fn new(params: &ProblemParams) -> Self {
        Self {
            dim: params.dim(),
            n: ri(params.dim() as i128),
            q: to_rational(params.q()),
            p: to_rational(params.p()),
            a: params.a(),
            b: params.b(),
            case: params.case(),
        }
    }
    fn qf(&self) -> f64 {
        rf(self.q)
    }
    fn pf(&self) -> f64 {
        rf(self.p)
    }
    fn nf(&self) -> f64 {
        self.dim as f64
    }
    fn subcritical3(&self) -> bool {
        self.dim == 3 && self.case == CaseTag::Subcritical
    }
    fn pq3(&self) -> bool {
        self.dim == 3 && self.case == CaseTag::PqEqual
    }
    fn critical(&self) -> bool {
        self.case == CaseTag::Critical
    }
    fn critical_large(&self) -> bool {
        self.critical() && ((self.dim == 4 && self.q < ri(4)) || (self.dim == 3 && self.q > ri(4)))
    }
    /// `2N - q(N-2)`.
    fn g_num(&self) -> Rat {
        ri(2) * self.n - self.q * (self.n - ri(2))
    }
    /// Exponent of the gaps in the critical large-`lambda` rows.
    fn gap(&self) -> Rat {
        if self.dim == 4 {
            -(ri(4) - self.q) / (self.q - ri(2))
        } else {
            -(ri(6) - self.q) / (ri(2) * (self.q - ri(4)))
        }
    }
    fn gap_log(&self) -> Rat {
        if self.dim == 4 {
            self.gap()
        } else {
            ri(0)
        }
    }
    /// `(S_p / 2)^{p/(p-2)}` helper exponent.
    fn e_pq(&self) -> Rat {
        (ri(6) - self.p) / (ri(2) * (self.p - ri(2)))
    }
    fn small_correction(&self) -> Correction {
        let (q, p) = (self.q, self.p);
        if self.b == 0.0 || q > ri(2) * p - ri(6) {
            Correction::theta((p - q) / (q - ri(2)), true)
        } else {
            Correction::big_o((ri(6) - q) / (ri(2) * (q - ri(2))))
        }
    }
    fn large_correction(&self) -> Correction {
        let (q, p) = (self.q, self.p);
        if self.b == 0.0 || q > ri(2) * p - ri(6) {
            Correction::big_o(-(p - q) / (p - ri(2)))
        } else {
            Correction::big_o(-(ri(6) - p) / (p - ri(2)))
        }
    }
}

/// Lazily evaluated numerical constants.
struct Consts<'a> {
    solver: &'a Solver,
    ctx: Ctx,
}

impl Consts<'_> {
    fn s_q(&self) -> Result<f64, KirchhoffError> {
        self.solver.sobolev_sq(self.ctx.dim, self.ctx.qf())
    }
    fn s_p(&self) -> Result<f64, KirchhoffError> {
        self.solver.sobolev_sq(self.ctx.dim, self.ctx.pf())
    }
    fn v0_peak(&self) -> Result<f64, KirchhoffError> {
        Ok(self
            .solver
            .single_power(self.ctx.dim, self.ctx.qf())?
            .peak())
    }
    fn w0_peak(&self) -> Result<f64, KirchhoffError> {
        Ok(self
            .solver
            .single_power(self.ctx.dim, self.ctx.pf())?
            .peak())
    }
    fn v0_critical_norm(&self) -> Result<f64, KirchhoffError> {
        let crit = 2.0 * self.ctx.nf() / (self.ctx.nf() - 2.0);
        let v0 = self.solver.single_power(self.ctx.dim, self.ctx.qf())?;
        lp_power_integral(&v0, crit)
            .finite()
            .ok_or_else(|| KirchhoffError::NotApplicable("critical norm of V0 diverges".into()))
    }
    fn limits(&self) -> Result<CriticalLimits, KirchhoffError> {
        critical_limits(self.ctx.dim, self.ctx.a, self.ctx.b)
    }
    /// `S_q^{q/(q-2)}`.
    fn sq_pow(&self) -> Result<f64, KirchhoffError> {
        let q = self.ctx.qf();
        Ok(self.s_q()?.powf(q / (q - 2.0)))
    }
    /// `S_p^{p/(p-2)}`.
    fn sp_pow(&self) -> Result<f64, KirchhoffError> {
        let p = self.ctx.pf();
        Ok(self.s_p()?.powf(p / (p - 2.0)))
    }
    /// `(S_p/2)^{p/(p-2)}`.
    fn h(&self) -> Result<f64, KirchhoffError> {
        let p = self.ctx.pf();
        Ok((self.s_p()? / 2.0).powf(p / (p - 2.0)))
    }
}

type ConstFn = fn(&Ctx, &Consts) -> Result<f64, KirchhoffError>;

struct LawTemplate {
    id: &'static str,
    quantity: Quantity,
    regime: Regime,
    hypotheses: &'static str,
    exponent_formula: &'static str,
    constant_formula: &'static str,
    correction_formula: &'static str,
    note: Option<&'static str>,
    applies: fn(&Ctx) -> bool,
    exponent: fn(&Ctx) -> Rat,
    log_power: fn(&Ctx) -> Rat,
    constant: Option<ConstFn>,
    correction: fn(&Ctx) -> Option<Correction>,
}

fn zero(_: &Ctx) -> Rat {
    ri(0)
}

const RATIO_ONLY: &str = "ratio-only";

static LAWS: &[LawTemplate] = &[
    // critical p = 2*, lambda -> 0
    LawTemplate {
        id: "critical.small.peak",
        quantity: Quantity::Peak,
        regime: Regime::LambdaToZero,
        hypotheses: "N in {3,4}, p = 2*, 2 < q < 2*",
        exponent_formula: "1/(q-2)",
        constant_formula: "V0(0)",
        correction_formula: "o(1)",
        note: None,
        applies: |c| c.critical(),
        exponent: |c| ri(1) / (c.q - ri(2)),
        log_power: zero,
        constant: Some(|_, k| k.v0_peak()),
        correction: |_| Some(Correction::little_o()),
    },
    LawTemplate {
        id: "critical.small.grad",
        quantity: Quantity::Grad,
        regime: Regime::LambdaToZero,
        hypotheses: "N in {3,4}, p = 2*, 2 < q < 2*",
        exponent_formula: "(2N-q(N-2))/(2(q-2))",
        constant_formula: "N(q-2)/(2q) a^{(N-2)/2} S_q^{q/(q-2)}",
        correction_formula: "O(lambda^{(2N-q(N-2))/(2(q-2))})",
        note: None,
        applies: |c| c.critical(),
        exponent: |c| c.g_num() / (ri(2) * (c.q - ri(2))),
        log_power: zero,
        constant: Some(|c, k| {
            let (n, q) = (c.nf(), c.qf());
            Ok(n * (q - 2.0) / (2.0 * q) * c.a.powf((n - 2.0) / 2.0) * k.sq_pow()?)
        }),
        correction: |c| Some(Correction::big_o(c.g_num() / (ri(2) * (c.q - ri(2))))),
    },
    LawTemplate {
        id: "critical.small.mass",
        quantity: Quantity::Mass,
        regime: Regime::LambdaToZero,
        hypotheses: "N in {3,4}, p = 2*, 2 < q < 2*",
        exponent_formula: "(4-N(q-2))/(2(q-2))",
        constant_formula: "(2N-q(N-2))/(2q) a^{N/2} S_q^{q/(q-2)}",
        correction_formula: "O(lambda^{(2N-q(N-2))/(2(q-2))})",
        note: None,
        applies: |c| c.critical(),
        exponent: |c| (ri(4) - c.n * (c.q - ri(2))) / (ri(2) * (c.q - ri(2))),
        log_power: zero,
        constant: Some(|c, k| {
            let (n, q) = (c.nf(), c.qf());
            Ok((2.0 * n - q * (n - 2.0)) / (2.0 * q) * c.a.powf(n / 2.0) * k.sq_pow()?)
        }),
        correction: |c| Some(Correction::big_o(c.g_num() / (ri(2) * (c.q - ri(2))))),
    },
    LawTemplate {
        id: "critical.small.lq",
        quantity: Quantity::Lq,
        regime: Regime::LambdaToZero,
        hypotheses: "N in {3,4}, p = 2*, 2 < q < 2*",
        exponent_formula: "(2N-q(N-2))/(2(q-2))",
        constant_formula: "a^{N/2} S_q^{q/(q-2)}",
        correction_formula: "o(1)",
        note: None,
        applies: |c| c.critical(),
        exponent: |c| c.g_num() / (ri(2) * (c.q - ri(2))),
        log_power: zero,
        constant: Some(|c, k| Ok(c.a.powf(c.nf() / 2.0) * k.sq_pow()?)),
        correction: |_| Some(Correction::little_o()),
    },
    LawTemplate {
        id: "critical.small.lp",
        quantity: Quantity::Lp,
        regime: Regime::LambdaToZero,
        hypotheses: "N in {3,4}, p = 2*, 2 < q < 2*",
        exponent_formula: "N(2N-q(N-2))/(2(N-2)(q-2))",
        constant_formula: "a^{N/2} |V0|_{2*}^{2*}",
        correction_formula: "o(1)",
        note: None,
        applies: |c| c.critical(),
        exponent: |c| c.n * c.g_num() / (ri(2) * (c.n - ri(2)) * (c.q - ri(2))),
        log_power: zero,
        constant: Some(|c, k| Ok(c.a.powf(c.nf() / 2.0) * k.v0_critical_norm()?)),
        correction: |_| Some(Correction::little_o()),
    },
    LawTemplate {
        id: "critical.small.energy",
        quantity: Quantity::Energy,
        regime: Regime::LambdaToZero,
        hypotheses: "N in {3,4}, p = 2*, 2 < q < 2*",
        exponent_formula: "(2N-q(N-2))/(2(q-2))",
        constant_formula: "(q-2)/(2q) a^{N/2} S_q^{q/(q-2)}",
        correction_formula: "O(lambda^{(2N-q(N-2))/(2(q-2))})",
        note: None,
        applies: |c| c.critical(),
        exponent: |c| c.g_num() / (ri(2) * (c.q - ri(2))),
        log_power: zero,
        constant: Some(|c, k| {
            let q = c.qf();
            Ok((q - 2.0) / (2.0 * q) * c.a.powf(c.nf() / 2.0) * k.sq_pow()?)
        }),
        correction: |c| Some(Correction::big_o(c.g_num() / (ri(2) * (c.q - ri(2))))),
    },
    // critical p = 2*, lambda -> infinity
    LawTemplate {
        id: "critical.large.peak",
        quantity: Quantity::Peak,
        regime: Regime::LambdaToInfinity,
        hypotheses: "p = 2*; N = 4 with 2 < q < 4 and bS^2 < 1, or N = 3 with 4 < q < 6",
        exponent_formula: "N=4: (lambda ln lambda)^{1/(q-2)}; N=3: lambda^{1/(2(q-4))}",
        constant_formula: RATIO_ONLY,
        correction_formula: "none",
        note: Some("N=4 power taken as 1/(q-2), matching the bubble width (lambda ln lambda)^{-1/(q-2)}"),
        applies: |c| c.critical_large(),
        exponent: |c| {
            if c.dim == 4 {
                ri(1) / (c.q - ri(2))
            } else {
                ri(1) / (ri(2) * (c.q - ri(4)))
            }
        },
        log_power: |c| if c.dim == 4 { ri(1) / (c.q - ri(2)) } else { ri(0) },
        constant: None,
        correction: |_| None,
    },
    LawTemplate {
        id: "critical.large.grad",
        quantity: Quantity::Grad,
        regime: Regime::LambdaToInfinity,
        hypotheses: "p = 2*; N = 4 with 2 < q < 4 and bS^2 < 1, or N = 3 with 4 < q < 6",
        exponent_formula: "0",
        constant_formula: "N=4: aS^2/(1-bS^2); N=3: (bS^3 + S^{3/2} sqrt(b^2 S^3 + 4a))/2",
        correction_formula: "-Theta(gap)",
        note: None,
        applies: |c| c.critical_large(),
        exponent: zero,
        log_power: zero,
        constant: Some(|_, k| Ok(k.limits()?.grad)),
        correction: |c| Some(Correction::theta(c.gap(), true).with_log(c.gap_log())),
    },
    LawTemplate {
        id: "critical.large.grad-gap",
        quantity: Quantity::GradGap,
        regime: Regime::LambdaToInfinity,
        hypotheses: "p = 2*; N = 4 with 2 < q < 4 and bS^2 < 1, or N = 3 with 4 < q < 6",
        exponent_formula: "N=4: (lambda ln lambda)^{-(4-q)/(q-2)}; N=3: lambda^{-(6-q)/(2(q-4))}",
        constant_formula: RATIO_ONLY,
        correction_formula: "none",
        note: None,
        applies: |c| c.critical_large(),
        exponent: |c| c.gap(),
        log_power: |c| c.gap_log(),
        constant: None,
        correction: |_| None,
    },
    LawTemplate {
        id: "critical.large.lp",
        quantity: Quantity::Lp,
        regime: Regime::LambdaToInfinity,
        hypotheses: "p = 2*; N = 4 with 2 < q < 4 and bS^2 < 1, or N = 3 with 4 < q < 6",
        exponent_formula: "0",
        constant_formula: "N=4: a^2 S^2/(1-bS^2)^2; N=3: (bS^2 + S^{1/2} sqrt(b^2 S^3 + 4a))^3/8",
        correction_formula: "O(gap)",
        note: None,
        applies: |c| c.critical_large(),
        exponent: zero,
        log_power: zero,
        constant: Some(|_, k| Ok(k.limits()?.critical_norm)),
        correction: |c| {
            let mut cor = Correction::big_o(c.gap());
            cor.log_power = if c.dim == 4 { Some(rf(c.gap())) } else { None };
            Some(cor)
        },
    },
    LawTemplate {
        id: "critical.large.mass",
        quantity: Quantity::Mass,
        regime: Regime::LambdaToInfinity,
        hypotheses: "p = 2*; N = 4 with 2 < q < 4 and bS^2 < 1, or N = 3 with 4 < q < 6",
        exponent_formula: "N=4: lambda^{-2/(q-2)} (ln lambda)^{-(4-q)/(q-2)}; N=3: lambda^{-(q-2)/(2(q-4))}",
        constant_formula: RATIO_ONLY,
        correction_formula: "none",
        note: None,
        applies: |c| c.critical_large(),
        exponent: |c| {
            if c.dim == 4 {
                ri(-2) / (c.q - ri(2))
            } else {
                -(c.q - ri(2)) / (ri(2) * (c.q - ri(4)))
            }
        },
        log_power: |c| c.gap_log(),
        constant: None,
        correction: |_| None,
    },
    LawTemplate {
        id: "critical.large.lq",
        quantity: Quantity::Lq,
        regime: Regime::LambdaToInfinity,
        hypotheses: "p = 2*; N = 4 with 2 < q < 4 and bS^2 < 1, or N = 3 with 4 < q < 6",
        exponent_formula: "same as the gradient gap",
        constant_formula: RATIO_ONLY,
        correction_formula: "none",
        note: None,
        applies: |c| c.critical_large(),
        exponent: |c| c.gap(),
        log_power: |c| c.gap_log(),
        constant: None,
        correction: |_| None,
    },
    LawTemplate {
        id: "critical.large.energy",
        quantity: Quantity::Energy,
        regime: Regime::LambdaToInfinity,
        hypotheses: "p = 2*; N = 4 with 2 < q < 4 and bS^2 < 1, or N = 3 with 4 < q < 6",
        exponent_formula: "0",
        constant_formula: "m_inf: N=4: a^2 S^2/(4(1-bS^2)); N=3: (a/6) G2 + (b/48) G2^2, G2 = bS^3 + S^{3/2} sqrt(b^2 S^3 + 4a)",
        correction_formula: "-Theta(gap)",
        note: None,
        applies: |c| c.critical_large(),
        exponent: zero,
        log_power: zero,
        constant: Some(|_, k| Ok(k.limits()?.energy)),
        correction: |c| Some(Correction::theta(c.gap(), true).with_log(c.gap_log())),
    },
    LawTemplate {
        id: "critical.large.energy-gap",
        quantity: Quantity::EnergyGap,
        regime: Regime::LambdaToInfinity,
        hypotheses: "p = 2*; N = 4 with 2 < q < 4 and bS^2 < 1, or N = 3 with 4 < q < 6",
        exponent_formula: "same as the gradient gap",
        constant_formula: RATIO_ONLY,
        correction_formula: "none",
        note: None,
        applies: |c| c.critical_large(),
        exponent: |c| c.gap(),
        log_power: |c| c.gap_log(),
        constant: None,
        correction: |_| None,
    },
    // p = q, N = 3
    LawTemplate {
        id: "pq.peak",
        quantity: Quantity::Peak,
        regime: Regime::AllLambda,
        hypotheses: "N = 3, 2 < p = q < 6",
        exponent_formula: "1/(p-2)",
        constant_formula: "2^{-1/(p-2)} W0(0)",
        correction_formula: "exact",
        note: None,
        applies: |c| c.pq3(),
        exponent: |c| ri(1) / (c.p - ri(2)),
        log_power: zero,
        constant: Some(|c, k| Ok(0.5f64.powf(1.0 / (c.pf() - 2.0)) * k.w0_peak()?)),
        correction: |_| Some(Correction::exact()),
    },
    LawTemplate {
        id: "pq.b0.grad",
        quantity: Quantity::Grad,
        regime: Regime::AllLambda,
        hypotheses: "N = 3, 2 < p = q < 6, b = 0",
        exponent_formula: "(6-p)/(2(p-2))",
        constant_formula: "3(p-2)/p a^{1/2} (S_p/2)^{p/(p-2)}",
        correction_formula: "exact",
        note: None,
        applies: |c| c.pq3() && c.b == 0.0,
        exponent: |c| c.e_pq(),
        log_power: zero,
        constant: Some(|c, k| {
            let p = c.pf();
            Ok(3.0 * (p - 2.0) / p * c.a.sqrt() * k.h()?)
        }),
        correction: |_| Some(Correction::exact()),
    },
    LawTemplate {
        id: "pq.b0.mass",
        quantity: Quantity::Mass,
        regime: Regime::AllLambda,
        hypotheses: "N = 3, 2 < p = q < 6, b = 0",
        exponent_formula: "(10-3p)/(2(p-2))",
        constant_formula: "(6-p)/p a^{3/2} (S_p/2)^{p/(p-2)}",
        correction_formula: "exact",
        note: None,
        applies: |c| c.pq3() && c.b == 0.0,
        exponent: |c| (ri(10) - ri(3) * c.p) / (ri(2) * (c.p - ri(2))),
        log_power: zero,
        constant: Some(|c, k| {
            let p = c.pf();
            Ok((6.0 - p) / p * c.a.powf(1.5) * k.h()?)
        }),
        correction: |_| Some(Correction::exact()),
    },
    LawTemplate {
        id: "pq.b0.lp",
        quantity: Quantity::Lp,
        regime: Regime::AllLambda,
        hypotheses: "N = 3, 2 < p = q < 6, b = 0",
        exponent_formula: "(6-p)/(2(p-2))",
        constant_formula: "a^{3/2} (S_p/2)^{p/(p-2)}",
        correction_formula: "exact",
        note: None,
        applies: |c| c.pq3() && c.b == 0.0,
        exponent: |c| c.e_pq(),
        log_power: zero,
        constant: Some(|c, k| Ok(c.a.powf(1.5) * k.h()?)),
        correction: |_| Some(Correction::exact()),
    },
    LawTemplate {
        id: "pq.large.grad",
        quantity: Quantity::Grad,
        regime: Regime::LambdaToInfinity,
        hypotheses: "N = 3, 2 < p = q < 6, b > 0",
        exponent_formula: "(6-p)/(p-2)",
        constant_formula: "9b(p-2)^2/p^2 (S_p/2)^{2p/(p-2)}",
        correction_formula: "Theta(lambda^{-(6-p)/(p-2)})",
        note: Some("constant follows from the self-consistent varpi root; the printed constant carries a factor 1/2"),
        applies: |c| c.pq3() && c.b > 0.0,
        exponent: |c| ri(2) * c.e_pq(),
        log_power: zero,
        constant: Some(|c, k| {
            let p = c.pf();
            Ok(9.0 * c.b * (p - 2.0).powi(2) / (p * p) * k.h()?.powi(2))
        }),
        correction: |c| Some(Correction::theta(-ri(2) * c.e_pq(), false)),
    },
    LawTemplate {
        id: "pq.large.mass",
        quantity: Quantity::Mass,
        regime: Regime::LambdaToInfinity,
        hypotheses: "N = 3, 2 < p = q < 6, b > 0",
        exponent_formula: "(14-3p)/(p-2)",
        constant_formula: "27b^3(p-2)^3(6-p)/p^4 (S_p/2)^{4p/(p-2)}",
        correction_formula: "Theta(lambda^{-(6-p)/(p-2)})",
        note: Some("constant follows from the self-consistent varpi root; the printed constant has 1/8 and (S_p/2)^{p/(p-2)}"),
        applies: |c| c.pq3() && c.b > 0.0,
        exponent: |c| (ri(14) - ri(3) * c.p) / (c.p - ri(2)),
        log_power: zero,
        constant: Some(|c, k| {
            let p = c.pf();
            Ok(27.0 * c.b.powi(3) * (p - 2.0).powi(3) * (6.0 - p) / p.powi(4) * k.h()?.powi(4))
        }),
        correction: |c| Some(Correction::theta(-ri(2) * c.e_pq(), false)),
    },
    LawTemplate {
        id: "pq.large.lp",
        quantity: Quantity::Lp,
        regime: Regime::LambdaToInfinity,
        hypotheses: "N = 3, 2 < p = q < 6, b > 0",
        exponent_formula: "2(6-p)/(p-2)",
        constant_formula: "27b^3(p-2)^3/p^3 (S_p/2)^{4p/(p-2)}",
        correction_formula: "Theta(lambda^{-(6-p)/(p-2)})",
        note: Some("exponent flagged: one display prints (14-3p)/(p-2), the derivation gives 2(6-p)/(p-2)"),
        applies: |c| c.pq3() && c.b > 0.0,
        exponent: |c| ri(4) * c.e_pq(),
        log_power: zero,
        constant: Some(|c, k| {
            let p = c.pf();
            Ok(27.0 * c.b.powi(3) * (p - 2.0).powi(3) / p.powi(3) * k.h()?.powi(4))
        }),
        correction: |c| Some(Correction::theta(-ri(2) * c.e_pq(), false)),
    },
    LawTemplate {
        id: "pq.small.grad",
        quantity: Quantity::Grad,
        regime: Regime::LambdaToZero,
        hypotheses: "N = 3, 2 < p = q < 6, b > 0",
        exponent_formula: "(6-p)/(2(p-2))",
        constant_formula: "3(p-2)/p a^{1/2} (S_p/2)^{p/(p-2)}",
        correction_formula: "Theta(lambda^{(6-p)/(2(p-2))})",
        note: Some("includes the factor 3(p-2)/p of the exact formula"),
        applies: |c| c.pq3() && c.b > 0.0,
        exponent: |c| c.e_pq(),
        log_power: zero,
        constant: Some(|c, k| {
            let p = c.pf();
            Ok(3.0 * (p - 2.0) / p * c.a.sqrt() * k.h()?)
        }),
        correction: |c| Some(Correction::theta(c.e_pq(), false)),
    },
    LawTemplate {
        id: "pq.small.mass",
        quantity: Quantity::Mass,
        regime: Regime::LambdaToZero,
        hypotheses: "N = 3, 2 < p = q < 6, b > 0",
        exponent_formula: "(10-3p)/(2(p-2))",
        constant_formula: "(6-p)/p a^{3/2} (S_p/2)^{p/(p-2)}",
        correction_formula: "Theta(lambda^{(6-p)/(2(p-2))})",
        note: None,
        applies: |c| c.pq3() && c.b > 0.0,
        exponent: |c| (ri(10) - ri(3) * c.p) / (ri(2) * (c.p - ri(2))),
        log_power: zero,
        constant: Some(|c, k| {
            let p = c.pf();
            Ok((6.0 - p) / p * c.a.powf(1.5) * k.h()?)
        }),
        correction: |c| Some(Correction::theta(c.e_pq(), false)),
    },
    LawTemplate {
        id: "pq.small.lp",
        quantity: Quantity::Lp,
        regime: Regime::LambdaToZero,
        hypotheses: "N = 3, 2 < p = q < 6, b > 0",
        exponent_formula: "(6-p)/(2(p-2))",
        constant_formula: "a^{3/2} (S_p/2)^{p/(p-2)}",
        correction_formula: "Theta(lambda^{(6-p)/(2(p-2))})",
        note: None,
        applies: |c| c.pq3() && c.b > 0.0,
        exponent: |c| c.e_pq(),
        log_power: zero,
        constant: Some(|c, k| Ok(c.a.powf(1.5) * k.h()?)),
        correction: |c| Some(Correction::theta(c.e_pq(), false)),
    },
    // subcritical q < p < 6, N = 3, lambda -> 0
    LawTemplate {
        id: "subcritical.small.peak",
        quantity: Quantity::Peak,
        regime: Regime::LambdaToZero,
        hypotheses: "N = 3, 2 < q < p < 6, b >= 0",
        exponent_formula: "1/(q-2)",
        constant_formula: "V0(0)",
        correction_formula: "o(1)",
        note: None,
        applies: |c| c.subcritical3(),
        exponent: |c| ri(1) / (c.q - ri(2)),
        log_power: zero,
        constant: Some(|_, k| k.v0_peak()),
        correction: |_| Some(Correction::little_o()),
    },
    LawTemplate {
        id: "subcritical.small.grad",
        quantity: Quantity::Grad,
        regime: Regime::LambdaToZero,
        hypotheses: "N = 3, 2 < q < p < 6, b > 0",
        exponent_formula: "(6-q)/(2(q-2))",
        constant_formula: "3(q-2)/(2q) a^{1/2} S_q^{q/(q-2)}",
        correction_formula: "q > 2p-6: -Theta(lambda^{(p-q)/(q-2)}); else O(lambda^{(6-q)/(2(q-2))})",
        note: None,
        applies: |c| c.subcritical3() && c.b > 0.0,
        exponent: |c| (ri(6) - c.q) / (ri(2) * (c.q - ri(2))),
        log_power: zero,
        constant: Some(|c, k| {
            let q = c.qf();
            Ok(3.0 * (q - 2.0) / (2.0 * q) * c.a.sqrt() * k.sq_pow()?)
        }),
        correction: |c| Some(c.small_correction()),
    },
    LawTemplate {
        id: "subcritical.small.mass",
        quantity: Quantity::Mass,
        regime: Regime::LambdaToZero,
        hypotheses: "N = 3, 2 < q < p < 6, b > 0",
        exponent_formula: "(10-3q)/(2(q-2))",
        constant_formula: "(6-q)/(2q) a^{3/2} S_q^{q/(q-2)}",
        correction_formula: "q > 2p-6: -Theta(lambda^{(p-q)/(q-2)}); else O(lambda^{(6-q)/(2(q-2))})",
        note: None,
        applies: |c| c.subcritical3() && c.b > 0.0,
        exponent: |c| (ri(10) - ri(3) * c.q) / (ri(2) * (c.q - ri(2))),
        log_power: zero,
        constant: Some(|c, k| {
            let q = c.qf();
            Ok((6.0 - q) / (2.0 * q) * c.a.powf(1.5) * k.sq_pow()?)
        }),
        correction: |c| Some(c.small_correction()),
    },
    LawTemplate {
        id: "subcritical.small.lq",
        quantity: Quantity::Lq,
        regime: Regime::LambdaToZero,
        hypotheses: "N = 3, 2 < q < p < 6, b > 0",
        exponent_formula: "(6-q)/(2(q-2))",
        constant_formula: "a^{3/2} S_q^{q/(q-2)}",
        correction_formula: "q > 2p-6: -Theta(lambda^{(p-q)/(q-2)}); else O(lambda^{(6-q)/(2(q-2))})",
        note: None,
        applies: |c| c.subcritical3() && c.b > 0.0,
        exponent: |c| (ri(6) - c.q) / (ri(2) * (c.q - ri(2))),
        log_power: zero,
        constant: Some(|c, k| Ok(c.a.powf(1.5) * k.sq_pow()?)),
        correction: |c| Some(c.small_correction()),
    },
    LawTemplate {
        id: "subcritical.small-b0.grad",
        quantity: Quantity::Grad,
        regime: Regime::LambdaToZero,
        hypotheses: "N = 3, 2 < q < p < 6, b = 0",
        exponent_formula: "(6-q)/(2(q-2))",
        constant_formula: "3(q-2)/(2q) a^{1/2} S_q^{q/(q-2)}",
        correction_formula: "-Theta(lambda^{(p-q)/(q-2)})",
        note: None,
        applies: |c| c.subcritical3() && c.b == 0.0,
        exponent: |c| (ri(6) - c.q) / (ri(2) * (c.q - ri(2))),
        log_power: zero,
        constant: Some(|c, k| {
            let q = c.qf();
            Ok(3.0 * (q - 2.0) / (2.0 * q) * c.a.sqrt() * k.sq_pow()?)
        }),
        correction: |c| Some(c.small_correction()),
    },
    LawTemplate {
        id: "subcritical.small-b0.mass",
        quantity: Quantity::Mass,
        regime: Regime::LambdaToZero,
        hypotheses: "N = 3, 2 < q < p < 6, b = 0",
        exponent_formula: "(10-3q)/(2(q-2))",
        constant_formula: "(6-q)/(2q) a^{3/2} S_q^{q/(q-2)}",
        correction_formula: "-Theta(lambda^{(p-q)/(q-2)})",
        note: None,
        applies: |c| c.subcritical3() && c.b == 0.0,
        exponent: |c| (ri(10) - ri(3) * c.q) / (ri(2) * (c.q - ri(2))),
        log_power: zero,
        constant: Some(|c, k| {
            let q = c.qf();
            Ok((6.0 - q) / (2.0 * q) * c.a.powf(1.5) * k.sq_pow()?)
        }),
        correction: |c| Some(c.small_correction()),
    },
    LawTemplate {
        id: "subcritical.small-b0.lq",
        quantity: Quantity::Lq,
        regime: Regime::LambdaToZero,
        hypotheses: "N = 3, 2 < q < p < 6, b = 0",
        exponent_formula: "(6-q)/(2(q-2))",
        constant_formula: "a^{3/2} S_q^{q/(q-2)}",
        correction_formula: "-Theta(lambda^{(p-q)/(q-2)})",
        note: None,
        applies: |c| c.subcritical3() && c.b == 0.0,
        exponent: |c| (ri(6) - c.q) / (ri(2) * (c.q - ri(2))),
        log_power: zero,
        constant: Some(|c, k| Ok(c.a.powf(1.5) * k.sq_pow()?)),
        correction: |c| Some(c.small_correction()),
    },
    // subcritical q < p < 6, N = 3, lambda -> infinity
    LawTemplate {
        id: "subcritical.large.peak",
        quantity: Quantity::Peak,
        regime: Regime::LambdaToInfinity,
        hypotheses: "N = 3, 2 < q < p < 6, b >= 0",
        exponent_formula: "1/(p-2)",
        constant_formula: "W0(0)",
        correction_formula: "o(1)",
        note: None,
        applies: |c| c.subcritical3(),
        exponent: |c| ri(1) / (c.p - ri(2)),
        log_power: zero,
        constant: Some(|_, k| k.w0_peak()),
        correction: |_| Some(Correction::little_o()),
    },
    LawTemplate {
        id: "subcritical.large.grad",
        quantity: Quantity::Grad,
        regime: Regime::LambdaToInfinity,
        hypotheses: "N = 3, 2 < q < p < 6, b > 0",
        exponent_formula: "(6-p)/(p-2)",
        constant_formula: "9b(p-2)^2/(4p^2) S_p^{2p/(p-2)}",
        correction_formula: "q > 2p-6: O(lambda^{-(p-q)/(p-2)}); else O(lambda^{-(6-p)/(p-2)})",
        note: None,
        applies: |c| c.subcritical3() && c.b > 0.0,
        exponent: |c| (ri(6) - c.p) / (c.p - ri(2)),
        log_power: zero,
        constant: Some(|c, k| {
            let p = c.pf();
            Ok(9.0 * c.b * (p - 2.0).powi(2) / (4.0 * p * p) * k.sp_pow()?.powi(2))
        }),
        correction: |c| Some(c.large_correction()),
    },
    LawTemplate {
        id: "subcritical.large.mass",
        quantity: Quantity::Mass,
        regime: Regime::LambdaToInfinity,
        hypotheses: "N = 3, 2 < q < p < 6, b > 0",
        exponent_formula: "(14-3p)/(p-2)",
        constant_formula: "27b^3(p-2)^3(6-p)/(16p^4) S_p^{4p/(p-2)}",
        correction_formula: "q > 2p-6: O(lambda^{-(p-q)/(p-2)}); else O(lambda^{-(6-p)/(p-2)})",
        note: None,
        applies: |c| c.subcritical3() && c.b > 0.0,
        exponent: |c| (ri(14) - ri(3) * c.p) / (c.p - ri(2)),
        log_power: zero,
        constant: Some(|c, k| {
            let p = c.pf();
            Ok(27.0 * c.b.powi(3) * (p - 2.0).powi(3) * (6.0 - p) / (16.0 * p.powi(4)) * k.sp_pow()?.powi(4))
        }),
        correction: |c| Some(c.large_correction()),
    },
    LawTemplate {
        id: "subcritical.large.lp",
        quantity: Quantity::Lp,
        regime: Regime::LambdaToInfinity,
        hypotheses: "N = 3, 2 < q < p < 6, b > 0",
        exponent_formula: "2(6-p)/(p-2)",
        constant_formula: "27b^3(p-2)^3/(8p^3) S_p^{4p/(p-2)}",
        correction_formula: "q > 2p-6: O(lambda^{-(p-q)/(p-2)}); else O(lambda^{-(6-p)/(p-2)})",
        note: None,
        applies: |c| c.subcritical3() && c.b > 0.0,
        exponent: |c| ri(2) * (ri(6) - c.p) / (c.p - ri(2)),
        log_power: zero,
        constant: Some(|c, k| {
            let p = c.pf();
            Ok(27.0 * c.b.powi(3) * (p - 2.0).powi(3) / (8.0 * p.powi(3)) * k.sp_pow()?.powi(4))
        }),
        correction: |c| Some(c.large_correction()),
    },
    LawTemplate {
        id: "subcritical.large-b0.grad",
        quantity: Quantity::Grad,
        regime: Regime::LambdaToInfinity,
        hypotheses: "N = 3, 2 < q < p < 6, b = 0",
        exponent_formula: "(6-p)/(2(p-2))",
        constant_formula: "3(p-2)/(2p) a^{1/2} S_p^{p/(p-2)}",
        correction_formula: "O(lambda^{-(p-q)/(p-2)})",
        note: None,
        applies: |c| c.subcritical3() && c.b == 0.0,
        exponent: |c| c.e_pq(),
        log_power: zero,
        constant: Some(|c, k| {
            let p = c.pf();
            Ok(3.0 * (p - 2.0) / (2.0 * p) * c.a.sqrt() * k.sp_pow()?)
        }),
        correction: |c| Some(c.large_correction()),
    },
    LawTemplate {
        id: "subcritical.large-b0.mass",
        quantity: Quantity::Mass,
        regime: Regime::LambdaToInfinity,
        hypotheses: "N = 3, 2 < q < p < 6, b = 0",
        exponent_formula: "(10-3p)/(2(p-2))",
        constant_formula: "(6-p)/(2p) a^{3/2} S_p^{p/(p-2)}",
        correction_formula: "O(lambda^{-(p-q)/(p-2)})",
        note: None,
        applies: |c| c.subcritical3() && c.b == 0.0,
        exponent: |c| (ri(10) - ri(3) * c.p) / (ri(2) * (c.p - ri(2))),
        log_power: zero,
        constant: Some(|c, k| {
            let p = c.pf();
            Ok((6.0 - p) / (2.0 * p) * c.a.powf(1.5) * k.sp_pow()?)
        }),
        correction: |c| Some(c.large_correction()),
    },
    LawTemplate {
        id: "subcritical.large-b0.lp",
        quantity: Quantity::Lp,
        regime: Regime::LambdaToInfinity,
        hypotheses: "N = 3, 2 < q < p < 6, b = 0",
        exponent_formula: "(6-p)/(2(p-2))",
        constant_formula: "a^{3/2} S_p^{p/(p-2)}",
        correction_formula: "-Theta(lambda^{-(p-q)/(p-2)})",
        note: None,
        applies: |c| c.subcritical3() && c.b == 0.0,
        exponent: |c| c.e_pq(),
        log_power: zero,
        constant: Some(|c, k| Ok(c.a.powf(1.5) * k.sp_pow()?)),
        correction: |c| {
            let mut cor = c.large_correction();
            cor.kind = CorrectionKind::Theta;
            cor.negative = true;
            Some(cor)
        },
    },
];

/// Normalized-solution laws, obtained by inverting a mass law.
struct NormalizedTemplate {
    id: &'static str,
    source: &'static str,
    regime: Regime,
    quantities: &'static [Quantity],
    /// Quantities the source only states up to constants.
    ratio_only: &'static [Quantity],
    hypotheses: &'static str,
}

static NORMALIZED: &[NormalizedTemplate] = &[
    NormalizedTemplate {
        id: "normalized.critical.small",
        source: "critical.small",
        regime: Regime::LambdaToZero,
        quantities: &[
            Quantity::LambdaC,
            Quantity::Peak,
            Quantity::Grad,
            Quantity::Lp,
            Quantity::Lq,
        ],
        ratio_only: &[],
        hypotheses: "p = 2*, q != 2 + 4/N, lambda_c -> 0",
    },
    NormalizedTemplate {
        id: "normalized.critical.large",
        source: "critical.large",
        regime: Regime::LambdaToInfinity,
        quantities: &[
            Quantity::LambdaC,
            Quantity::Peak,
            Quantity::Grad,
            Quantity::Lp,
            Quantity::Lq,
        ],
        ratio_only: &[],
        hypotheses: "p = 2*, N = 4 with 2 < q < 4 or N = 3 with 4 < q < 6, lambda_c -> infinity",
    },
    NormalizedTemplate {
        id: "normalized.subcritical.small",
        source: "subcritical.small",
        regime: Regime::LambdaToZero,
        quantities: &[
            Quantity::LambdaC,
            Quantity::Peak,
            Quantity::Grad,
            Quantity::Lq,
        ],
        ratio_only: &[Quantity::Peak],
        hypotheses: "N = 3, 2 < q < p < 6, b > 0, q != 10/3, lambda_c -> 0",
    },
    NormalizedTemplate {
        id: "normalized.subcritical.large",
        source: "subcritical.large",
        regime: Regime::LambdaToInfinity,
        quantities: &[
            Quantity::LambdaC,
            Quantity::Peak,
            Quantity::Grad,
            Quantity::Lp,
        ],
        ratio_only: &[Quantity::Peak],
        hypotheses: "N = 3, 2 < q < p < 6, b > 0, p != 14/3, lambda_c -> infinity",
    },
    NormalizedTemplate {
        id: "normalized.pq.b0",
        source: "pq.b0",
        regime: Regime::AllLambda,
        quantities: &[Quantity::LambdaC, Quantity::Grad, Quantity::Lp],
        ratio_only: &[],
        hypotheses: "N = 3, b = 0, p = q != 10/3",
    },
    NormalizedTemplate {
        id: "normalized.subcritical.small-b0",
        source: "subcritical.small-b0",
        regime: Regime::LambdaToZero,
        quantities: &[Quantity::LambdaC, Quantity::Grad, Quantity::Lq],
        ratio_only: &[],
        hypotheses: "N = 3, b = 0, 10/3 != q < p, lambda_c -> 0",
    },
    NormalizedTemplate {
        id: "normalized.subcritical.large-b0",
        source: "subcritical.large-b0",
        regime: Regime::LambdaToInfinity,
        quantities: &[Quantity::LambdaC, Quantity::Grad, Quantity::Lp],
        ratio_only: &[],
        hypotheses: "N = 3, b = 0, q < p != 10/3, lambda_c -> infinity",
    },
];

fn quantity_slug(q: Quantity) -> &'static str {
    match q {
        Quantity::Mass => "mass",
        Quantity::Grad => "grad",
        Quantity::Lq => "lq",
        Quantity::Lp => "lp",
        Quantity::Peak => "peak",
        Quantity::Energy => "energy",
        Quantity::EnergyGap => "energy-gap",
        Quantity::GradGap => "grad-gap",
        Quantity::LambdaC => "lambda-c",
    }
}

fn instantiate(
    t: &LawTemplate,
    ctx: &Ctx,
    consts: &Consts,
) -> Result<AsymptoticLaw, AsymptoticsError> {
    let e = (t.exponent)(ctx);
    let k = (t.log_power)(ctx);
    let constant = match t.constant {
        Some(f) => Some(f(ctx, consts)?),
        None => None,
    };
    Ok(AsymptoticLaw {
        id: t.id.to_string(),
        quantity: t.quantity,
        regime: t.regime,
        variable: Variable::Lambda,
        exponent: rf(e),
        exponent_exact: rat_string(e),
        log_power: (k != ri(0)).then(|| rf(k)),
        constant,
        constant_formula: t.constant_formula.to_string(),
        correction: (t.correction)(ctx),
        hypotheses: t.hypotheses.to_string(),
        note: t.note.map(str::to_string),
    })
}

fn regime_matches(template: Regime, asked: Regime) -> bool {
    template == asked || template == Regime::AllLambda || asked == Regime::AllLambda
}

/// The law for `quantity` as `lambda` tends to the limit of `regime`.
pub fn predict(
    params: &ProblemParams,
    quantity: Quantity,
    regime: Regime,
    solver: &Solver,
) -> Result<AsymptoticLaw, AsymptoticsError> {
    let ctx = Ctx::new(params);
    let consts = Consts { solver, ctx };
    LAWS.iter()
        .find(|t| t.quantity == quantity && regime_matches(t.regime, regime) && (t.applies)(&ctx))
        .ok_or_else(|| {
            AsymptoticsError::NotCovered(format!(
                "no law for {} as {:?} at N={}, q={}, p={}, b={}",
                quantity_slug(quantity),
                regime,
                params.dim(),
                params.q(),
                params.p(),
                params.b()
            ))
        })
        .and_then(|t| instantiate(t, &ctx, &consts))
}

/// All laws that apply to `params`.
pub fn applicable_laws(
    params: &ProblemParams,
    solver: &Solver,
) -> Result<Vec<AsymptoticLaw>, AsymptoticsError> {
    let ctx = Ctx::new(params);
    let consts = Consts { solver, ctx };
    LAWS.iter()
        .filter(|t| (t.applies)(&ctx))
        .map(|t| instantiate(t, &ctx, &consts))
        .collect()
}

/// Laws for normalized solutions `M(lambda_c) = c^2` in the given `lambda_c` regime,
/// from inversion of the mass law: `lambda_c ~ (c^2/K)^{1/eta}` and
/// `Q(lambda_c) ~ K_Q (c^2/K)^{eta_Q/eta}`.
pub fn normalized_laws(
    params: &ProblemParams,
    regime: Regime,
    solver: &Solver,
) -> Result<Vec<AsymptoticLaw>, AsymptoticsError> {
    let ctx = Ctx::new(params);
    let consts = Consts { solver, ctx };
    let find = |id: String| LAWS.iter().find(|t| t.id == id && (t.applies)(&ctx));
    let template = NORMALIZED
        .iter()
        .find(|t| regime_matches(t.regime, regime) && find(format!("{}.mass", t.source)).is_some())
        .ok_or_else(|| {
            AsymptoticsError::NotCovered(format!("no normalized-solution law for {regime:?}"))
        })?;
    let mass_t = find(format!("{}.mass", template.source)).expect("checked above");
    let eta = (mass_t.exponent)(&ctx);
    if eta == ri(0) {
        return Err(AsymptoticsError::NotCovered(
            "mass exponent vanishes (L2-critical exponent): lambda_c is not a power of c".into(),
        ));
    }
    let kappa = (mass_t.log_power)(&ctx);
    let k_mass = match mass_t.constant {
        Some(f) => Some(f(&ctx, &consts)?),
        None => None,
    };
    let mut out = Vec::new();
    for &quantity in template.quantities {
        let (eq, kq, kq_const) = if quantity == Quantity::LambdaC {
            (ri(1), ri(0), Some(1.0))
        } else {
            let t = find(format!("{}.{}", template.source, quantity_slug(quantity))).ok_or_else(
                || AsymptoticsError::NotCovered(format!("{}: missing source row", template.id)),
            )?;
            let c = match t.constant {
                Some(f) => Some(f(&ctx, &consts)?),
                None => None,
            };
            ((t.exponent)(&ctx), (t.log_power)(&ctx), c)
        };
        // Q ~ lambda^eq (ln lambda)^kq with lambda^eta (ln lambda)^kappa ~ c^2
        let exponent = ri(2) * eq / eta;
        let log_power = if quantity == Quantity::LambdaC {
            -kappa / eta
        } else {
            kq - eq * kappa / eta
        };
        let constant = if template.ratio_only.contains(&quantity) {
            None
        } else if eq == ri(0) {
            kq_const
        } else {
            match (kq_const, k_mass) {
                (Some(cq), Some(km)) if kappa == ri(0) && kq == ri(0) => {
                    Some(cq * km.powf(-rf(eq) / rf(eta)))
                }
                _ => None,
            }
        };
        out.push(AsymptoticLaw {
            id: format!("{}.{}", template.id, quantity_slug(quantity)),
            quantity,
            regime: template.regime,
            variable: Variable::C,
            exponent: rf(exponent),
            exponent_exact: rat_string(exponent),
            log_power: (log_power != ri(0)).then(|| rf(log_power)),
            constant,
            constant_formula: if constant.is_some() {
                "K_Q K^{-eta_Q/eta} from the lambda laws".to_string()
            } else {
                RATIO_ONLY.to_string()
            },
            correction: None,
            hypotheses: template.hypotheses.to_string(),
            note: (quantity == Quantity::LambdaC && log_power != ri(0)).then(|| {
                "log factor multiplies lambda_c: lambda_c (ln lambda_c)^{-k} ~ c^e".to_string()
            }),
        });
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind", content = "value")]
pub enum LimitClass {
    Zero,
    Finite(f64),
    Infinity,
    Open,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Slope {
    Positive,
    Negative,
    Open,
}

/// Limits of `M(lambda)` and the sign of `M'` near both ends.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MassLimits {
    pub at_zero: LimitClass,
    pub at_infinity: LimitClass,
    pub slope_zero: Slope,
    pub slope_infinity: Slope,
}

fn classify_end(law: &AsymptoticLaw, toward_zero: bool) -> (LimitClass, Slope) {
    let eta = law.exponent;
    let grows = if toward_zero { eta < 0.0 } else { eta > 0.0 };
    if eta == 0.0 {
        let limit = law.constant.map_or(LimitClass::Open, LimitClass::Finite);
        (limit, Slope::Open)
    } else if grows {
        (
            LimitClass::Infinity,
            if eta > 0.0 {
                Slope::Positive
            } else {
                Slope::Negative
            },
        )
    } else {
        (
            LimitClass::Zero,
            if eta > 0.0 {
                Slope::Positive
            } else {
                Slope::Negative
            },
        )
    }
}

/// Limit classes and slope signs of the mass curve. Signs follow from the
/// exponent: `M ~ lambda^eta` gives `sign M' = sign eta` at either end.
pub fn mass_limits(
    params: &ProblemParams,
    solver: &Solver,
) -> Result<MassLimits, AsymptoticsError> {
    let end = |regime, toward_zero| match predict(params, Quantity::Mass, regime, solver) {
        Ok(law) => Ok(classify_end(&law, toward_zero)),
        Err(AsymptoticsError::NotCovered(_)) => Ok((LimitClass::Open, Slope::Open)),
        Err(e) => Err(e),
    };
    let (at_zero, mut slope_zero) = end(Regime::LambdaToZero, true)?;
    let (at_infinity, slope_infinity) = end(Regime::LambdaToInfinity, false)?;
    let ctx = Ctx::new(params);
    // q = 10/3 below p = 14/3: the first correction is negative and sets the sign
    if ctx.subcritical3() && ctx.b > 0.0 && ctx.q == Rat::new(10, 3) && ctx.p < Rat::new(14, 3) {
        slope_zero = Slope::Negative;
    }
    Ok(MassLimits {
        at_zero,
        at_infinity,
        slope_zero,
        slope_infinity,
    })
}

/// Mass thresholds `m1`, `m2` of the normalized problem.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Thresholds {
    pub m1: f64,
    pub m2: f64,
}

/// `m1 = sqrt((6-q)/(2q)) a^{3/4} S_q^{q/(2(q-2))}` and
/// `m2 = sqrt(27 b^3 (p-2)^3 (6-p)) / (4p^2) S_p^{2p/(p-2)}`.
pub fn thresholds(params: &ProblemParams, solver: &Solver) -> Result<Thresholds, AsymptoticsError> {
    let ctx = Ctx::new(params);
    if !(ctx.subcritical3() && ctx.b > 0.0) {
        return Err(AsymptoticsError::NotCovered(
            "thresholds need N = 3, b > 0 and 2 < q < p < 6".into(),
        ));
    }
    let (a, b, q, p) = (params.a(), params.b(), params.q(), params.p());
    let sq = solver.sobolev_sq(3, q)?;
    let sp = solver.sobolev_sq(3, p)?;
    Ok(Thresholds {
        m1: ((6.0 - q) / (2.0 * q)).sqrt() * a.powf(0.75) * sq.powf(q / (2.0 * (q - 2.0))),
        m2: (27.0 * b.powi(3) * (p - 2.0).powi(3) * (6.0 - p)).sqrt() / (4.0 * p * p)
            * sp.powf(2.0 * p / (p - 2.0)),
    })
}

/// Exact numbers of positive normalized solutions for small and for large `c`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PredictedCounts {
    pub small_c: u32,
    pub large_c: u32,
}

pub fn predicted_counts(params: &ProblemParams) -> Option<PredictedCounts> {
    let ctx = Ctx::new(params);
    if !(ctx.subcritical3() && ctx.b > 0.0) {
        return None;
    }
    let (q0, p0) = (Rat::new(10, 3), Rat::new(14, 3));
    use std::cmp::Ordering::*;
    let (small_c, large_c) = match (ctx.q.cmp(&q0), ctx.p.cmp(&p0)) {
        (Less, Less) | (Greater, Greater) => (1, 1),
        (Greater, Less) => (0, 2),
        (Less, Greater) => (2, 0),
        (Equal, Less) | (Greater, Equal) => (0, 1),
        (Equal, Greater) | (Less, Equal) => (1, 0),
        (Equal, Equal) => return None,
    };
    Some(PredictedCounts { small_c, large_c })
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FitError {
    #[error("need at least {needed} samples in the window, got {got}")]
    TooFewSamples { needed: usize, got: usize },
    #[error("sample at lambda={lambda} has nonpositive value {value}")]
    NonPositive { lambda: f64, value: f64 },
    #[error("degenerate window [{lo}, {hi}]")]
    DegenerateWindow { lo: f64, hi: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerFit {
    pub exponent: f64,
    pub constant: f64,
    /// Coefficient of determination of the log-log regression.
    pub r_squared: f64,
    pub samples: usize,
}

/// Least-squares fit of `value = constant * lambda^exponent * (ln lambda)^log_power`
/// with `log_power` fixed, over samples with `lambda` in `window`.
pub fn fit_power_law(
    samples: &[(f64, f64)],
    window: (f64, f64),
    log_power: f64,
) -> Result<PowerFit, FitError> {
    let (lo, hi) = window;
    if !(lo > 0.0 && hi > lo) || (log_power != 0.0 && lo <= 1.0) {
        return Err(FitError::DegenerateWindow { lo, hi });
    }
    let pts: Vec<(f64, f64)> = samples
        .iter()
        .copied()
        .filter(|&(l, _)| l >= lo && l <= hi)
        .collect();
    if pts.len() < 4 {
        return Err(FitError::TooFewSamples {
            needed: 4,
            got: pts.len(),
        });
    }
    let mut xs = Vec::with_capacity(pts.len());
    let mut ys = Vec::with_capacity(pts.len());
    for &(l, v) in &pts {
        if !(v > 0.0) {
            return Err(FitError::NonPositive {
                lambda: l,
                value: v,
            });
        }
        xs.push(l.ln());
        ys.push(if log_power == 0.0 {
            v.ln()
        } else {
            v.ln() - log_power * l.ln().ln()
        });
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    if sxx == 0.0 {
        return Err(FitError::DegenerateWindow { lo, hi });
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r_squared = if syy == 0.0 {
        1.0
    } else {
        (sxy * sxy / (sxx * syy)).min(1.0)
    };
    Ok(PowerFit {
        exponent: slope,
        constant: intercept.exp(),
        r_squared,
        samples: pts.len(),
    })
}

/// Extrapolated leading constant: least squares of `value / lambda^exponent`
/// against `lambda^correction`, returning the intercept. `correction` is the
/// signed exponent of the relative correction (negative for `lambda -> infinity`).
pub fn richardson_limit(
    samples: &[(f64, f64)],
    exponent: f64,
    correction: f64,
) -> Result<f64, FitError> {
    if samples.len() < 2 {
        return Err(FitError::TooFewSamples {
            needed: 2,
            got: samples.len(),
        });
    }
    let xs: Vec<f64> = samples.iter().map(|&(l, _)| l.powf(correction)).collect();
    let ys: Vec<f64> = samples.iter().map(|&(l, v)| v / l.powf(exponent)).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        let (lo, hi) = (samples[0].0, samples[samples.len() - 1].0);
        return Err(FitError::DegenerateWindow { lo, hi });
    }
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    Ok(my - sxy / sxx * mx)
}

/// One row of the exported law table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LawTableEntry {
    pub id: String,
    pub quantity: Quantity,
    pub regime: Regime,
    pub variable: Variable,
    pub hypotheses: String,
    pub exponent: String,
    pub constant: String,
    pub correction: String,
    pub note: Option<String>,
}

/// Symbolic law table (no parameter values).
pub fn law_table() -> Vec<LawTableEntry> {
    let mut rows: Vec<LawTableEntry> = LAWS
        .iter()
        .map(|t| LawTableEntry {
            id: t.id.to_string(),
            quantity: t.quantity,
            regime: t.regime,
            variable: Variable::Lambda,
            hypotheses: t.hypotheses.to_string(),
            exponent: t.exponent_formula.to_string(),
            constant: t.constant_formula.to_string(),
            correction: t.correction_formula.to_string(),
            note: t.note.map(str::to_string),
        })
        .collect();
    for t in NORMALIZED {
        for &q in t.quantities {
            rows.push(LawTableEntry {
                id: format!("{}.{}", t.id, quantity_slug(q)),
                quantity: q,
                regime: t.regime,
                variable: Variable::C,
                hypotheses: t.hypotheses.to_string(),
                exponent: format!(
                    "2 eta_Q / eta from {}.{{mass,{}}}",
                    t.source,
                    quantity_slug(q)
                ),
                constant: if t.ratio_only.contains(&q) {
                    RATIO_ONLY.to_string()
                } else {
                    "K_Q K^{-eta_Q/eta}".to_string()
                },
                correction: "none".to_string(),
                note: None,
            });
        }
    }
    rows
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(dim: u32, b: f64, q: f64, p: f64) -> ProblemParams {
        ProblemParams::new(dim, 1.0, b, q, p, 1.0).unwrap()
    }

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn rational_recovery() {
        assert_eq!(to_rational(10.0 / 3.0), Rat::new(10, 3));
        assert_eq!(to_rational(14.0 / 3.0), Rat::new(14, 3));
        assert_eq!(to_rational(3.5), Rat::new(7, 2));
        assert_eq!(to_rational(4.37), Rat::new(437, 100));
        assert_eq!(to_rational(6.0), ri(6));
        assert_eq!(to_rational(-0.25), Rat::new(-1, 4));
    }

    #[test]
    fn table_coverage() {
        let table = law_table();
        let mut ids: Vec<&str> = table.iter().map(|r| r.id.as_str()).collect();
        ids.sort_unstable();
        let n = ids.len();
        ids.dedup();
        assert_eq!(ids.len(), n, "duplicate law ids");
        let count = |prefix: &str| table.iter().filter(|r| r.id.starts_with(prefix)).count();
        assert_eq!(count("critical.small."), 6);
        assert_eq!(count("critical.large."), 8);
        assert_eq!(count("pq."), 10);
        assert_eq!(count("subcritical.small."), 4);
        assert_eq!(count("subcritical.small-b0."), 3);
        assert_eq!(count("subcritical.large."), 4);
        assert_eq!(count("subcritical.large-b0."), 3);
        assert_eq!(count("normalized."), 27);
        assert_eq!(n, 65);
        assert!(table
            .iter()
            .all(|r| r.constant == RATIO_ONLY || !r.constant.is_empty()));
    }

    #[test]
    fn every_family_has_a_matching_parameter_set() {
        let s = Solver::default();
        let cases = [
            (params(3, 1.0, 5.0, 6.0), 14),
            (params(4, 0.0, 3.0, 4.0), 14),
            (params(3, 1.0, 4.0, 4.0), 7),
            (params(3, 0.0, 4.0, 4.0), 4),
            (params(3, 1.0, 3.0, 4.0), 8),
            (params(3, 0.0, 3.0, 4.0), 8),
        ];
        for (pp, expected) in cases {
            let laws = applicable_laws(&pp, &s).unwrap();
            assert_eq!(laws.len(), expected, "{pp:?}");
        }
    }

    #[test]
    fn ratio_only_rows_never_carry_constants() {
        let s = Solver::default();
        for pp in [params(3, 1.0, 5.0, 6.0), params(4, 0.0, 3.0, 4.0)] {
            for law in applicable_laws(&pp, &s).unwrap() {
                assert_eq!(
                    law.constant.is_none(),
                    law.constant_formula == RATIO_ONLY,
                    "{}",
                    law.id
                );
            }
        }
    }

    #[test]
    fn documented_examples() {
        let s = Solver::default();
        let pp = params(3, 1.0, 3.0, 4.0);
        let small = predict(&pp, Quantity::Mass, Regime::LambdaToZero, &s).unwrap();
        assert_eq!(small.exponent_exact, "1/2");
        let s3 = s.sobolev_sq(3, 3.0).unwrap();
        assert!(rel(small.constant.unwrap(), 0.5 * s3.powi(3)) < 1e-14);
        let large = predict(&pp, Quantity::Mass, Regime::LambdaToInfinity, &s).unwrap();
        assert_eq!(large.exponent_exact, "1");
        let s4 = s.sobolev_sq(3, 4.0).unwrap();
        assert!(rel(large.constant.unwrap(), 27.0 / 256.0 * s4.powi(8)) < 1e-14);
        let crit = predict(
            &params(3, 1.0, 5.0, 6.0),
            Quantity::Mass,
            Regime::LambdaToInfinity,
            &s,
        )
        .unwrap();
        assert_eq!(crit.exponent_exact, "-3/2");
        assert!(crit.is_ratio_only());
    }

    #[test]
    fn uncovered_rows_are_reported() {
        let s = Solver::default();
        let pp = params(3, 1.0, 4.0, 6.0);
        assert!(matches!(
            predict(&pp, Quantity::Mass, Regime::LambdaToInfinity, &s),
            Err(AsymptoticsError::NotCovered(_))
        ));
        assert!(matches!(
            predict(
                &params(3, 1.0, 3.0, 4.0),
                Quantity::Energy,
                Regime::LambdaToZero,
                &s
            ),
            Err(AsymptoticsError::NotCovered(_))
        ));
    }

    #[test]
    fn four_dimensional_rows_carry_log_powers() {
        let s = Solver::default();
        let pp = params(4, 0.0, 3.0, 4.0);
        let gap = predict(&pp, Quantity::EnergyGap, Regime::LambdaToInfinity, &s).unwrap();
        assert_eq!(gap.exponent, -1.0);
        assert_eq!(gap.log_power, Some(-1.0));
        let mass = predict(&pp, Quantity::Mass, Regime::LambdaToInfinity, &s).unwrap();
        assert_eq!((mass.exponent, mass.log_power), (-2.0, Some(-1.0)));
        let peak = predict(&pp, Quantity::Peak, Regime::LambdaToInfinity, &s).unwrap();
        assert_eq!((peak.exponent, peak.log_power), (1.0, Some(1.0)));
    }

    #[test]
    fn normalized_exponents_invert_mass_laws() {
        let s = Solver::default();
        for &(q, p) in &[(3.0, 4.0), (3.5, 4.5), (3.0, 5.0), (4.0, 5.0), (2.5, 5.5)] {
            let pp = params(3, 1.0, q, p);
            let (qr, pr) = (to_rational(q), to_rational(p));
            let small = normalized_laws(&pp, Regime::LambdaToZero, &s).unwrap();
            let get = |v: &[AsymptoticLaw], qt| {
                v.iter()
                    .find(|l| l.quantity == qt)
                    .unwrap()
                    .exponent_exact
                    .clone()
            };
            assert_eq!(
                get(&small, Quantity::LambdaC),
                rat_string(ri(4) * (qr - ri(2)) / (ri(10) - ri(3) * qr))
            );
            assert_eq!(
                get(&small, Quantity::Peak),
                rat_string(ri(4) / (ri(10) - ri(3) * qr))
            );
            assert_eq!(
                get(&small, Quantity::Grad),
                rat_string(ri(2) * (ri(6) - qr) / (ri(10) - ri(3) * qr))
            );
            let large = normalized_laws(&pp, Regime::LambdaToInfinity, &s).unwrap();
            assert_eq!(
                get(&large, Quantity::LambdaC),
                rat_string(ri(2) * (pr - ri(2)) / (ri(14) - ri(3) * pr))
            );
            assert_eq!(
                get(&large, Quantity::Peak),
                rat_string(ri(2) / (ri(14) - ri(3) * pr))
            );
            assert_eq!(
                get(&large, Quantity::Lp),
                rat_string(ri(4) * (ri(6) - pr) / (ri(14) - ri(3) * pr))
            );
        }
    }

    #[test]
    fn normalized_constants_match_closed_forms() {
        let s = Solver::default();
        let (q, p) = (3.0f64, 4.0f64);
        let pp = params(3, 1.0, q, p);
        let sq = s.sobolev_sq(3, q).unwrap();
        let sp = s.sobolev_sq(3, p).unwrap();
        let small = normalized_laws(&pp, Regime::LambdaToZero, &s).unwrap();
        let lc = small
            .iter()
            .find(|l| l.quantity == Quantity::LambdaC)
            .unwrap();
        let expect = (2.0 * q / (6.0 - q)).powf(2.0 * (q - 2.0) / (10.0 - 3.0 * q))
            * sq.powf(-2.0 * q / (10.0 - 3.0 * q));
        assert!(rel(lc.constant.unwrap(), expect) < 1e-12);
        let large = normalized_laws(&pp, Regime::LambdaToInfinity, &s).unwrap();
        let lc = large
            .iter()
            .find(|l| l.quantity == Quantity::LambdaC)
            .unwrap();
        let k = 16.0 * p.powi(4) / (27.0 * (p - 2.0).powi(3) * (6.0 - p));
        let expect = k.powf((p - 2.0) / (14.0 - 3.0 * p)) * sp.powf(-4.0 * p / (14.0 - 3.0 * p));
        assert!(rel(lc.constant.unwrap(), expect) < 1e-12);
        // b = 0, p = q closed form
        let pq = params(3, 0.0, 4.0, 4.0);
        let laws = normalized_laws(&pq, Regime::LambdaToZero, &s).unwrap();
        let lc = laws
            .iter()
            .find(|l| l.quantity == Quantity::LambdaC)
            .unwrap();
        let expect = (p / (6.0 - p)).powf(2.0 * (p - 2.0) / (10.0 - 3.0 * p))
            * (sp / 2.0).powf(-2.0 * p / (10.0 - 3.0 * p));
        assert!(rel(lc.constant.unwrap(), expect) < 1e-12);
    }

    #[test]
    fn critical_normalized_rows() {
        let s = Solver::default();
        let large =
            normalized_laws(&params(4, 0.0, 3.0, 4.0), Regime::LambdaToInfinity, &s).unwrap();
        let lc = large
            .iter()
            .find(|l| l.quantity == Quantity::LambdaC)
            .unwrap();
        assert_eq!(lc.exponent, -1.0);
        assert_eq!(lc.log_power, Some(-0.5));
        let small = normalized_laws(&params(3, 1.0, 3.0, 6.0), Regime::LambdaToZero, &s).unwrap();
        let lc = small
            .iter()
            .find(|l| l.quantity == Quantity::LambdaC)
            .unwrap();
        assert_eq!(lc.exponent_exact, "4");
        assert!(lc.constant.is_some());
    }

    #[test]
    fn mass_limit_rows() {
        let s = Solver::default();
        let m = mass_limits(&params(3, 1.0, 3.0, 4.0), &s).unwrap();
        assert_eq!(
            (m.at_zero, m.at_infinity),
            (LimitClass::Zero, LimitClass::Infinity)
        );
        assert_eq!(
            (m.slope_zero, m.slope_infinity),
            (Slope::Positive, Slope::Positive)
        );
        let m = mass_limits(&params(3, 1.0, 4.0, 5.0), &s).unwrap();
        assert_eq!(
            (m.at_zero, m.at_infinity),
            (LimitClass::Infinity, LimitClass::Zero)
        );
        assert_eq!(
            (m.slope_zero, m.slope_infinity),
            (Slope::Negative, Slope::Negative)
        );
        let m = mass_limits(&params(3, 1.0, 10.0 / 3.0, 4.0), &s).unwrap();
        let t = thresholds(&params(3, 1.0, 10.0 / 3.0, 4.0), &s).unwrap();
        match m.at_zero {
            LimitClass::Finite(v) => assert!(rel(v, t.m1 * t.m1) < 1e-12),
            other => panic!("{other:?}"),
        }
        assert_eq!(m.slope_zero, Slope::Negative);
        let m = mass_limits(&params(3, 1.0, 10.0 / 3.0, 5.0), &s).unwrap();
        assert_eq!(m.slope_zero, Slope::Open);
        let pp = params(3, 1.0, 3.0, 14.0 / 3.0);
        let m = mass_limits(&pp, &s).unwrap();
        let t = thresholds(&pp, &s).unwrap();
        match m.at_infinity {
            LimitClass::Finite(v) => assert!(rel(v, t.m2 * t.m2) < 1e-12),
            other => panic!("{other:?}"),
        }
        assert_eq!(m.slope_infinity, Slope::Open);
        let m = mass_limits(&params(3, 1.0, 3.5, 6.0), &s).unwrap();
        assert_eq!(
            (m.at_zero, m.at_infinity),
            (LimitClass::Infinity, LimitClass::Open)
        );
        let m = mass_limits(&params(4, 0.0, 3.0, 4.0), &s).unwrap();
        assert!(matches!(m.at_zero, LimitClass::Finite(_)));
        assert_eq!(
            (m.at_infinity, m.slope_infinity),
            (LimitClass::Zero, Slope::Negative)
        );
    }

    #[test]
    fn prediction_counts_table() {
        let c = |q, p| predicted_counts(&params(3, 1.0, q, p)).map(|c| (c.small_c, c.large_c));
        assert_eq!(c(3.0, 4.0), Some((1, 1)));
        assert_eq!(c(3.5, 4.5), Some((0, 2)));
        assert_eq!(c(3.0, 5.0), Some((2, 0)));
        assert_eq!(c(4.0, 5.0), Some((1, 1)));
        assert_eq!(c(10.0 / 3.0, 4.0), Some((0, 1)));
        assert_eq!(c(3.0, 14.0 / 3.0), Some((1, 0)));
        assert_eq!(predicted_counts(&params(3, 0.0, 3.0, 4.0)), None);
    }

    #[test]
    fn fits_recover_exact_laws() {
        let xs: Vec<f64> = (0..20).map(|i| 10f64.powf(i as f64 / 5.0)).collect();
        let sq: Vec<(f64, f64)> = xs.iter().map(|&l| (l, 3.0 * l * l)).collect();
        let f = fit_power_law(&sq, (1.0, 1e4), 0.0).unwrap();
        assert!((f.exponent - 2.0).abs() < 1e-12 && (f.constant - 3.0).abs() < 1e-11);
        assert!((f.r_squared - 1.0).abs() < 1e-12);
        let flat: Vec<(f64, f64)> = xs.iter().map(|&l| (l, 5.0)).collect();
        let f = fit_power_law(&flat, (1.0, 1e4), 0.0).unwrap();
        assert!(f.exponent.abs() < 1e-13 && (f.constant - 5.0).abs() < 1e-12);
        let logged: Vec<(f64, f64)> = xs[1..].iter().map(|&l| (l, 0.7 / (l * l.ln()))).collect();
        let f = fit_power_law(&logged, (1.5, 1e4), -1.0).unwrap();
        assert!((f.exponent + 1.0).abs() < 1e-12 && (f.constant - 0.7).abs() < 1e-12);
    }

    #[test]
    fn fit_errors() {
        let few = [(1.0, 1.0), (2.0, 2.0)];
        assert!(matches!(
            fit_power_law(&few, (0.5, 3.0), 0.0),
            Err(FitError::TooFewSamples { .. })
        ));
        let bad = [(1.0, 1.0), (2.0, -2.0), (3.0, 1.0), (4.0, 1.0)];
        assert!(matches!(
            fit_power_law(&bad, (0.5, 5.0), 0.0),
            Err(FitError::NonPositive { .. })
        ));
        assert!(matches!(
            fit_power_law(&bad, (5.0, 5.0), 0.0),
            Err(FitError::DegenerateWindow { .. })
        ));
    }

    #[test]
    fn richardson_removes_known_correction() {
        let samples: Vec<(f64, f64)> = [1e3, 2e3, 5e3, 1e4]
            .iter()
            .map(|&l: &f64| (l, l * (2.5 + 4.0 * l.powf(-0.5))))
            .collect();
        let k = richardson_limit(&samples, 1.0, -0.5).unwrap();
        assert!((k - 2.5).abs() < 1e-12);
    }

    #[test]
    fn law_table_serializes() {
        let json = serde_json_like(&law_table());
        assert!(json.contains("critical.large.energy-gap"));
    }

    fn serde_json_like(rows: &[LawTableEntry]) -> String {
        rows.iter()
            .map(|r| format!("{}|{}|{}", r.id, r.exponent, r.constant))
            .collect::<Vec<_>>()
            .join("\n")
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(64))]
            #[test]
            fn fit_recovers_synthetic_exponents(e in -3.0f64..3.0, k in 0.01f64..100.0) {
                let samples: Vec<(f64, f64)> = (0..12).map(|i| {
                    let l = 10f64.powf(-2.0 + i as f64 * 0.4);
                    (l, k * l.powf(e))
                }).collect();
                let f = fit_power_law(&samples, (1e-3, 1e3), 0.0).unwrap();
                prop_assert!((f.exponent - e).abs() < 1e-10);
                prop_assert!((f.constant / k - 1.0).abs() < 1e-9);
            }

            #[test]
            fn rational_roundtrip(n in -500i64..500, d in 1i64..300) {
                let r = to_rational(n as f64 / d as f64);
                prop_assert_eq!(r, Rat::new(n as i128, d as i128));
            }
        }
    }
}
