use std::collections::HashSet;
use std::f64::consts::PI;

use kirchhoff_core::asymptotics::{law_table, predict, Quantity, Regime};
use kirchhoff_core::quadrature::{
    best_sobolev_constant, identity_residuals, norm_bundle, talenti_profile,
};
use kirchhoff_core::radial_ode::solve_scalar_field;
use kirchhoff_core::{Controls, NormBundle, NormalizationTag, ProblemParams, ScalarField, Solver};
use serde::Serialize;

use crate::args::{Format, Suite, ValidateArgs};
use crate::commands::{load_controls, with_ext, with_workers, write_file, write_json, Outcome};
use crate::CliError;

#[derive(Debug, Clone, Serialize)]
struct Check {
    name: String,
    passed: bool,
    residual: f64,
    tolerance: f64,
    detail: String,
}

#[derive(Serialize)]
struct ValidationReport {
    suite: &'static str,
    controls: Controls,
    passed: bool,
    checks: Vec<Check>,
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

fn check(
    name: impl Into<String>,
    residual: f64,
    tolerance: f64,
    detail: impl Into<String>,
) -> Check {
    Check {
        name: name.into(),
        passed: residual <= tolerance,
        residual,
        tolerance,
        detail: detail.into(),
    }
}

fn failed(name: impl Into<String>, detail: impl ToString) -> Check {
    Check {
        name: name.into(),
        passed: false,
        residual: f64::NAN,
        tolerance: 0.0,
        detail: detail.to_string(),
    }
}

/// Ground state of `-W'' + W = W^{p-1}` on the line against its sech closed form.
fn soliton(c: &Controls, p: f64) -> Check {
    let name = format!("soliton p={p}");
    let eq = ScalarField::single(1, p, 1.0);
    let prof = match solve_scalar_field(&eq, c) {
        Ok(v) => v,
        Err(e) => return failed(name, e),
    };
    let amp = (p / 2.0).powf(1.0 / (p - 2.0));
    let exact = |r: f64| amp * (1.0 / ((p - 2.0) * r / 2.0).cosh()).powf(2.0 / (p - 2.0));
    let worst = (0..3000)
        .map(|i| i as f64 * 0.01)
        .map(|r| (prof.evaluate(r) - exact(r)).abs())
        .fold(0.0, f64::max);
    check(name, worst, 1e-8, "sup error on [0, 30]")
}

/// Norms of `W(x/t)` scale as `t^{N-2}` (gradient) and `t^N` (the rest).
fn dilation(c: &Controls, dim: u32, t: f64) -> Check {
    let name = format!("dilation N={dim} t={t}");
    let eq = ScalarField::new(dim, 3.0, 3.5, 1.0, 1.0);
    let run = || -> Result<(NormBundle, NormBundle), String> {
        let prof = solve_scalar_field(&eq, c).map_err(|e| e.to_string())?;
        let base = norm_bundle(&prof, &eq).map_err(|e| e.to_string())?;
        let scaled = norm_bundle(&prof.dilate(t), &eq).map_err(|e| e.to_string())?;
        Ok((base, scaled))
    };
    match run() {
        Ok((n, s)) => {
            let d = dim as f64;
            let worst = [
                rel(s.grad, t.powf(d - 2.0) * n.grad),
                rel(s.mass, t.powf(d) * n.mass),
                rel(s.lq, t.powf(d) * n.lq),
                rel(s.lp, t.powf(d) * n.lp),
            ]
            .into_iter()
            .fold(0.0, f64::max);
            check(
                name,
                worst,
                1e-9,
                "worst relative deviation of the scaled norms",
            )
        }
        Err(e) => failed(name, e),
    }
}

fn identities(c: &Controls, (dim, q, p, mq, mp): (u32, f64, f64, f64, f64)) -> Check {
    let name = format!("identities N={dim} q={q} p={p} mu=({mq},{mp})");
    let eq = ScalarField::new(dim, q, p, mq, mp);
    let res = solve_scalar_field(&eq, c)
        .map_err(|e| e.to_string())
        .and_then(|prof| norm_bundle(&prof, &eq).map_err(|e| e.to_string()));
    match res {
        Ok(n) => {
            let r = identity_residuals(&n, &eq);
            check(
                name,
                r.max(),
                c.identity_tol,
                format!("nehari {:.2e}, pohozaev {:.2e}", r.nehari, r.pohozaev),
            )
        }
        Err(e) => failed(name, e),
    }
}

/// `S = N(N-2)/4 |S^N|^{2/N}` with `|S^3| = 2 pi^2`, `|S^4| = 8 pi^2 / 3`.
fn talenti(dim: u32) -> Check {
    let exact = match dim {
        3 => 0.75 * (2.0 * PI * PI).powf(2.0 / 3.0),
        _ => 2.0 * (8.0 * PI * PI / 3.0).sqrt(),
    };
    let peak = talenti_profile(dim).peak();
    let peak_exact = if dim == 3 {
        3f64.powf(0.25)
    } else {
        2.0 * 2f64.sqrt()
    };
    let worst = rel(best_sobolev_constant(dim), exact).max(rel(peak, peak_exact));
    check(
        format!("sobolev constant N={dim}"),
        worst,
        1e-6,
        format!("S = {:.12}", best_sobolev_constant(dim)),
    )
}

fn pq_oracle(s: &Solver, b: f64, lambda: f64) -> Check {
    let name = format!("p=q oracle b={b} lambda={lambda}");
    let run = || -> Result<f64, String> {
        let pp = ProblemParams::new(3, 1.0, b, 4.0, 4.0, lambda).map_err(|e| e.to_string())?;
        let g = s.ground_state(&pp).map_err(|e| e.to_string())?;
        let e = s.exact_pq_solution(&pp).map_err(|e| e.to_string())?;
        Ok([
            (g.varpi, e.varpi),
            (g.peak, e.peak),
            (g.norms.grad, e.norms.grad),
            (g.norms.mass, e.norms.mass),
        ]
        .into_iter()
        .map(|(x, y)| rel(x, y))
        .fold(0.0, f64::max))
    };
    match run() {
        Ok(w) => check(
            name,
            w,
            1e-6,
            "worst relative deviation from the closed form",
        ),
        Err(e) => failed(name, e),
    }
}

fn tag_independence(s: &Solver, q: f64, p: f64) -> Check {
    let name = format!("normalization independence q={q} p={p}");
    let run = || -> Result<f64, String> {
        let pp = ProblemParams::new(3, 1.0, 1.0, q, p, 1.0).map_err(|e| e.to_string())?;
        let a = s
            .ground_state_with_tag(&pp, NormalizationTag::SmallLambda)
            .map_err(|e| e.to_string())?;
        let b = s
            .ground_state_with_tag(&pp, NormalizationTag::LargeLambda)
            .map_err(|e| e.to_string())?;
        Ok([
            (a.norms.grad, b.norms.grad),
            (a.norms.mass, b.norms.mass),
            (a.norms.energy, b.norms.energy),
            (a.varpi, b.varpi),
            (a.peak, b.peak),
        ]
        .into_iter()
        .map(|(x, y)| rel(x, y))
        .fold(0.0, f64::max))
    };
    match run() {
        Ok(w) => check(name, w, 1e-6, "worst relative deviation between rescalings"),
        Err(e) => failed(name, e),
    }
}

/// Unique ids, and a mass law at both ends for one parameter set per family.
fn coverage(s: &Solver) -> Check {
    let table = law_table();
    let unique: HashSet<&str> = table.iter().map(|r| r.id.as_str()).collect();
    if unique.len() != table.len() {
        return failed("law table coverage", "duplicate law ids");
    }
    let families = [
        (3, 1.0, 5.0, 6.0),
        (4, 0.0, 3.0, 4.0),
        (3, 1.0, 4.0, 4.0),
        (3, 1.0, 3.0, 4.0),
        (3, 0.0, 3.0, 4.0),
    ];
    let mut missing = Vec::new();
    for (dim, b, q, p) in families {
        let Ok(pp) = ProblemParams::new(dim, 1.0, b, q, p, 1.0) else {
            missing.push(format!("N={dim} b={b} q={q} p={p}: invalid"));
            continue;
        };
        for regime in [Regime::LambdaToZero, Regime::LambdaToInfinity] {
            if predict(&pp, Quantity::Mass, regime, s).is_err() {
                missing.push(format!("N={dim} b={b} q={q} p={p} {regime:?}"));
            }
        }
    }
    let detail = if missing.is_empty() {
        format!("{} rows", table.len())
    } else {
        missing.join("; ")
    };
    check("law table coverage", missing.len() as f64, 0.0, detail)
}

fn run_suite(suite: Suite, controls: Controls) -> Vec<Check> {
    let s = Solver::new(controls);
    let c = &controls;
    let full = suite == Suite::Full;
    let mut out = Vec::new();
    let ps: &[f64] = if full { &[3.0, 4.0, 6.0] } else { &[4.0] };
    out.extend(ps.iter().map(|&p| soliton(c, p)));
    for dim in [3, 4] {
        let ts: &[f64] = if full { &[0.5, 2.0, 7.0] } else { &[2.0] };
        out.extend(ts.iter().map(|&t| dilation(c, dim, t)));
    }
    let mut cases = vec![
        (3, 3.0, 4.0, 1.0, 1.0),
        (4, 3.0, 3.5, 1.0, 1.0),
        (3, 5.0, 6.0, 1.0, 1.0),
    ];
    if full {
        cases.extend([
            (1, 3.0, 4.0, 1.0, 1.0),
            (3, 3.0, 4.0, 1.0, 0.1),
            (3, 3.0, 5.0, 0.1, 1.0),
            (3, 3.5, 5.5, 1.0, 1.0),
            (3, 4.5, 6.0, 1.0, 0.1),
            (3, 4.5, 6.0, 1.0, 1.0),
            (3, 5.0, 6.0, 1.0, 0.1),
            (4, 3.0, 4.0, 1.0, 0.1),
            (4, 3.0, 4.0, 1.0, 1.0),
        ]);
    }
    out.extend(cases.into_iter().map(|k| identities(c, k)));
    out.extend([talenti(3), talenti(4)]);
    let lambdas: &[f64] = if full {
        &[1e-3, 1e-1, 1.0, 10.0, 1e3]
    } else {
        &[0.1, 10.0]
    };
    for b in [1.0, 0.0] {
        out.extend(lambdas.iter().map(|&l| pq_oracle(&s, b, l)));
    }
    out.push(tag_independence(&s, 3.0, 4.0));
    if full {
        out.push(tag_independence(&s, 3.5, 5.0));
    }
    out.push(coverage(&s));
    out
}

pub fn run(a: &ValidateArgs) -> Outcome {
    let controls = load_controls(&a.common)?;
    let checks = with_workers(a.common.workers, || run_suite(a.suite, controls))?;
    let passed = checks.iter().all(|c| c.passed);
    for c in &checks {
        eprintln!(
            "{} {}: {:.2e} ({})",
            if c.passed { "PASS" } else { "FAIL" },
            c.name,
            c.residual,
            c.detail
        );
    }
    let suite = match a.suite {
        Suite::Quick => "quick",
        Suite::Full => "full",
    };
    let report = ValidationReport {
        suite,
        controls,
        passed,
        checks: checks.clone(),
    };
    let json = with_ext(&a.common.out, "json");
    let mut paths = Vec::new();
    if a.common.format == Format::Csv {
        let csv = with_ext(&a.common.out, "csv");
        let mut text = String::from("name,passed,residual,tolerance\n");
        for c in &checks {
            text.push_str(&format!(
                "\"{}\",{},{:e},{:e}\n",
                c.name, c.passed, c.residual, c.tolerance
            ));
        }
        write_file(&csv, &text)?;
        paths.push(csv);
    }
    write_json(&json, &report)?;
    paths.push(json);
    if passed {
        Ok(paths)
    } else {
        let n = checks.iter().filter(|c| !c.passed).count();
        Err(CliError::Validation(format!(
            "{n} check(s) failed; see {}",
            paths.last().unwrap().display()
        )))
    }
}
