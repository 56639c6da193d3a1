//! Benchmark fixtures.

use kirchhoff_core::{Controls, ProblemParams};

/// Representative parameter sets used by the benches.
pub fn fixtures() -> Vec<(&'static str, ProblemParams)> {
    vec![
        (
            "subcritical-3d",
            ProblemParams::new(3, 1.0, 1.0, 3.0, 4.0, 1.0).unwrap(),
        ),
        (
            "critical-3d",
            ProblemParams::new(3, 1.0, 1.0, 5.0, 6.0, 1.0).unwrap(),
        ),
        (
            "pq-equal-3d",
            ProblemParams::new(3, 1.0, 1.0, 4.0, 4.0, 1.0).unwrap(),
        ),
        (
            "subcritical-4d-b0",
            ProblemParams::new(4, 1.0, 0.0, 3.0, 3.5, 1.0).unwrap(),
        ),
    ]
}

pub fn controls() -> Controls {
    Controls::default()
}

#[cfg(test)]
mod tests {
    use kirchhoff_core::Solver;

    #[test]
    fn fixtures_solve() {
        let s = Solver::new(super::controls());
        for (name, p) in super::fixtures() {
            let g = s.ground_state(&p).unwrap_or_else(|e| panic!("{name}: {e}"));
            assert!(g.residuals.max() < 1e-6, "{name}");
        }
    }
}
