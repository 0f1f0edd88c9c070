//! Seeded cross-checks between independent evaluation routes.

use std::fmt::Write as _;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::fock::FockOracle;
use crate::phase::{CoherentSuperposition, PhaseGrid, PhasePoint};
use crate::solver::{minimize_wigner, MinimizationSpec};
use crate::wigner::{
    quasi_characteristic, wigner_direct_with, CharacteristicPoint, FourierReconstruction, KernelVariant,
    QuadratureSpec,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    Qndm,
    Rescaling,
    DiagonalPositivity,
    PathEquivalence,
}

impl Suite {
    pub const ALL: [Suite; 4] = [
        Suite::Qndm,
        Suite::Rescaling,
        Suite::DiagonalPositivity,
        Suite::PathEquivalence,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Qndm => "qndm",
            Suite::Rescaling => "rescaling",
            Suite::DiagonalPositivity => "diagonal-positivity",
            Suite::PathEquivalence => "path-equivalence",
        }
    }

    fn stream(self) -> u64 {
        match self {
            Suite::Qndm => 1,
            Suite::Rescaling => 2,
            Suite::DiagonalPositivity => 3,
            Suite::PathEquivalence => 4,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckResult {
    pub suite: &'static str,
    pub check: &'static str,
    pub samples: usize,
    pub max_error: f64,
    pub tolerance: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyReport {
    pub seed: u64,
    pub checks: Vec<CheckResult>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckResult> {
        self.checks.iter().filter(|c| !c.passed)
    }

    /// Fixed-width pass/fail table.
    pub fn render(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "seed {}", self.seed);
        let _ = writeln!(
            out,
            "{:<20} {:<22} {:>7} {:>12} {:>10}  result",
            "suite", "check", "samples", "max_error", "tolerance"
        );
        for c in &self.checks {
            let _ = writeln!(
                out,
                "{:<20} {:<22} {:>7} {:>12.3e} {:>10.1e}  {}",
                c.suite,
                c.check,
                c.samples,
                c.max_error,
                c.tolerance,
                if c.passed { "PASS" } else { "FAIL" }
            );
        }
        let _ = writeln!(out, "{}", if self.passed() { "all checks passed" } else { "verification FAILED" });
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyOptions {
    pub seed: u64,
    pub suites: Vec<Suite>,
    /// Kernel used by the direct route; `Flipped` is a mutation check.
    pub kernel: KernelVariant,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self {
            seed: 0,
            suites: Suite::ALL.to_vec(),
            kernel: KernelVariant::Standard,
        }
    }
}

struct Tracker {
    suite: &'static str,
    check: &'static str,
    tolerance: f64,
    samples: usize,
    worst: f64,
}

impl Tracker {
    fn new(suite: Suite, check: &'static str, tolerance: f64) -> Self {
        Self {
            suite: suite.name(),
            check,
            tolerance,
            samples: 0,
            worst: 0.0,
        }
    }

    fn record(&mut self, err: f64) {
        self.samples += 1;
        // NaN counts as a failure
        if err.is_nan() || err > self.worst {
            self.worst = if err.is_nan() { f64::INFINITY } else { err };
        }
    }

    fn record_result(&mut self, err: Result<f64>) {
        self.record(err.unwrap_or(f64::INFINITY));
    }

    fn finish(self) -> CheckResult {
        CheckResult {
            suite: self.suite,
            check: self.check,
            samples: self.samples,
            max_error: self.worst,
            tolerance: self.tolerance,
            passed: self.worst <= self.tolerance,
        }
    }
}

fn disk_point(rng: &mut ChaCha8Rng, radius: f64) -> Complex64 {
    Complex64::from_polar(radius * rng.random::<f64>().sqrt(), std::f64::consts::TAU * rng.random::<f64>())
}

/// Random n-component state: a pure superposition with its coherences scaled by a random factor.
pub fn random_state(rng: &mut ChaCha8Rng, n: usize, max_beta: f64) -> CoherentSuperposition {
    loop {
        let betas: Vec<Complex64> = (0..n).map(|_| disk_point(rng, max_beta)).collect();
        let amps: Vec<Complex64> = (0..n)
            .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            .collect();
        let keep = rng.random::<f64>();
        if let Ok(s) = CoherentSuperposition::pure(betas, &amps).and_then(|s| s.dephased(keep)) {
            if s.norm() > 1e-3 {
                return s;
            }
        }
    }
}

/// Random incoherent mixture of up to `max_n` components.
pub fn random_mixture(rng: &mut ChaCha8Rng, max_n: usize, max_beta: f64) -> CoherentSuperposition {
    let n = rng.random_range(1..=max_n);
    let betas: Vec<Complex64> = (0..n).map(|_| disk_point(rng, max_beta)).collect();
    let raw: Vec<f64> = (0..n).map(|_| rng.random::<f64>() + 1e-3).collect();
    let total: f64 = raw.iter().sum();
    let weights: Vec<f64> = raw.iter().map(|w| w / total).collect();
    CoherentSuperposition::diagonal_mixture(betas, &weights).expect("positive weights")
}

fn qndm(rng: &mut ChaCha8Rng, kernel: KernelVariant) -> Result<Vec<CheckResult>> {
    let oracle = FockOracle::new(64)?;
    let mut split = Tracker::new(Suite::Qndm, "sequential=displacement", 1e-10);
    let mut closed = Tracker::new(Suite::Qndm, "fock=closed-form", 1e-8);
    let mut parity = Tracker::new(Suite::Qndm, "parity-wigner=kernel", 1e-10);
    for i in 0..100 {
        let state = random_state(rng, 2, 2.0);
        let cp = CharacteristicPoint {
            lambda: rng.random_range(-4.0..4.0),
            eta: rng.random_range(-4.0..4.0),
        };
        let seq = oracle.characteristic_sequential(&state, cp)?;
        let disp = oracle.characteristic_displacement(&state, cp)?;
        let g = quasi_characteristic(&state, cp);
        split.record((seq - disp).norm());
        closed.record((seq - g).norm().max((disp - g).norm()));
        if i % 5 == 0 {
            let pt = PhasePoint {
                x: rng.random_range(-2.5..2.5),
                p: rng.random_range(-2.5..2.5),
            };
            let w = oracle.wigner_parity(&state, pt)?;
            parity.record_result(wigner_direct_with(&state, pt, kernel).map(|v| (v - w).abs()));
        }
    }
    Ok(vec![split.finish(), closed.finish(), parity.finish()])
}

fn rescaling(rng: &mut ChaCha8Rng, kernel: KernelVariant) -> Result<Vec<CheckResult>> {
    let mut t = Tracker::new(Suite::Rescaling, "sigma-rescaled-direct", 1e-10);
    for _ in 0..20 {
        let n = rng.random_range(1..=4);
        let state = random_state(rng, n, 3.0);
        for c in [0.5, 2.0] {
            let scaled = state.with_sigma(state.sigma() * c)?;
            for _ in 0..10 {
                let pt = PhasePoint {
                    x: rng.random_range(-5.0..5.0),
                    p: rng.random_range(-5.0..5.0),
                };
                let moved = PhasePoint {
                    x: c * pt.x,
                    p: pt.p / c,
                };
                let err = wigner_direct_with(&state, pt, kernel)
                    .and_then(|w| Ok((wigner_direct_with(&scaled, moved, kernel)? - w).abs()));
                t.record_result(err);
            }
        }
    }
    Ok(vec![t.finish()])
}

fn diagonal_positivity(rng: &mut ChaCha8Rng) -> Result<Vec<CheckResult>> {
    let mut t = Tracker::new(Suite::DiagonalPositivity, "min-w>=-1e-12", 1e-12);
    for _ in 0..50 {
        let state = random_mixture(rng, 8, 3.0);
        let m = minimize_wigner(&state, &MinimizationSpec::auto(&state));
        t.record_result(m.map(|m| (-m.value).max(0.0)));
    }
    Ok(vec![t.finish()])
}

fn path_equivalence(rng: &mut ChaCha8Rng, kernel: KernelVariant) -> Result<Vec<CheckResult>> {
    let mut t = Tracker::new(Suite::PathEquivalence, "direct=fourier", 1e-6);
    for _ in 0..4 {
        let n = rng.random_range(1..=3);
        let state = random_state(rng, n, 2.0);
        let half = std::f64::consts::SQRT_2 * state.max_abs_beta() + 3.0;
        let grid = PhaseGrid::symmetric(half, 21)?;
        let rec = FourierReconstruction::new(&state, QuadratureSpec::for_state(&state))?;
        let values = rec.eval_grid(&grid);
        for (idx, f) in values.iter().enumerate() {
            let pt = grid.node(idx / grid.np, idx % grid.np);
            t.record_result(wigner_direct_with(&state, pt, kernel).map(|w| (w - f).abs()));
        }
    }
    Ok(vec![t.finish()])
}

pub fn run(opts: &VerifyOptions) -> Result<VerifyReport> {
    let mut checks = Vec::new();
    for suite in &opts.suites {
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed.wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ suite.stream());
        checks.extend(match suite {
            Suite::Qndm => qndm(&mut rng, opts.kernel)?,
            Suite::Rescaling => rescaling(&mut rng, opts.kernel)?,
            Suite::DiagonalPositivity => diagonal_positivity(&mut rng)?,
            Suite::PathEquivalence => path_equivalence(&mut rng, opts.kernel)?,
        });
    }
    Ok(VerifyReport { seed: opts.seed, checks })
}
