//! Global minimization of W, negativity certificates and critical coherence.
//!
//! The search is a coarse grid scan followed by coordinate descent from the
//! best discrete local minima. Seeds come from W itself and from W relative
//! to its incoherent envelope, which locates negativity hidden in the tails.

use std::f64::consts::{PI, SQRT_2};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::phase::{CoherentSuperposition, PhaseGrid, PhasePoint};
use crate::wigner::DirectEvaluator;

/// Default certification threshold.
pub const DEFAULT_ABS_TOL: f64 = 1e-12;

/// Largest coarse step, in units of σ.
pub const MAX_STEP: f64 = 0.1;

/// Search box, coarse grid and refinement controls.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MinimizationSpec {
    pub x_min: f64,
    pub x_max: f64,
    pub p_min: f64,
    pub p_max: f64,
    pub nx: usize,
    pub np: usize,
    pub refine_iters: usize,
    pub refine_tol: f64,
    pub starts: usize,
}

impl MinimizationSpec {
    pub fn new(bounds: [f64; 4], nx: usize, np: usize, refine_iters: usize, refine_tol: f64) -> Result<Self> {
        PhaseGrid::new(bounds[0], bounds[1], bounds[2], bounds[3], nx, np)?;
        if !(refine_tol.is_finite() && refine_tol > 0.0) {
            return Err(Error::InvalidParameter(format!("refine_tol {refine_tol} must be positive")));
        }
        Ok(Self {
            x_min: bounds[0],
            x_max: bounds[1],
            p_min: bounds[2],
            p_max: bounds[3],
            nx,
            np,
            refine_iters,
            refine_tol,
            starts: 5,
        })
    }

    /// Box ±(√2 max|β| + 5), step min(fringe/6, 0.1) with fringe π/(2√2 max|β|).
    pub fn auto(state: &CoherentSuperposition) -> Self {
        let s = state.sigma();
        let b = state.max_abs_beta();
        let half = SQRT_2 * b + 5.0;
        let step = if b > 0.0 {
            (PI / (2.0 * SQRT_2 * b) / 6.0).min(MAX_STEP)
        } else {
            MAX_STEP
        };
        let n = (2.0 * half / step).ceil() as usize + 1;
        Self {
            x_min: -half * s,
            x_max: half * s,
            p_min: -half / s,
            p_max: half / s,
            nx: n,
            np: n,
            refine_iters: 500,
            refine_tol: 1e-10,
            starts: 5,
        }
    }

    pub fn with_box(self, bounds: [f64; 4]) -> Result<Self> {
        Self::new(bounds, self.nx, self.np, self.refine_iters, self.refine_tol).map(|s| Self {
            starts: self.starts,
            ..s
        })
    }

    pub fn with_grid(self, nx: usize, np: usize) -> Result<Self> {
        let b = [self.x_min, self.x_max, self.p_min, self.p_max];
        Self::new(b, nx, np, self.refine_iters, self.refine_tol).map(|s| Self {
            starts: self.starts,
            ..s
        })
    }

    pub fn grid(&self) -> PhaseGrid {
        PhaseGrid::new(self.x_min, self.x_max, self.p_min, self.p_max, self.nx, self.np)
            .expect("spec holds a valid grid")
    }

    fn on_boundary(&self, pt: PhasePoint) -> bool {
        let g = self.grid();
        let (tx, tp) = (0.5 * g.dx(), 0.5 * g.dp());
        pt.x <= self.x_min + tx || pt.x >= self.x_max - tx || pt.p <= self.p_min + tp || pt.p >= self.p_max - tp
    }
}

/// Best value found and where.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Minimum {
    pub value: f64,
    pub point: PhasePoint,
    pub evaluations: usize,
}

/// Outcome of [`certify_negativity`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub negative: bool,
    pub min: f64,
    pub x: f64,
    pub p: f64,
    pub evals: usize,
}

/// A state whose coherences ρ_jk (j ≠ k) are scaled by Δ ∈ [0, 1].
///
/// The diagonal and coherent parts are tabulated once on the coarse grid, so
/// every Δ reuses the same scan.
#[derive(Debug, Clone)]
pub struct DephasedFamily {
    base: CoherentSuperposition,
    evaluator: DirectEvaluator,
    spec: MinimizationSpec,
    grid: PhaseGrid,
    diag: Vec<f64>,
    coh: Vec<f64>,
    norm_diag: f64,
    norm_coh: f64,
}

impl DephasedFamily {
    /// `base` is the member at Δ = 1.
    pub fn new(base: CoherentSuperposition, spec: MinimizationSpec) -> Self {
        let evaluator = DirectEvaluator::new(&base);
        let grid = spec.grid();
        let parts: Vec<(f64, f64)> = (0..grid.len())
            .into_par_iter()
            .map(|idx| {
                let p = evaluator.parts(grid.node(idx / grid.np, idx % grid.np));
                (p.diagonal, p.coherent)
            })
            .collect();
        let (diag, coh) = parts.into_iter().unzip();
        let norm_diag: f64 = (0..base.len()).map(|j| base.coeff(j, j).re).sum();
        Self {
            norm_coh: base.norm() - norm_diag,
            norm_diag,
            evaluator,
            spec,
            grid,
            diag,
            coh,
            base,
        }
    }

    pub fn base(&self) -> &CoherentSuperposition {
        &self.base
    }

    pub fn spec(&self) -> &MinimizationSpec {
        &self.spec
    }

    pub fn state_at(&self, delta: f64) -> Result<CoherentSuperposition> {
        self.base.dephased(delta)
    }

    pub fn norm_at(&self, delta: f64) -> f64 {
        self.norm_diag + delta * self.norm_coh
    }

    pub fn wigner_at(&self, delta: f64, pt: PhasePoint) -> f64 {
        let p = self.evaluator.parts(pt);
        (p.diagonal + delta * p.coherent) / self.norm_at(delta)
    }

    fn ratio_at(&self, delta: f64, pt: PhasePoint) -> f64 {
        let p = self.evaluator.parts(pt);
        if p.diagonal > 0.0 {
            1.0 + delta * p.coherent / p.diagonal
        } else {
            f64::INFINITY
        }
    }

    /// Coarse scan plus multistart coordinate descent at coherence Δ.
    pub fn minimize(&self, delta: f64) -> Result<Minimum> {
        if !(0.0..=1.0).contains(&delta) {
            return Err(Error::InvalidParameter(format!("delta {delta} outside [0, 1]")));
        }
        let norm = self.norm_at(delta);
        let n = self.grid.len();
        let values: Vec<f64> = (0..n).map(|i| (self.diag[i] + delta * self.coh[i]) / norm).collect();
        let ratios: Vec<f64> = (0..n)
            .map(|i| {
                if self.diag[i] > 0.0 {
                    1.0 + delta * self.coh[i] / self.diag[i]
                } else {
                    f64::INFINITY
                }
            })
            .collect();

        // lowest value, first in row-major order on ties
        let mut best_idx = 0;
        for i in 1..n {
            if values[i] < values[best_idx] {
                best_idx = i;
            }
        }
        let mut best = Minimum {
            value: values[best_idx],
            point: self.node(best_idx),
            evaluations: n,
        };

        let k = self.spec.starts;
        let mut seeds: Vec<(usize, bool)> = lowest_local_minima(&values, &self.grid, k)
            .into_iter()
            .map(|i| (i, false))
            .collect();
        seeds.extend(lowest_local_minima(&ratios, &self.grid, k).into_iter().map(|i| (i, true)));

        let refined: Vec<(PhasePoint, usize)> = seeds
            .par_iter()
            .map(|&(idx, relative)| {
                let start = self.node(idx);
                if relative {
                    self.descend(|q| self.ratio_at(delta, q), start, ratios[idx])
                } else {
                    self.descend(|q| self.wigner_at(delta, q), start, values[idx])
                }
            })
            .collect();

        for (point, evals) in refined {
            best.evaluations += evals + 1;
            let value = self.wigner_at(delta, point);
            if value < best.value {
                best.value = value;
                best.point = point;
            }
        }

        if best.value < 0.0 && self.spec.on_boundary(best.point) {
            return Err(Error::BoxTooSmall {
                x: best.point.x,
                p: best.point.p,
                value: best.value,
            });
        }
        Ok(best)
    }

    fn node(&self, idx: usize) -> PhasePoint {
        self.grid.node(idx / self.grid.np, idx % self.grid.np)
    }

    /// Coordinate descent with step halving, confined to the box.
    fn descend<F: Fn(PhasePoint) -> f64>(&self, f: F, start: PhasePoint, start_value: f64) -> (PhasePoint, usize) {
        let s = &self.spec;
        let (mut hx, mut hp) = (self.grid.dx(), self.grid.dp());
        let mut q = start;
        let mut fq = start_value;
        let mut evals = 0;
        for _ in 0..s.refine_iters {
            if hx < s.refine_tol && hp < s.refine_tol {
                break;
            }
            let moves = [(hx, 0.0), (-hx, 0.0), (0.0, hp), (0.0, -hp)];
            let mut next: Option<(PhasePoint, f64)> = None;
            for (dx, dp) in moves {
                let trial = PhasePoint {
                    x: q.x + dx,
                    p: q.p + dp,
                };
                if trial.x < s.x_min || trial.x > s.x_max || trial.p < s.p_min || trial.p > s.p_max {
                    continue;
                }
                let ft = f(trial);
                evals += 1;
                if ft < next.map_or(fq, |n| n.1) {
                    next = Some((trial, ft));
                }
            }
            match next {
                Some((t, ft)) => {
                    q = t;
                    fq = ft;
                }
                None => {
                    hx *= 0.5;
                    hp *= 0.5;
                }
            }
        }
        (q, evals)
    }
}

/// Up to `k` discrete local minima (≤ all 8 neighbours), lowest first, ties by index.
fn lowest_local_minima(values: &[f64], grid: &PhaseGrid, k: usize) -> Vec<usize> {
    let (nx, np) = (grid.nx, grid.np);
    let mut found: Vec<usize> = (0..values.len())
        .filter(|&idx| {
            let v = values[idx];
            if !v.is_finite() {
                return false;
            }
            let (i, j) = ((idx / np) as isize, (idx % np) as isize);
            for di in -1..=1isize {
                for dj in -1..=1isize {
                    let (a, b) = (i + di, j + dj);
                    if (di, dj) == (0, 0) || a < 0 || b < 0 || a >= nx as isize || b >= np as isize {
                        continue;
                    }
                    if values[a as usize * np + b as usize] < v {
                        return false;
                    }
                }
            }
            true
        })
        .collect();
    found.sort_by(|&a, &b| values[a].total_cmp(&values[b]).then(a.cmp(&b)));
    found.truncate(k);
    found
}

/// Global minimum of W over the search box.
pub fn minimize_wigner(state: &CoherentSuperposition, spec: &MinimizationSpec) -> Result<Minimum> {
    DephasedFamily::new(state.clone(), *spec).minimize(1.0)
}

/// Negative iff the refined minimum is below −abs_tol.
pub fn certify_negativity(state: &CoherentSuperposition, spec: &MinimizationSpec, abs_tol: f64) -> Result<Certificate> {
    let m = minimize_wigner(state, spec)?;
    Ok(Certificate {
        negative: m.value < -abs_tol,
        min: m.value,
        x: m.point.x,
        p: m.point.p,
        evals: m.evaluations,
    })
}

/// Stopping rule for the Δ bracket.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum DeltaTolerance {
    /// upper − lower ≤ tol
    Absolute(f64),
    /// upper/lower − 1 ≤ tol, bisecting in log Δ
    Relative(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BracketMethod {
    Bisection,
    GeometricBisection,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CriticalCoherenceResult {
    pub delta_c: f64,
    pub lower: f64,
    pub upper: f64,
    pub bracket_width: f64,
    /// argmin of W at `upper`
    pub minimizer: PhasePoint,
    pub min_value: f64,
    pub evaluations: usize,
    pub method: BracketMethod,
}

/// Smallest Δ for which the minimum of W is strictly negative.
pub fn critical_delta_numeric(family: &DephasedFamily, tol: DeltaTolerance) -> Result<CriticalCoherenceResult> {
    let t = match tol {
        DeltaTolerance::Absolute(t) | DeltaTolerance::Relative(t) => t,
    };
    if !(t.is_finite() && t > 0.0) {
        return Err(Error::InvalidParameter(format!("delta tolerance {t} must be positive")));
    }
    let mut evaluations = 0;
    let mut probe = |delta: f64| -> Result<Minimum> {
        let m = family.minimize(delta)?;
        evaluations += m.evaluations;
        Ok(m)
    };

    let top = probe(1.0)?;
    if top.value >= 0.0 {
        return Err(Error::NoSignChange);
    }
    if probe(0.0)?.value < 0.0 {
        return Err(Error::NoSignChange);
    }

    // sampled sign monotonicity; also seeds the bracket
    let mut lo = 0.0;
    let mut hi = 1.0;
    let mut hi_min = top;
    let mut first_negative: Option<f64> = None;
    for delta in [0.25, 0.5, 0.75] {
        let m = probe(delta)?;
        if m.value < 0.0 {
            if first_negative.is_none() {
                first_negative = Some(delta);
                hi = delta;
                hi_min = m;
            }
        } else if let Some(neg) = first_negative {
            return Err(Error::NonMonotoneFamily { lo: neg, hi: delta });
        } else {
            lo = delta;
        }
    }

    let method = match tol {
        DeltaTolerance::Absolute(tol) => {
            while hi - lo > tol {
                let mid = 0.5 * (lo + hi);
                let m = probe(mid)?;
                if m.value < 0.0 {
                    hi = mid;
                    hi_min = m;
                } else {
                    lo = mid;
                }
            }
            BracketMethod::Bisection
        }
        DeltaTolerance::Relative(tol) => {
            if lo == 0.0 {
                // walk down by decades until W is nonnegative
                let mut delta = hi;
                loop {
                    delta *= 0.1;
                    if delta < 1e-300 {
                        break;
                    }
                    let m = probe(delta)?;
                    if m.value < 0.0 {
                        hi = delta;
                        hi_min = m;
                    } else {
                        lo = delta;
                        break;
                    }
                }
            }
            while lo > 0.0 && hi / lo - 1.0 > tol {
                let mid = (lo * hi).sqrt();
                let m = probe(mid)?;
                if m.value < 0.0 {
                    hi = mid;
                    hi_min = m;
                } else {
                    lo = mid;
                }
            }
            BracketMethod::GeometricBisection
        }
    };

    let delta_c = match method {
        BracketMethod::Bisection => 0.5 * (lo + hi),
        BracketMethod::GeometricBisection => (lo * hi).sqrt(),
    };
    Ok(CriticalCoherenceResult {
        delta_c,
        lower: lo,
        upper: hi,
        bracket_width: hi - lo,
        minimizer: hi_min.point,
        min_value: hi_min.value,
        evaluations,
        method,
    })
}
