//! Wigner functions of coherent-state superpositions.
//!
//! Two independent routes: the cross-Wigner double sum and a trapezoidal
//! Fourier inversion of the quasi-characteristic function.

use std::f64::consts::{FRAC_1_PI, FRAC_1_SQRT_2, PI, SQRT_2};
use std::io::Write;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::phase::{CoherentSuperposition, PhaseGrid, PhasePoint};
use crate::summation::NeumaierSum;

/// Residual above which a Wigner sum is rejected as non-real.
pub const IMAG_RESIDUAL_TOL: f64 = 1e-8;

/// Cutoff check for the Fourier route.
pub const CUTOFF_TOL: f64 = 1e-10;

/// Point (λ, η) of the characteristic function.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CharacteristicPoint {
    pub lambda: f64,
    pub eta: f64,
}

impl CharacteristicPoint {
    pub fn new(lambda: f64, eta: f64) -> Result<Self> {
        if lambda.is_finite() && eta.is_finite() {
            Ok(Self { lambda, eta })
        } else {
            Err(Error::NonFinite("characteristic point"))
        }
    }

    /// α = (iλσ² − η)/(√2σ).
    pub fn alpha(self, sigma: f64) -> Complex64 {
        Complex64::new(-self.eta, self.lambda * sigma * sigma) / (SQRT_2 * sigma)
    }
}

/// Trapezoidal quadrature on [−L, L]² with n_lambda × n_eta intervals.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSpec {
    pub cutoff: f64,
    pub n_lambda: usize,
    pub n_eta: usize,
}

impl QuadratureSpec {
    pub fn new(cutoff: f64, n_lambda: usize, n_eta: usize) -> Result<Self> {
        if !(cutoff.is_finite() && cutoff > 0.0) {
            return Err(Error::InvalidParameter(format!("cutoff {cutoff} must be positive")));
        }
        for n in [n_lambda, n_eta] {
            if n < 16 || n % 2 != 0 {
                return Err(Error::InvalidParameter(format!(
                    "quadrature size {n} must be even and at least 16"
                )));
            }
        }
        Ok(Self {
            cutoff,
            n_lambda,
            n_eta,
        })
    }

    /// L = max(12, 8(1 + max|β|)) stretched by σ, n = 512.
    pub fn for_state(state: &CoherentSuperposition) -> Self {
        let s = state.sigma();
        let stretch = s.max(1.0 / s);
        Self {
            cutoff: (8.0 * (1.0 + state.max_abs_beta())).max(12.0) * stretch,
            n_lambda: 512,
            n_eta: 512,
        }
    }
}

/// Sign convention of the interference phase; `Flipped` exists for mutation tests.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum KernelVariant {
    #[default]
    Standard,
    Flipped,
}

/// W_jk(X, P) for |β_j⟩⟨β_k| with σ = 1.
pub fn cross_wigner(beta_j: Complex64, beta_k: Complex64, pt: PhasePoint) -> Complex64 {
    cross_wigner_scaled(beta_j, beta_k, pt, 1.0)
}

/// W_jk(X, P) at length scale σ, centres (√2σ Reβ, √2 Imβ/σ).
pub fn cross_wigner_scaled(beta_j: Complex64, beta_k: Complex64, pt: PhasePoint, sigma: f64) -> Complex64 {
    kernel(beta_j, beta_k, pt, sigma, KernelVariant::Standard)
}

fn kernel(beta_j: Complex64, beta_k: Complex64, pt: PhasePoint, sigma: f64, variant: KernelVariant) -> Complex64 {
    let (xj, pj) = (SQRT_2 * sigma * beta_j.re, SQRT_2 * beta_j.im / sigma);
    let (xk, pk) = (SQRT_2 * sigma * beta_k.re, SQRT_2 * beta_k.im / sigma);
    let dx = pt.x - 0.5 * (xj + xk);
    let dp = pt.p - 0.5 * (pj + pk);
    let re = -dx * dx / (sigma * sigma) - sigma * sigma * dp * dp;
    let mut phase = pt.x * (pj - pk) - pt.p * (xj - xk) + 0.5 * (xj * pk - xk * pj);
    if variant == KernelVariant::Flipped {
        phase = -phase;
    }
    Complex64::from_polar(FRAC_1_PI * re.exp(), phase)
}

/// Re N⁻¹ Σ ρ_jk W_jk(X, P).
pub fn wigner_direct(state: &CoherentSuperposition, pt: PhasePoint) -> Result<f64> {
    wigner_direct_with(state, pt, KernelVariant::Standard)
}

pub fn wigner_direct_with(state: &CoherentSuperposition, pt: PhasePoint, variant: KernelVariant) -> Result<f64> {
    let n = state.len();
    let betas = state.betas();
    let mut re = NeumaierSum::new();
    let mut im = NeumaierSum::new();
    for j in 0..n {
        for k in 0..n {
            let t = state.coeff(j, k) * kernel(betas[j], betas[k], pt, state.sigma(), variant);
            re += t.re;
            im += t.im;
        }
    }
    let norm = state.norm();
    let residual = (im.sum() / norm).abs();
    if residual > IMAG_RESIDUAL_TOL {
        return Err(Error::NonHermitianAccumulation { residual });
    }
    Ok(re.sum() / norm)
}

/// G(λ, η) = Tr[e^{i(λx + ηp)} ρ] from the coherent components.
pub fn quasi_characteristic(state: &CoherentSuperposition, cp: CharacteristicPoint) -> Complex64 {
    let alpha = cp.alpha(state.sigma());
    let n = state.len();
    let betas = state.betas();
    let mut re = NeumaierSum::new();
    let mut im = NeumaierSum::new();
    for j in 0..n {
        for k in 0..n {
            let bj = betas[j];
            let bk = betas[k];
            let exponent = -alpha.conj() * bj + alpha * bk.conj() - 0.5 * (bj.norm_sqr() + bk.norm_sqr())
                + bj * bk.conj();
            let t = state.coeff(j, k) * exponent.exp();
            re += t.re;
            im += t.im;
        }
    }
    Complex64::new(re.sum(), im.sum()) * (-0.5 * alpha.norm_sqr()).exp() / state.norm()
}

/// Trapezoidal inversion of the characteristic function, reusable across points.
#[derive(Debug, Clone)]
pub struct FourierReconstruction {
    lambdas: Vec<f64>,
    etas: Vec<f64>,
    // G on the node grid, lambda-major, premultiplied by the trapezoid weights
    weighted: Vec<Complex64>,
    scale: f64,
}

impl FourierReconstruction {
    pub fn new(state: &CoherentSuperposition, quad: QuadratureSpec) -> Result<Self> {
        let l = quad.cutoff;
        let nodes = |n: usize| -> Vec<f64> { (0..=n).map(|i| -l + 2.0 * l * i as f64 / n as f64).collect() };
        let lambdas = nodes(quad.n_lambda);
        let etas = nodes(quad.n_eta);
        let (na, nb) = (lambdas.len(), etas.len());

        let rows: Vec<Vec<Complex64>> = lambdas
            .par_iter()
            .map(|&lambda| {
                etas.iter()
                    .map(|&eta| quasi_characteristic(state, CharacteristicPoint { lambda, eta }))
                    .collect()
            })
            .collect();

        let mut boundary: f64 = 0.0;
        for (a, row) in rows.iter().enumerate() {
            for (b, g) in row.iter().enumerate() {
                if a == 0 || b == 0 || a + 1 == na || b + 1 == nb {
                    boundary = boundary.max(g.norm());
                }
            }
        }
        if boundary > CUTOFF_TOL {
            return Err(Error::CutoffTooSmall { boundary });
        }

        let w = |i: usize, n: usize| if i == 0 || i + 1 == n { 0.5 } else { 1.0 };
        let mut weighted = Vec::with_capacity(na * nb);
        for (a, row) in rows.into_iter().enumerate() {
            for (b, g) in row.into_iter().enumerate() {
                weighted.push(g * (w(a, na) * w(b, nb)));
            }
        }
        let h_l = 2.0 * l / quad.n_lambda as f64;
        let h_e = 2.0 * l / quad.n_eta as f64;
        Ok(Self {
            lambdas,
            etas,
            weighted,
            scale: h_l * h_e / (4.0 * PI * PI),
        })
    }

    fn partial(&self, p: f64) -> Vec<Complex64> {
        let ep: Vec<Complex64> = self.etas.iter().map(|&e| Complex64::from_polar(1.0, -e * p)).collect();
        let nb = self.etas.len();
        self.weighted
            .chunks(nb)
            .map(|row| row.iter().zip(&ep).map(|(g, e)| g * e).sum())
            .collect()
    }

    fn finish(&self, partial: &[Complex64], x: f64) -> f64 {
        let mut acc = NeumaierSum::new();
        for (h, &l) in partial.iter().zip(&self.lambdas) {
            acc += (h * Complex64::from_polar(1.0, -l * x)).re;
        }
        acc.sum() * self.scale
    }

    pub fn eval(&self, pt: PhasePoint) -> f64 {
        self.finish(&self.partial(pt.p), pt.x)
    }

    /// Values on a grid in row-major order, x outer.
    pub fn eval_grid(&self, grid: &PhaseGrid) -> Vec<f64> {
        let partials: Vec<Vec<Complex64>> = (0..grid.np).into_par_iter().map(|j| self.partial(grid.p(j))).collect();
        (0..grid.nx)
            .into_par_iter()
            .flat_map_iter(|i| {
                let x = grid.x(i);
                partials.iter().map(move |h| self.finish(h, x)).collect::<Vec<_>>()
            })
            .collect()
    }
}

/// W(X, P) = (1/4π²) ∫∫ e^{−i(λX + ηP)} G(λ, η) dλ dη.
pub fn wigner_from_characteristic(state: &CoherentSuperposition, pt: PhasePoint, quad: QuadratureSpec) -> Result<f64> {
    Ok(FourierReconstruction::new(state, quad)?.eval(pt))
}

/// (1/π) Σ w_i exp(−(X − √2 Reβ_i)² − (P − √2 Imβ_i)²).
pub fn wigner_diagonal_mixture(weights: &[(Complex64, f64)], pt: PhasePoint) -> Result<f64> {
    if let Some((_, w)) = weights.iter().find(|(_, w)| w.is_nan() || *w < 0.0) {
        return Err(Error::NegativeWeight(*w));
    }
    let total: f64 = weights.iter().map(|(_, w)| w).sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidParameter(format!("weights sum to {total}, not 1")));
    }
    let mut acc = NeumaierSum::new();
    for (beta, w) in weights {
        let c = PhasePoint::center_of(*beta);
        acc += w * (-(pt.x - c.x).powi(2) - (pt.p - c.p).powi(2)).exp();
    }
    Ok(acc.sum() * FRAC_1_PI)
}

/// Diagonal and coherence contributions to N·W at a point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WignerParts {
    pub diagonal: f64,
    pub coherent: f64,
}

// Pairs whose separation exceeds this use the per-term log-space kernel.
const FACTORED_LIMIT: f64 = 600.0;

/// Fast evaluator for repeated point queries.
///
/// Uses W_jk ∝ u_j C_jk conj(u_k) with u_j = exp(−|γ|² + 2γ*β_j − |β_j|²),
/// falling back to the log-space kernel when C_jk would overflow.
#[derive(Debug, Clone)]
pub struct DirectEvaluator {
    betas: Vec<Complex64>,
    diag: Vec<f64>,
    // ρ_jk C_jk for j < k, row-major upper triangle
    upper: Vec<Complex64>,
    coeffs: Vec<Complex64>,
    sigma: f64,
    norm: f64,
    factored: bool,
}

impl DirectEvaluator {
    pub fn new(state: &CoherentSuperposition) -> Self {
        let n = state.len();
        let betas = state.betas().to_vec();
        let mut max_sep: f64 = 0.0;
        for j in 0..n {
            for k in 0..n {
                max_sep = max_sep.max(0.5 * (betas[j] - betas[k]).norm_sqr());
            }
        }
        let mut upper = Vec::with_capacity(n * n.saturating_sub(1) / 2);
        for j in 0..n {
            for k in j + 1..n {
                let c = (0.5 * (betas[j].norm_sqr() + betas[k].norm_sqr()) - betas[j] * betas[k].conj()).exp();
                upper.push(state.coeff(j, k) * c);
            }
        }
        Self {
            diag: (0..n).map(|j| state.coeff(j, j).re).collect(),
            upper,
            coeffs: state.coeffs().to_vec(),
            betas,
            sigma: state.sigma(),
            norm: state.norm(),
            factored: max_sep <= FACTORED_LIMIT,
        }
    }

    pub fn norm(&self) -> f64 {
        self.norm
    }

    /// Diagonal and coherence parts of N·W.
    pub fn parts(&self, pt: PhasePoint) -> WignerParts {
        let n = self.betas.len();
        let gamma = Complex64::new(pt.x / self.sigma, pt.p * self.sigma) * FRAC_1_SQRT_2;
        if !self.factored {
            let mut diag = NeumaierSum::new();
            let mut coh = NeumaierSum::new();
            let reduced = PhasePoint {
                x: pt.x / self.sigma,
                p: pt.p * self.sigma,
            };
            for j in 0..n {
                diag += self.diag[j] * cross_wigner(self.betas[j], self.betas[j], reduced).re;
                for k in j + 1..n {
                    coh += 2.0 * (self.coeffs[j * n + k] * cross_wigner(self.betas[j], self.betas[k], reduced)).re;
                }
            }
            return WignerParts {
                diagonal: diag.sum(),
                coherent: coh.sum(),
            };
        }
        let g2 = gamma.norm_sqr();
        let u: Vec<Complex64> = self
            .betas
            .iter()
            .map(|b| (2.0 * gamma.conj() * b - g2 - b.norm_sqr()).exp())
            .collect();
        let mut diag = 0.0;
        let mut coh = 0.0;
        let mut idx = 0;
        for j in 0..n {
            diag += self.diag[j] * u[j].norm_sqr();
            let mut row = Complex64::new(0.0, 0.0);
            for k in j + 1..n {
                row += self.upper[idx] * u[k].conj();
                idx += 1;
            }
            coh += 2.0 * (u[j] * row).re;
        }
        WignerParts {
            diagonal: diag * FRAC_1_PI,
            coherent: coh * FRAC_1_PI,
        }
    }

    pub fn eval(&self, pt: PhasePoint) -> f64 {
        let p = self.parts(pt);
        (p.diagonal + p.coherent) / self.norm
    }
}

/// W on every grid node, row-major with x outer.
pub fn sample_grid(state: &CoherentSuperposition, grid: &PhaseGrid) -> Vec<f64> {
    let ev = DirectEvaluator::new(state);
    (0..grid.len())
        .into_par_iter()
        .map(|idx| ev.eval(grid.node(idx / grid.np, idx % grid.np)))
        .collect()
}

/// Writes `x,p,w` rows with 17 significant digits.
pub fn write_grid_csv<W: Write>(mut out: W, grid: &PhaseGrid, values: &[f64]) -> std::io::Result<()> {
    writeln!(out, "x,p,w")?;
    for (idx, w) in values.iter().enumerate() {
        let pt = grid.node(idx / grid.np, idx % grid.np);
        writeln!(out, "{:.16e},{:.16e},{:.16e}", pt.x, pt.p, w)?;
    }
    out.flush()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn pt(x: f64, p: f64) -> PhasePoint {
        PhasePoint { x, p }
    }

    fn cat(re_beta: f64, delta: f64) -> CoherentSuperposition {
        let h = c(0.5, 0.0);
        CoherentSuperposition::new(
            vec![c(re_beta, 0.0), c(-re_beta, 0.0)],
            vec![vec![h, h * delta], vec![h * delta, h]],
            1.0,
        )
        .unwrap()
    }

    #[test]
    fn kernel_examples() {
        assert!((cross_wigner(c(0.0, 0.0), c(0.0, 0.0), pt(0.0, 0.0)).re - FRAC_1_PI).abs() < 1e-16);
        let b = c(1.3, 0.0);
        assert!((cross_wigner(b, b, pt(SQRT_2 * 1.3, 0.0)) - c(FRAC_1_PI, 0.0)).norm() < 1e-16);
        let w = cross_wigner(c(2.0, 0.0), c(-2.0, 0.0), pt(0.0, 0.0));
        assert!((w - c(FRAC_1_PI, 0.0)).norm() < 1e-16);
    }

    #[test]
    fn kernel_matches_bargmann_form() {
        // W_jk = (1/π) exp(−2|γ|² − ½|β_j|² − ½|β_k|² + 2γβ_k* + 2γ*β_j − β_jβ_k*)
        let cases = [
            (c(0.3, -1.1), c(-0.7, 0.4), pt(0.2, 0.9)),
            (c(1.5, 0.5), c(1.5, -0.5), pt(-1.0, 0.3)),
            (c(0.0, 2.0), c(2.0, 0.0), pt(1.4, 1.4)),
        ];
        for (bj, bk, q) in cases {
            let g = q.amplitude();
            let e = -2.0 * g.norm_sqr() - 0.5 * bj.norm_sqr() - 0.5 * bk.norm_sqr() + 2.0 * g * bk.conj()
                + 2.0 * g.conj() * bj
                - bj * bk.conj();
            let want = e.exp() * FRAC_1_PI;
            assert!((cross_wigner(bj, bk, q) - want).norm() < 1e-15);
        }
    }

    #[test]
    fn direct_examples() {
        let vac = CoherentSuperposition::coherent(c(0.0, 0.0)).unwrap();
        assert!((wigner_direct(&vac, pt(0.0, 0.0)).unwrap() - FRAC_1_PI).abs() < 1e-16);
        let w = wigner_direct(&cat(2.0, 0.0), pt(0.0, 0.0)).unwrap();
        assert!((w - (-8f64).exp() / PI).abs() < 1e-18);
        // even cat: positive central fringe, negative fringes beside it
        let even = cat(2.0, 1.0);
        assert!(wigner_direct(&even, pt(0.0, 0.0)).unwrap() > 0.0);
        let node = PI / (2.0 * SQRT_2 * 2.0);
        assert!(wigner_direct(&even, pt(0.0, node)).unwrap() < 0.0);
    }

    #[test]
    fn characteristic_examples() {
        let vac = CoherentSuperposition::coherent(c(0.0, 0.0)).unwrap();
        for (l, e) in [(0.0, 0.0), (1.0, 1.0), (2.0, -0.5), (-3.0, 4.0)] {
            let g = quasi_characteristic(&vac, CharacteristicPoint { lambda: l, eta: e });
            assert!((g - c((-(l * l + e * e) / 4.0f64).exp(), 0.0)).norm() < 1e-15);
        }
        let g0 = quasi_characteristic(&cat(2.0, 1.0), CharacteristicPoint { lambda: 0.0, eta: 0.0 });
        assert!((g0 - c(1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn fourier_vacuum_and_cutoff_check() {
        let vac = CoherentSuperposition::coherent(c(0.0, 0.0)).unwrap();
        let q = QuadratureSpec::new(12.0, 256, 256).unwrap();
        let w = wigner_from_characteristic(&vac, pt(0.0, 0.0), q).unwrap();
        assert!((w - FRAC_1_PI).abs() < 1e-8);
        let short = QuadratureSpec::new(8.0, 256, 256).unwrap();
        assert!(matches!(
            wigner_from_characteristic(&vac, pt(0.0, 0.0), short),
            Err(Error::CutoffTooSmall { .. })
        ));
        assert!(QuadratureSpec::new(8.0, 15, 16).is_err());
        assert!(QuadratureSpec::new(8.0, 18, 17).is_err());
    }

    #[test]
    fn fourier_matches_direct_on_cat() {
        let s = cat(2.0, 1.0);
        let rec = FourierReconstruction::new(&s, QuadratureSpec::for_state(&s)).unwrap();
        for q in [pt(0.0, 0.0), pt(0.3, 0.55), pt(2.8, -0.2), pt(-1.0, 1.7)] {
            assert!((rec.eval(q) - wigner_direct(&s, q).unwrap()).abs() < 1e-6);
        }
    }

    #[test]
    fn mixture_examples() {
        let w = wigner_diagonal_mixture(&[(c(0.0, 0.0), 1.0)], pt(0.0, 0.0)).unwrap();
        assert!((w - FRAC_1_PI).abs() < 1e-16);
        let w = wigner_diagonal_mixture(&[(c(2.0, 0.0), 0.5), (c(-2.0, 0.0), 0.5)], pt(0.0, 0.0)).unwrap();
        assert!((w - (-8f64).exp() / PI).abs() < 1e-18);
        assert_eq!(
            wigner_diagonal_mixture(&[(c(0.0, 0.0), 1.5), (c(1.0, 0.0), -0.5)], pt(0.0, 0.0)),
            Err(Error::NegativeWeight(-0.5))
        );
    }

    #[test]
    fn evaluator_matches_direct() {
        let s = CoherentSuperposition::pure(
            vec![c(1.0, 0.5), c(-0.5, 1.5), c(0.2, -2.0)],
            &[c(0.5, 0.1), c(-0.3, 0.6), c(0.4, 0.0)],
        )
        .unwrap()
        .with_sigma(1.7)
        .unwrap();
        let ev = DirectEvaluator::new(&s);
        for i in 0..30 {
            let q = pt(-3.0 + 0.21 * i as f64, 2.0 - 0.13 * i as f64);
            let want = wigner_direct(&s, q).unwrap();
            assert!((ev.eval(q) - want).abs() < 1e-14, "{q:?}");
        }
    }

    #[test]
    fn evaluator_fallback_far_apart() {
        // separation ½|Δβ|² = 800 forces the log-space branch
        let s = cat(20.0, 1.0);
        let ev = DirectEvaluator::new(&s);
        assert!(!ev.factored);
        let node = PI / (2.0 * SQRT_2 * 20.0);
        for q in [pt(0.0, 0.0), pt(0.0, node), pt(SQRT_2 * 20.0, 0.0)] {
            assert!((ev.eval(q) - wigner_direct(&s, q).unwrap()).abs() < 1e-14);
        }
        assert!(ev.eval(pt(0.0, node)) < -0.3);
    }

    #[test]
    fn grid_csv_format() {
        let g = PhaseGrid::symmetric(1.0, 3).unwrap();
        let vac = CoherentSuperposition::coherent(c(0.0, 0.0)).unwrap();
        let mut buf = Vec::new();
        write_grid_csv(&mut buf, &g, &sample_grid(&vac, &g)).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "x,p,w");
        assert_eq!(lines.len(), 10);
        assert!(lines[1].starts_with("-1.0000000000000000e0,-1.0000000000000000e0,"));
        assert!(lines[2].starts_with("-1.0000000000000000e0,0.0000000000000000e0,"));
    }
}
