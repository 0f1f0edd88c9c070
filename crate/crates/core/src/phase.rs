//! Phase-space geometry and coherent-state superpositions.

use std::f64::consts::{FRAC_1_SQRT_2, SQRT_2, TAU};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Complex amplitude of a coherent state or a density-matrix entry.
pub type ComplexAmplitude = Complex64;

/// Hermiticity tolerance on the coefficient matrix.
pub const HERMITIAN_TOL: f64 = 1e-12;

/// Checked constructor for a finite amplitude.
pub fn amplitude(re: f64, im: f64) -> Result<ComplexAmplitude> {
    if re.is_finite() && im.is_finite() {
        Ok(Complex64::new(re, im))
    } else {
        Err(Error::NonFinite("amplitude"))
    }
}

/// Point (X, P) in units of σ and 1/σ.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhasePoint {
    pub x: f64,
    pub p: f64,
}

impl PhasePoint {
    pub fn new(x: f64, p: f64) -> Result<Self> {
        if x.is_finite() && p.is_finite() {
            Ok(Self { x, p })
        } else {
            Err(Error::NonFinite("phase point"))
        }
    }

    pub fn to_polar(self) -> PolarPoint {
        PolarPoint {
            r: self.x.hypot(self.p),
            phi: wrap_angle(self.p.atan2(self.x)),
        }
    }

    /// γ = (X + iP)/√2, the amplitude of the coherent state centred here.
    pub fn amplitude(self) -> Complex64 {
        Complex64::new(self.x, self.p) * FRAC_1_SQRT_2
    }

    /// Centre of the coherent state |β⟩ for σ = 1.
    pub fn center_of(beta: Complex64) -> Self {
        Self {
            x: SQRT_2 * beta.re,
            p: SQRT_2 * beta.im,
        }
    }
}

/// Polar point (R, φ) with φ in [0, 2π).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PolarPoint {
    pub r: f64,
    pub phi: f64,
}

impl PolarPoint {
    pub fn new(r: f64, phi: f64) -> Result<Self> {
        if !r.is_finite() || !phi.is_finite() {
            return Err(Error::NonFinite("polar point"));
        }
        if r < 0.0 {
            return Err(Error::InvalidParameter(format!("radius {r} is negative")));
        }
        Ok(Self {
            r,
            phi: wrap_angle(phi),
        })
    }

    pub fn to_cartesian(self) -> PhasePoint {
        PhasePoint {
            x: self.r * self.phi.cos(),
            p: self.r * self.phi.sin(),
        }
    }
}

pub(crate) fn wrap_angle(phi: f64) -> f64 {
    let w = phi.rem_euclid(TAU);
    // rem_euclid can round up to exactly TAU for tiny negative input
    if w >= TAU {
        0.0
    } else {
        w
    }
}

/// Uniform rectangular grid, inclusive of both ends.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseGrid {
    pub x_min: f64,
    pub x_max: f64,
    pub p_min: f64,
    pub p_max: f64,
    pub nx: usize,
    pub np: usize,
}

impl PhaseGrid {
    pub fn new(x_min: f64, x_max: f64, p_min: f64, p_max: f64, nx: usize, np: usize) -> Result<Self> {
        if ![x_min, x_max, p_min, p_max].iter().all(|v| v.is_finite()) {
            return Err(Error::NonFinite("grid bounds"));
        }
        if !(x_min < x_max && p_min < p_max) {
            return Err(Error::InvalidParameter("grid box is degenerate".into()));
        }
        if nx < 2 || np < 2 {
            return Err(Error::InvalidParameter("grid needs at least 2 nodes per axis".into()));
        }
        Ok(Self {
            x_min,
            x_max,
            p_min,
            p_max,
            nx,
            np,
        })
    }

    /// Square grid [-half, half]² with n nodes per axis.
    pub fn symmetric(half: f64, n: usize) -> Result<Self> {
        Self::new(-half, half, -half, half, n, n)
    }

    pub fn dx(&self) -> f64 {
        (self.x_max - self.x_min) / (self.nx - 1) as f64
    }

    pub fn dp(&self) -> f64 {
        (self.p_max - self.p_min) / (self.np - 1) as f64
    }

    pub fn x(&self, i: usize) -> f64 {
        if i == self.nx - 1 {
            self.x_max
        } else {
            self.x_min + i as f64 * self.dx()
        }
    }

    pub fn p(&self, j: usize) -> f64 {
        if j == self.np - 1 {
            self.p_max
        } else {
            self.p_min + j as f64 * self.dp()
        }
    }

    pub fn node(&self, i: usize, j: usize) -> PhasePoint {
        PhasePoint {
            x: self.x(i),
            p: self.p(j),
        }
    }

    pub fn len(&self) -> usize {
        self.nx * self.np
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Nodes in row-major order, x outer and p inner.
    pub fn nodes(&self) -> impl Iterator<Item = PhasePoint> + '_ {
        (0..self.nx).flat_map(move |i| (0..self.np).map(move |j| self.node(i, j)))
    }

    pub fn on_boundary(&self, i: usize, j: usize) -> bool {
        i == 0 || j == 0 || i + 1 == self.nx || j + 1 == self.np
    }
}

/// ⟨β_k|β_j⟩ for σ = 1.
pub fn coherent_overlap(beta_j: ComplexAmplitude, beta_k: ComplexAmplitude) -> ComplexAmplitude {
    (-(beta_j.norm_sqr() + beta_k.norm_sqr()) / 2.0 + beta_j * beta_k.conj()).exp()
}

/// One problem found by [`validate_parts`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum ValidationIssue {
    Empty,
    ShapeMismatch { rows: usize, expected: usize },
    NonFinite,
    NonPositiveSigma(f64),
    HermiticityViolation { j: usize, k: usize, residual: f64 },
    NonRealDiagonal { j: usize, im: f64 },
    NegativeDiagonal { j: usize, value: f64 },
    ComplexNorm { re: f64, im: f64 },
    NonPositiveNorm(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    pub hermiticity_residual: f64,
    pub normalization: Option<f64>,
    pub issues: Vec<ValidationIssue>,
}

impl ValidationReport {
    pub fn is_clean(&self) -> bool {
        self.issues.is_empty()
    }

    pub fn has_hermiticity_violation(&self) -> bool {
        self.issues
            .iter()
            .any(|i| matches!(i, ValidationIssue::HermiticityViolation { .. }))
    }

    pub fn has_negative_diagonal(&self) -> bool {
        self.issues
            .iter()
            .any(|i| matches!(i, ValidationIssue::NegativeDiagonal { .. }))
    }

    fn into_error(self) -> Error {
        for issue in &self.issues {
            if let ValidationIssue::NonPositiveNorm(v) = issue {
                return Error::NonPositiveNorm(*v);
            }
        }
        Error::InvalidState(format!("{:?}", self.issues))
    }
}

/// Raw Σ ρ_jk ⟨β_k|β_j⟩ without any checks.
fn norm_sum(betas: &[Complex64], coeffs: &[Complex64]) -> Complex64 {
    let n = betas.len();
    let mut re = crate::summation::NeumaierSum::new();
    let mut im = crate::summation::NeumaierSum::new();
    for j in 0..n {
        for k in 0..n {
            let t = coeffs[j * n + k] * coherent_overlap(betas[j], betas[k]);
            re += t.re;
            im += t.im;
        }
    }
    Complex64::new(re.sum(), im.sum())
}

/// Checks betas, a row-major n×n coefficient matrix and σ.
pub fn validate_parts(betas: &[Complex64], coeffs: &[Vec<Complex64>], sigma: f64) -> ValidationReport {
    let mut issues = Vec::new();
    let n = betas.len();
    let mut residual: f64 = 0.0;
    if n == 0 {
        issues.push(ValidationIssue::Empty);
    }
    if coeffs.len() != n {
        issues.push(ValidationIssue::ShapeMismatch {
            rows: coeffs.len(),
            expected: n,
        });
    }
    for row in coeffs {
        if row.len() != n {
            issues.push(ValidationIssue::ShapeMismatch {
                rows: row.len(),
                expected: n,
            });
        }
    }
    if !(sigma.is_finite() && sigma > 0.0) {
        issues.push(ValidationIssue::NonPositiveSigma(sigma));
    }
    let finite = betas.iter().all(|b| b.re.is_finite() && b.im.is_finite())
        && coeffs.iter().flatten().all(|c| c.re.is_finite() && c.im.is_finite());
    if !finite {
        issues.push(ValidationIssue::NonFinite);
    }
    if !issues.is_empty() {
        return ValidationReport {
            hermiticity_residual: f64::NAN,
            normalization: None,
            issues,
        };
    }

    for j in 0..n {
        for k in j..n {
            let r = (coeffs[j][k] - coeffs[k][j].conj()).norm();
            residual = residual.max(r);
            if k == j {
                if coeffs[j][j].im.abs() > HERMITIAN_TOL {
                    issues.push(ValidationIssue::NonRealDiagonal {
                        j,
                        im: coeffs[j][j].im,
                    });
                }
                if coeffs[j][j].re < 0.0 {
                    issues.push(ValidationIssue::NegativeDiagonal {
                        j,
                        value: coeffs[j][j].re,
                    });
                }
            } else if r > HERMITIAN_TOL {
                issues.push(ValidationIssue::HermiticityViolation { j, k, residual: r });
            }
        }
    }

    let flat: Vec<Complex64> = coeffs.iter().flatten().copied().collect();
    let nsum = norm_sum(betas, &flat);
    if nsum.im.abs() > 1e-10 * nsum.norm() {
        issues.push(ValidationIssue::ComplexNorm {
            re: nsum.re,
            im: nsum.im,
        });
    }
    if nsum.re <= 1e-14 {
        issues.push(ValidationIssue::NonPositiveNorm(nsum.re));
    }
    ValidationReport {
        hermiticity_residual: residual,
        normalization: Some(nsum.re),
        issues,
    }
}

/// ρ = N⁻¹ Σ ρ_jk |β_j⟩⟨β_k| with a single length scale σ.
///
/// Amplitudes are dimensionless; the centre of |β⟩ is (√2σ Reβ, √2 Imβ/σ).
#[derive(Debug, Clone, PartialEq)]
pub struct CoherentSuperposition {
    betas: Vec<Complex64>,
    coeffs: Vec<Complex64>,
    sigma: f64,
    norm: f64,
}

impl CoherentSuperposition {
    pub fn new(betas: Vec<Complex64>, coeffs: Vec<Vec<Complex64>>, sigma: f64) -> Result<Self> {
        let report = validate_parts(&betas, &coeffs, sigma);
        if !report.is_clean() {
            return Err(report.into_error());
        }
        let norm = report.normalization.unwrap_or(f64::NAN);
        Ok(Self {
            betas,
            coeffs: coeffs.into_iter().flatten().collect(),
            sigma,
            norm,
        })
    }

    /// Single coherent state |β⟩.
    pub fn coherent(beta: Complex64) -> Result<Self> {
        Self::new(vec![beta], vec![vec![Complex64::new(1.0, 0.0)]], 1.0)
    }

    /// Pure superposition Σ c_j |β_j⟩.
    pub fn pure(betas: Vec<Complex64>, amps: &[Complex64]) -> Result<Self> {
        if amps.len() != betas.len() {
            return Err(Error::InvalidParameter("amplitude count mismatch".into()));
        }
        let coeffs = amps
            .iter()
            .map(|cj| amps.iter().map(|ck| cj * ck.conj()).collect())
            .collect();
        Self::new(betas, coeffs, 1.0)
    }

    /// Incoherent mixture Σ w_j |β_j⟩⟨β_j|.
    pub fn diagonal_mixture(betas: Vec<Complex64>, weights: &[f64]) -> Result<Self> {
        if weights.len() != betas.len() {
            return Err(Error::InvalidParameter("weight count mismatch".into()));
        }
        if let Some(w) = weights.iter().find(|w| **w < 0.0) {
            return Err(Error::NegativeWeight(*w));
        }
        let n = betas.len();
        let coeffs = (0..n)
            .map(|j| {
                (0..n)
                    .map(|k| Complex64::new(if j == k { weights[j] } else { 0.0 }, 0.0))
                    .collect()
            })
            .collect();
        Self::new(betas, coeffs, 1.0)
    }

    /// Same amplitudes and coefficients with a new length scale.
    pub fn with_sigma(&self, sigma: f64) -> Result<Self> {
        if !(sigma.is_finite() && sigma > 0.0) {
            return Err(Error::InvalidParameter(format!("sigma {sigma} must be positive")));
        }
        Ok(Self {
            sigma,
            ..self.clone()
        })
    }

    /// Same state with the coherences ρ_jk (j ≠ k) scaled by `factor`.
    pub fn dephased(&self, factor: f64) -> Result<Self> {
        let n = self.len();
        let coeffs = (0..n)
            .map(|j| {
                (0..n)
                    .map(|k| if j == k { self.coeff(j, k) } else { self.coeff(j, k) * factor })
                    .collect()
            })
            .collect();
        Self::new(self.betas.clone(), coeffs, self.sigma)
    }

    pub fn len(&self) -> usize {
        self.betas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.betas.is_empty()
    }

    pub fn betas(&self) -> &[Complex64] {
        &self.betas
    }

    pub fn coeff(&self, j: usize, k: usize) -> Complex64 {
        self.coeffs[j * self.betas.len() + k]
    }

    /// Row-major coefficient matrix.
    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn norm(&self) -> f64 {
        self.norm
    }

    pub fn max_abs_beta(&self) -> f64 {
        self.betas.iter().map(|b| b.norm()).fold(0.0, f64::max)
    }

    /// Phase-space centre of component j.
    pub fn center(&self, j: usize) -> PhasePoint {
        let b = self.betas[j];
        PhasePoint {
            x: SQRT_2 * self.sigma * b.re,
            p: SQRT_2 * b.im / self.sigma,
        }
    }

    pub fn validate(&self) -> ValidationReport {
        let n = self.len();
        let rows: Vec<Vec<Complex64>> = self.coeffs.chunks(n).map(|r| r.to_vec()).collect();
        validate_parts(&self.betas, &rows, self.sigma)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: StateFile =
            serde_json::from_str(text).map_err(|e| Error::InvalidState(format!("malformed state JSON: {e}")))?;
        file.into_state()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&StateFile::from_state(self)).expect("state serializes")
    }
}

/// Normalization N = Re Σ ρ_jk ⟨β_k|β_j⟩ of a validated state.
pub fn normalization(state: &CoherentSuperposition) -> f64 {
    state.norm
}

/// Validation report of an existing state.
pub fn validate(state: &CoherentSuperposition) -> ValidationReport {
    state.validate()
}

/// On-disk form: {"sigma", "betas": [[re,im]], "coeffs": [[[re,im]]]}.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateFile {
    #[serde(default = "one")]
    pub sigma: f64,
    pub betas: Vec<[f64; 2]>,
    pub coeffs: Vec<Vec<[f64; 2]>>,
}

fn one() -> f64 {
    1.0
}

impl StateFile {
    pub fn from_state(state: &CoherentSuperposition) -> Self {
        let n = state.len();
        Self {
            sigma: state.sigma,
            betas: state.betas.iter().map(|b| [b.re, b.im]).collect(),
            coeffs: (0..n)
                .map(|j| (0..n).map(|k| [state.coeff(j, k).re, state.coeff(j, k).im]).collect())
                .collect(),
        }
    }

    pub fn report(&self) -> ValidationReport {
        let (betas, coeffs) = self.parts();
        validate_parts(&betas, &coeffs, self.sigma)
    }

    fn parts(&self) -> (Vec<Complex64>, Vec<Vec<Complex64>>) {
        let betas = self.betas.iter().map(|b| Complex64::new(b[0], b[1])).collect();
        let coeffs = self
            .coeffs
            .iter()
            .map(|row| row.iter().map(|c| Complex64::new(c[0], c[1])).collect())
            .collect();
        (betas, coeffs)
    }

    pub fn into_state(self) -> Result<CoherentSuperposition> {
        let (betas, coeffs) = self.parts();
        CoherentSuperposition::new(betas, coeffs, self.sigma)
    }
}
