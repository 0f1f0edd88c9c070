//! Higher-order cats: M coherent states on a circle of radius d.

use std::f64::consts::{FRAC_1_PI, PI, SQRT_2, TAU};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::bessel::{bessel_i, bessel_j};
use crate::error::{Error, Result};
use crate::phase::{CoherentSuperposition, PolarPoint};
use crate::summation::NeumaierSum;
use crate::wigner::IMAG_RESIDUAL_TOL;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CircleCatParams {
    pub m: usize,
    pub d: f64,
    pub delta: f64,
}

impl CircleCatParams {
    pub fn new(m: usize, d: f64, delta: f64) -> Result<Self> {
        if m < 4 || !m.is_multiple_of(2) {
            return Err(Error::InvalidParameter(format!("M = {m} must be even and at least 4")));
        }
        if !(d.is_finite() && d >= 1.0) {
            return Err(Error::InvalidParameter(format!("d = {d} must be at least 1")));
        }
        if !(0.0..=1.0).contains(&delta) {
            return Err(Error::InvalidParameter(format!("delta {delta} outside [0, 1]")));
        }
        Ok(Self { m, d, delta })
    }

    /// M > d², where the leading-order Bessel form is expected to hold.
    pub fn highly_packed(&self) -> bool {
        self.m as f64 > self.d * self.d
    }

    /// M/(2√2 d).
    pub fn validity_radius(&self) -> f64 {
        self.m as f64 / (2.0 * SQRT_2 * self.d)
    }

    pub fn angle(&self, k: usize) -> f64 {
        TAU * k as f64 / self.m as f64
    }
}

/// β_k = d e^{2πik/M}, ρ_jk = ((1 − Δ)δ_jk + Δ)/M.
pub fn circle_state(params: CircleCatParams) -> CoherentSuperposition {
    let m = params.m;
    let betas = (1..=m).map(|k| Complex64::from_polar(params.d, params.angle(k))).collect();
    let coeffs = (0..m)
        .map(|j| {
            (0..m)
                .map(|k| {
                    let diag = if j == k { 1.0 - params.delta } else { 0.0 };
                    Complex64::new((diag + params.delta) / m as f64, 0.0)
                })
                .collect()
        })
        .collect();
    CoherentSuperposition::new(betas, coeffs, 1.0).expect("circle parameters give a valid state")
}

/// Circle cat with its normalization cached.
#[derive(Debug, Clone)]
pub struct CircleCat {
    params: CircleCatParams,
    norm: f64,
}

impl CircleCat {
    pub fn new(params: CircleCatParams) -> Self {
        Self {
            norm: circle_state(params).norm(),
            params,
        }
    }

    pub fn params(&self) -> CircleCatParams {
        self.params
    }

    pub fn norm(&self) -> f64 {
        self.norm
    }

    /// Polar double sum, (j,k) and (k,j) accumulated together.
    pub fn wigner_exact(&self, pt: PolarPoint) -> Result<f64> {
        let CircleCatParams { m, d, delta } = self.params;
        let d2 = d * d;
        let r = 2.0 * SQRT_2 * pt.r * d;
        let pre = -pt.r * pt.r - d2;
        let exponent = |j: usize, k: usize| -> Complex64 {
            let (tj, tk) = (self.params.angle(j + 1), self.params.angle(k + 1));
            let lam = 0.5 * (tj + tk);
            let phi = 0.5 * (tj - tk);
            let e1 = Complex64::from_polar(1.0, phi);
            pre - d2 * e1 * e1 + r * (pt.phi - lam).cos() * e1
        };
        let mut re = NeumaierSum::new();
        let mut im = NeumaierSum::new();
        for j in 0..m {
            let t = exponent(j, j).exp();
            re += t.re;
            im += t.im;
            for k in j + 1..m {
                let a = exponent(j, k).exp();
                let b = exponent(k, j).exp();
                re += delta * (a.re + b.re);
                im += delta * (a.im + b.im);
            }
        }
        // diagonal terms carry (1 − Δ) + Δ = 1
        let scale = FRAC_1_PI / (self.norm * m as f64);
        let residual = (im.sum() * scale).abs();
        if residual > IMAG_RESIDUAL_TOL {
            return Err(Error::NonHermitianAccumulation { residual });
        }
        Ok(re.sum() * scale)
    }

    /// e^{−R²−d²}/(πN) [(1 − Δ) e^{−d²} I0(r) + Δ M J0(r)], r = 2√2 R d.
    pub fn wigner_bessel(&self, radius: f64) -> Result<f64> {
        let limit = self.params.validity_radius();
        if !(radius >= 0.0 && radius < limit) {
            return Err(Error::OutsideValidityWindow { r: radius, limit });
        }
        let CircleCatParams { m, d, delta } = self.params;
        let r = 2.0 * SQRT_2 * radius * d;
        let pre = -radius * radius - d * d;
        let incoherent = if delta < 1.0 {
            (1.0 - delta) * (pre - d * d + r).exp() * (bessel_i(0, r)? * (-r).exp())
        } else {
            0.0
        };
        let coherent = delta * m as f64 * pre.exp() * bessel_j(0, r)?;
        Ok((incoherent + coherent) * FRAC_1_PI / self.norm)
    }
}

pub fn circle_wigner_exact(params: CircleCatParams, pt: PolarPoint) -> Result<f64> {
    CircleCat::new(params).wigner_exact(pt)
}

pub fn circle_wigner_bessel(params: CircleCatParams, radius: f64) -> Result<f64> {
    CircleCat::new(params).wigner_bessel(radius)
}

/// Minimum of 1/(1 − e^{d²} M J0(r)/I0(r)) over the negative lobes of J0.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CriticalBound {
    pub bound: f64,
    pub r_star: f64,
    pub ratio: f64,
}

fn j0_over_i0(r: f64) -> f64 {
    bessel_j(0, r).expect("r within range") / bessel_i(0, r).expect("r within range")
}

fn golden_min<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64, tol: f64) -> f64 {
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - g * (b - a);
    let mut e = a + g * (b - a);
    let (mut fc, mut fe) = (f(c), f(e));
    while b - a > tol {
        if fc < fe {
            b = e;
            e = c;
            fe = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = e;
            fc = fe;
            e = a + g * (b - a);
            fe = f(e);
        }
    }
    0.5 * (a + b)
}

/// Stationary points of J0/I0 near r = nπ, n = 1..4.
pub fn ratio_stationary_points() -> Vec<(f64, f64)> {
    (1..=4)
        .map(|n| {
            let centre = n as f64 * PI;
            let sign = if n % 2 == 1 { 1.0 } else { -1.0 };
            let r = golden_min(|r| sign * j0_over_i0(r), centre - 1.0, centre + 1.0, 1e-10);
            (r, j0_over_i0(r))
        })
        .collect()
}

pub fn critical_delta_bound(params: CircleCatParams) -> CriticalBound {
    let (r_star, ratio) = ratio_stationary_points()
        .into_iter()
        .filter(|(_, g)| *g < 0.0)
        .fold((f64::NAN, 0.0), |best, cand| if cand.1 < best.1 { cand } else { best });
    let k = (params.d * params.d).exp() * params.m as f64;
    CriticalBound {
        bound: 1.0 / (1.0 - k * ratio),
        r_star,
        ratio,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::wigner::wigner_direct;

    #[test]
    fn state_examples() {
        let s = circle_state(CircleCatParams::new(4, 1.0, 0.0).unwrap());
        assert!((s.coeff(2, 2).re - 0.25).abs() < 1e-16 && s.coeff(0, 1).norm() == 0.0);
        let s = circle_state(CircleCatParams::new(4, 1.0, 1.0).unwrap());
        assert!(s.coeffs().iter().all(|c| (c.re - 0.25).abs() < 1e-16));
        let s = circle_state(CircleCatParams::new(64, 8.0, 1.0).unwrap());
        assert_eq!(s.len(), 64);
        let trace: f64 = (0..64).map(|j| s.coeff(j, j).re).sum();
        assert!((trace - 1.0).abs() < 1e-14);
        assert!(s.betas().iter().all(|b| (b.norm() - 8.0).abs() < 1e-13));
        assert!(CircleCatParams::new(5, 1.0, 1.0).is_err());
        assert!(CircleCatParams::new(8, 0.5, 1.0).is_err());
    }

    #[test]
    fn exact_matches_direct() {
        let params = CircleCatParams::new(16, 2.0, 0.6).unwrap();
        let s = circle_state(params);
        let cat = CircleCat::new(params);
        for i in 0..50 {
            let pt = PolarPoint::new(0.09 * i as f64, 0.77 * i as f64).unwrap();
            let want = wigner_direct(&s, pt.to_cartesian()).unwrap();
            assert!((cat.wigner_exact(pt).unwrap() - want).abs() < 1e-10);
        }
    }

    #[test]
    fn incoherent_origin_value() {
        // Δ = 0: every diagonal term is e^{−2d²}/π at R = 0
        let params = CircleCatParams::new(8, 1.5, 0.0).unwrap();
        let w = circle_wigner_exact(params, PolarPoint::new(0.0, 0.0).unwrap()).unwrap();
        assert!((w - (-2.0 * 2.25f64).exp() / PI).abs() < 1e-16);
        assert!(circle_wigner_bessel(params, 0.0).unwrap() > 0.0);
    }

    #[test]
    fn pure_circle_centre_is_positive() {
        let params = CircleCatParams::new(64, 8.0, 1.0).unwrap();
        let w = circle_wigner_exact(params, PolarPoint::new(0.0, 0.0).unwrap()).unwrap();
        assert!((w - FRAC_1_PI).abs() < 1e-9, "{w}");
    }

    #[test]
    fn window_is_enforced() {
        let params = CircleCatParams::new(64, 8.0, 1.0).unwrap();
        let limit = params.validity_radius();
        assert!(circle_wigner_bessel(params, 0.99 * limit).is_ok());
        assert!(matches!(
            circle_wigner_bessel(params, limit),
            Err(Error::OutsideValidityWindow { .. })
        ));
    }

    #[test]
    fn bound_examples() {
        let b = critical_delta_bound(CircleCatParams::new(64, 1.0, 1.0).unwrap());
        assert!((b.r_star - 3.19622).abs() < 1e-5, "{}", b.r_star);
        assert!((b.bound - 0.093).abs() < 1e-3, "{}", b.bound);
        let b8 = critical_delta_bound(CircleCatParams::new(64, 8.0, 1.0).unwrap());
        let approx = 1.0 / (1.0 + 0.056 * 64f64.exp() * 64.0);
        assert!((b8.bound / approx - 1.0).abs() < 0.02);
        let pts = ratio_stationary_points();
        assert!((pts[1].0 - 6.306_437).abs() < 1e-5 && pts[1].1 > 0.0);
    }
}
