//! Two-component cat states on the position axis.

use std::f64::consts::{FRAC_1_PI, PI, SQRT_2};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::phase::{wrap_angle, CoherentSuperposition, PhasePoint};

/// (θ, Δ, φ, Reβ) with ρ11 = cos²θ, ρ22 = sin²θ, ρ12 = Δ sinθ cosθ e^{iφ}.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CatParams {
    pub theta: f64,
    pub delta: f64,
    pub phi: f64,
    pub re_beta: f64,
}

impl CatParams {
    pub fn new(theta: f64, delta: f64, phi: f64, re_beta: f64) -> Result<Self> {
        if ![theta, delta, phi, re_beta].iter().all(|v| v.is_finite()) {
            return Err(Error::NonFinite("cat parameters"));
        }
        if !(theta > 0.0 && theta < 0.5 * PI) {
            return Err(Error::InvalidParameter(format!("theta {theta} outside (0, pi/2)")));
        }
        if !(0.0..=1.0).contains(&delta) {
            return Err(Error::InvalidParameter(format!("delta {delta} outside [0, 1]")));
        }
        if re_beta <= 0.0 {
            return Err(Error::InvalidParameter(format!("re_beta {re_beta} must be positive")));
        }
        Ok(Self {
            theta,
            delta,
            phi: wrap_angle(phi),
            re_beta,
        })
    }

    /// Balanced cat θ = π/4.
    pub fn balanced(delta: f64, phi: f64, re_beta: f64) -> Result<Self> {
        Self::new(0.25 * PI, delta, phi, re_beta)
    }

    pub fn with_delta(self, delta: f64) -> Result<Self> {
        Self::new(self.theta, delta, self.phi, self.re_beta)
    }

    /// 2√2 Reβ, the fringe wavenumber in P.
    pub fn wavenumber(&self) -> f64 {
        2.0 * SQRT_2 * self.re_beta
    }

    /// φ̃ = φ − 2√2 P Reβ.
    pub fn reduced_phase(&self, p: f64) -> f64 {
        self.phi - self.wavenumber() * p
    }

    /// b = e^{2Reβ²} 2Δ sinθ cosθ cos φ̃.
    pub fn b(&self, p: f64) -> f64 {
        let (s, c) = self.theta.sin_cos();
        (2.0 * self.re_beta.powi(2)).exp() * 2.0 * self.delta * s * c * self.reduced_phase(p).cos()
    }

    /// N = 1 + 2Δ sinθ cosθ cosφ e^{−2Reβ²}.
    pub fn norm(&self) -> f64 {
        let (s, c) = self.theta.sin_cos();
        1.0 + 2.0 * self.delta * s * c * self.phi.cos() * (-2.0 * self.re_beta.powi(2)).exp()
    }
}

pub fn cat_state(params: CatParams) -> CoherentSuperposition {
    let (s, c) = params.theta.sin_cos();
    let off = Complex64::from_polar(params.delta * s * c, params.phi);
    CoherentSuperposition::new(
        vec![Complex64::new(params.re_beta, 0.0), Complex64::new(-params.re_beta, 0.0)],
        vec![
            vec![Complex64::new(c * c, 0.0), off],
            vec![off.conj(), Complex64::new(s * s, 0.0)],
        ],
        1.0,
    )
    .expect("cat parameters give a valid state")
}

/// e^{−X²−P²−2Reβ²}/(πNZ) [cos²θ Z² + bZ + sin²θ] with Z = e^{2√2 X Reβ}.
pub fn cat_wigner_closed(params: CatParams, pt: PhasePoint) -> f64 {
    let (s, c) = params.theta.sin_cos();
    let ln_z = params.wavenumber() * pt.x;
    let base = -pt.x * pt.x - pt.p * pt.p - 2.0 * params.re_beta.powi(2);
    // Z² / Z and 1 / Z folded into the exponent
    let w = c * c * (base + ln_z).exp() + params.b(pt.p) * base.exp() + s * s * (base - ln_z).exp();
    w * FRAC_1_PI / params.norm()
}

/// Roots and vertex of P(Z) = cos²θ Z² + bZ + sin²θ at fixed P.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CatZeroAnalysis {
    pub z_plus: Complex64,
    pub z_minus: Complex64,
    pub z_m: f64,
    pub p_of_zm: f64,
    pub b: f64,
    pub tilde_phi: f64,
}

pub fn zero_analysis(params: CatParams, p: f64) -> CatZeroAnalysis {
    let (s, c) = params.theta.sin_cos();
    let a = c * c;
    let b = params.b(p);
    let disc = Complex64::new(b * b - 4.0 * a * s * s, 0.0).sqrt();
    let tilde_phi = params.reduced_phase(p);
    CatZeroAnalysis {
        z_plus: (disc - b) / (2.0 * a),
        z_minus: (-disc - b) / (2.0 * a),
        z_m: -b / (2.0 * a),
        p_of_zm: s * s
            * (1.0 - params.delta.powi(2) * tilde_phi.cos().powi(2) * (4.0 * params.re_beta.powi(2)).exp()),
        b,
        tilde_phi,
    }
}

/// Δ_c = e^{−2Reβ²}, at most 1.
pub fn critical_delta_analytic(re_beta: f64) -> f64 {
    (-2.0 * re_beta * re_beta).exp().min(1.0)
}

/// Leading-order minimizer: φ̃ = π on the branch nearest P = 0, Z = tanθ.
pub fn seed_min_location(params: CatParams) -> PhasePoint {
    let k = params.wavenumber();
    // φ − π wrapped into (−π, π]
    let mut arg = wrap_angle(params.phi - PI);
    if arg > PI {
        arg -= 2.0 * PI;
    }
    PhasePoint {
        x: params.theta.tan().ln() / k,
        p: arg / k,
    }
}

/// Local minimum of the closed form near [`seed_min_location`].
pub fn predicted_min_location(params: CatParams) -> Result<PhasePoint> {
    let critical = critical_delta_analytic(params.re_beta);
    if params.delta <= critical {
        return Err(Error::NotNegative {
            delta: params.delta,
            critical,
        });
    }
    Ok(newton_polish(|q| cat_wigner_closed(params, q), seed_min_location(params)))
}

/// Finite-difference gradient and Hessian (hxx, hxp, hpp).
pub fn fd_derivatives<F: Fn(PhasePoint) -> f64>(f: &F, q: PhasePoint, h: f64) -> ([f64; 2], [f64; 3]) {
    let at = |dx: f64, dp: f64| f(PhasePoint { x: q.x + dx, p: q.p + dp });
    let f0 = at(0.0, 0.0);
    let (fxp, fxm, fpp, fpm) = (at(h, 0.0), at(-h, 0.0), at(0.0, h), at(0.0, -h));
    let gx = (fxp - fxm) / (2.0 * h);
    let gp = (fpp - fpm) / (2.0 * h);
    let hxx = (fxp - 2.0 * f0 + fxm) / (h * h);
    let hpp = (fpp - 2.0 * f0 + fpm) / (h * h);
    let hxp = (at(h, h) - at(h, -h) - at(-h, h) + at(-h, -h)) / (4.0 * h * h);
    ([gx, gp], [hxx, hxp, hpp])
}

fn newton_polish<F: Fn(PhasePoint) -> f64>(f: F, start: PhasePoint) -> PhasePoint {
    let mut q = start;
    let mut fq = f(q);
    for _ in 0..100 {
        let ([gx, gp], [hxx, hxp, hpp]) = fd_derivatives(&f, q, 1e-4);
        let det = hxx * hpp - hxp * hxp;
        let (mut sx, mut sp) = if hxx > 0.0 && det > 0.0 {
            (-(hpp * gx - hxp * gp) / det, -(hxx * gp - hxp * gx) / det)
        } else {
            let scale = 0.1 / gx.hypot(gp).max(1e-300);
            (-gx * scale, -gp * scale)
        };
        let mut moved = false;
        for _ in 0..40 {
            let trial = PhasePoint {
                x: q.x + sx,
                p: q.p + sp,
            };
            let ft = f(trial);
            if ft < fq {
                q = trial;
                fq = ft;
                moved = true;
                break;
            }
            sx *= 0.5;
            sp *= 0.5;
        }
        if !moved || sx.hypot(sp) < 1e-12 {
            break;
        }
    }
    q
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::wigner::wigner_direct;

    #[test]
    fn state_examples() {
        let s = cat_state(CatParams::balanced(0.0, 0.0, 1.0).unwrap());
        assert!((s.coeff(0, 0).re - 0.5).abs() < 1e-15 && s.coeff(0, 1).norm() == 0.0);
        let s = cat_state(CatParams::new(PI / 3.0, 0.5, 0.5 * PI, 1.0).unwrap());
        assert!((s.coeff(0, 1).norm() - 0.5 * 3f64.sqrt() / 4.0).abs() < 1e-15);
        assert!((s.coeff(0, 1) - s.coeff(1, 0).conj()).norm() == 0.0);
        // Δ = 1 gives a rank-one coefficient matrix
        let s = cat_state(CatParams::balanced(1.0, 0.0, 2.0).unwrap());
        let det = s.coeff(0, 0) * s.coeff(1, 1) - s.coeff(0, 1) * s.coeff(1, 0);
        assert!(det.norm() < 1e-14);
        assert!((s.norm() - (1.0 + (-8f64).exp())).abs() < 1e-15);
    }

    #[test]
    fn closed_form_examples() {
        let p = CatParams::balanced(0.0, 0.0, 2.0).unwrap();
        let w = cat_wigner_closed(p, PhasePoint { x: 0.0, p: 0.0 });
        assert!((w - (-8f64).exp() / PI).abs() < 1e-18);
        // φ̃ = −π/2 puts the point on an interference node, b = 0
        let p = CatParams::balanced(1.0, 0.0, 2.0).unwrap();
        let node = PI / (4.0 * SQRT_2 * 2.0);
        assert!(p.b(node).abs() < 1e-12);
        let want = (-node * node - 8.0).exp() / (PI * (1.0 + (-8f64).exp()));
        assert!((cat_wigner_closed(p, PhasePoint { x: 0.0, p: node }) / want - 1.0).abs() < 1e-9);
    }

    #[test]
    fn closed_form_matches_direct() {
        let p = CatParams::new(1.1, 0.7, 2.3, 1.3).unwrap();
        let s = cat_state(p);
        for i in 0..21 {
            for j in 0..21 {
                let q = PhasePoint {
                    x: -4.0 + 0.4 * i as f64,
                    p: -3.0 + 0.3 * j as f64,
                };
                assert!((cat_wigner_closed(p, q) - wigner_direct(&s, q).unwrap()).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn vertex_value_is_c_minus_b2_over_4a() {
        let p = CatParams::new(0.9, 0.4, 1.0, 0.8).unwrap();
        for pm in [-0.7, 0.0, 0.3, 1.1] {
            let z = zero_analysis(p, pm);
            let (s, c) = p.theta.sin_cos();
            let direct = s * s - z.b * z.b / (4.0 * c * c);
            assert!((z.p_of_zm - direct).abs() < 1e-12 * direct.abs().max(1.0));
            if z.z_plus.im == 0.0 {
                assert!((0.5 * (z.z_plus.re + z.z_minus.re) - z.z_m).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn analytic_threshold_values() {
        assert!((critical_delta_analytic(1.0) - 0.135_335_283_236_612_7).abs() < 1e-15);
        assert!((critical_delta_analytic(2.0) - 3.354_626_279_025_119e-4).abs() < 1e-18);
        assert_eq!(critical_delta_analytic(0.0), 1.0);
        assert!(critical_delta_analytic(1e-9) > 0.999_999);
    }

    #[test]
    fn predicted_location_is_local_minimum() {
        let p = CatParams::balanced(1.0, 0.0, 2.0).unwrap();
        let q = predicted_min_location(p).unwrap();
        assert!(q.x.abs() < 1e-9);
        assert!(cat_wigner_closed(p, q) < 0.0);
        let p = CatParams::new(PI / 3.0, 1.0, 0.7, 1.5).unwrap();
        let q = predicted_min_location(p).unwrap();
        let (g, _) = fd_derivatives(&|r| cat_wigner_closed(p, r), q, 1e-5);
        assert!(g[0].abs() < 1e-7 && g[1].abs() < 1e-7, "{g:?}");
        let (_, [hxx, hxp, hpp]) = fd_derivatives(&|r| cat_wigner_closed(p, r), q, 1e-3);
        assert!(hxx > 0.0 && hxx * hpp - hxp * hxp > 0.0);
        assert!((q.x - 0.0127).abs() < 1e-3 && (q.p + 0.5196).abs() < 1e-3, "{q:?}");
        let below = p.with_delta(0.5 * critical_delta_analytic(1.5)).unwrap();
        assert!(matches!(predicted_min_location(below), Err(Error::NotNegative { .. })));
    }
}
