//! Parameter sweeps behind the critical-coherence and radial-profile plots.

use std::f64::consts::{FRAC_1_PI, SQRT_2};
use std::io::Write;

use serde::Serialize;

use crate::bessel::bessel_j;
use crate::cat::{cat_state, critical_delta_analytic, CatParams};
use crate::circle::{circle_state, critical_delta_bound, CircleCat, CircleCatParams};
use crate::error::{Error, Result};
use crate::phase::PolarPoint;
use crate::solver::{critical_delta_numeric, DeltaTolerance, DephasedFamily, MinimizationSpec};

/// Row outcome written to the `status` column.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RowStatus {
    Ok,
    NoSignChange,
    BoxTooSmall,
    NonMonotone,
    OutsideWindow,
}

impl RowStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            RowStatus::Ok => "ok",
            RowStatus::NoSignChange => "no_sign_change",
            RowStatus::BoxTooSmall => "box_too_small",
            RowStatus::NonMonotone => "non_monotone",
            RowStatus::OutsideWindow => "outside_window",
        }
    }

    fn from_error(e: &Error) -> Option<Self> {
        match e {
            Error::NoSignChange => Some(RowStatus::NoSignChange),
            Error::BoxTooSmall { .. } => Some(RowStatus::BoxTooSmall),
            Error::NonMonotoneFamily { .. } => Some(RowStatus::NonMonotone),
            _ => None,
        }
    }
}

fn solve(family: &DephasedFamily, tol: DeltaTolerance) -> Result<(f64, RowStatus)> {
    match critical_delta_numeric(family, tol) {
        Ok(r) => Ok((r.delta_c, RowStatus::Ok)),
        Err(e) => match RowStatus::from_error(&e) {
            Some(status) => Ok((f64::NAN, status)),
            None => Err(e),
        },
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CatSweepRow {
    pub re_beta: f64,
    pub delta_c_numeric: f64,
    pub delta_c_analytic: f64,
    pub abs_err: f64,
    pub status: RowStatus,
}

/// Numeric and analytic Δ_c for each Reβ in (0, 3].
pub fn cat_sweep(re_betas: &[f64], theta: f64, phi: f64, delta_tol: f64) -> Result<Vec<CatSweepRow>> {
    if re_betas.is_empty() {
        return Err(Error::InvalidParameter("empty re_beta range".into()));
    }
    if let Some(b) = re_betas.iter().find(|b| !(**b > 0.0 && **b <= 3.0)) {
        return Err(Error::InvalidParameter(format!("re_beta {b} outside (0, 3]")));
    }
    re_betas
        .iter()
        .map(|&re_beta| {
            let base = cat_state(CatParams::new(theta, 1.0, phi, re_beta)?);
            let family = DephasedFamily::new(base.clone(), MinimizationSpec::auto(&base));
            let (numeric, status) = solve(&family, DeltaTolerance::Absolute(delta_tol))?;
            let analytic = critical_delta_analytic(re_beta);
            Ok(CatSweepRow {
                re_beta,
                delta_c_numeric: numeric,
                delta_c_analytic: analytic,
                abs_err: (numeric - analytic).abs(),
                status,
            })
        })
        .collect()
}

pub fn write_cat_sweep_csv<W: Write>(mut out: W, rows: &[CatSweepRow]) -> std::io::Result<()> {
    writeln!(out, "re_beta,delta_c_numeric,delta_c_analytic,abs_err,status")?;
    for r in rows {
        writeln!(
            out,
            "{:.16e},{:.16e},{:.16e},{:.16e},{}",
            r.re_beta,
            r.delta_c_numeric,
            r.delta_c_analytic,
            r.abs_err,
            r.status.as_str()
        )?;
    }
    out.flush()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CircleSweepRow {
    pub d: f64,
    pub delta_c_numeric: f64,
    pub delta_c_bound: f64,
    pub status: RowStatus,
}

/// Numeric Δ_c (relative tolerance) and the Bessel bound for each d in [1, 8].
pub fn circle_sweep(m: usize, ds: &[f64], rel_tol: f64) -> Result<Vec<CircleSweepRow>> {
    if ds.is_empty() {
        return Err(Error::InvalidParameter("empty d range".into()));
    }
    if let Some(d) = ds.iter().find(|d| !(**d >= 1.0 && **d <= 8.0)) {
        return Err(Error::InvalidParameter(format!("d {d} outside [1, 8]")));
    }
    ds.iter()
        .map(|&d| {
            let params = CircleCatParams::new(m, d, 1.0)?;
            let base = circle_state(params);
            let family = DephasedFamily::new(base.clone(), MinimizationSpec::auto(&base));
            let (numeric, status) = solve(&family, DeltaTolerance::Relative(rel_tol))?;
            Ok(CircleSweepRow {
                d,
                delta_c_numeric: numeric,
                delta_c_bound: critical_delta_bound(params).bound,
                status,
            })
        })
        .collect()
}

pub fn write_circle_sweep_csv<W: Write>(mut out: W, rows: &[CircleSweepRow]) -> std::io::Result<()> {
    writeln!(out, "d,delta_c_numeric,delta_c_bound,status")?;
    for r in rows {
        writeln!(
            out,
            "{:.16e},{:.16e},{:.16e},{}",
            r.d,
            r.delta_c_numeric,
            r.delta_c_bound,
            r.status.as_str()
        )?;
    }
    out.flush()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RadialRow {
    /// radius R in units of σ
    pub r: f64,
    pub w_exact: f64,
    pub w_bessel: f64,
    pub j0_over_pi: f64,
    pub status: RowStatus,
}

/// `samples` radii spaced evenly on [0, M/(2√2 d)).
pub fn default_radii(params: CircleCatParams, samples: usize) -> Vec<f64> {
    let limit = params.validity_radius();
    (0..samples).map(|i| limit * i as f64 / samples as f64).collect()
}

/// Exact and leading-order W along φ = 0; rows outside the window keep w_bessel = NaN.
pub fn circle_radial(params: CircleCatParams, radii: &[f64]) -> Result<Vec<RadialRow>> {
    if radii.is_empty() {
        return Err(Error::InvalidParameter("empty radius range".into()));
    }
    let cat = CircleCat::new(params);
    radii
        .iter()
        .map(|&r| {
            let w_exact = cat.wigner_exact(PolarPoint::new(r, 0.0)?)?;
            let (w_bessel, status) = match cat.wigner_bessel(r) {
                Ok(w) => (w, RowStatus::Ok),
                Err(Error::OutsideValidityWindow { .. }) => (f64::NAN, RowStatus::OutsideWindow),
                Err(e) => return Err(e),
            };
            let arg = 2.0 * SQRT_2 * r * params.d;
            Ok(RadialRow {
                r,
                w_exact,
                w_bessel,
                j0_over_pi: bessel_j(0, arg)? * FRAC_1_PI,
                status,
            })
        })
        .collect()
}

pub fn write_radial_csv<W: Write>(mut out: W, rows: &[RadialRow]) -> std::io::Result<()> {
    writeln!(out, "r,w_exact,w_bessel,j0_over_pi,status")?;
    for r in rows {
        writeln!(
            out,
            "{:.16e},{:.16e},{:.16e},{:.16e},{}",
            r.r,
            r.w_exact,
            r.w_bessel,
            r.j0_over_pi,
            r.status.as_str()
        )?;
    }
    out.flush()
}
