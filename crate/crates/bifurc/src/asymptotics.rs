//! Large- and small-peak expansions of the bifurcation curve, plus
//! envelope fitting of the oscillatory remainder.
//!
//! For each problem family the curve behaves like
//! `lambda(alpha) ≈ c_lead alpha^e_lead + c_2 alpha^e_2 sin(alpha + phase)`
//! as the peak value grows; [`large_alpha_model`] tabulates the
//! coefficients, [`predict_large_alpha`] evaluates them, and
//! [`analyze_residual`] measures how a computed curve's remainder
//! actually decays by locating its oscillation peaks. Near zero peak
//! value a two-term expansion is available for the families whose
//! diffusion vanishes linearly at the origin.

use std::f64::consts::PI;

use serde::Serialize;
use thiserror::Error;

use crate::fit::fit_line;
use crate::model::{ProblemFamily, ProblemSpec};
use crate::quadrature::{integrate_endpoint_singular, QuadratureConfig};
use crate::special;
use crate::timemap::SweepResult;

/// Two-term large-peak model of the curve with an explicit remainder order.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct AsymptoticModel {
    /// Coefficient of the leading power of the peak value.
    pub leading_coeff: f64,
    /// Exponent of the leading power.
    pub leading_exp: f64,
    /// Coefficient of the oscillatory second term (0 when absent).
    pub second_coeff: f64,
    /// Exponent of the oscillatory second term.
    pub second_exp: f64,
    /// Phase shift of the oscillation: the second term goes like
    /// `sin(alpha + phase_shift)`.
    pub phase_shift: f64,
    /// Order of what is left after subtracting both terms
    /// (`-inf` when the leading term is exact).
    pub remainder_exp: f64,
}

/// Measured envelope of an oscillatory curve remainder.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct EnvelopeFit {
    /// Envelope prefactor referred to the model's decay exponent.
    pub amplitude: f64,
    /// Fitted decay exponent of the oscillation peaks (log-log slope).
    pub decay_exp: f64,
    /// Phase deviation from the model oscillation, in radians
    /// (±π when the remainder oscillates in antiphase).
    pub phase_offset: f64,
    /// Sign changes of the remainder between consecutive grid points.
    pub sign_changes: u32,
    /// RMS residual of the log-log envelope line fit.
    pub rms_misfit: f64,
}

/// Errors from expansion evaluation and envelope fitting.
#[derive(Debug, Error)]
pub enum AsymError {
    /// The requested expansion does not exist for this family.
    #[error("no {what} available for the {family} family")]
    UnsupportedFamily {
        /// Family token.
        family: &'static str,
        /// What was asked for.
        what: &'static str,
    },
    /// Too few oscillation peaks inside the sweep range.
    #[error("found only {found} usable oscillation peaks; need at least 10")]
    InsufficientCoverage {
        /// Number of usable peaks found.
        found: usize,
    },
}

/// Pure-power time-map constant `B((k+1)/(2m), 1/2) / (2m)`.
pub fn coeff_a(k: u32, m: u32) -> f64 {
    let two_m = 2.0 * m as f64;
    special::beta((k as f64 + 1.0) / two_m, 0.5) / two_m
}

/// Constants of the small-peak expansion: the exact leading integral
/// `C0 = B(2/3, 1/2) / 3` and the first-correction integral `C1`.
pub fn coeff_c0_c1() -> (f64, f64) {
    let c0 = special::beta(2.0 / 3.0, 0.5) / 3.0;
    // C1 = ∫ (s² - (3/8) s (1+s+s²+s³)/(1+s+s²)) / sqrt(1-s³) ds over
    // (0, 1), written with 1-s³ = (1-s)(1+s+s²) so the integrable
    // endpoint singularity is exposed to the quadrature rule exactly.
    let cfg = QuadratureConfig { rel_tol: 1e-13, abs_tol: 1e-15, ..QuadratureConfig::default() };
    let c1 = integrate_endpoint_singular(
        |s, om| {
            let sig2 = 1.0 + s + s * s;
            let sig3 = sig2 + s * s * s;
            (s * s - 0.375 * s * sig3 / sig2) / (om * sig2).sqrt()
        },
        &cfg,
    )
    .expect("fixed smooth integrand cannot fail")
    .value;
    (c0, c1)
}

/// Tabulate the two-term large-peak model for a problem family.
pub fn large_alpha_model(spec: &ProblemSpec) -> AsymptoticModel {
    let phase_shift = -0.25 * PI;
    match spec.family() {
        ProblemFamily::PurePower => {
            let (k, m) = (spec.k(), spec.m());
            let a = coeff_a(k, m);
            AsymptoticModel {
                leading_coeff: 4.0 * m as f64 * a * a,
                leading_exp: 2.0 * k as f64 + 2.0 - 2.0 * m as f64,
                second_coeff: 0.0,
                second_exp: 0.0,
                phase_shift,
                remainder_exp: f64::NEG_INFINITY,
            }
        }
        ProblemFamily::OscReaction => {
            let (k, m) = (spec.k(), spec.m());
            let mf = m as f64;
            let a = coeff_a(k, m);
            let second_exp = 3.0 * k as f64 + 2.5 - 4.0 * mf;
            AsymptoticModel {
                leading_coeff: 4.0 * mf * a * a,
                leading_exp: 2.0 * k as f64 + 2.0 - 2.0 * mf,
                second_coeff: -8.0 * mf * a * (PI / (2.0 * mf)).sqrt(),
                second_exp,
                phase_shift,
                remainder_exp: second_exp - 0.5,
            }
        }
        ProblemFamily::OscBoth => {
            let a = coeff_a(2, 2);
            AsymptoticModel {
                leading_coeff: 8.0 * a * a,
                leading_exp: 2.0,
                second_coeff: -8.0 * a * PI.sqrt(),
                second_exp: 0.5,
                phase_shift,
                remainder_exp: 0.0,
            }
        }
        ProblemFamily::OscDiffusion => {
            let (n, p) = (spec.n(), spec.p());
            let nf = n as f64;
            let a = coeff_a(2 * n, n + 1);
            AsymptoticModel {
                leading_coeff: 4.0 * (nf + 1.0) * p * a * a,
                leading_exp: 2.0 * nf,
                second_coeff: 8.0 * (nf + 1.0) * (p - 1.0) / p
                    * a
                    * (PI / (2.0 * (nf + 1.0))).sqrt(),
                second_exp: -0.5,
                phase_shift,
                remainder_exp: -1.0,
            }
        }
    }
}

/// Evaluate the large-peak model at one peak value.
///
/// Returns the leading term, the two-term prediction, and the model.
pub fn predict_large_alpha(spec: &ProblemSpec, alpha: f64) -> (f64, f64, AsymptoticModel) {
    assert!(alpha.is_finite() && alpha > 0.0, "need finite alpha > 0");
    let model = large_alpha_model(spec);
    let leading = model.leading_coeff * alpha.powf(model.leading_exp);
    let with_second = leading
        + model.second_coeff
            * alpha.powf(model.second_exp)
            * (alpha + model.phase_shift).sin();
    (leading, with_second, model)
}

/// Two-term small-peak prediction of the curve value.
///
/// Available where the diffusion vanishes linearly at the origin: the
/// unit-power oscillating-diffusion family (`n = 1`, any `p`) obeys
/// `lambda ≈ 6 alpha (C0² + 2 p C0 C1 alpha)` and the coupled family
/// `lambda ≈ 3 alpha (C0² + 2 C0 C1 alpha)`.
pub fn predict_small_alpha(spec: &ProblemSpec, alpha: f64) -> Result<f64, AsymError> {
    assert!(alpha.is_finite() && alpha > 0.0, "need finite alpha > 0");
    let unsupported = |family: &'static str| AsymError::UnsupportedFamily {
        family,
        what: "small-peak expansion",
    };
    let (c0, c1) = coeff_c0_c1();
    match spec.family() {
        ProblemFamily::OscDiffusion if spec.n() == 1 => {
            Ok(6.0 * alpha * (c0 * c0 + 2.0 * spec.p() * c0 * c1 * alpha))
        }
        ProblemFamily::OscBoth => Ok(3.0 * alpha * (c0 * c0 + 2.0 * c0 * c1 * alpha)),
        other => Err(unsupported(other.name())),
    }
}

/// Slack allowed on either side of an expected oscillation peak when
/// collecting the samples that describe it.
const PEAK_WINDOW_HALF_WIDTH: f64 = 0.25 * PI;

struct Peak {
    alpha: f64,
    magnitude: f64,
    positive: bool,
    lattice_j: i64,
}

/// Measure the oscillatory remainder of a computed curve against a model.
///
/// Subtracts the model's leading term, locates the remainder's
/// oscillation peaks near the lattice `alpha_j = 3π/4 + jπ` (refining
/// each by a local parabola when neighbors are available), and fits
/// the peak magnitudes with a log-log line. The amplitude is referred
/// to the model's second-term exponent, or to its remainder order when
/// no second term exists. Needs at least 10 peaks inside the sweep.
pub fn analyze_residual(
    sweep: &SweepResult,
    model: &AsymptoticModel,
) -> Result<EnvelopeFit, AsymError> {
    let q_model = if model.second_coeff != 0.0 { model.second_exp } else { model.remainder_exp };
    if !q_model.is_finite() {
        return Err(AsymError::UnsupportedFamily {
            family: sweep.spec.family().name(),
            what: "remainder envelope analysis",
        });
    }
    let mut pts: Vec<(f64, f64)> = sweep
        .points
        .iter()
        .map(|p| (p.alpha, p.lambda - model.leading_coeff * p.alpha.powf(model.leading_exp)))
        .collect();
    pts.sort_by(|x, y| x.0.total_cmp(&y.0));
    let sign_changes = pts.windows(2).filter(|w| w[0].1 * w[1].1 < 0.0).count() as u32;
    let peaks = collect_peaks(&pts);
    if peaks.len() < 10 {
        return Err(AsymError::InsufficientCoverage { found: peaks.len() });
    }
    let xs: Vec<f64> = peaks.iter().map(|p| p.alpha.ln()).collect();
    let ys: Vec<f64> = peaks.iter().map(|p| p.magnitude.ln()).collect();
    let (decay_exp, _, rms_misfit) = fit_line(&xs, &ys);
    let mean_x = xs.iter().sum::<f64>() / xs.len() as f64;
    let mean_y = ys.iter().sum::<f64>() / ys.len() as f64;
    let amplitude = (mean_y - q_model * mean_x).exp();
    // Peaks of C α^q sin(α - π/4) sit on the lattice with sign
    // sign(C)·(-1)^j; a common displacement of the measured peaks from
    // the lattice is a phase deviation, and a majority sign mismatch
    // means the remainder runs in antiphase.
    let model_sign_positive = model.second_coeff >= 0.0;
    let base = 0.75 * PI;
    let mut dev_sum = 0.0;
    let mut matched = 0usize;
    for pk in &peaks {
        dev_sum += pk.alpha - (base + pk.lattice_j as f64 * PI);
        let expected_positive = model_sign_positive == (pk.lattice_j % 2 == 0);
        if pk.positive == expected_positive {
            matched += 1;
        }
    }
    let mut phase_offset = -dev_sum / peaks.len() as f64;
    if matched * 2 < peaks.len() {
        phase_offset = wrap_pi(phase_offset + PI);
    }
    Ok(EnvelopeFit { amplitude, decay_exp, phase_offset, sign_changes, rms_misfit })
}

fn wrap_pi(x: f64) -> f64 {
    let mut y = x % (2.0 * PI);
    if y <= -PI {
        y += 2.0 * PI;
    } else if y > PI {
        y -= 2.0 * PI;
    }
    y
}

fn collect_peaks(pts: &[(f64, f64)]) -> Vec<Peak> {
    let mut peaks = Vec::new();
    if pts.len() < 2 {
        return peaks;
    }
    let lo = pts.first().unwrap().0;
    let hi = pts.last().unwrap().0;
    let base = 0.75 * PI;
    let mut j = (((lo + PEAK_WINDOW_HALF_WIDTH - base) / PI).ceil().max(0.0)) as i64;
    loop {
        let center = base + j as f64 * PI;
        if center + PEAK_WINDOW_HALF_WIDTH > hi {
            break;
        }
        let ia = pts.partition_point(|p| p.0 < center - PEAK_WINDOW_HALF_WIDTH);
        let ib = pts.partition_point(|p| p.0 <= center + PEAK_WINDOW_HALF_WIDTH);
        if ia < ib {
            let mut best = ia;
            for i in ia..ib {
                if pts[i].1.abs() > pts[best].1.abs() {
                    best = i;
                }
            }
            let (alpha, magnitude) = refine_peak(pts, best);
            if magnitude > 0.0 {
                peaks.push(Peak {
                    alpha,
                    magnitude,
                    positive: pts[best].1 > 0.0,
                    lattice_j: j,
                });
            }
        }
        j += 1;
    }
    peaks
}

/// Refine a sampled peak of |r| by the vertex of the parabola through
/// it and its immediate neighbors; falls back to the raw sample when
/// the fit is not a well-placed maximum, or when the neighbors sit in
/// different oscillation humps (as on a peak-lattice grid, where the
/// raw sample already is the extremum).
fn refine_peak(pts: &[(f64, f64)], i: usize) -> (f64, f64) {
    let raw = (pts[i].0, pts[i].1.abs());
    if i == 0 || i + 1 >= pts.len() {
        return raw;
    }
    if pts[i].0 - pts[i - 1].0 >= 0.5 * PI || pts[i + 1].0 - pts[i].0 >= 0.5 * PI {
        return raw;
    }
    let (x0, y0) = (pts[i - 1].0, pts[i - 1].1.abs());
    let (x1, y1) = (pts[i].0, pts[i].1.abs());
    let (x2, y2) = (pts[i + 1].0, pts[i + 1].1.abs());
    let d01 = (y1 - y0) / (x1 - x0);
    let d12 = (y2 - y1) / (x2 - x1);
    let curvature = (d12 - d01) / (x2 - x0);
    if !(curvature < 0.0) {
        return raw;
    }
    let vertex = 0.5 * (x0 + x1 - d01 / curvature);
    if !(vertex > x0 && vertex < x2) {
        return raw;
    }
    let value = y1 + curvature * (vertex - x0) * (vertex - x1)
        + d01 * (vertex - x1);
    if value >= y1 {
        (vertex, value)
    } else {
        raw
    }
}
