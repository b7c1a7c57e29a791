//! Exact bifurcation-curve evaluation through the time-map integral.
//!
//! For an admissible problem the half-interval transit time of the
//! positive solution with peak value `alpha` is
//! `T(alpha) = alpha * ∫ D(alpha s) / sqrt(G(alpha) - G(alpha s)) ds`
//! over `s` in (0, 1), and the curve value is `lambda = 2 T(alpha)^2`.
//! This module evaluates single points, parallel sweeps over grids,
//! sampled solution profiles, and the CSV form used by the command
//! line tools.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::model::ProblemSpec;
use crate::quadrature::{
    adaptive_with_breakpoints, integrate_endpoint_singular, integrate_oscillatory_singular,
    QuadError, QuadratureConfig,
};

/// One computed point of the bifurcation curve.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct CurvePoint {
    /// Peak value of the solution (its maximum over the interval).
    pub alpha: f64,
    /// Curve value `lambda(alpha)`.
    pub lambda: f64,
    /// Propagated quadrature error bound on `lambda`.
    pub err_estimate: f64,
    /// Total integrand evaluations spent on this point.
    pub nodes_used: u64,
}

/// A full curve: the problem it belongs to plus its computed points.
#[derive(Debug, Clone)]
pub struct SweepResult {
    /// Problem the curve was computed for.
    pub spec: ProblemSpec,
    /// Curve points in grid order.
    pub points: Vec<CurvePoint>,
}

/// Sampled half-interval solution profile `u(t)` for `t` in [0, 1/2].
#[derive(Debug, Clone)]
pub struct SolutionProfile {
    /// Sample times, strictly increasing from 0 to the half-interval transit.
    pub ts: Vec<f64>,
    /// Solution values at `ts`, increasing from 0 to the peak value.
    pub us: Vec<f64>,
}

/// How the sweep grid distributes points between its endpoints.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Spacing {
    /// Equally spaced points.
    Linear,
    /// Points equally spaced in log(alpha).
    Log,
    /// The lattice `alpha_j = 3π/4 + jπ` restricted to [start, stop],
    /// which samples near the peaks of the oscillatory remainder.
    PhaseLocked,
}

impl Spacing {
    /// Canonical token for this spacing, as accepted by [`Spacing::parse`].
    pub fn name(self) -> &'static str {
        match self {
            Spacing::Linear => "linear",
            Spacing::Log => "log",
            Spacing::PhaseLocked => "phase-locked",
        }
    }

    /// Parse a spacing token; `None` for anything unknown.
    pub fn parse(text: &str) -> Option<Self> {
        match text {
            "linear" => Some(Spacing::Linear),
            "log" => Some(Spacing::Log),
            "phase-locked" => Some(Spacing::PhaseLocked),
            _ => None,
        }
    }
}

/// Description of a sweep grid over peak values.
#[derive(Debug, Clone, Copy)]
pub struct GridSpec {
    /// Smallest admissible peak value, must be positive.
    pub start: f64,
    /// Largest peak value, must exceed `start`.
    pub stop: f64,
    /// Number of points for linear and log spacing (ignored for
    /// phase-locked grids, whose lattice is fixed).
    pub count: usize,
    /// Point distribution.
    pub spacing: Spacing,
}

impl GridSpec {
    /// Materialize the grid as an increasing list of peak values.
    pub fn points(&self) -> Result<Vec<f64>, TimemapError> {
        if !(self.start.is_finite() && self.stop.is_finite())
            || self.start <= 0.0
            || self.stop <= self.start
        {
            return Err(TimemapError::InvalidGrid {
                reason: format!(
                    "need finite 0 < start < stop, got start = {}, stop = {}",
                    self.start, self.stop
                ),
            });
        }
        match self.spacing {
            Spacing::Linear => {
                self.require_count()?;
                let h = (self.stop - self.start) / (self.count - 1) as f64;
                let mut pts: Vec<f64> =
                    (0..self.count).map(|i| self.start + i as f64 * h).collect();
                *pts.last_mut().unwrap() = self.stop;
                Ok(pts)
            }
            Spacing::Log => {
                self.require_count()?;
                let (la, lb) = (self.start.ln(), self.stop.ln());
                let h = (lb - la) / (self.count - 1) as f64;
                let mut pts: Vec<f64> =
                    (0..self.count).map(|i| (la + i as f64 * h).exp()).collect();
                pts[0] = self.start;
                *pts.last_mut().unwrap() = self.stop;
                Ok(pts)
            }
            Spacing::PhaseLocked => {
                let base = 0.75 * PI;
                let j_min = (((self.start - base) / PI).ceil().max(0.0)) as i64;
                let mut pts = Vec::new();
                let mut j = j_min;
                loop {
                    let a = base + j as f64 * PI;
                    if a > self.stop {
                        break;
                    }
                    if a >= self.start {
                        pts.push(a);
                    }
                    j += 1;
                }
                if pts.len() < 2 {
                    return Err(TimemapError::InvalidGrid {
                        reason: format!(
                            "phase-locked lattice has {} point(s) in [{}, {}]; need at least 2",
                            pts.len(),
                            self.start,
                            self.stop
                        ),
                    });
                }
                Ok(pts)
            }
        }
    }

    fn require_count(&self) -> Result<(), TimemapError> {
        if self.count < 2 {
            return Err(TimemapError::InvalidGrid {
                reason: format!("need count >= 2, got {}", self.count),
            });
        }
        Ok(())
    }
}

/// Errors from curve evaluation, sweeping, profiles, and CSV exchange.
#[derive(Debug, Error)]
pub enum TimemapError {
    /// The diffusion coefficient dips to zero or below on [0, alpha].
    #[error(
        "problem is inadmissible at alpha = {alpha}: min D = {min_d:e} at u = {worst_u}"
    )]
    Inadmissible {
        /// Peak value whose admissibility scan failed.
        alpha: f64,
        /// Most negative diffusion value found on the scan.
        min_d: f64,
        /// Argument at which the minimum was found.
        worst_u: f64,
    },
    /// The quadrature backend rejected the integrand outright.
    #[error("quadrature failed at alpha = {alpha}: {source}")]
    Quadrature {
        /// Peak value at which the failure occurred.
        alpha: f64,
        /// Underlying quadrature error.
        #[source]
        source: QuadError,
    },
    /// The time-map integral ran out of budget before reaching tolerance.
    #[error(
        "time-map integral did not converge at alpha = {alpha}: \
         err estimate {err_estimate:e} after {nodes_used} nodes"
    )]
    NotConverged {
        /// Peak value at which convergence failed.
        alpha: f64,
        /// Best-effort curve value.
        lambda_estimate: f64,
        /// Error bound attached to the estimate.
        err_estimate: f64,
        /// Integrand evaluations spent before giving up.
        nodes_used: u64,
    },
    /// The sweep grid description is unusable.
    #[error("invalid grid: {reason}")]
    InvalidGrid {
        /// Human-readable explanation.
        reason: String,
    },
    /// A curve CSV file does not match the expected schema.
    #[error("bad curve file at line {line}: {reason}")]
    CsvFormat {
        /// 1-based offending line number.
        line: usize,
        /// Human-readable explanation.
        reason: String,
    },
    /// The supplied (alpha, lambda) pair does not lie on the curve.
    #[error(
        "(alpha, lambda) = ({alpha}, {lambda}) is off the curve: \
         half-interval transit time {transit} instead of 0.5"
    )]
    InconsistentPair {
        /// Peak value of the rejected pair.
        alpha: f64,
        /// Curve value of the rejected pair.
        lambda: f64,
        /// Transit time implied by the pair.
        transit: f64,
    },
}

/// Absolute slack allowed between the reconstructed half-interval transit
/// time and 1/2 before a (alpha, lambda) pair is declared inconsistent.
const PROFILE_TRANSIT_TOL: f64 = 1e-6;

fn admissibility_scan_points(spec: &ProblemSpec, alpha: f64) -> usize {
    if spec.oscillation_freq(alpha) == 0.0 {
        // No trigonometric term: D and g are power functions, so a
        // modest grid already brackets every sign change.
        return 1000;
    }
    // 128 samples per oscillation period, computed in floating point
    // (the count overflows usize for huge peaks) and capped well past
    // the density at which the downstream quadrature gives up anyway.
    let per_period = (alpha / (2.0 * PI)).ceil().max(1.0) * 128.0;
    per_period.clamp(1000.0, 64e6) as usize
}

fn check_admissible(spec: &ProblemSpec, alpha: f64) -> Result<(), TimemapError> {
    let report = spec.validate_admissibility(alpha, admissibility_scan_points(spec, alpha));
    if report.ok {
        Ok(())
    } else {
        Err(TimemapError::Inadmissible { alpha, min_d: report.min_d, worst_u: report.worst_u })
    }
}

/// Evaluate one point of the bifurcation curve.
///
/// Validates admissibility on [0, alpha], evaluates the time-map
/// integral with the oscillation-aware singular rule, and returns
/// `lambda = 2 T^2` with a propagated error bound.
pub fn lambda_of_alpha(
    spec: &ProblemSpec,
    alpha: f64,
    cfg: &QuadratureConfig,
) -> Result<CurvePoint, TimemapError> {
    assert!(alpha.is_finite() && alpha > 0.0, "need finite alpha > 0");
    check_admissible(spec, alpha)?;
    let res = integrate_oscillatory_singular(
        |s, om| alpha * spec.d(alpha * s) / spec.potential_diff(alpha, s, om).sqrt(),
        spec.oscillation_freq(alpha),
        cfg,
    )
    .map_err(|source| TimemapError::Quadrature { alpha, source })?;
    let lambda = 2.0 * res.value * res.value;
    let err_estimate = 4.0 * res.value.abs() * res.err_estimate;
    if !res.converged {
        return Err(TimemapError::NotConverged {
            alpha,
            lambda_estimate: lambda,
            err_estimate,
            nodes_used: res.nodes_used,
        });
    }
    Ok(CurvePoint { alpha, lambda, err_estimate, nodes_used: res.nodes_used })
}

/// Evaluate every grid point in parallel, keeping per-point outcomes.
///
/// Grid construction errors are returned immediately; evaluation
/// failures stay attached to their peak value so callers can emit
/// partial results.
pub fn sweep_outcomes(
    spec: &ProblemSpec,
    grid: &GridSpec,
    cfg: &QuadratureConfig,
) -> Result<Vec<(f64, Result<CurvePoint, TimemapError>)>, TimemapError> {
    let alphas = grid.points()?;
    Ok(alphas
        .into_par_iter()
        .map(|alpha| (alpha, lambda_of_alpha(spec, alpha, cfg)))
        .collect())
}

/// Evaluate a full curve, failing on the first grid point that does not
/// produce a converged value.
pub fn sweep_curve(
    spec: &ProblemSpec,
    grid: &GridSpec,
    cfg: &QuadratureConfig,
) -> Result<SweepResult, TimemapError> {
    let outcomes = sweep_outcomes(spec, grid, cfg)?;
    let mut points = Vec::with_capacity(outcomes.len());
    for (_, outcome) in outcomes {
        points.push(outcome?);
    }
    Ok(SweepResult { spec: *spec, points })
}

/// Reconstruct the half-interval solution profile for a curve pair.
///
/// Samples `u_j = alpha * sin(j π / (2 N))` for `j = 0..=N` (clustering
/// near the peak) and computes each sample time by integrating the
/// time-map density up to `u_j`. Rejects pairs whose implied transit
/// time differs from 1/2 by more than a fixed slack, which catches
/// lambda values that are not on the curve.
pub fn solution_profile(
    spec: &ProblemSpec,
    alpha: f64,
    lambda: f64,
    sample_count: usize,
) -> Result<SolutionProfile, TimemapError> {
    assert!(alpha.is_finite() && alpha > 0.0, "need finite alpha > 0");
    assert!(lambda.is_finite() && lambda > 0.0, "need finite lambda > 0");
    assert!(sample_count >= 2, "need at least two samples");
    check_admissible(spec, alpha)?;
    let cfg = QuadratureConfig { rel_tol: 1e-11, abs_tol: 1e-14, ..QuadratureConfig::default() };
    let n = sample_count;
    // s_j = sin(θ_j) and 1 - s_j = 2 sin²(π/4 - θ_j/2), the latter kept
    // in this product form so the last few slivers retain full relative
    // accuracy where 1 - s_j underflows to rounding noise.
    let mut s = Vec::with_capacity(n + 1);
    let mut om = Vec::with_capacity(n + 1);
    for j in 0..=n {
        let theta = 0.5 * PI * j as f64 / n as f64;
        let r = (0.25 * PI - 0.5 * theta).sin();
        s.push(theta.sin());
        om.push(2.0 * r * r);
    }
    s[n] = 1.0;
    om[n] = 0.0;
    let freq = spec.oscillation_freq(alpha);
    let density = |sv: f64, omv: f64| alpha * spec.d(alpha * sv) / spec.potential_diff(alpha, sv, omv).sqrt();
    let quad_fail = |source| TimemapError::Quadrature { alpha, source };
    let mut prefix = vec![0.0f64; n + 1];
    let mut acc = 0.0f64;
    let mut all_converged = true;
    let mut nodes = 0u64;
    for j in 1..n {
        let (a, b) = (s[j - 1], s[j]);
        let seg = adaptive_with_breakpoints(
            |sv| density(sv, 1.0 - sv),
            a,
            b,
            &half_period_cuts(freq, a, b),
            &cfg,
        )
        .map_err(quad_fail)?;
        all_converged &= seg.converged;
        nodes += seg.nodes_used;
        acc += seg.value;
        prefix[j] = acc;
    }
    // Final sliver [s_{N-1}, 1]: rescale onto (0, 1) and use the
    // endpoint-singular rule, passing the distance to 1 exactly.
    let w = om[n - 1];
    let tail = integrate_endpoint_singular(
        |_sig, om_sig| w * density(1.0 - w * om_sig, w * om_sig),
        &cfg,
    )
    .map_err(quad_fail)?;
    all_converged &= tail.converged;
    nodes += tail.nodes_used;
    acc += tail.value;
    prefix[n] = acc;
    if !all_converged {
        return Err(TimemapError::NotConverged {
            alpha,
            lambda_estimate: 2.0 * acc * acc,
            err_estimate: f64::NAN,
            nodes_used: nodes,
        });
    }
    let scale = 1.0 / (2.0 * lambda).sqrt();
    let transit = acc * scale;
    if (transit - 0.5).abs() > PROFILE_TRANSIT_TOL {
        return Err(TimemapError::InconsistentPair { alpha, lambda, transit });
    }
    let ts = prefix.iter().map(|&v| v * scale).collect();
    let us = s.iter().map(|&sv| alpha * sv).collect();
    Ok(SolutionProfile { ts, us })
}

/// Interior half-period phase cuts `jπ/freq` strictly inside (a, b).
fn half_period_cuts(freq: f64, a: f64, b: f64) -> Vec<f64> {
    if freq <= 0.0 {
        return Vec::new();
    }
    let mut cuts = Vec::new();
    let mut j = (a * freq / PI).floor() as i64 + 1;
    loop {
        let x = j as f64 * PI / freq;
        if x >= b {
            break;
        }
        if x > a {
            cuts.push(x);
        }
        j += 1;
    }
    cuts
}

/// Header line of a complete curve CSV file.
pub const CSV_HEADER: &str = "alpha,lambda,err_estimate,nodes";
/// Header line of a partial curve CSV file with per-point convergence.
pub const CSV_HEADER_PARTIAL: &str = "alpha,lambda,err_estimate,nodes,converged";

fn push_fields(out: &mut String, alpha: f64, lambda: f64, err: f64, nodes: u64) {
    use std::fmt::Write;
    write!(out, "{:.16e},{:.16e},{:.16e},{}", alpha, lambda, err, nodes).unwrap();
}

/// Serialize curve points as CSV with 17 significant digits and LF
/// line endings; output is byte-deterministic for equal inputs.
pub fn curve_to_csv(points: &[CurvePoint]) -> String {
    let mut out = String::with_capacity(32 + 80 * points.len());
    out.push_str(CSV_HEADER);
    out.push('\n');
    for p in points {
        push_fields(&mut out, p.alpha, p.lambda, p.err_estimate, p.nodes_used);
        out.push('\n');
    }
    out
}

/// Serialize per-point sweep outcomes as CSV with a trailing
/// `converged` column; failed points keep their best-effort estimates.
pub fn outcomes_to_csv(outcomes: &[(f64, Result<CurvePoint, TimemapError>)]) -> String {
    let mut out = String::with_capacity(32 + 88 * outcomes.len());
    out.push_str(CSV_HEADER_PARTIAL);
    out.push('\n');
    for (alpha, outcome) in outcomes {
        match outcome {
            Ok(p) => {
                push_fields(&mut out, p.alpha, p.lambda, p.err_estimate, p.nodes_used);
                out.push_str(",true\n");
            }
            Err(TimemapError::NotConverged {
                alpha,
                lambda_estimate,
                err_estimate,
                nodes_used,
            }) => {
                push_fields(&mut out, *alpha, *lambda_estimate, *err_estimate, *nodes_used);
                out.push_str(",false\n");
            }
            Err(_) => {
                push_fields(&mut out, *alpha, f64::NAN, f64::NAN, 0);
                out.push_str(",false\n");
            }
        }
    }
    out
}

/// One parsed row of a curve CSV file.
#[derive(Debug, Clone, Copy)]
pub struct CsvRow {
    /// The curve point carried by the row.
    pub point: CurvePoint,
    /// Convergence flag; `true` when the file has no such column.
    pub converged: bool,
}

/// Parse a curve CSV file produced by [`curve_to_csv`] or
/// [`outcomes_to_csv`], validating the header and every field.
pub fn curve_from_csv(text: &str) -> Result<Vec<CsvRow>, TimemapError> {
    let bad = |line: usize, reason: String| TimemapError::CsvFormat { line, reason };
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| bad(1, "empty file".into()))?
        .trim_end_matches('\r');
    let has_converged = if header == CSV_HEADER {
        false
    } else if header == CSV_HEADER_PARTIAL {
        true
    } else {
        return Err(bad(
            1,
            format!("expected header '{}' or '{}'", CSV_HEADER, CSV_HEADER_PARTIAL),
        ));
    };
    let want = if has_converged { 5 } else { 4 };
    let mut rows = Vec::new();
    for (idx, raw) in lines.enumerate() {
        let line_no = idx + 2;
        let line = raw.trim_end_matches('\r');
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != want {
            return Err(bad(line_no, format!("expected {} fields, got {}", want, fields.len())));
        }
        let num = |i: usize, name: &str| -> Result<f64, TimemapError> {
            fields[i]
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| bad(line_no, format!("bad {} value '{}'", name, fields[i])))
        };
        let alpha = num(0, "alpha")?;
        let lambda = num(1, "lambda")?;
        let err_estimate = num(2, "err_estimate")?;
        let nodes_used = fields[3]
            .parse::<u64>()
            .map_err(|_| bad(line_no, format!("bad nodes value '{}'", fields[3])))?;
        let converged = if has_converged {
            match fields[4] {
                "true" => true,
                "false" => false,
                other => return Err(bad(line_no, format!("bad converged value '{}'", other))),
            }
        } else {
            true
        };
        if alpha <= 0.0 {
            return Err(bad(line_no, format!("alpha must be positive, got {}", alpha)));
        }
        rows.push(CsvRow {
            point: CurvePoint { alpha, lambda, err_estimate, nodes_used },
            converged,
        });
    }
    Ok(rows)
}
