//! Quadrature kernels for the time-map integrals.
//!
//! Three public entry points:
//!
//! - [`integrate_endpoint_singular`]: tanh-sinh rule on (0, 1), doubling
//!   node density per level. Handles inverse-square-root (and milder)
//!   endpoint singularities at both ends. Integrands receive `(s, 1-s)`
//!   so the complement never loses precision near s = 1.
//! - [`integrate_adaptive`]: globally adaptive Gauss–Kronrod 7/15
//!   bisection on a finite interval, for smooth or oscillatory integrands
//!   without endpoint singularities.
//! - [`integrate_oscillatory_singular`]: splits (0, 1) at the zeros
//!   s = jπ/freq of the oscillation, integrates the interior adaptively,
//!   and finishes the singular sliver (1-δ, 1) with a scaled tanh-sinh
//!   panel. With freq ≤ π it degenerates to the plain singular rule.
//!
//! All accumulation uses Neumaier compensated summation; error estimates
//! are deliberately conservative so they upper-bound the true error on
//! every integrand with a known closed form in the test suite.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::f64::consts::PI;
use std::sync::OnceLock;

use thiserror::Error;

/// Tolerances and budgets shared by all kernels.
#[derive(Debug, Clone)]
pub struct QuadratureConfig {
    /// Relative tolerance target (default 1e-10).
    pub rel_tol: f64,
    /// Absolute tolerance floor (default 1e-12).
    pub abs_tol: f64,
    /// Tanh-sinh refinement levels (default 12, hard cap 15).
    pub max_levels: u32,
    /// Adaptive panel budget (default 1_000_000).
    pub max_panels: usize,
    /// Initial panels per oscillation half-period (default 4).
    pub osc_panel_fraction: f64,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self {
            rel_tol: 1e-10,
            abs_tol: 1e-12,
            max_levels: 12,
            max_panels: 1_000_000,
            osc_panel_fraction: 4.0,
        }
    }
}

/// Outcome of one integration.
#[derive(Debug, Clone, Copy)]
pub struct QuadratureResult {
    /// Estimated integral value.
    pub value: f64,
    /// Conservative error estimate (upper bound in practice).
    pub err_estimate: f64,
    /// Number of integrand evaluations consumed.
    pub nodes_used: u64,
    /// Whether the requested tolerance was met within budget.
    pub converged: bool,
}

/// Hard failures a kernel can report.
#[derive(Debug, Error)]
pub enum QuadError {
    /// The integrand produced NaN or ±Inf at a quadrature node.
    #[error("integrand returned a non-finite value near s = {at}")]
    NonFinite { at: f64 },
    /// The adaptive subdivision budget ran out before the tolerance held.
    #[error("adaptive panel budget exhausted after {panels} panels")]
    PanelBudgetExceeded { panels: usize },
}

/// Neumaier compensated accumulator.
#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    pub(crate) fn new() -> Self {
        Self::default()
    }

    pub(crate) fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub(crate) fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

// ---------------------------------------------------------------------------
// Tanh-sinh rule on (0, 1)
// ---------------------------------------------------------------------------

const TS_LEVEL_CAP: u32 = 15;
const TS_T_MAX: f64 = 6.115;

#[derive(Debug, Clone, Copy)]
struct TsNode {
    s: f64,
    om: f64,
    w: f64,
}

/// Nodes introduced at each level: level 0 holds the unit-spaced trapezoid
/// nodes; level L > 0 holds only the odd multiples of 2^-L, so cumulative
/// sums can be halved and extended.
fn ts_levels() -> &'static Vec<Vec<TsNode>> {
    static LEVELS: OnceLock<Vec<Vec<TsNode>>> = OnceLock::new();
    LEVELS.get_or_init(|| {
        let mut levels = Vec::with_capacity(TS_LEVEL_CAP as usize + 1);
        for level in 0..=TS_LEVEL_CAP {
            let h = 0.5_f64.powi(level as i32);
            let mut nodes = Vec::new();
            let jmax = (TS_T_MAX / h).floor() as i64;
            for j in -jmax..=jmax {
                if level > 0 && j.rem_euclid(2) == 0 {
                    continue;
                }
                let t = j as f64 * h;
                // 2u = pi*sinh(t); s = sigmoid(2u), om = sigmoid(-2u).
                let u2 = PI * t.sinh();
                if u2.abs() > 700.0 {
                    continue;
                }
                let s = 1.0 / (1.0 + (-u2).exp());
                let om = 1.0 / (1.0 + u2.exp());
                let w = PI * s * om * t.cosh();
                if s == 0.0 || om == 0.0 || w == 0.0 {
                    continue;
                }
                nodes.push(TsNode { s, om, w });
            }
            levels.push(nodes);
        }
        levels
    })
}

/// Integrate f over (0, 1) with the tanh-sinh rule; f receives (s, 1-s).
///
/// Designed for integrands with integrable endpoint singularities such as
/// (1-s)^(-1/2). Convergence is judged by the change between successive
/// levels against `rel_tol`/`abs_tol`; `converged = false` (with the last
/// difference as the error estimate) if `max_levels` is exhausted.
pub fn integrate_endpoint_singular<F>(f: F, cfg: &QuadratureConfig) -> Result<QuadratureResult, QuadError>
where
    F: Fn(f64, f64) -> f64,
{
    let levels = ts_levels();
    let max_level = cfg.max_levels.min(TS_LEVEL_CAP);
    let mut nodes_used = 0u64;
    let mut value = 0.0f64;
    let mut abs_value = 0.0f64;
    let mut prev_diff = f64::INFINITY;
    for level in 0..=max_level {
        let h = 0.5_f64.powi(level as i32);
        let mut sum = CompensatedSum::new();
        let mut abs_sum = CompensatedSum::new();
        for node in &levels[level as usize] {
            let fv = f(node.s, node.om);
            if !fv.is_finite() {
                return Err(QuadError::NonFinite { at: node.s });
            }
            nodes_used += 1;
            sum.add(node.w * fv);
            abs_sum.add((node.w * fv).abs());
        }
        let (new_value, new_abs) = if level == 0 {
            (sum.value(), abs_sum.value())
        } else {
            (0.5 * value + h * sum.value(), 0.5 * abs_value + h * abs_sum.value())
        };
        let diff = (new_value - value).abs();
        let floor = 4.0 * f64::EPSILON * new_abs.abs();
        value = new_value;
        abs_value = new_abs;
        if level >= 2 {
            let target = (cfg.rel_tol * value.abs()).max(cfg.abs_tol).max(floor);
            if diff <= target {
                return Ok(QuadratureResult {
                    value,
                    err_estimate: diff.max(floor),
                    nodes_used,
                    converged: true,
                });
            }
        }
        prev_diff = diff;
    }
    Ok(QuadratureResult {
        value,
        err_estimate: prev_diff,
        nodes_used,
        converged: false,
    })
}

// ---------------------------------------------------------------------------
// Gauss-Kronrod 7/15 adaptive bisection
// ---------------------------------------------------------------------------

/// Kronrod abscissae on [0, 1] (symmetric), QUADPACK dqk15 values.
const GK_XGK: [f64; 8] = [
    0.991_455_371_120_813,
    0.949_107_912_342_759,
    0.864_864_423_359_769,
    0.741_531_185_599_394,
    0.586_087_235_467_691,
    0.405_845_151_377_397,
    0.207_784_955_007_898,
    0.0,
];

/// Kronrod weights matching `GK_XGK`.
const GK_WGK: [f64; 8] = [
    0.022_935_322_010_529,
    0.063_092_092_629_979,
    0.104_790_010_322_250,
    0.140_653_259_715_525,
    0.169_004_726_639_267,
    0.190_350_578_064_785,
    0.204_432_940_075_298,
    0.209_482_141_084_728,
];

/// Embedded 7-point Gauss weights (abscissae GK_XGK[1], [3], [5], [7]).
const GK_WG: [f64; 4] = [
    0.129_484_966_168_870,
    0.279_705_391_489_277,
    0.381_830_050_505_119,
    0.417_959_183_673_469,
];

struct PanelEval {
    value: f64,
    err: f64,
    resabs: f64,
}

/// One GK15 pass over [a, b] with the QUADPACK error rescaling.
fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Result<PanelEval, QuadError> {
    let hlgth = 0.5 * (b - a);
    let centr = 0.5 * (a + b);
    let eval = |x: f64| -> Result<f64, QuadError> {
        let v = f(x);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(QuadError::NonFinite { at: x })
        }
    };
    let fc = eval(centr)?;
    let mut resg = GK_WG[3] * fc;
    let mut resk = GK_WGK[7] * fc;
    let mut resabs = resk.abs();
    let mut fv = [0.0f64; 15];
    fv[7] = fc;
    for j in 0..3 {
        let idx = 2 * j + 1;
        let f1 = eval(centr - hlgth * GK_XGK[idx])?;
        let f2 = eval(centr + hlgth * GK_XGK[idx])?;
        fv[7 - idx] = f1;
        fv[7 + idx] = f2;
        resg += GK_WG[j] * (f1 + f2);
        resk += GK_WGK[idx] * (f1 + f2);
        resabs += GK_WGK[idx] * (f1.abs() + f2.abs());
    }
    for j in 0..4 {
        let idx = 2 * j;
        let f1 = eval(centr - hlgth * GK_XGK[idx])?;
        let f2 = eval(centr + hlgth * GK_XGK[idx])?;
        fv[7 - idx] = f1;
        fv[7 + idx] = f2;
        resk += GK_WGK[idx] * (f1 + f2);
        resabs += GK_WGK[idx] * (f1.abs() + f2.abs());
    }
    let reskh = 0.5 * resk;
    let mut resasc = 0.0;
    for (i, v) in fv.iter().enumerate() {
        let idx = if i <= 7 { 7 - i } else { i - 7 };
        resasc += GK_WGK[idx] * (v - reskh).abs();
    }
    let value = resk * hlgth;
    let resabs = resabs * hlgth.abs();
    let resasc = resasc * hlgth.abs();
    let mut err = ((resk - resg) * hlgth).abs();
    if resasc != 0.0 && err != 0.0 {
        err = resasc * (200.0 * err / resasc).powf(1.5).min(1.0);
    }
    // Rounding floor: one panel cannot be more accurate than its absolute mass.
    err = err.max(2.0 * f64::EPSILON * resabs);
    Ok(PanelEval { value, err, resabs })
}

#[derive(Debug)]
struct Panel {
    err: f64,
    a: f64,
    b: f64,
    value: f64,
    resabs: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.err == other.err && self.a == other.a
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.err
            .total_cmp(&other.err)
            .then_with(|| self.a.total_cmp(&other.a))
    }
}

/// Globally adaptive GK15 over a list of seed segments. Returns a best
/// effort result with `converged = false` when the panel budget runs out.
pub(crate) fn adaptive_segments<F>(
    f: F,
    segments: &[(f64, f64)],
    cfg: &QuadratureConfig,
) -> Result<QuadratureResult, QuadError>
where
    F: Fn(f64) -> f64,
{
    let mut heap = BinaryHeap::new();
    let mut nodes_used = 0u64;
    let mut panels = 0usize;
    let mut total = 0.0f64;
    let mut total_err = 0.0f64;
    let mut total_resabs = 0.0f64;
    for &(a, b) in segments {
        if !(b > a) {
            continue;
        }
        let pe = gk15(&f, a, b)?;
        nodes_used += 15;
        panels += 1;
        total += pe.value;
        total_err += pe.err;
        total_resabs += pe.resabs;
        heap.push(Panel { err: pe.err, a, b, value: pe.value, resabs: pe.resabs });
        if panels > cfg.max_panels {
            return finish_adaptive(heap, nodes_used, false);
        }
    }
    if heap.is_empty() {
        return Ok(QuadratureResult { value: 0.0, err_estimate: 0.0, nodes_used, converged: true });
    }
    loop {
        // The attainable floor grows with the absolute mass: below
        // ~eps·∫|f| further subdivision only reshuffles rounding noise.
        let roundoff = 8.0 * f64::EPSILON * total_resabs;
        let target = (cfg.rel_tol * total.abs()).max(cfg.abs_tol).max(roundoff);
        if total_err <= target {
            return finish_adaptive(heap, nodes_used, true);
        }
        if panels + 2 > cfg.max_panels {
            return finish_adaptive(heap, nodes_used, false);
        }
        let worst = heap.pop().expect("heap cannot be empty here");
        let mid = 0.5 * (worst.a + worst.b);
        if !(worst.a < mid && mid < worst.b) {
            // Interval at floating point resolution: nothing finer exists,
            // so report the sum as-is without claiming convergence.
            heap.push(worst);
            return finish_adaptive(heap, nodes_used, false);
        }
        let left = gk15(&f, worst.a, mid)?;
        let right = gk15(&f, mid, worst.b)?;
        nodes_used += 30;
        panels += 2;
        total += left.value + right.value - worst.value;
        total_err += left.err + right.err - worst.err;
        total_resabs += left.resabs + right.resabs - worst.resabs;
        heap.push(Panel { err: left.err, a: worst.a, b: mid, value: left.value, resabs: left.resabs });
        heap.push(Panel { err: right.err, a: mid, b: worst.b, value: right.value, resabs: right.resabs });
    }
}

fn finish_adaptive(
    heap: BinaryHeap<Panel>,
    nodes_used: u64,
    converged: bool,
) -> Result<QuadratureResult, QuadError> {
    let mut value = CompensatedSum::new();
    let mut err = CompensatedSum::new();
    let mut panels: Vec<Panel> = heap.into_vec();
    panels.sort_by(|x, y| x.a.total_cmp(&y.a));
    for p in &panels {
        value.add(p.value);
        err.add(p.err);
    }
    Ok(QuadratureResult {
        value: value.value(),
        err_estimate: err.value(),
        nodes_used,
        converged,
    })
}

/// Adaptive GK15 integration of f over [a, b].
///
/// Errors with [`QuadError::PanelBudgetExceeded`] if `max_panels` is
/// reached before the tolerance holds.
pub fn integrate_adaptive<F>(f: F, a: f64, b: f64, cfg: &QuadratureConfig) -> Result<QuadratureResult, QuadError>
where
    F: Fn(f64) -> f64,
{
    assert!(a.is_finite() && b.is_finite() && a < b, "need finite a < b");
    let res = adaptive_segments(f, &[(a, b)], cfg)?;
    if res.converged {
        Ok(res)
    } else {
        Err(QuadError::PanelBudgetExceeded { panels: cfg.max_panels })
    }
}

/// Adaptive GK15 with interior breakpoints seeded into the initial panel
/// queue (used for oscillatory integrands with known phase zeros).
pub(crate) fn adaptive_with_breakpoints<F>(
    f: F,
    a: f64,
    b: f64,
    breakpoints: &[f64],
    cfg: &QuadratureConfig,
) -> Result<QuadratureResult, QuadError>
where
    F: Fn(f64) -> f64,
{
    let mut cuts = vec![a];
    for &x in breakpoints {
        if x > *cuts.last().unwrap() && x < b {
            cuts.push(x);
        }
    }
    cuts.push(b);
    let segments: Vec<(f64, f64)> = cuts.windows(2).map(|w| (w[0], w[1])).collect();
    adaptive_segments(f, &segments, cfg)
}

// ---------------------------------------------------------------------------
// Oscillatory splitter on (0, 1) with a singular right endpoint
// ---------------------------------------------------------------------------

/// Integrate f over (0, 1) where f oscillates like sin(freq·s) and may be
/// (1-s)^(-1/2)-singular at the right endpoint; f receives (s, 1-s).
///
/// The interval splits at the phase zeros s = jπ/freq; each half-period
/// is seeded with `osc_panel_fraction` adaptive panels, and the final
/// sliver (1-δ, 1) with δ = min(π/freq, 1e-2) is handled by a rescaled
/// tanh-sinh rule. With freq ≤ π the plain singular rule is used.
pub fn integrate_oscillatory_singular<F>(
    f: F,
    freq: f64,
    cfg: &QuadratureConfig,
) -> Result<QuadratureResult, QuadError>
where
    F: Fn(f64, f64) -> f64,
{
    assert!(freq >= 0.0 && freq.is_finite(), "need finite freq >= 0");
    if freq <= PI {
        return integrate_endpoint_singular(f, cfg);
    }
    let delta = (PI / freq).min(1e-2);
    let cut = 1.0 - delta;
    let parts = (cfg.osc_panel_fraction.round().max(1.0)) as usize;
    // Generating more seed segments than the panel budget is pointless:
    // the adaptive stage gives up at `max_panels` anyway, so cap the cut
    // list just past the budget instead of materializing every phase
    // zero of an arbitrarily fast oscillation. The interval stays fully
    // tiled; the leftover span simply becomes one coarse segment whose
    // failure is reported as non-convergence.
    let max_cuts = cfg.max_panels / parts + 2;
    let mut cuts = vec![0.0];
    let mut j = 1u64;
    loop {
        let s = j as f64 * PI / freq;
        if s >= cut - 1e-12 || cuts.len() >= max_cuts {
            break;
        }
        cuts.push(s);
        j += 1;
    }
    cuts.push(cut);
    let mut segments = Vec::with_capacity(cuts.len() * parts);
    for w in cuts.windows(2) {
        let (a, b) = (w[0], w[1]);
        let step = (b - a) / parts as f64;
        for i in 0..parts {
            let lo = a + i as f64 * step;
            let hi = if i + 1 == parts { b } else { a + (i + 1) as f64 * step };
            segments.push((lo, hi));
        }
    }
    let sub_cfg = QuadratureConfig {
        abs_tol: 0.5 * cfg.abs_tol,
        ..cfg.clone()
    };
    let interior = adaptive_segments(|s| f(s, 1.0 - s), &segments, &sub_cfg)?;
    let tail = integrate_endpoint_singular(
        |_sig, om_sig| delta * f(1.0 - delta * om_sig, delta * om_sig),
        &sub_cfg,
    )?;
    let mut value = CompensatedSum::new();
    value.add(interior.value);
    value.add(tail.value);
    Ok(QuadratureResult {
        value: value.value(),
        err_estimate: interior.err_estimate + tail.err_estimate,
        nodes_used: interior.nodes_used + tail.nodes_used,
        converged: interior.converged && tail.converged,
    })
}
