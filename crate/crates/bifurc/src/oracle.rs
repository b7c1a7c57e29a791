//! Independent cross-check of curve pairs by direct ODE integration.
//!
//! In the flux potential `w = W(u)` the boundary-value problem becomes
//! `w'' = -lambda g(W^{-1}(w))`, which stays bounded even where the
//! diffusion degenerates at `u = 0`. Shooting backward from the
//! midpoint symmetry point (`w(1/2) = W(alpha)`, `w'(1/2) = 0`) with a
//! fixed-step fourth-order scheme gives a validator that shares not a
//! single quadrature with the time-map pipeline: a pair (alpha, lambda)
//! is accepted only if the integrated trajectory actually hits `w = 0`
//! at `t = 0`.

use thiserror::Error;

use crate::model::{ProblemFamily, ProblemSpec};

/// Outcome of one fixed-step backward shot.
#[derive(Debug, Clone, Copy)]
pub struct ShootResult {
    /// `w(0) / W(alpha)`: zero exactly when the pair lies on the curve.
    pub boundary_residual: f64,
    /// Max violation of `v² = 2 lambda (G(alpha) - G(u))` along the
    /// trajectory, normalized by `2 lambda G(alpha)`; measures
    /// integrator error only, since the identity holds for any lambda.
    pub energy_drift: f64,
    /// Number of fixed steps taken.
    pub steps: u32,
}

/// Errors from inversion and shooting.
#[derive(Debug, Error)]
pub enum OracleError {
    /// The diffusion coefficient is not positive up to the peak value.
    #[error("problem is inadmissible up to u = {u_max}: min D = {min_d:e} at u = {worst_u}")]
    Inadmissible {
        /// Scanned range end.
        u_max: f64,
        /// Most negative diffusion value found.
        min_d: f64,
        /// Argument of the minimum.
        worst_u: f64,
    },
    /// Safeguarded Newton exhausted its iteration budget.
    #[error("flux-potential inversion did not converge at w = {w}")]
    NoConvergence {
        /// Inversion target.
        w: f64,
    },
    /// The shooting state left the finite range (wildly inconsistent pair).
    #[error("shooting state became non-finite at t = {t}")]
    NonFinite {
        /// Time at which the state blew up.
        t: f64,
    },
    /// Step doubling hit its cap before the residual settled.
    #[error("step doubling stalled: residual gap {gap:e} at {steps} steps")]
    StepDoublingStalled {
        /// Residual change over the last doubling.
        gap: f64,
        /// Final step count tried.
        steps: u32,
    },
}

/// Largest step count verify operations will try before giving up.
const MAX_VERIFY_STEPS: u32 = 1 << 20;
/// Newton iteration budget for one inversion.
const INVERT_MAX_ITERS: u32 = 200;

fn check_admissible(spec: &ProblemSpec, u_max: f64) -> Result<(), OracleError> {
    let report = spec.validate_admissibility(u_max, 2000);
    if report.ok {
        Ok(())
    } else {
        Err(OracleError::Inadmissible { u_max, min_d: report.min_d, worst_u: report.worst_u })
    }
}

/// Invert the strictly increasing flux potential: find `u ≥ 0` with
/// `W(u) = w` to within `1e-13 (1 + w)`.
///
/// Power-law potentials invert in closed form; the families whose
/// diffusion vanishes linearly at the origin are seeded with
/// `u ≈ sqrt(2 w)` for small `w` and with the leading-power inverse
/// otherwise, then polished by a bracket-safeguarded Newton iteration.
pub fn invert_big_w(spec: &ProblemSpec, w: f64) -> Result<f64, OracleError> {
    assert!(w.is_finite() && w >= 0.0, "need finite w >= 0");
    newton_invert(spec, w, cold_seed(spec, w))
}

fn cold_seed(spec: &ProblemSpec, w: f64) -> f64 {
    match spec.family() {
        // W(u) = u^(k+1)/(k+1): the seed is already the exact answer.
        ProblemFamily::PurePower | ProblemFamily::OscReaction => {
            let kp1 = spec.k() as f64 + 1.0;
            (kp1 * w).powf(1.0 / kp1)
        }
        ProblemFamily::OscDiffusion => {
            if w < 1.0 {
                (2.0 * w).sqrt()
            } else {
                let e = 2.0 * spec.n() as f64 + 1.0;
                (e * w / spec.p()).powf(1.0 / e)
            }
        }
        ProblemFamily::OscBoth => {
            if w < 1.0 {
                (2.0 * w).sqrt()
            } else {
                (3.0 * w).cbrt()
            }
        }
    }
}

fn newton_invert(spec: &ProblemSpec, w: f64, seed: f64) -> Result<f64, OracleError> {
    if w == 0.0 {
        return Ok(0.0);
    }
    let tol = 1e-13 * (1.0 + w);
    // Establish an increasing bracket [lo, hi] around the root.
    let mut lo = 0.0f64;
    let mut hi = seed.max(1e-12);
    while spec.big_w(hi) < w {
        lo = hi;
        hi *= 2.0;
        if !hi.is_finite() {
            return Err(OracleError::NoConvergence { w });
        }
    }
    let mut u = seed.clamp(lo, hi);
    for _ in 0..INVERT_MAX_ITERS {
        let r = spec.big_w(u) - w;
        if r.abs() <= tol {
            return Ok(u);
        }
        if r > 0.0 {
            hi = u;
        } else {
            lo = u;
        }
        let d = spec.d(u);
        let step_ok = d > 0.0 && {
            let next = u - r / d;
            next > lo && next < hi
        };
        u = if step_ok { u - r / d } else { 0.5 * (lo + hi) };
    }
    Err(OracleError::NoConvergence { w })
}

/// Shoot the transformed equation backward over [0, 1/2].
///
/// Starts from the midpoint symmetry state `w(1/2) = W(alpha)`,
/// `w'(1/2) = 0` and integrates `w'' = -lambda g(W^{-1}(w))` with
/// `step_count` fixed steps of the classical fourth-order scheme,
/// reporting the normalized boundary value `w(0)/W(alpha)` and the
/// worst energy-identity violation seen along the way. The vector
/// field is extended oddly through `w = 0` so that slightly
/// inconsistent pairs which overshoot the boundary remain integrable.
pub fn shoot_halfinterval(
    spec: &ProblemSpec,
    alpha: f64,
    lambda: f64,
    step_count: u32,
) -> Result<ShootResult, OracleError> {
    assert!(alpha.is_finite() && alpha > 0.0, "need finite alpha > 0");
    assert!(lambda.is_finite() && lambda > 0.0, "need finite lambda > 0");
    assert!(step_count >= 100, "need at least 100 steps");
    check_admissible(spec, alpha)?;
    let w_alpha = spec.big_w(alpha);
    let g_alpha = spec.big_g(alpha);
    let energy_scale = 2.0 * lambda * g_alpha;
    let h = -0.5 / step_count as f64;
    let mut w = w_alpha;
    let mut v = 0.0f64;
    // Warm-start consecutive inversions from the previous solution
    // value; the trajectory moves slowly so Newton stays 2-3 steps.
    let mut u_seed = alpha;
    let mut drift = 0.0f64;
    let rhs = |wv: f64, seed: &mut f64| -> Result<f64, OracleError> {
        let u = newton_invert(spec, wv.abs(), *seed)?;
        *seed = u;
        Ok(-lambda * wv.signum() * spec.g(u))
    };
    for i in 0..step_count {
        let k1w = v;
        let k1v = rhs(w, &mut u_seed)?;
        let k2w = v + 0.5 * h * k1v;
        let k2v = rhs(w + 0.5 * h * k1w, &mut u_seed)?;
        let k3w = v + 0.5 * h * k2v;
        let k3v = rhs(w + 0.5 * h * k2w, &mut u_seed)?;
        let k4w = v + h * k3v;
        let k4v = rhs(w + h * k3w, &mut u_seed)?;
        w += h / 6.0 * (k1w + 2.0 * k2w + 2.0 * k3w + k4w);
        v += h / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
        if !(w.is_finite() && v.is_finite()) {
            return Err(OracleError::NonFinite { t: 0.5 + h * (i as f64 + 1.0) });
        }
        if w >= 0.0 {
            let u = newton_invert(spec, w, u_seed)?;
            u_seed = u;
            let defect = (v * v - 2.0 * lambda * (g_alpha - spec.big_g(u))).abs();
            drift = drift.max(defect / energy_scale);
        }
    }
    Ok(ShootResult { boundary_residual: w / w_alpha, energy_drift: drift, steps: step_count })
}

/// Shoot with step doubling until the boundary residual settles to
/// within `tol/10`, returning the final refined shot.
pub fn calibrated_shoot(
    spec: &ProblemSpec,
    alpha: f64,
    lambda: f64,
    tol: f64,
) -> Result<ShootResult, OracleError> {
    assert!(tol.is_finite() && tol > 0.0, "need finite tol > 0");
    let mut steps = 1024u32;
    let mut prev = shoot_halfinterval(spec, alpha, lambda, steps)?;
    loop {
        steps *= 2;
        let cur = shoot_halfinterval(spec, alpha, lambda, steps)?;
        let gap = (cur.boundary_residual - prev.boundary_residual).abs();
        if gap <= 0.1 * tol && cur.energy_drift <= 5.0 * tol {
            return Ok(cur);
        }
        if steps >= MAX_VERIFY_STEPS {
            return Err(OracleError::StepDoublingStalled { gap, steps });
        }
        prev = cur;
    }
}

/// Decide whether (alpha, lambda) lies on the curve: true iff the
/// calibrated shot lands within `tol` of the boundary with energy
/// drift at most `10 tol`.
pub fn verify_pair(
    spec: &ProblemSpec,
    alpha: f64,
    lambda: f64,
    tol: f64,
) -> Result<bool, OracleError> {
    let shot = calibrated_shoot(spec, alpha, lambda, tol)?;
    Ok(shot.boundary_residual.abs() <= tol && shot.energy_drift <= 10.0 * tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::asymptotics::coeff_a;
    use crate::quadrature::QuadratureConfig;
    use crate::timemap::lambda_of_alpha;
    use std::f64::consts::PI;

    fn splitmix64(state: &mut u64) -> u64 {
        *state = state.wrapping_add(0x9e3779b97f4a7c15);
        let mut z = *state;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
        z ^ (z >> 31)
    }

    fn uniform01(state: &mut u64) -> f64 {
        (splitmix64(state) >> 11) as f64 / (1u64 << 53) as f64
    }

    #[test]
    fn inversion_handles_zero_and_closed_forms() {
        let specs = [
            ProblemSpec::pure_power(2, 2).unwrap(),
            ProblemSpec::osc_diffusion(1, 1.0).unwrap(),
            ProblemSpec::osc_both(),
        ];
        for spec in &specs {
            assert_eq!(invert_big_w(spec, 0.0).unwrap(), 0.0);
        }
        // W(u) = u³/3 for the pure cubic potential, so W⁻¹(9) = 3.
        let cubic = ProblemSpec::pure_power(2, 2).unwrap();
        assert!((invert_big_w(&cubic, 9.0).unwrap() - 3.0).abs() <= 1e-13);
    }

    #[test]
    fn inversion_round_trips_random_arguments() {
        let specs = [
            ProblemSpec::osc_diffusion(1, 1.0).unwrap(),
            ProblemSpec::osc_both(),
            ProblemSpec::osc_reaction(1, 2).unwrap(),
        ];
        let mut state = 0x5eed_cafe_d00d_f00du64;
        for spec in &specs {
            for _ in 0..100 {
                let u = 50.0 * uniform01(&mut state).max(1e-6);
                let w = spec.big_w(u);
                let back = invert_big_w(spec, w).unwrap();
                assert!(
                    (back - u).abs() <= 1e-12 * u.max(1.0),
                    "{}: u = {}, back = {}",
                    spec.family().name(),
                    u,
                    back
                );
            }
        }
    }

    #[test]
    fn linear_problem_shoots_onto_the_boundary() {
        // u(t) = alpha sin(π t) solves the linear problem at lambda = π².
        let spec = ProblemSpec::pure_power(0, 1).unwrap();
        for &alpha in &[1.0, 2.5] {
            let shot = shoot_halfinterval(&spec, alpha, PI * PI, 10_000).unwrap();
            assert!(shot.boundary_residual.abs() <= 1e-8, "res = {:e}", shot.boundary_residual);
            assert!(shot.energy_drift <= 1e-12, "drift = {:e}", shot.energy_drift);
        }
    }

    #[test]
    fn pure_power_shot_matches_the_exact_law() {
        // lambda = 8 A² alpha² for the cubic-potential family.
        let spec = ProblemSpec::pure_power(2, 2).unwrap();
        let a = coeff_a(2, 2);
        let shot = shoot_halfinterval(&spec, 10.0, 8.0 * a * a * 100.0, 10_000).unwrap();
        assert!(shot.boundary_residual.abs() <= 1e-6, "res = {:e}", shot.boundary_residual);
    }

    #[test]
    fn shot_confirms_the_time_map_independently() {
        let spec = ProblemSpec::osc_diffusion(1, 1.0).unwrap();
        let lambda = lambda_of_alpha(&spec, 5.0, &QuadratureConfig::default()).unwrap().lambda;
        let shot = shoot_halfinterval(&spec, 5.0, lambda, 10_000).unwrap();
        assert!(shot.boundary_residual.abs() <= 1e-6, "res = {:e}", shot.boundary_residual);
    }

    #[test]
    fn verify_accepts_the_eigenvalue_and_rejects_an_offset() {
        let spec = ProblemSpec::pure_power(0, 1).unwrap();
        assert!(verify_pair(&spec, 1.0, PI * PI, 1e-6).unwrap());
        assert!(!verify_pair(&spec, 1.0, 1.05 * PI * PI, 1e-6).unwrap());
    }

    #[test]
    fn verify_cross_validates_frozen_curve_values() {
        let cases = [
            (ProblemSpec::osc_both(), 10.0, 290.5303774178008053),
            (ProblemSpec::osc_reaction(1, 2).unwrap(), 7.0, 4.927161283668917799),
            (ProblemSpec::osc_diffusion(1, 2.0).unwrap(), 10.0, 575.8882030226531976),
        ];
        for (spec, alpha, lambda) in cases {
            let shot = calibrated_shoot(&spec, alpha, lambda, 1e-6).unwrap();
            assert!(
                shot.boundary_residual.abs() <= 1e-6,
                "{} at alpha = {}: res = {:e}",
                spec.family().name(),
                alpha,
                shot.boundary_residual
            );
            assert!(shot.energy_drift <= 1e-5, "drift = {:e}", shot.energy_drift);
        }
    }

    #[test]
    fn boundary_residual_is_monotone_through_the_root() {
        let spec = ProblemSpec::osc_both();
        let lambda = lambda_of_alpha(&spec, 10.0, &QuadratureConfig::default()).unwrap().lambda;
        let low = shoot_halfinterval(&spec, 10.0, 0.999 * lambda, 16_384).unwrap();
        let mid = shoot_halfinterval(&spec, 10.0, lambda, 16_384).unwrap();
        let high = shoot_halfinterval(&spec, 10.0, 1.001 * lambda, 16_384).unwrap();
        assert!(
            low.boundary_residual * high.boundary_residual < 0.0,
            "residuals {} and {} should straddle zero",
            low.boundary_residual,
            high.boundary_residual
        );
        assert!(low.boundary_residual.abs() > 1e-5);
        assert!(high.boundary_residual.abs() > 1e-5);
        assert!(mid.boundary_residual.abs() < low.boundary_residual.abs());
        assert!(mid.boundary_residual.abs() < high.boundary_residual.abs());
    }

    #[test]
    fn scheme_converges_at_fourth_order_on_a_smooth_family() {
        // D = 1 keeps the transformed equation smooth down to w = 0, so
        // halving the step four times must shrink the residual error by
        // about 2⁴ each time.
        let spec = ProblemSpec::osc_reaction(0, 1).unwrap();
        let lambda = 9.79433666376828605;
        let reference = shoot_halfinterval(&spec, 10.0, lambda, 65_536).unwrap().boundary_residual;
        let mut errors = Vec::new();
        for &steps in &[128u32, 256, 512, 1024] {
            let r = shoot_halfinterval(&spec, 10.0, lambda, steps).unwrap().boundary_residual;
            errors.push((r - reference).abs());
        }
        for w in errors.windows(2) {
            let ratio = w[0] / w[1];
            assert!(
                ratio > 10.0 && ratio < 26.0,
                "step-halving ratio {} outside the fourth-order window",
                ratio
            );
        }
    }

    #[test]
    fn inadmissible_problems_are_rejected() {
        let spec = ProblemSpec::osc_diffusion(1, 0.01).unwrap();
        assert!(matches!(
            shoot_halfinterval(&spec, 20.0, 100.0, 1000),
            Err(OracleError::Inadmissible { .. })
        ));
    }
}
