//! Problem families for [D(u)u']' + λ g(u) = 0 and their coefficient data.
//!
//! Four families are supported, each fixing a diffusion D and a reaction g:
//!
//! - `OscDiffusion(n, p)`: D = p·u^{2n} + sin u, g = u  (n ≥ 1, p > 0)
//! - `OscReaction(k, m)`:  D = u^k, g = u^{2m-k-1} + sin u  (0 ≤ k < 2m-1)
//! - `OscBoth`:            D = u² + sin u, g = u + sin u
//! - `PurePower(k, m)`:    D = u^k, g = u^{2m-k-1}  (0 ≤ k < 2m-1)
//!
//! Alongside D and g the module exposes the two antiderivatives the time
//! map needs — G = ∫ D·g and W = ∫ D — and, crucially, the *difference*
//! G(α) − G(αs) in a grouped form that never subtracts nearly equal
//! values: the power part factors as α^d·(1-s)·Σ s^i and every
//! trigonometric part reduces to integrals over the short interval
//! [M-δ, M+δ] with M = α(1+s)/2, δ = α(1-s)/2, expanded about the
//! midpoint. This keeps the time-map integrand accurate all the way into
//! the inverse-square-root endpoint singularity at s = 1.

use thiserror::Error;

/// Which coefficient pair (D, g) the problem uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProblemFamily {
    /// D = p·u^{2n} + sin u, g = u.
    OscDiffusion,
    /// D = u^k, g = u^{2m-k-1} + sin u.
    OscReaction,
    /// D = u² + sin u, g = u + sin u.
    OscBoth,
    /// D = u^k, g = u^{2m-k-1}.
    PurePower,
}

impl ProblemFamily {
    /// Stable textual name used by the CLI and the key=value config format.
    pub fn name(self) -> &'static str {
        match self {
            ProblemFamily::OscDiffusion => "osc-diffusion",
            ProblemFamily::OscReaction => "osc-reaction",
            ProblemFamily::OscBoth => "osc-both",
            ProblemFamily::PurePower => "pure-power",
        }
    }

    /// Parse the textual name produced by [`ProblemFamily::name`].
    pub fn parse(text: &str) -> Result<Self, ModelError> {
        match text {
            "osc-diffusion" => Ok(ProblemFamily::OscDiffusion),
            "osc-reaction" => Ok(ProblemFamily::OscReaction),
            "osc-both" => Ok(ProblemFamily::OscBoth),
            "pure-power" => Ok(ProblemFamily::PurePower),
            other => Err(ModelError::UnknownFamily(other.to_string())),
        }
    }
}

/// Errors from constructing or deserializing a [`ProblemSpec`].
#[derive(Debug, Error)]
pub enum ModelError {
    /// A family parameter violates its admissible range.
    #[error("invalid parameter {name}: {reason}")]
    InvalidParameter { name: &'static str, reason: String },
    /// Unrecognized family name in a config record.
    #[error("unknown family {0:?} (expected osc-diffusion, osc-reaction, osc-both, or pure-power)")]
    UnknownFamily(String),
    /// A key=value record is missing a required key.
    #[error("missing key {0:?} in problem record")]
    MissingKey(&'static str),
    /// A key=value record contains a key outside {family, n, p, k, m}.
    #[error("unknown key {0:?} in problem record")]
    UnknownKey(String),
    /// A key=value entry failed to parse as its expected type.
    #[error("bad value {value:?} for key {key:?}")]
    BadValue { key: &'static str, value: String },
}

/// A fully validated problem instance: family plus its parameters.
///
/// Parameters irrelevant to the chosen family keep neutral defaults
/// (n = 1, p = 1, k = 0, m = 1) so every instance serializes to the same
/// flat record shape.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProblemSpec {
    family: ProblemFamily,
    n: u32,
    p: f64,
    k: u32,
    m: u32,
}

impl ProblemSpec {
    /// D = p·u^{2n} + sin u, g = u. Requires n ≥ 1 and finite p > 0.
    pub fn osc_diffusion(n: u32, p: f64) -> Result<Self, ModelError> {
        if n < 1 {
            return Err(ModelError::InvalidParameter {
                name: "n",
                reason: format!("need n >= 1, got {n}"),
            });
        }
        if !(p > 0.0) || !p.is_finite() {
            return Err(ModelError::InvalidParameter {
                name: "p",
                reason: format!("need finite p > 0, got {p}"),
            });
        }
        Ok(Self { family: ProblemFamily::OscDiffusion, n, p, k: 0, m: 1 })
    }

    /// D = u^k, g = u^{2m-k-1} + sin u. Requires m ≥ 1 and 0 ≤ k < 2m-1.
    pub fn osc_reaction(k: u32, m: u32) -> Result<Self, ModelError> {
        Self::check_power_pair(k, m)?;
        Ok(Self { family: ProblemFamily::OscReaction, n: 1, p: 1.0, k, m })
    }

    /// D = u² + sin u, g = u + sin u (no free parameters).
    pub fn osc_both() -> Self {
        Self { family: ProblemFamily::OscBoth, n: 1, p: 1.0, k: 0, m: 1 }
    }

    /// D = u^k, g = u^{2m-k-1}. Requires m ≥ 1 and 0 ≤ k < 2m-1.
    pub fn pure_power(k: u32, m: u32) -> Result<Self, ModelError> {
        Self::check_power_pair(k, m)?;
        Ok(Self { family: ProblemFamily::PurePower, n: 1, p: 1.0, k, m })
    }

    fn check_power_pair(k: u32, m: u32) -> Result<(), ModelError> {
        if m < 1 {
            return Err(ModelError::InvalidParameter {
                name: "m",
                reason: format!("need m >= 1, got {m}"),
            });
        }
        if k + 1 >= 2 * m {
            return Err(ModelError::InvalidParameter {
                name: "k",
                reason: format!("need 0 <= k < 2m-1, got k={k}, m={m}"),
            });
        }
        Ok(())
    }

    pub fn family(&self) -> ProblemFamily {
        self.family
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    /// Diffusion coefficient D(u).
    pub fn d(&self, u: f64) -> f64 {
        match self.family {
            ProblemFamily::OscDiffusion => self.p * u.powi(2 * self.n as i32) + u.sin(),
            ProblemFamily::OscReaction | ProblemFamily::PurePower => u.powi(self.k as i32),
            ProblemFamily::OscBoth => u * u + u.sin(),
        }
    }

    /// Reaction term g(u).
    pub fn g(&self, u: f64) -> f64 {
        match self.family {
            ProblemFamily::OscDiffusion => u,
            ProblemFamily::OscReaction => u.powi((2 * self.m - self.k - 1) as i32) + u.sin(),
            ProblemFamily::OscBoth => u + u.sin(),
            ProblemFamily::PurePower => u.powi((2 * self.m - self.k - 1) as i32),
        }
    }

    /// Potential G(u) = ∫₀ᵘ D(x) g(x) dx in closed form.
    pub fn big_g(&self, u: f64) -> f64 {
        match self.family {
            ProblemFamily::OscDiffusion => {
                let e = (2 * self.n + 2) as i32;
                self.p * u.powi(e) / f64::from(e) + int_pow_sin(1, u)
            }
            ProblemFamily::OscReaction => {
                let e = (2 * self.m) as i32;
                u.powi(e) / f64::from(e) + int_pow_sin(self.k, u)
            }
            ProblemFamily::OscBoth => {
                0.25 * u.powi(4) + int_pow_sin(2, u) + int_pow_sin(1, u) + int_sin_sq(u)
            }
            ProblemFamily::PurePower => {
                let e = (2 * self.m) as i32;
                u.powi(e) / f64::from(e)
            }
        }
    }

    /// Antiderivative W(u) = ∫₀ᵘ D(x) dx in closed form.
    pub fn big_w(&self, u: f64) -> f64 {
        match self.family {
            ProblemFamily::OscDiffusion => {
                let e = (2 * self.n + 1) as i32;
                self.p * u.powi(e) / f64::from(e) + one_minus_cos(u)
            }
            ProblemFamily::OscReaction | ProblemFamily::PurePower => {
                let e = (self.k + 1) as i32;
                u.powi(e) / f64::from(e)
            }
            ProblemFamily::OscBoth => u.powi(3) / 3.0 + one_minus_cos(u),
        }
    }

    /// G(α) − G(αs), grouped so no catastrophic cancellation occurs as
    /// s → 1. `om` must be 1 − s, supplied by the caller (quadrature nodes
    /// carry the complement exactly).
    pub fn potential_diff(&self, alpha: f64, s: f64, om: f64) -> f64 {
        debug_assert!(alpha >= 0.0);
        debug_assert!((0.0..=1.0).contains(&s) && (0.0..=1.0).contains(&om));
        debug_assert!((s + om - 1.0).abs() <= 1e-9);
        let half = 0.5 * alpha * om;
        let mid = alpha - half;
        match self.family {
            ProblemFamily::OscDiffusion => {
                let e = 2 * self.n + 2;
                let power = self.p * alpha.powi(e as i32) / f64::from(e)
                    * om
                    * geom_sum(e - 1, s);
                power + trig_moment_diff(1, mid, half)
            }
            ProblemFamily::OscReaction => {
                let e = 2 * self.m;
                let power = alpha.powi(e as i32) / f64::from(e) * om * geom_sum(e - 1, s);
                power + trig_moment_diff(self.k, mid, half)
            }
            ProblemFamily::OscBoth => {
                let power = 0.25 * alpha.powi(4) * om * geom_sum(3, s);
                power
                    + trig_moment_diff(2, mid, half)
                    + trig_moment_diff(1, mid, half)
                    + sin_sq_diff(mid, half)
            }
            ProblemFamily::PurePower => {
                let e = 2 * self.m;
                alpha.powi(e as i32) / f64::from(e) * om * geom_sum(e - 1, s)
            }
        }
    }

    /// Frequency of the sin-induced oscillation of the time-map integrand
    /// in s (zero when the family has no trigonometric term).
    pub fn oscillation_freq(&self, alpha: f64) -> f64 {
        match self.family {
            ProblemFamily::PurePower => 0.0,
            _ => alpha,
        }
    }

    /// Scan D (and g) for positivity on (0, u_max].
    ///
    /// Samples `grid_points` equally spaced points, then sharpens every
    /// interior local minimum by golden-section search. `ok` reports
    /// min D > 0; `lambda_set_ok` reports min g > 0 (which keeps
    /// G(α) − G(u) positive and the time map well defined).
    pub fn validate_admissibility(&self, u_max: f64, grid_points: usize) -> AdmissibilityReport {
        assert!(u_max > 0.0 && u_max.is_finite(), "u_max must be finite and positive");
        assert!(grid_points >= 1000, "need at least 1000 grid points, got {grid_points}");
        let (min_d, worst_u) = scan_min(|u| self.d(u), u_max, grid_points);
        let (min_g, _) = scan_min(|u| self.g(u), u_max, grid_points);
        AdmissibilityReport { ok: min_d > 0.0, min_d, worst_u, lambda_set_ok: min_g > 0.0 }
    }

    /// Serialize to the flat key=value record (family, n, p, k, m).
    pub fn to_key_values(&self) -> Vec<(&'static str, String)> {
        vec![
            ("family", self.family.name().to_string()),
            ("n", self.n.to_string()),
            ("p", format!("{:?}", self.p)),
            ("k", self.k.to_string()),
            ("m", self.m.to_string()),
        ]
    }

    /// Rebuild from a flat key=value record. Keys outside
    /// {family, n, p, k, m} are rejected; parameters the family does not
    /// use may be omitted.
    pub fn from_key_values<'a, I>(pairs: I) -> Result<Self, ModelError>
    where
        I: IntoIterator<Item = (&'a str, &'a str)>,
    {
        let mut family: Option<ProblemFamily> = None;
        let mut n: Option<u32> = None;
        let mut p: Option<f64> = None;
        let mut k: Option<u32> = None;
        let mut m: Option<u32> = None;
        for (key, value) in pairs {
            match key {
                "family" => family = Some(ProblemFamily::parse(value)?),
                "n" => {
                    n = Some(value.parse().map_err(|_| ModelError::BadValue {
                        key: "n",
                        value: value.to_string(),
                    })?)
                }
                "p" => {
                    p = Some(value.parse().map_err(|_| ModelError::BadValue {
                        key: "p",
                        value: value.to_string(),
                    })?)
                }
                "k" => {
                    k = Some(value.parse().map_err(|_| ModelError::BadValue {
                        key: "k",
                        value: value.to_string(),
                    })?)
                }
                "m" => {
                    m = Some(value.parse().map_err(|_| ModelError::BadValue {
                        key: "m",
                        value: value.to_string(),
                    })?)
                }
                other => return Err(ModelError::UnknownKey(other.to_string())),
            }
        }
        let family = family.ok_or(ModelError::MissingKey("family"))?;
        match family {
            ProblemFamily::OscDiffusion => {
                Self::osc_diffusion(n.ok_or(ModelError::MissingKey("n"))?, p.ok_or(ModelError::MissingKey("p"))?)
            }
            ProblemFamily::OscReaction => {
                Self::osc_reaction(k.ok_or(ModelError::MissingKey("k"))?, m.ok_or(ModelError::MissingKey("m"))?)
            }
            ProblemFamily::OscBoth => Ok(Self::osc_both()),
            ProblemFamily::PurePower => {
                Self::pure_power(k.ok_or(ModelError::MissingKey("k"))?, m.ok_or(ModelError::MissingKey("m"))?)
            }
        }
    }
}

/// Result of a positivity scan over (0, u_max].
#[derive(Debug, Clone, Copy)]
pub struct AdmissibilityReport {
    /// True iff the sampled minimum of D is strictly positive.
    pub ok: bool,
    /// Smallest D value found (after local refinement).
    pub min_d: f64,
    /// Location of the smallest D value.
    pub worst_u: f64,
    /// True iff the sampled minimum of g is strictly positive.
    pub lambda_set_ok: bool,
}

/// Minimum of f over the grid i·u_max/grid_points (i = 1..=grid_points),
/// with golden-section refinement around every interior local minimum.
/// Streams a three-point window so the grid density never allocates.
fn scan_min<F: Fn(f64) -> f64>(f: F, u_max: f64, grid_points: usize) -> (f64, f64) {
    let h = u_max / grid_points as f64;
    let eval = |i: usize| {
        let u = i as f64 * h;
        (u, f(u))
    };
    let mut prev = eval(1);
    let mut cur = eval(2);
    let (mut best_u, mut best_v) = if prev.1 <= cur.1 { prev } else { cur };
    for i in 3..=grid_points {
        let next = eval(i);
        if next.1 < best_v {
            best_v = next.1;
            best_u = next.0;
        }
        if cur.1 < prev.1 && cur.1 < next.1 {
            let (u, v) = golden_min(&f, prev.0, next.0);
            if v < best_v {
                best_v = v;
                best_u = u;
            }
        }
        prev = cur;
        cur = next;
    }
    (best_v, best_u)
}

/// Golden-section minimization of f on [a, b].
fn golden_min<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let (mut a, mut b) = (a, b);
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..80 {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
    }
    let u = 0.5 * (a + b);
    (f(u), u)
}

/// 1 − cos x without cancellation for small x.
pub(crate) fn one_minus_cos(x: f64) -> f64 {
    let s = (0.5 * x).sin();
    2.0 * s * s
}

/// Σ_{i=0}^{deg} s^i by Horner evaluation.
pub(crate) fn geom_sum(deg: u32, s: f64) -> f64 {
    let mut acc = 1.0;
    for _ in 0..deg {
        acc = acc * s + 1.0;
    }
    acc
}

/// Branch point between the series and the recurrence: the upward
/// recurrence cancels digits while x ≲ j (the result is much smaller than
/// its terms), and the series firms up exactly there.
fn series_switch(j: u32) -> f64 {
    f64::from(j).max(1.0)
}

/// ∫₀ˣ y^j sin y dy. Series for small x, exact integration-by-parts
/// recurrence beyond the switch point.
pub(crate) fn int_pow_sin(j: u32, x: f64) -> f64 {
    if x.abs() < series_switch(j) {
        int_pow_sin_series(j, x)
    } else {
        trig_power_integrals(j, x).0[j as usize]
    }
}

/// ∫₀ˣ y^j cos y dy. Series for small x, recurrence beyond the switch.
pub(crate) fn int_pow_cos(j: u32, x: f64) -> f64 {
    if x.abs() < series_switch(j) {
        int_pow_cos_series(j, x)
    } else {
        trig_power_integrals(j, x).1[j as usize]
    }
}

/// Joint upward recurrence for IS_j = ∫ y^j sin y and IC_j = ∫ y^j cos y:
/// IS_j = −x^j cos x + j·IC_{j−1},  IC_j = x^j sin x − j·IS_{j−1}.
fn trig_power_integrals(jmax: u32, x: f64) -> (Vec<f64>, Vec<f64>) {
    let (sx, cx) = x.sin_cos();
    let len = jmax as usize + 1;
    let mut is = vec![0.0; len];
    let mut ic = vec![0.0; len];
    is[0] = one_minus_cos(x);
    ic[0] = sx;
    let mut xp = 1.0;
    for j in 1..len {
        xp *= x;
        is[j] = -xp * cx + j as f64 * ic[j - 1];
        ic[j] = xp * sx - j as f64 * is[j - 1];
    }
    (is, ic)
}

/// Σ_i (−1)^i x^{j+2i+2} / ((2i+1)!·(j+2i+2)).
fn int_pow_sin_series(j: u32, x: f64) -> f64 {
    let j = f64::from(j);
    let mut term = x.powf(j + 2.0) / (j + 2.0);
    let mut acc = term;
    let mut i = 0.0;
    loop {
        term *= -x * x * (j + 2.0 * i + 2.0)
            / ((2.0 * i + 2.0) * (2.0 * i + 3.0) * (j + 2.0 * i + 4.0));
        acc += term;
        i += 1.0;
        if term.abs() <= f64::EPSILON * acc.abs() || i > 120.0 {
            return acc;
        }
    }
}

/// Σ_i (−1)^i x^{j+2i+1} / ((2i)!·(j+2i+1)).
fn int_pow_cos_series(j: u32, x: f64) -> f64 {
    let j = f64::from(j);
    let mut term = x.powf(j + 1.0) / (j + 1.0);
    let mut acc = term;
    let mut i = 0.0;
    loop {
        term *= -x * x * (j + 2.0 * i + 1.0)
            / ((2.0 * i + 1.0) * (2.0 * i + 2.0) * (j + 2.0 * i + 3.0));
        acc += term;
        i += 1.0;
        if term.abs() <= f64::EPSILON * acc.abs() || i > 120.0 {
            return acc;
        }
    }
}

/// ∫₀ˣ sin² y dy = x/2 − sin(2x)/4, evaluated by series for small x.
pub(crate) fn int_sin_sq(x: f64) -> f64 {
    if x.abs() < 0.5 {
        // Σ_{i>=1} (−1)^{i+1} (2x)^{2i+1} / (4·(2i+1)!), leading term (2x)³/24.
        let y = 2.0 * x;
        let y2 = y * y;
        let mut term = y2 * y / 24.0;
        let mut acc = term;
        let mut i = 1.0;
        loop {
            term *= -y2 / ((2.0 * i + 2.0) * (2.0 * i + 3.0));
            acc += term;
            i += 1.0;
            if term.abs() <= f64::EPSILON * acc.abs() || i > 30.0 {
                return acc;
            }
        }
    } else {
        0.5 * x - 0.25 * (2.0 * x).sin()
    }
}

/// Binomial coefficient as f64 (exact for the small orders used here).
fn binom(k: u32, j: u32) -> f64 {
    let mut acc = 1.0;
    for i in 0..j {
        acc = acc * f64::from(k - i) / f64::from(i + 1);
    }
    acc
}

/// ∫_{mid−half}^{mid+half} x^k sin x dx expanded about the midpoint:
/// substituting x = mid + y and splitting sin(mid + y) leaves only the
/// even/odd short-interval moments, so the value is built from terms that
/// all vanish with `half` — no large-value subtraction occurs.
pub(crate) fn trig_moment_diff(k: u32, mid: f64, half: f64) -> f64 {
    let (smid, cmid) = mid.sin_cos();
    let mut acc = 0.0;
    let mut midpow = mid.powi(k as i32);
    for j in 0..=k {
        let term = if j % 2 == 0 {
            2.0 * smid * int_pow_cos(j, half)
        } else {
            2.0 * cmid * int_pow_sin(j, half)
        };
        acc += binom(k, j) * midpow * term;
        if j < k {
            midpow /= mid;
        }
    }
    acc
}

/// ∫_{mid−half}^{mid+half} sin² x dx = 2·∫₀^half sin² + sin²(mid)·sin(2·half).
pub(crate) fn sin_sq_diff(mid: f64, half: f64) -> f64 {
    let s = mid.sin();
    2.0 * int_sin_sq(half) + s * s * (2.0 * half).sin()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    #[test]
    fn family_names_round_trip() {
        for fam in [
            ProblemFamily::OscDiffusion,
            ProblemFamily::OscReaction,
            ProblemFamily::OscBoth,
            ProblemFamily::PurePower,
        ] {
            assert_eq!(ProblemFamily::parse(fam.name()).unwrap(), fam);
        }
        assert!(ProblemFamily::parse("cubic").is_err());
    }

    #[test]
    fn constructors_validate_parameters() {
        assert!(ProblemSpec::osc_diffusion(0, 1.0).is_err());
        assert!(ProblemSpec::osc_diffusion(1, 0.0).is_err());
        assert!(ProblemSpec::osc_diffusion(1, -2.0).is_err());
        assert!(ProblemSpec::osc_diffusion(1, f64::NAN).is_err());
        assert!(ProblemSpec::osc_reaction(1, 1).is_err()); // k = 2m-1
        assert!(ProblemSpec::osc_reaction(0, 0).is_err());
        assert!(ProblemSpec::pure_power(3, 2).is_err()); // k = 2m-1
        assert!(ProblemSpec::pure_power(2, 2).is_ok());
        assert!(ProblemSpec::osc_reaction(0, 1).is_ok());
    }

    #[test]
    fn coefficients_match_family_definitions() {
        let spec = ProblemSpec::osc_diffusion(1, 2.0).unwrap();
        let u = 1.3;
        assert_relative_eq!(spec.d(u), 2.0 * u * u + u.sin(), max_relative = 1e-15);
        assert_relative_eq!(spec.g(u), u, max_relative = 1e-15);

        let spec = ProblemSpec::osc_reaction(2, 2).unwrap();
        assert_relative_eq!(spec.d(u), u * u, max_relative = 1e-15);
        assert_relative_eq!(spec.g(u), u + u.sin(), max_relative = 1e-15);

        let spec = ProblemSpec::osc_both();
        assert_relative_eq!(spec.d(u), u * u + u.sin(), max_relative = 1e-15);
        assert_relative_eq!(spec.g(u), u + u.sin(), max_relative = 1e-15);

        let spec = ProblemSpec::pure_power(2, 3).unwrap();
        assert_relative_eq!(spec.d(u), u * u, max_relative = 1e-15);
        assert_relative_eq!(spec.g(u), u.powi(3), max_relative = 1e-15);
    }

    #[test]
    fn potential_closed_forms() {
        // OscDiffusion(1,1): G(u) = u^4/4 - u cos u + sin u.
        let spec = ProblemSpec::osc_diffusion(1, 1.0).unwrap();
        assert_relative_eq!(
            spec.big_g(PI),
            PI.powi(4) / 4.0 + PI,
            max_relative = 1e-14
        );
        let u = 2.2;
        assert_relative_eq!(
            spec.big_g(u),
            u.powi(4) / 4.0 - u * u.cos() + u.sin(),
            max_relative = 1e-14
        );
        // OscReaction(0,1): G(u) = u²/2 + 1 - cos u.
        let spec = ProblemSpec::osc_reaction(0, 1).unwrap();
        assert_relative_eq!(
            spec.big_g(u),
            u * u / 2.0 + 1.0 - u.cos(),
            max_relative = 1e-14
        );
        // OscBoth: u⁴/4 + [2u sin u − (u²−2)cos u − 2] + [sin u − u cos u] + [u/2 − sin 2u/4].
        let spec = ProblemSpec::osc_both();
        let direct = u.powi(4) / 4.0
            + (2.0 * u * u.sin() - (u * u - 2.0) * u.cos() - 2.0)
            + (u.sin() - u * u.cos())
            + (0.5 * u - 0.25 * (2.0 * u).sin());
        assert_relative_eq!(spec.big_g(u), direct, max_relative = 1e-13);
        // PurePower(2,2): G = u⁴/4.
        let spec = ProblemSpec::pure_power(2, 2).unwrap();
        assert_relative_eq!(spec.big_g(2.0), 4.0, max_relative = 1e-15);
    }

    #[test]
    fn antiderivative_closed_forms() {
        let spec = ProblemSpec::osc_diffusion(2, 3.0).unwrap();
        let u = 1.7;
        assert_relative_eq!(
            spec.big_w(u),
            3.0 * u.powi(5) / 5.0 + 1.0 - u.cos(),
            max_relative = 1e-14
        );
        let spec = ProblemSpec::osc_both();
        assert_relative_eq!(
            spec.big_w(u),
            u.powi(3) / 3.0 + 1.0 - u.cos(),
            max_relative = 1e-14
        );
        let spec = ProblemSpec::pure_power(2, 2).unwrap();
        assert_relative_eq!(spec.big_w(u), u.powi(3) / 3.0, max_relative = 1e-15);
    }

    #[test]
    fn potential_derivative_is_d_times_g() {
        let specs = [
            ProblemSpec::osc_diffusion(1, 2.0).unwrap(),
            ProblemSpec::osc_reaction(2, 2).unwrap(),
            ProblemSpec::osc_both(),
            ProblemSpec::pure_power(2, 3).unwrap(),
        ];
        for spec in specs {
            for i in 1..40 {
                let u = 0.25 * i as f64;
                let h = 1e-5;
                let fd = (spec.big_g(u + h) - spec.big_g(u - h)) / (2.0 * h);
                let exact = spec.d(u) * spec.g(u);
                let scale = exact.abs().max(1.0);
                assert!(
                    (fd - exact).abs() <= 1e-6 * scale,
                    "dG/du mismatch at u={u}: fd={fd}, exact={exact}"
                );
                let fdw = (spec.big_w(u + h) - spec.big_w(u - h)) / (2.0 * h);
                let dscale = spec.d(u).abs().max(1.0);
                assert!(
                    (fdw - spec.d(u)).abs() <= 1e-6 * dscale,
                    "dW/du mismatch at u={u}"
                );
            }
        }
    }

    #[test]
    fn int_pow_sin_matches_closed_forms() {
        for &x in &[0.01, 0.3, 0.999, 1.001, 2.5, 7.0, 30.0] {
            assert_relative_eq!(
                int_pow_sin(1, x),
                x.sin() - x * x.cos(),
                max_relative = 1e-12,
                epsilon = 1e-12
            );
            assert_relative_eq!(
                int_pow_sin(2, x),
                2.0 * x * x.sin() - (x * x - 2.0) * x.cos() - 2.0,
                max_relative = 1e-12,
                epsilon = 1e-12
            );
            assert_relative_eq!(int_pow_cos(0, x), x.sin(), max_relative = 1e-14);
            assert_relative_eq!(
                int_pow_cos(1, x),
                x.cos() + x * x.sin() - 1.0,
                max_relative = 1e-12,
                epsilon = 1e-12
            );
            assert_relative_eq!(int_pow_sin(0, x), 1.0 - x.cos(), max_relative = 1e-13);
        }
    }

    #[test]
    fn series_and_recurrence_agree_across_the_cut() {
        for j in 0..=8u32 {
            let cut = series_switch(j);
            for &x in &[0.999 * cut, cut, 1.001 * cut] {
                let series_s = int_pow_sin_series(j, x);
                let rec_s = trig_power_integrals(j, x).0[j as usize];
                assert_relative_eq!(series_s, rec_s, max_relative = 1e-9, epsilon = 1e-12);
                let series_c = int_pow_cos_series(j, x);
                let rec_c = trig_power_integrals(j, x).1[j as usize];
                assert_relative_eq!(series_c, rec_c, max_relative = 1e-9, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn int_sin_sq_matches_closed_form() {
        for &x in &[1e-3, 0.1, 0.49, 0.51, 2.0, 11.0] {
            assert_relative_eq!(
                int_sin_sq(x),
                0.5 * x - 0.25 * (2.0 * x).sin(),
                max_relative = 1e-10,
                epsilon = 1e-300
            );
        }
    }

    #[test]
    fn trig_moment_diff_matches_direct_difference() {
        for k in 0..=5u32 {
            for &(mid, half) in &[(3.0, 1.5), (10.0, 0.2), (50.0, 2.0), (0.8, 0.3)] {
                let direct = int_pow_sin(k, mid + half) - int_pow_sin(k, mid - half);
                let grouped = trig_moment_diff(k, mid, half);
                let scale = (mid + half).powi(k as i32 + 1).max(1.0);
                assert!(
                    (direct - grouped).abs() <= 1e-12 * scale,
                    "k={k}, mid={mid}, half={half}: direct={direct}, grouped={grouped}"
                );
            }
        }
    }

    #[test]
    fn sin_sq_diff_matches_direct_difference() {
        for &(mid, half) in &[(3.0, 1.5), (10.0, 0.2), (50.0, 2.0)] {
            let direct = int_sin_sq(mid + half) - int_sin_sq(mid - half);
            assert_relative_eq!(sin_sq_diff(mid, half), direct, max_relative = 1e-10, epsilon = 1e-14);
        }
    }

    #[test]
    fn potential_diff_matches_subtraction_away_from_endpoint() {
        let specs = [
            ProblemSpec::osc_diffusion(1, 1.0).unwrap(),
            ProblemSpec::osc_diffusion(2, 0.5).unwrap(),
            ProblemSpec::osc_reaction(2, 2).unwrap(),
            ProblemSpec::osc_both(),
            ProblemSpec::pure_power(2, 2).unwrap(),
        ];
        for spec in specs {
            for &alpha in &[0.3, 1.0, 5.0, 20.0, 80.0] {
                let ga = spec.big_g(alpha);
                for i in 0..=90 {
                    let s = 0.01 * i as f64;
                    let direct = ga - spec.big_g(alpha * s);
                    let grouped = spec.potential_diff(alpha, s, 1.0 - s);
                    assert!(
                        (direct - grouped).abs() <= 1e-13 * ga.abs(),
                        "alpha={alpha}, s={s}: direct={direct}, grouped={grouped}"
                    );
                }
            }
        }
    }

    #[test]
    fn potential_diff_positive_into_the_endpoint() {
        let specs = [
            ProblemSpec::osc_diffusion(1, 1.0).unwrap(),
            ProblemSpec::osc_reaction(2, 2).unwrap(),
            ProblemSpec::osc_both(),
            ProblemSpec::pure_power(2, 2).unwrap(),
        ];
        for spec in specs {
            for &alpha in &[0.5, 10.0, 200.0] {
                let mut om = 0.5;
                while om >= 1e-12 {
                    let val = spec.potential_diff(alpha, 1.0 - om, om);
                    assert!(
                        val > 0.0,
                        "potential diff not positive at alpha={alpha}, om={om}: {val}"
                    );
                    om *= 0.5;
                }
            }
        }
    }

    #[test]
    fn potential_diff_at_s_zero_equals_full_potential() {
        let specs = [
            ProblemSpec::osc_diffusion(1, 2.0).unwrap(),
            ProblemSpec::osc_reaction(1, 2).unwrap(),
            ProblemSpec::osc_both(),
            ProblemSpec::pure_power(4, 3).unwrap(),
        ];
        for spec in specs {
            for &alpha in &[0.4, 3.0, 25.0] {
                assert_relative_eq!(
                    spec.potential_diff(alpha, 0.0, 1.0),
                    spec.big_g(alpha),
                    max_relative = 1e-13
                );
            }
        }
    }

    #[test]
    fn admissibility_flags_sign_dipping_diffusion() {
        let bad = ProblemSpec::osc_diffusion(1, 0.01).unwrap();
        let report = bad.validate_admissibility(20.0, 4000);
        assert!(!report.ok);
        assert!(report.min_d < 0.0);
        assert!(report.worst_u > 4.0 && report.worst_u < 6.0, "worst_u = {}", report.worst_u);

        let good = ProblemSpec::osc_diffusion(1, 1.0).unwrap();
        let report = good.validate_admissibility(20.0, 4000);
        assert!(report.ok, "min_d = {}", report.min_d);
        assert!(report.lambda_set_ok);
    }

    #[test]
    fn admissibility_flags_reaction_dips() {
        // OscReaction(0,1): g = u + sin u >= 0, min at u -> 0; ok.
        let spec = ProblemSpec::osc_reaction(0, 1).unwrap();
        let report = spec.validate_admissibility(30.0, 4000);
        assert!(report.ok);
        assert!(report.lambda_set_ok);
        // PurePower never dips.
        let spec = ProblemSpec::pure_power(2, 2).unwrap();
        let report = spec.validate_admissibility(100.0, 1000);
        assert!(report.ok && report.lambda_set_ok);
    }

    #[test]
    fn key_value_round_trip() {
        let specs = [
            ProblemSpec::osc_diffusion(2, 0.75).unwrap(),
            ProblemSpec::osc_reaction(1, 2).unwrap(),
            ProblemSpec::osc_both(),
            ProblemSpec::pure_power(4, 3).unwrap(),
        ];
        for spec in specs {
            let kv = spec.to_key_values();
            let pairs: Vec<(&str, &str)> =
                kv.iter().map(|(k, v)| (*k, v.as_str())).collect();
            let back = ProblemSpec::from_key_values(pairs).unwrap();
            assert_eq!(back, spec);
        }
    }

    #[test]
    fn key_value_rejects_unknown_and_missing() {
        assert!(matches!(
            ProblemSpec::from_key_values([("family", "osc-both"), ("q", "3")]),
            Err(ModelError::UnknownKey(_))
        ));
        assert!(matches!(
            ProblemSpec::from_key_values([("n", "1")]),
            Err(ModelError::MissingKey("family"))
        ));
        assert!(matches!(
            ProblemSpec::from_key_values([("family", "osc-diffusion"), ("n", "1")]),
            Err(ModelError::MissingKey("p"))
        ));
        assert!(matches!(
            ProblemSpec::from_key_values([("family", "pure-power"), ("k", "two"), ("m", "2")]),
            Err(ModelError::BadValue { key: "k", .. })
        ));
    }

    #[test]
    fn oscillation_freq_is_alpha_except_pure_power() {
        assert_eq!(ProblemSpec::osc_both().oscillation_freq(7.0), 7.0);
        assert_eq!(
            ProblemSpec::pure_power(2, 2).unwrap().oscillation_freq(7.0),
            0.0
        );
    }
}
