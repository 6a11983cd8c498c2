//! Closed-form and quadrature evaluators of the outage probabilities.
//!
//! Near-user outage has no closed form; [`near_rnrf_exact`] and
//! [`near_nnnf_exact`] integrate it adaptively and the Chebyshev bounds
//! bracket it. Far-user outage is a finite incomplete-gamma sum for RNRF and
//! a Chebyshev sum for NNNF, with α = 2 specializations of both.
//!
//! Every far-user formula assumes the relay→far distance equals the BS→far
//! distance, i.e. [`FarDistanceModel::BsCentered`](crate::model::FarDistanceModel).

pub mod quadrature;
pub mod special;

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::model::{DerivedScalars, SystemParams};
use quadrature::{integrate_adaptive, QuadratureGrid};
use special::{gamma_q, inc_gamma_diff};

/// How an [`AnalyticResult`] was obtained.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    ExactIntegral,
    ChebyshevBoundUpper,
    ChebyshevBoundLower,
    ClosedForm,
    Alpha2HighSnr,
}

impl Method {
    pub fn name(&self) -> &'static str {
        match self {
            Method::ExactIntegral => "exact-integral",
            Method::ChebyshevBoundUpper => "chebyshev-bound-upper",
            Method::ChebyshevBoundLower => "chebyshev-bound-lower",
            Method::ClosedForm => "closed-form",
            Method::Alpha2HighSnr => "alpha2-high-snr",
        }
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// An outage probability with the method that produced it.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AnalyticResult {
    pub value: f64,
    pub method: Method,
    /// Chebyshev node count, or for adaptive integrals the number of outer
    /// integrand evaluations.
    pub m_used: usize,
}

/// Which side of the near-user bound to evaluate.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Bound {
    Upper,
    Lower,
}

impl Bound {
    /// η = +1 for the upper bound, −1 for the lower.
    pub fn eta(&self) -> f64 {
        match self {
            Bound::Upper => 1.0,
            Bound::Lower => -1.0,
        }
    }

    fn method(&self) -> Method {
        match self {
            Bound::Upper => Method::ChebyshevBoundUpper,
            Bound::Lower => Method::ChebyshevBoundLower,
        }
    }
}

/// Tolerances of the adaptive near-user integrals.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IntegrationRule {
    /// Absolute tolerance on the outage probability.
    pub abs_tol: f64,
    /// Segment budget of each one-dimensional pass.
    pub max_segments: usize,
}

impl Default for IntegrationRule {
    fn default() -> Self {
        Self {
            abs_tol: 1e-9,
            max_segments: 2000,
        }
    }
}

const CLAMP_SLACK: f64 = 1e-9;

fn finish(value: f64, method: Method, m_used: usize) -> Result<AnalyticResult> {
    let value = if (0.0..=1.0).contains(&value) {
        value
    } else if value > -CLAMP_SLACK && value < 0.0 {
        0.0
    } else if value > 1.0 && value < 1.0 + CLAMP_SLACK {
        1.0
    } else {
        return Err(Error::OutOfRange {
            method: method.name(),
            value,
        });
    };
    Ok(AnalyticResult {
        value,
        method,
        m_used,
    })
}

fn require_alpha2(params: &SystemParams) -> Result<()> {
    if params.alpha == 2.0 {
        Ok(())
    } else {
        Err(invalid(
            "alpha",
            format!("the high-SNR specialization needs alpha = 2, got {}", params.alpha),
        ))
    }
}

/// Near-user outage given BS distance `r` and relay distance `l`:
/// 1 − e^{−μ r^α} / (1 + q_r ρ_r μ l^{−α} r^α).
#[inline]
fn near_bracket(mu: f64, alpha: f64, interference: f64, r: f64, l: f64) -> f64 {
    let ra = r.powf(alpha);
    let x = mu * ra;
    let denom = if interference == 0.0 {
        1.0
    } else {
        1.0 + interference * ra * l.powf(-alpha)
    };
    -(-x).exp_m1() / denom + (1.0 - 1.0 / denom)
}

/// Shortcut results shared by the near-user evaluators: `Some` when outage
/// is certain or impossible regardless of geometry.
fn near_shortcut(derived: &DerivedScalars) -> Option<f64> {
    match derived.mu {
        None => Some(1.0),
        Some(mu) if mu.is_infinite() => Some(1.0),
        Some(mu) if mu == 0.0 => Some(0.0),
        _ => None,
    }
}

fn wrap_angle(theta: f64) -> f64 {
    let t = (theta + PI).rem_euclid(2.0 * PI) - PI;
    if t < -PI {
        t + 2.0 * PI
    } else {
        t
    }
}

/// ∫₀^{R₁} w(r) ∫_{−π}^{π} bracket dθ dr for a radial weight `w`.
fn near_double_integral<W: Fn(f64) -> f64>(
    params: &SystemParams,
    mu: f64,
    theta_r: f64,
    rule: IntegrationRule,
    weight: W,
    weight_bound: f64,
) -> Result<(f64, usize)> {
    let alpha = params.alpha;
    let r1 = params.r1;
    let interference = params.q_r * params.rho_r() * mu;
    let theta_r = wrap_angle(theta_r);
    // The θ-integral is at most 2π and weighted by at most `weight_bound`
    // over a range of length R₁.
    let inner_tol = rule.abs_tol / (4.0 * weight_bound.max(f64::MIN_POSITIVE) * r1);
    let mut inner_failure = None;
    let mut outer_evals = 0usize;
    let outer = integrate_adaptive(
        |r| {
            outer_evals += 1;
            if r == 0.0 {
                return 0.0;
            }
            let inner = integrate_adaptive(
                |theta| {
                    let l_sq = r1 * r1 + r * r - 2.0 * r1 * r * (theta_r - theta).cos();
                    near_bracket(mu, alpha, interference, r, l_sq.max(0.0).sqrt())
                },
                -PI,
                PI,
                &[theta_r],
                inner_tol,
                rule.max_segments,
            );
            match inner {
                Ok(v) => weight(r) * v.value,
                Err(e) => {
                    inner_failure.get_or_insert(e);
                    f64::NAN
                }
            }
        },
        0.0,
        r1,
        &[],
        0.5 * rule.abs_tol,
        rule.max_segments,
    );
    if let Some(e) = inner_failure {
        return Err(e);
    }
    let outer = outer?;
    Ok((outer.value, outer_evals))
}

/// Near-user outage under RNRF: the bracket averaged over a uniform user
/// position in the disc, with the serving relay at angle `theta_r`.
pub fn near_rnrf_exact(
    params: &SystemParams,
    derived: &DerivedScalars,
    theta_r: f64,
    rule: IntegrationRule,
) -> Result<AnalyticResult> {
    if let Some(v) = near_shortcut(derived) {
        return finish(v, Method::ClosedForm, 0);
    }
    let mu = derived.mu.expect("checked by near_shortcut");
    let norm = 1.0 / (PI * params.r1 * params.r1);
    let (value, evals) = near_double_integral(params, mu, theta_r, rule, |r| norm * r, norm * params.r1)?;
    finish(value, Method::ExactIntegral, evals)
}

/// υ_n = 2πλ_n / (1 − e^{−πλ_n R₁²}), the nearest-user pdf normalizer.
pub fn upsilon_near(params: &SystemParams) -> f64 {
    2.0 * PI * params.lambda_n / -(-PI * params.lambda_n * params.r1 * params.r1).exp_m1()
}

/// υ_f = 2πλ_f / (1 − e^{−πλ_f(R₃² − R₂²)}).
pub fn upsilon_far(params: &SystemParams) -> f64 {
    let area = params.r3 * params.r3 - params.r2 * params.r2;
    2.0 * PI * params.lambda_f / -(-PI * params.lambda_f * area).exp_m1()
}

/// Near-user outage under NNNF: the bracket averaged over the nearest
/// user's distance pdf υ_n r e^{−πλ_n r²} on [0, R₁] and a uniform angle.
pub fn near_nnnf_exact(
    params: &SystemParams,
    derived: &DerivedScalars,
    theta_r: f64,
    rule: IntegrationRule,
) -> Result<AnalyticResult> {
    if let Some(v) = near_shortcut(derived) {
        return finish(v, Method::ClosedForm, 0);
    }
    let mu = derived.mu.expect("checked by near_shortcut");
    let lambda = params.lambda_n;
    let scale = upsilon_near(params) / (2.0 * PI);
    // max of r e^{−πλr²} is at r = 1/√(2πλ)
    let peak_r = (1.0 / (2.0 * PI * lambda).sqrt()).min(params.r1);
    let bound = scale * peak_r * (-PI * lambda * peak_r * peak_r).exp();
    let (value, evals) = near_double_integral(
        params,
        mu,
        theta_r,
        rule,
        |r| scale * r * (-PI * lambda * r * r).exp(),
        bound,
    )?;
    finish(value, Method::ExactIntegral, evals)
}

/// The bound bracket at node distance c: the relay distance is replaced by
/// √(R₁² + c² − 2ηR₁c).
fn bound_bracket(params: &SystemParams, mu: f64, eta: f64, c: f64) -> f64 {
    let r1 = params.r1;
    let l = (r1 * r1 + c * c - 2.0 * eta * r1 * c).max(0.0).sqrt();
    near_bracket(mu, params.alpha, params.q_r * params.rho_r() * mu, c, l)
}

/// Chebyshev bound on the RNRF near-user outage.
pub fn near_rnrf_bound(
    params: &SystemParams,
    derived: &DerivedScalars,
    bound: Bound,
    grid: &QuadratureGrid,
) -> Result<AnalyticResult> {
    if let Some(v) = near_shortcut(derived) {
        return finish(v, Method::ClosedForm, grid.m);
    }
    let mu = derived.mu.expect("checked by near_shortcut");
    let eta = bound.eta();
    let r1 = params.r1;
    // (π/2M) Σ √(1−φ²) bracket(c) (φ+1) with c = (φ+1)R₁/2
    let value = 0.5
        * grid.integrate(|phi| {
            let c = 0.5 * (phi + 1.0) * r1;
            bound_bracket(params, mu, eta, c) * (phi + 1.0)
        });
    finish(value, bound.method(), grid.m)
}

/// Chebyshev bound on the NNNF near-user outage.
pub fn near_nnnf_bound(
    params: &SystemParams,
    derived: &DerivedScalars,
    bound: Bound,
    grid: &QuadratureGrid,
) -> Result<AnalyticResult> {
    if let Some(v) = near_shortcut(derived) {
        return finish(v, Method::ClosedForm, grid.m);
    }
    let mu = derived.mu.expect("checked by near_shortcut");
    let eta = bound.eta();
    let r1 = params.r1;
    let lambda = params.lambda_n;
    // (π υ_n R₁ / 2M) Σ √(1−φ²) bracket(c) c e^{−πλc²}
    let value = 0.5
        * upsilon_near(params)
        * r1
        * grid.integrate(|phi| {
            let c = 0.5 * (phi + 1.0) * r1;
            bound_bracket(params, mu, eta, c) * c * (-PI * lambda * c * c).exp()
        });
    finish(value, bound.method(), grid.m)
}

/// P(relay decodes the far message) = Γ(N_R, x)/Γ(N_R) with
/// x = τ₂R₁^α / (ρ_s(a₂ − τ₂a₁)). `None` when decoding is impossible.
pub fn first_hop_success(params: &SystemParams, derived: &DerivedScalars) -> Result<Option<f64>> {
    let gap = params.a2 - derived.tau2 * params.a1;
    if derived.mu.is_none() || gap <= 0.0 {
        return Ok(None);
    }
    let x = derived.tau2 * params.r1.powf(params.alpha) / (derived.rho_s * gap);
    Ok(Some(gamma_q(params.n_r as f64, x)?))
}

enum FarStart {
    Done(f64),
    Proceed(f64),
}

fn far_start(params: &SystemParams, derived: &DerivedScalars) -> Result<FarStart> {
    if derived.tau2 == 0.0 {
        return Ok(FarStart::Done(0.0));
    }
    Ok(match first_hop_success(params, derived)? {
        None => FarStart::Done(1.0),
        Some(p) => FarStart::Proceed(p),
    })
}

/// RNRF far-user outage for any α, as a finite sum of incomplete gammas.
pub fn far_rnrf(params: &SystemParams, derived: &DerivedScalars) -> Result<AnalyticResult> {
    let hop1 = match far_start(params, derived)? {
        FarStart::Done(v) => return finish(v, Method::ClosedForm, 0),
        FarStart::Proceed(p) => p,
    };
    let alpha = params.alpha;
    let beta = derived.beta;
    let b3 = 2.0 / (params.r3 * params.r3 - params.r2 * params.r2);
    let lo = beta * params.r2.powf(alpha);
    let hi = beta * params.r3.powf(alpha);
    let mut sum = 0.0;
    let mut k_fact = 1.0;
    for k in 0..=params.n_t - 2 {
        if k > 0 {
            k_fact *= k as f64;
        }
        let eps = k as f64 + 2.0 / alpha;
        sum += beta.powf(-2.0 / alpha) / (k_fact * alpha) * inc_gamma_diff(eps, lo, hi)?;
    }
    finish(1.0 - hop1 * b3 * sum, Method::ClosedForm, 0)
}

/// β^k e^{−βx²} Σ_{1≤j≤k} x^{2j}/(j! β^{k+1−j}).
fn g_scaled(beta: f64, x: f64, k: usize) -> f64 {
    let x2 = x * x;
    // only j ≥ 1; the caller handles j = 0
    let mut sum = 0.0;
    let mut term = 1.0;
    for j in 1..=k {
        term *= beta * x2 / j as f64;
        sum += term;
    }
    (-beta * x2).exp() * sum / beta
}

/// RNRF far-user outage at α = 2 under high SNR, where the first hop
/// always succeeds.
pub fn far_rnrf_alpha2(params: &SystemParams, derived: &DerivedScalars) -> Result<AnalyticResult> {
    require_alpha2(params)?;
    if derived.tau2 == 0.0 {
        return finish(0.0, Method::Alpha2HighSnr, 0);
    }
    if !derived.noma_feasible() {
        return finish(1.0, Method::Alpha2HighSnr, 0);
    }
    let beta = derived.beta;
    let (r2, r3) = (params.r2, params.r3);
    let b3 = 2.0 / (r3 * r3 - r2 * r2);
    // j = 0 part of G(R₂) − G(R₃), without the 1/β cancellation
    let head = (-beta * r2 * r2).exp() * -(-beta * (r3 * r3 - r2 * r2)).exp_m1() / beta;
    let mut sum = 0.0;
    for k in 0..=params.n_t - 2 {
        sum += head + g_scaled(beta, r2, k) - g_scaled(beta, r3, k);
    }
    finish(1.0 - 0.5 * b3 * sum, Method::Alpha2HighSnr, 0)
}

/// e^{πλ_f R₂²} Ψ_k with Ψ_k = ∫_{R₂}^{R₃} r^{αk+1} e^{−(βr^α + πλ_f r²)} dr,
/// by the Chebyshev rule.
pub fn psi_chebyshev(params: &SystemParams, derived: &DerivedScalars, k: usize, grid: &QuadratureGrid) -> f64 {
    let half = 0.5 * (params.r3 - params.r2);
    0.5 * (params.r3 - params.r2) * grid.integrate(|phi| psi_integrand(params, derived, k, half * (phi + 1.0) + params.r2))
}

/// [`psi_chebyshev`] by adaptive quadrature to absolute tolerance `abs_tol`.
pub fn psi_adaptive(params: &SystemParams, derived: &DerivedScalars, k: usize, abs_tol: f64) -> Result<f64> {
    Ok(integrate_adaptive(
        |s| psi_integrand(params, derived, k, s),
        params.r2,
        params.r3,
        &[],
        abs_tol,
        5000,
    )?
    .value)
}

fn psi_integrand(params: &SystemParams, derived: &DerivedScalars, k: usize, s: f64) -> f64 {
    let alpha = params.alpha;
    let lambda = params.lambda_f;
    let r2 = params.r2;
    s.powf(alpha * k as f64 + 1.0)
        * (-(derived.beta * s.powf(alpha) + PI * lambda * (s * s - r2 * r2))).exp()
}

/// NNNF far-user outage for any α, with the distance integral evaluated on
/// `grid`.
pub fn far_nnnf(params: &SystemParams, derived: &DerivedScalars, grid: &QuadratureGrid) -> Result<AnalyticResult> {
    let hop1 = match far_start(params, derived)? {
        FarStart::Done(v) => return finish(v, Method::ClosedForm, grid.m),
        FarStart::Proceed(p) => p,
    };
    let alpha = params.alpha;
    let beta = derived.beta;
    let lambda = params.lambda_f;
    let (r2, r3) = (params.r2, params.r3);
    let half = 0.5 * (r3 - r2);
    let n_terms = params.n_t - 1;
    // Σ_k (β s^α)^k / k! summed inside the node loop
    let sum = grid.integrate(|phi| {
        let s = half * (phi + 1.0) + r2;
        let y = beta * s.powf(alpha);
        let mut term = 1.0;
        let mut poisson = 1.0;
        for k in 1..n_terms {
            term *= y / k as f64;
            poisson += term;
        }
        s * poisson * (-(y + PI * lambda * (s * s - r2 * r2))).exp()
    });
    let value = 1.0 - hop1 * upsilon_far(params) * half * sum;
    finish(value, Method::ClosedForm, grid.m)
}

/// NNNF far-user outage at α = 2 under high SNR.
pub fn far_nnnf_alpha2(params: &SystemParams, derived: &DerivedScalars) -> Result<AnalyticResult> {
    require_alpha2(params)?;
    if derived.tau2 == 0.0 {
        return finish(0.0, Method::Alpha2HighSnr, 0);
    }
    if !derived.noma_feasible() {
        return finish(1.0, Method::Alpha2HighSnr, 0);
    }
    let beta = derived.beta;
    let lambda = params.lambda_f;
    let delta = beta + PI * lambda;
    let (r2, r3) = (params.r2, params.r3);
    // b₅ β^k H(x) = υ_f (β/δ)^k e^{−βx² − πλ(x²−R₂²)} Σ_j δ^{j−1} x^{2j}/j!
    let h = |x: f64, k: usize| {
        let x2 = x * x;
        let mut term = 1.0;
        let mut sum = 1.0;
        for j in 1..=k {
            term *= delta * x2 / j as f64;
            sum += term;
        }
        (beta / delta).powi(k as i32) * (-beta * x2 - PI * lambda * (x2 - r2 * r2)).exp() * sum / delta
    };
    let mut sum = 0.0;
    for k in 0..=params.n_t - 2 {
        sum += h(r2, k) - h(r3, k);
    }
    finish(1.0 - 0.5 * upsilon_far(params) * sum, Method::Alpha2HighSnr, 0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{db_to_linear, derive_scalars};
    use approx::assert_relative_eq;
    use quadrature::chebyshev_grid;

    fn fig2(q_r: f64, p_s_db: f64) -> SystemParams {
        SystemParams {
            p_s: db_to_linear(p_s_db),
            p_r: db_to_linear(40.0),
            q_r,
            ..SystemParams::default()
        }
    }

    #[test]
    fn method_names() {
        assert_eq!(Method::ExactIntegral.name(), "exact-integral");
        assert_eq!(Method::Alpha2HighSnr.to_string(), "alpha2-high-snr");
    }

    #[test]
    fn finish_clamps_only_near_boundary() {
        assert_eq!(finish(1.0 + 1e-12, Method::ClosedForm, 0).unwrap().value, 1.0);
        assert_eq!(finish(-1e-12, Method::ClosedForm, 0).unwrap().value, 0.0);
        assert!(matches!(finish(1.1, Method::ClosedForm, 0), Err(Error::OutOfRange { .. })));
        assert!(finish(f64::NAN, Method::ClosedForm, 0).is_err());
    }

    #[test]
    fn bracket_is_a_probability() {
        for &r in &[0.0, 0.1, 1.0, 2.0] {
            for &l in &[1e-6, 0.5, 3.0] {
                let b = near_bracket(0.01, 3.0, 5.0, r, l);
                assert!((0.0..=1.0).contains(&b));
            }
        }
        assert_eq!(near_bracket(0.3, 3.0, 0.0, 0.0, 1.0), 0.0);
    }

    #[test]
    fn infeasible_threshold_gives_certain_outage() {
        let p = SystemParams { rate2: 3.0, ..fig2(0.01, 20.0) };
        let d = derive_scalars(&p).unwrap();
        let grid = chebyshev_grid(20);
        for r in [
            near_rnrf_exact(&p, &d, 0.0, IntegrationRule::default()).unwrap(),
            near_nnnf_exact(&p, &d, 0.0, IntegrationRule::default()).unwrap(),
            near_rnrf_bound(&p, &d, Bound::Upper, &grid).unwrap(),
            near_nnnf_bound(&p, &d, Bound::Lower, &grid).unwrap(),
            far_rnrf(&p, &d).unwrap(),
            far_nnnf(&p, &d, &grid).unwrap(),
        ] {
            assert_eq!(r.value, 1.0);
            assert_eq!(r.method, Method::ClosedForm);
        }
    }

    #[test]
    fn zero_far_threshold_gives_zero_far_outage() {
        let p = SystemParams { rate2: 0.0, ..fig2(0.01, 20.0) };
        let d = derive_scalars(&p).unwrap();
        assert_eq!(far_rnrf(&p, &d).unwrap().value, 0.0);
        assert_eq!(far_nnnf(&p, &d, &chebyshev_grid(50)).unwrap().value, 0.0);
    }

    #[test]
    fn alpha2_variants_reject_other_exponents() {
        let p = fig2(0.01, 20.0);
        let d = derive_scalars(&p).unwrap();
        assert!(matches!(far_rnrf_alpha2(&p, &d), Err(Error::InvalidParams { field: "alpha", .. })));
        assert!(matches!(far_nnnf_alpha2(&p, &d), Err(Error::InvalidParams { field: "alpha", .. })));
    }

    #[test]
    fn bounds_coincide_without_interference() {
        let p = fig2(0.0, 15.0);
        let d = derive_scalars(&p).unwrap();
        let grid = chebyshev_grid(50);
        let u = near_rnrf_bound(&p, &d, Bound::Upper, &grid).unwrap().value;
        let l = near_rnrf_bound(&p, &d, Bound::Lower, &grid).unwrap().value;
        assert_eq!(u, l);
        let u = near_nnnf_bound(&p, &d, Bound::Upper, &grid).unwrap().value;
        let l = near_nnnf_bound(&p, &d, Bound::Lower, &grid).unwrap().value;
        assert_eq!(u, l);
    }

    #[test]
    fn rnrf_exact_matches_closed_form_without_interference() {
        // α = 2, q_r = 0: 1 − (1 − e^{−μR²})/(μR²)
        let p = SystemParams { alpha: 2.0, ..fig2(0.0, 5.0) };
        let d = derive_scalars(&p).unwrap();
        let mu = d.mu.unwrap();
        let x = mu * p.r1 * p.r1;
        let expected = 1.0 + (-x).exp_m1() / x;
        let r = near_rnrf_exact(&p, &d, 0.3, IntegrationRule::default()).unwrap();
        assert_relative_eq!(r.value, expected, epsilon = 1e-9);
        assert_eq!(r.method, Method::ExactIntegral);
    }

    #[test]
    fn far_alpha2_reduces_to_general_formula() {
        let p = SystemParams {
            alpha: 2.0,
            p_s: 1e12,
            p_r: db_to_linear(20.0),
            ..SystemParams::default()
        };
        let d = derive_scalars(&p).unwrap();
        assert_relative_eq!(
            far_rnrf_alpha2(&p, &d).unwrap().value,
            far_rnrf(&p, &d).unwrap().value,
            epsilon = 1e-9
        );
    }

    #[test]
    fn wrap_angle_range() {
        for t in [-10.0, -PI, 0.0, PI, 7.0, 100.0] {
            let w = wrap_angle(t);
            assert!((-PI..PI).contains(&w) || w == PI, "{t} -> {w}");
            assert_relative_eq!(w.sin(), f64::sin(t), epsilon = 1e-12);
        }
    }
}
