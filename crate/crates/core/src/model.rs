//! System parameters and the derived thresholds shared by the simulator and
//! the analytic evaluators.
//!
//! Everything here is in linear units (watts, meters). Conversion from dBW
//! happens once at the configuration boundary through [`db_to_linear`].

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Which distance enters the relay→far-user path loss.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FarDistanceModel {
    /// True relay-to-user distance.
    #[default]
    Exact,
    /// Distance from the BS to the far user, the approximation assumed by the
    /// far-user formulas.
    BsCentered,
}

/// Duplex mode of the relay, which determines the rate-to-threshold mapping.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Duplex {
    Full,
    Half,
}

/// Scalar network parameters in linear units.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SystemParams {
    /// Near-user disc radius, also the relay ring radius (m).
    pub r1: f64,
    /// Far-user ring inner radius (m).
    pub r2: f64,
    /// Far-user ring outer radius (m).
    pub r3: f64,
    /// Near-user PPP intensity (users/m²).
    pub lambda_n: f64,
    /// Far-user PPP intensity (users/m²).
    pub lambda_f: f64,
    /// Path-loss exponent.
    pub alpha: f64,
    /// BS transmit power (W).
    pub p_s: f64,
    /// Relay transmit power (W).
    pub p_r: f64,
    /// Noise power at relay and users (W).
    pub noise_power: f64,
    /// Power fraction of the near-user message.
    pub a1: f64,
    /// Power fraction of the far-user message.
    pub a2: f64,
    /// Near-user target rate (bps/Hz).
    pub rate1: f64,
    /// Far-user target rate (bps/Hz).
    pub rate2: f64,
    /// Relay transmit antennas.
    pub n_t: usize,
    /// Relay receive antennas.
    pub n_r: usize,
    /// Number of relays on the ring.
    pub k_relays: usize,
    /// Residual inter-user interference strength at the near user.
    pub q_r: f64,
    /// Residual self-interference channel variance.
    pub sigma_rr_sq: f64,
    pub far_distance_model: FarDistanceModel,
    /// Angle of the first relay on the ring (rad).
    pub relay_offset: f64,
}

impl Default for SystemParams {
    /// a₁=0.2, a₂=0.8, 1 dBW noise, three relays at radius 2, far ring
    /// 8..10 and 30 dBW on both transmitters.
    fn default() -> Self {
        Self {
            r1: 2.0,
            r2: 8.0,
            r3: 10.0,
            lambda_n: 10.0,
            lambda_f: 10.0,
            alpha: 3.0,
            p_s: db_to_linear(30.0),
            p_r: db_to_linear(30.0),
            noise_power: db_to_linear(1.0),
            a1: 0.2,
            a2: 0.8,
            rate1: 0.4,
            rate2: 0.4,
            n_t: 3,
            n_r: 3,
            k_relays: 3,
            q_r: 0.01,
            sigma_rr_sq: 1.0,
            far_distance_model: FarDistanceModel::Exact,
            relay_offset: 0.0,
        }
    }
}

fn finite_positive(field: &'static str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(invalid(field, format!("must be finite and > 0, got {v}")))
    }
}

fn finite_non_negative(field: &'static str, v: f64) -> Result<()> {
    if v.is_finite() && v >= 0.0 {
        Ok(())
    } else {
        Err(invalid(field, format!("must be finite and >= 0, got {v}")))
    }
}

impl SystemParams {
    /// Checks every parameter constraint, naming the first one violated.
    pub fn validate(&self) -> Result<()> {
        finite_positive("r1", self.r1)?;
        finite_positive("r2", self.r2)?;
        finite_positive("r3", self.r3)?;
        if self.r1 >= self.r2 {
            return Err(invalid("r2", format!("need r1 < r2, got r1={} r2={}", self.r1, self.r2)));
        }
        if self.r2 >= self.r3 {
            return Err(invalid("r3", format!("need r2 < r3, got r2={} r3={}", self.r2, self.r3)));
        }
        finite_positive("lambda_n", self.lambda_n)?;
        finite_positive("lambda_f", self.lambda_f)?;
        if !(self.alpha.is_finite() && self.alpha >= 2.0) {
            return Err(invalid("alpha", format!("must be >= 2, got {}", self.alpha)));
        }
        finite_positive("p_s", self.p_s)?;
        finite_positive("p_r", self.p_r)?;
        finite_positive("noise_power", self.noise_power)?;
        finite_positive("a1", self.a1)?;
        finite_positive("a2", self.a2)?;
        if (self.a1 + self.a2 - 1.0).abs() > 1e-9 {
            return Err(invalid(
                "a2",
                format!("a1 + a2 must equal 1, got {}", self.a1 + self.a2),
            ));
        }
        if self.a1 >= self.a2 {
            return Err(invalid("a1", format!("need a1 < a2, got a1={} a2={}", self.a1, self.a2)));
        }
        finite_non_negative("rate1", self.rate1)?;
        finite_non_negative("rate2", self.rate2)?;
        if self.n_t < 2 {
            return Err(invalid("n_t", format!("transmit zero-forcing needs n_t >= 2, got {}", self.n_t)));
        }
        if self.n_r < 1 {
            return Err(invalid("n_r", "must be >= 1"));
        }
        if self.k_relays < 1 {
            return Err(invalid("k_relays", "must be >= 1"));
        }
        finite_non_negative("q_r", self.q_r)?;
        finite_non_negative("sigma_rr_sq", self.sigma_rr_sq)?;
        if !self.relay_offset.is_finite() {
            return Err(invalid("relay_offset", "must be finite"));
        }
        Ok(())
    }

    pub fn rho_s(&self) -> f64 {
        self.p_s / self.noise_power
    }

    pub fn rho_r(&self) -> f64 {
        self.p_r / self.noise_power
    }
}

/// Thresholds and ratios derived from [`SystemParams`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DerivedScalars {
    pub rho_s: f64,
    pub rho_r: f64,
    pub tau1: f64,
    pub tau2: f64,
    /// (ρ_s a₂ − ρ_s a₁ τ₂)/τ₂; infinite when τ₂ = 0.
    pub zeta: f64,
    /// `None` when τ₂ > a₂/a₁: the near user can never decode the far
    /// message and every outage is certain.
    pub mu: Option<f64>,
    /// τ₂/ρ_r.
    pub beta: f64,
    /// ρ_s a₂.
    pub b0: f64,
    /// ρ_s a₁.
    pub b1: f64,
}

impl DerivedScalars {
    /// Builds the derived quantities from explicit thresholds. `params` is
    /// assumed valid.
    pub fn from_thresholds(params: &SystemParams, tau1: f64, tau2: f64) -> Self {
        let rho_s = params.rho_s();
        let rho_r = params.rho_r();
        let b0 = rho_s * params.a2;
        let b1 = rho_s * params.a1;
        let zeta = if tau2 == 0.0 {
            f64::INFINITY
        } else {
            (b0 - b1 * tau2) / tau2
        };
        let mu = if tau2 <= params.a2 / params.a1 {
            // zeta = 0 at the boundary gives mu = +inf (certain outage).
            Some((1.0 / zeta).max(tau1 / b1))
        } else {
            None
        };
        Self {
            rho_s,
            rho_r,
            tau1,
            tau2,
            zeta,
            mu,
            beta: tau2 / rho_r,
            b0,
            b1,
        }
    }

    /// True when the relay (and the near user in its first SIC stage) can
    /// decode the far-user message at all, i.e. τ₂ ≤ a₂/a₁.
    pub fn noma_feasible(&self) -> bool {
        self.mu.is_some()
    }
}

/// Converts a power in dBW to watts.
pub fn db_to_linear(x_db: f64) -> f64 {
    10f64.powf(x_db / 10.0)
}

/// Converts a power in watts to dBW.
pub fn linear_to_db(x: f64) -> f64 {
    10.0 * x.log10()
}

/// SINR threshold for a target rate. A half-duplex relay spends two slots per
/// message, so it needs twice the spectral efficiency per slot.
pub fn rate_to_threshold(rate: f64, duplex: Duplex) -> f64 {
    match duplex {
        Duplex::Full => rate.exp2() - 1.0,
        Duplex::Half => (2.0 * rate).exp2() - 1.0,
    }
}

/// Validates `params` and computes the full-duplex thresholds.
pub fn derive_scalars(params: &SystemParams) -> Result<DerivedScalars> {
    params.validate()?;
    Ok(DerivedScalars::from_thresholds(
        params,
        rate_to_threshold(params.rate1, Duplex::Full),
        rate_to_threshold(params.rate2, Duplex::Full),
    ))
}

/// Half-duplex counterpart of [`derive_scalars`].
pub fn derive_scalars_hd(params: &SystemParams) -> Result<DerivedScalars> {
    params.validate()?;
    Ok(DerivedScalars::from_thresholds(
        params,
        rate_to_threshold(params.rate1, Duplex::Half),
        rate_to_threshold(params.rate2, Duplex::Half),
    ))
}
