//! Instantaneous SINRs of one trial and the outage predicates.

use crate::beamform::{transmit_gain, Beamformers};
use crate::channel::ChannelDraw;
use crate::geometry::Topology;
use crate::model::{DerivedScalars, FarDistanceModel, SystemParams};

/// SINR/SNR values of the four decoding stages.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LinkSinrs {
    /// Relay decoding the far-user message.
    pub gamma_relay: f64,
    /// Near user decoding the far-user message (first SIC stage).
    pub gamma_near_x2: f64,
    /// Near user decoding its own message after SIC.
    pub gamma_near_x1: f64,
    /// Far user decoding the relayed message.
    pub snr_far: f64,
}

/// Beamformed channel gains of a trial. They do not depend on powers,
/// rates or the path-loss exponent, so one set serves many parameter points.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LinkGains {
    /// |w_r† h_R|²
    pub relay_rx: f64,
    /// |w_r† H_RR w_t|²
    pub self_interference: f64,
    /// |h₁|²
    pub near_direct: f64,
    /// |f₁ᵀ w_t|²
    pub near_interference: f64,
    /// |f₂ᵀ w_t|²
    pub far: f64,
}

impl LinkGains {
    pub fn new(channels: &ChannelDraw, bf: &Beamformers) -> Self {
        Self {
            relay_rx: bf.w_r.dotc(&channels.h_r).norm_sqr(),
            self_interference: bf.si_gain(&channels.h_rr),
            near_direct: channels.h_1.norm_sqr(),
            near_interference: transmit_gain(&channels.f_1, &bf.w_t),
            far: transmit_gain(&channels.f_2, &bf.w_t),
        }
    }
}

fn far_distance(params: &SystemParams, topology: &Topology) -> f64 {
    match params.far_distance_model {
        FarDistanceModel::Exact => topology.d_relay_far,
        FarDistanceModel::BsCentered => topology.d_bs_far,
    }
}

/// SINRs from precomputed gains.
pub fn sinrs_from_gains(
    params: &SystemParams,
    derived: &DerivedScalars,
    topology: &Topology,
    gains: &LinkGains,
) -> LinkSinrs {
    let alpha = params.alpha;
    let (rho_s, rho_r) = (derived.rho_s, derived.rho_r);
    let relay_pl = params.r1.powf(-alpha);
    let relay_sig = rho_s * relay_pl * gains.relay_rx;
    let gamma_relay =
        params.a2 * relay_sig / (params.a1 * relay_sig + rho_r * gains.self_interference + 1.0);

    let near_sig = rho_s * topology.d_bs_near.powf(-alpha) * gains.near_direct;
    let interference = if gains.near_interference == 0.0 {
        0.0
    } else {
        rho_r * topology.d_relay_near.powf(-alpha) * gains.near_interference
    };
    let gamma_near_x2 = params.a2 * near_sig / (params.a1 * near_sig + interference + 1.0);
    let gamma_near_x1 = params.a1 * near_sig / (interference + 1.0);

    let snr_far = rho_r * far_distance(params, topology).powf(-alpha) * gains.far;
    LinkSinrs {
        gamma_relay,
        gamma_near_x2,
        gamma_near_x1,
        snr_far,
    }
}

/// Full-duplex TZF SINRs of one trial.
pub fn compute_sinrs(
    params: &SystemParams,
    derived: &DerivedScalars,
    topology: &Topology,
    channels: &ChannelDraw,
    beamformers: &Beamformers,
) -> LinkSinrs {
    sinrs_from_gains(params, derived, topology, &LinkGains::new(channels, beamformers))
}

/// Near-user outage: SIC fails unless both stages clear their thresholds.
pub fn outage_near(sinrs: &LinkSinrs, tau1: f64, tau2: f64) -> bool {
    !(sinrs.gamma_near_x2 > tau2 && sinrs.gamma_near_x1 > tau1)
}

/// Far-user outage under decode-and-forward: either hop failing.
pub fn outage_far(sinrs: &LinkSinrs, tau2: f64) -> bool {
    !(sinrs.gamma_relay > tau2 && sinrs.snr_far > tau2)
}

/// Gains of the half-duplex baseline. The relay has no self-interference
/// and reuses all N_T + N_R antennas on each hop: MRC over the extended
/// receive array, matched filtering over the extended transmit array.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HdGains {
    pub relay_rx: f64,
    pub near_direct: f64,
    pub far: f64,
}

impl HdGains {
    pub fn new(channels: &ChannelDraw) -> Self {
        Self {
            relay_rx: channels.h_r.norm_squared() + channels.h_r_hd_ext.norm_squared(),
            near_direct: channels.h_1.norm_sqr(),
            far: channels.f_2.norm_squared() + channels.f_2_hd_ext.norm_squared(),
        }
    }
}

/// Half-duplex SINRs. The relay is silent while the BS transmits, so the
/// near user sees no relay interference.
pub fn hd_sinrs_from_gains(params: &SystemParams, topology: &Topology, gains: &HdGains) -> LinkSinrs {
    let alpha = params.alpha;
    let (rho_s, rho_r) = (params.rho_s(), params.rho_r());
    let relay_sig = rho_s * params.r1.powf(-alpha) * gains.relay_rx;
    let near_sig = rho_s * topology.d_bs_near.powf(-alpha) * gains.near_direct;
    LinkSinrs {
        gamma_relay: params.a2 * relay_sig / (params.a1 * relay_sig + 1.0),
        gamma_near_x2: params.a2 * near_sig / (params.a1 * near_sig + 1.0),
        gamma_near_x1: params.a1 * near_sig,
        snr_far: rho_r * far_distance(params, topology).powf(-alpha) * gains.far,
    }
}

/// Near and far outage of the half-duplex baseline. Thresholds must come
/// from the half-duplex rate mapping.
pub fn outage_hd_baseline(
    params: &SystemParams,
    topology: &Topology,
    channels: &ChannelDraw,
    tau1_hd: f64,
    tau2_hd: f64,
) -> (bool, bool) {
    let s = hd_sinrs_from_gains(params, topology, &HdGains::new(channels));
    (outage_near(&s, tau1_hd, tau2_hd), outage_far(&s, tau2_hd))
}
