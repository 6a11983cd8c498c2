//! Distributional checks of the sampled geometry, channels and beamformed
//! gains against their closed-form laws.

mod common;

use std::f64::consts::PI;

use common::{assert_ks, ks_p_value, ks_statistic};
use fdnoma::beamform::{transmit_gain, Beamformers, DEFAULT_EPSILON};
use fdnoma::channel::draw_channels;
use fdnoma::geometry::{sample_disc_ppp, sample_ring_ppp};
use fdnoma::mc::trial_rng;
use fdnoma::{Error, Strategy, SystemParams, Topology};
use statrs::distribution::{ContinuousCDF, Exp, Gamma};

const N: usize = 100_000;

#[test]
fn ks_helper_rejects_wrong_law() {
    let mut rng = trial_rng(9, 0, 0);
    let mut xs: Vec<f64> = (0..N).map(|_| rand::Rng::random::<f64>(&mut rng)).collect();
    let d = ks_statistic(&mut xs, |x| x * x);
    assert!(ks_p_value(d, N) < 1e-6);
    assert_ks("uniform", &mut xs, |x| x.clamp(0.0, 1.0));
}

#[test]
fn relay_receive_norm_is_gamma() {
    for n_r in [1, 3] {
        let p = SystemParams { n_r, ..SystemParams::default() };
        let mut rng = trial_rng(11, n_r as u64, 0);
        let mut xs: Vec<f64> = (0..N).map(|_| draw_channels(&p, &mut rng).h_r.norm_squared()).collect();
        let law = Gamma::new(n_r as f64, 1.0).unwrap();
        assert_ks("|h_R|^2", &mut xs, |x| law.cdf(x));
    }
}

fn beamformed_gains(n_t: usize, q_r: f64, seed: u64) -> (Vec<f64>, Vec<f64>) {
    let p = SystemParams { n_t, q_r, ..SystemParams::default() };
    let mut rng = trial_rng(seed, 0, 0);
    let mut far = Vec::with_capacity(N);
    let mut near = Vec::with_capacity(N);
    while far.len() < N {
        let ch = draw_channels(&p, &mut rng);
        let bf = match Beamformers::compute(&ch, DEFAULT_EPSILON) {
            Ok(bf) => bf,
            Err(Error::DegenerateChannel(_)) => continue,
            Err(e) => panic!("{e}"),
        };
        far.push(transmit_gain(&ch.f_2, &bf.w_t));
        near.push(transmit_gain(&ch.f_1, &bf.w_t));
    }
    (far, near)
}

#[test]
fn zero_forced_far_gain_is_gamma() {
    for n_t in [2, 3, 4] {
        let (mut far, _) = beamformed_gains(n_t, 0.01, 20 + n_t as u64);
        let law = Gamma::new((n_t - 1) as f64, 1.0).unwrap();
        assert_ks("|B f2*|^2", &mut far, |x| law.cdf(x));
    }
}

#[test]
fn residual_interference_gain_is_exponential() {
    for q_r in [0.01, 1.0] {
        let (_, mut near) = beamformed_gains(3, q_r, 30);
        let law = Exp::new(1.0 / q_r).unwrap();
        assert_ks("|f1^T w_t|^2", &mut near, |x| law.cdf(x));
    }
}

fn selected_distances(p: &SystemParams, strategy: Strategy, seed: u64) -> (Vec<f64>, Vec<f64>) {
    let mut near = Vec::with_capacity(N);
    let mut far = Vec::with_capacity(N);
    let mut topo = Topology::default();
    let mut attempt = 0;
    let mut trial = 0;
    while near.len() < N {
        let mut rng = trial_rng(seed, trial, attempt);
        match topo.resample(p, strategy, &mut rng) {
            Ok(()) => {
                near.push(topo.d_bs_near);
                far.push(topo.d_bs_far);
                trial += 1;
                attempt = 0;
            }
            Err(Error::EmptyRegion { .. }) => attempt += 1,
            Err(e) => panic!("{e}"),
        }
    }
    (near, far)
}

#[test]
fn nearest_user_distances_follow_nearest_point_law() {
    for lambda in [1.0, 10.0] {
        let p = SystemParams { lambda_n: lambda, lambda_f: lambda, ..SystemParams::default() };
        let (mut near, mut far) = selected_distances(&p, Strategy::Nnnf, 40);
        let r1 = p.r1;
        let norm_n = -(-PI * lambda * r1 * r1).exp_m1();
        assert_ks("nearest near user", &mut near, |r| {
            -(-PI * lambda * r.min(r1).powi(2)).exp_m1() / norm_n
        });
        let (r2, r3) = (p.r2, p.r3);
        let norm_f = -(-PI * lambda * (r3 * r3 - r2 * r2)).exp_m1();
        assert_ks("nearest far user", &mut far, |r| {
            let r = r.clamp(r2, r3);
            -(-PI * lambda * (r * r - r2 * r2)).exp_m1() / norm_f
        });
    }
}

#[test]
fn random_user_distances_are_area_uniform() {
    let p = SystemParams { lambda_n: 1.0, lambda_f: 1.0, ..SystemParams::default() };
    let (mut near, mut far) = selected_distances(&p, Strategy::Rnrf, 41);
    assert_ks("random near user", &mut near, |r| (r / p.r1).powi(2).min(1.0));
    assert_ks("random far user", &mut far, |r| {
        let r = r.clamp(p.r2, p.r3);
        (r * r - p.r2 * p.r2) / (p.r3 * p.r3 - p.r2 * p.r2)
    });
}

#[test]
fn ppp_radii_are_area_uniform() {
    let mut rng = trial_rng(40, 0, 0);
    let mut disc = Vec::new();
    let mut ring = Vec::new();
    while disc.len() < N {
        disc.extend(sample_disc_ppp(2.0, 5.0, &mut rng).iter().map(|p| p.r));
        ring.extend(sample_ring_ppp(8.0, 10.0, 1.0, &mut rng).iter().map(|p| p.r));
    }
    assert_ks("disc PPP radius", &mut disc, |r| (r / 2.0).powi(2).min(1.0));
    assert_ks("ring PPP radius", &mut ring, |r| ((r * r - 64.0) / 36.0).clamp(0.0, 1.0));
    let mut angles: Vec<f64> = {
        let mut rng = trial_rng(43, 0, 0);
        (0..20).flat_map(|_| sample_disc_ppp(2.0, 400.0, &mut rng)).map(|p| p.theta).collect()
    };
    assert_ks("PPP angle", &mut angles, |t| ((t + PI) / (2.0 * PI)).clamp(0.0, 1.0));
}

#[test]
fn nnnf_near_distance_dominated_by_rnrf() {
    let p = SystemParams { lambda_n: 1.0, lambda_f: 1.0, ..SystemParams::default() };
    let (mut nn, _) = selected_distances(&p, Strategy::Nnnf, 44);
    let (mut rn, _) = selected_distances(&p, Strategy::Rnrf, 45);
    nn.sort_by(f64::total_cmp);
    rn.sort_by(f64::total_cmp);
    for q in 1..100 {
        let i = q * N / 100;
        assert!(nn[i] <= rn[i], "quantile {q}%: nnnf {} > rnrf {}", nn[i], rn[i]);
    }
}
