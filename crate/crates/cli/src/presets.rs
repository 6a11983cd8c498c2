//! Embedded experiment sets for the four result figures.

use fdnoma::mc::Metric;
use fdnoma::Strategy;

use crate::config::{ExperimentConfig, Sweep};

pub const NAMES: [&str; 4] = ["fig2", "fig3", "fig4", "fig5"];

fn steps(lo: f64, hi: f64, step: f64) -> Vec<f64> {
    let n = ((hi - lo) / step).round() as usize;
    (0..=n).map(|i| lo + step * i as f64).collect()
}

fn sweep(axis: &str, values: Vec<f64>) -> Option<Sweep> {
    Some(Sweep { axis: axis.into(), values })
}

/// Near-user outage against P_S.
pub fn fig2() -> Vec<ExperimentConfig> {
    [0.001, 0.01]
        .into_iter()
        .map(|q_r| ExperimentConfig {
            label: format!("q_r={q_r}"),
            alpha: 3.0,
            p_r_dbw: 40.0,
            r1: 2.0,
            r2: 8.0,
            r3: 10.0,
            lambda_n: 10.0,
            lambda_f: 10.0,
            q_r,
            metrics: vec![Metric::Near],
            sweep: sweep("p_s_dbw", steps(0.0, 40.0, 5.0)),
            ..Default::default()
        })
        .collect()
}

/// Far-user outage against P_R for two path-loss exponents and two rings.
pub fn fig3() -> Vec<ExperimentConfig> {
    let mut out = Vec::new();
    for alpha in [2.0, 3.0] {
        for (r2, r3) in [(8.0, 10.0), (9.0, 12.0)] {
            out.push(ExperimentConfig {
                label: format!("alpha={alpha} r2={r2} r3={r3}"),
                alpha,
                r1: 2.0,
                r2,
                r3,
                lambda_n: 10.0,
                lambda_f: 10.0,
                p_s_dbw: 30.0,
                metrics: vec![Metric::Far],
                sweep: sweep("p_r_dbw", steps(0.0, 40.0, 5.0)),
                // the far NNNF sum needs a fine grid to stay inside [0, 1] at high P_R
                quadrature_m: 20_000,
                ..Default::default()
            });
        }
    }
    out
}

/// Near-user outage against λ_n for two interference levels and two disc
/// radii.
pub fn fig4() -> Vec<ExperimentConfig> {
    let mut out = Vec::new();
    for q_r in [0.1, 1.0] {
        for r1 in [2.0, 3.0] {
            out.push(ExperimentConfig {
                label: format!("q_r={q_r} r1={r1}"),
                alpha: 3.0,
                p_s_dbw: 10.0,
                p_r_dbw: 10.0,
                r1,
                q_r,
                metrics: vec![Metric::Near],
                sweep: sweep("lambda_n", steps(1.0, 10.0, 1.0)),
                ..Default::default()
            });
        }
    }
    out
}

/// Full duplex against the half-duplex baseline under NNNF. Near users are
/// served at P_S = 20 dBW and far users at 40 dBW, so each rate gets two
/// experiments.
pub fn fig5() -> Vec<ExperimentConfig> {
    let mut out = Vec::new();
    for rate in [0.4, 1.0] {
        for (user, p_s_dbw, metrics) in [
            ("near", 20.0, vec![Metric::Near, Metric::NearHd]),
            ("far", 40.0, vec![Metric::Far, Metric::FarHd]),
        ] {
            out.push(ExperimentConfig {
                label: format!("{user} rate={rate}"),
                alpha: 3.0,
                r1: 2.0,
                r2: 8.0,
                r3: 10.0,
                n_t: 3,
                n_r: 1,
                lambda_n: 1.0,
                lambda_f: 1.0,
                q_r: 1e-4,
                p_s_dbw,
                rate1: rate,
                rate2: rate,
                strategies: vec![Strategy::Nnnf],
                metrics,
                sweep: sweep("p_r_dbw", steps(10.0, 40.0, 5.0)),
                quadrature_m: 20_000,
                ..Default::default()
            });
        }
    }
    out
}

pub fn get(name: &str) -> Option<Vec<ExperimentConfig>> {
    match name {
        "fig2" => Some(fig2()),
        "fig3" => Some(fig3()),
        "fig4" => Some(fig4()),
        "fig5" => Some(fig5()),
        _ => None,
    }
}
