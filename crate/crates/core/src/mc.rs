//! Monte Carlo outage engine.
//!
//! Every trial owns a counter-derived random stream: trial `i`, resampling
//! attempt `a` under seed `s` always draws from the same ChaCha8 stream,
//! whatever the worker count or scheduling. Accumulation is a sum of integer
//! outage counts, so estimates are bit-identical across worker counts.
//!
//! A trial that lands on an empty user region or a degenerate channel is
//! redrawn from its next attempt stream. Empty-region redraws condition the
//! estimate on both regions being occupied.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::beamform::{Beamformers, DEFAULT_EPSILON};
use crate::channel::draw_channels;
use crate::error::{invalid, Error, Result};
use crate::geometry::{Strategy, Topology};
use crate::link::{
    hd_sinrs_from_gains, outage_far, outage_near, sinrs_from_gains, HdGains, LinkGains,
};
use crate::model::{derive_scalars, derive_scalars_hd, DerivedScalars, SystemParams};

/// Outage event being estimated.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    Near,
    Far,
    NearHd,
    FarHd,
}

impl Metric {
    pub fn name(&self) -> &'static str {
        match self {
            Metric::Near => "near",
            Metric::Far => "far",
            Metric::NearHd => "near_hd",
            Metric::FarHd => "far_hd",
        }
    }

    fn is_hd(&self) -> bool {
        matches!(self, Metric::NearHd | Metric::FarHd)
    }
}

/// Monte Carlo outage probability with its binomial standard error.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OutageEstimate {
    pub p_hat: f64,
    pub trials: u64,
    pub outages: u64,
    pub std_err: f64,
    pub seed: u64,
    pub metric: Metric,
    pub strategy: Strategy,
}

impl OutageEstimate {
    fn from_counts(outages: u64, trials: u64, seed: u64, metric: Metric, strategy: Strategy) -> Self {
        let p_hat = outages as f64 / trials as f64;
        Self {
            p_hat,
            trials,
            outages,
            std_err: (p_hat * (1.0 - p_hat) / trials as f64).sqrt(),
            seed,
            metric,
            strategy,
        }
    }
}

/// Execution knobs that never change results.
#[derive(Clone, Copy, Debug)]
pub struct RunOptions {
    /// Worker threads; 0 means the rayon default.
    pub workers: usize,
    /// Beamformer degeneracy threshold.
    pub epsilon: f64,
    /// Resampling attempts per trial before giving up.
    pub max_attempts: u32,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self {
            workers: 0,
            epsilon: DEFAULT_EPSILON,
            max_attempts: 10_000,
        }
    }
}

/// Estimates for a batch of parameter variants that share one set of
/// deployments and fading draws.
#[derive(Clone, Debug)]
pub struct BatchOutcome {
    /// `estimates[v][m]` is variant `v`, metric `m`.
    pub estimates: Vec<Vec<OutageEstimate>>,
    pub empty_resamples: u64,
    pub degenerate_resamples: u64,
}

const CHUNK: u64 = 2048;

/// Random stream of one trial attempt.
pub fn trial_rng(seed: u64, trial: u64, attempt: u32) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    key[8..12].copy_from_slice(&attempt.to_le_bytes());
    let mut rng = ChaCha8Rng::from_seed(key);
    rng.set_stream(trial);
    rng
}

/// True when `a` and `b` produce identical deployments and fading draws for
/// the same random stream.
pub fn same_sampling(a: &SystemParams, b: &SystemParams) -> bool {
    a.r1 == b.r1
        && a.r2 == b.r2
        && a.r3 == b.r3
        && a.lambda_n == b.lambda_n
        && a.lambda_f == b.lambda_f
        && a.n_t == b.n_t
        && a.n_r == b.n_r
        && a.k_relays == b.k_relays
        && a.q_r == b.q_r
        && a.sigma_rr_sq == b.sigma_rr_sq
        && a.relay_offset == b.relay_offset
}

struct Variant {
    params: SystemParams,
    fd: DerivedScalars,
    hd: Option<DerivedScalars>,
}

#[derive(Clone)]
struct Tally {
    outages: Vec<u64>,
    empty: u64,
    degenerate: u64,
}

impl Tally {
    fn zero(n: usize) -> Self {
        Self {
            outages: vec![0; n],
            empty: 0,
            degenerate: 0,
        }
    }

    fn merge(mut self, other: Tally) -> Tally {
        for (a, b) in self.outages.iter_mut().zip(other.outages) {
            *a += b;
        }
        self.empty += other.empty;
        self.degenerate += other.degenerate;
        self
    }
}

struct Engine<'a> {
    variants: Vec<Variant>,
    metrics: &'a [Metric],
    strategy: Strategy,
    seed: u64,
    opts: RunOptions,
}

impl Engine<'_> {
    fn run_trial(&self, trial: u64, topo: &mut Topology, tally: &mut Tally) -> Result<()> {
        let base = &self.variants[0].params;
        let mut last = None;
        for attempt in 0..self.opts.max_attempts {
            let mut rng = trial_rng(self.seed, trial, attempt);
            match topo.resample(base, self.strategy, &mut rng) {
                Ok(()) => {}
                Err(e @ Error::EmptyRegion { .. }) => {
                    tally.empty += 1;
                    last = Some(e);
                    continue;
                }
                Err(e) => return Err(e),
            }
            let channels = draw_channels(base, &mut rng);
            let bf = match Beamformers::compute(&channels, self.opts.epsilon) {
                Ok(bf) => bf,
                Err(e @ Error::DegenerateChannel(_)) => {
                    tally.degenerate += 1;
                    last = Some(e);
                    continue;
                }
                Err(e) => return Err(e),
            };
            let gains = LinkGains::new(&channels, &bf);
            let hd_gains = HdGains::new(&channels);
            let nm = self.metrics.len();
            for (v, var) in self.variants.iter().enumerate() {
                let fd = sinrs_from_gains(&var.params, &var.fd, topo, &gains);
                let hd = var
                    .hd
                    .map(|d| (d, hd_sinrs_from_gains(&var.params, topo, &hd_gains)));
                for (m, metric) in self.metrics.iter().enumerate() {
                    let out = match (metric, &hd) {
                        (Metric::Near, _) => outage_near(&fd, var.fd.tau1, var.fd.tau2),
                        (Metric::Far, _) => outage_far(&fd, var.fd.tau2),
                        (Metric::NearHd, Some((d, s))) => outage_near(s, d.tau1, d.tau2),
                        (Metric::FarHd, Some((d, s))) => outage_far(s, d.tau2),
                        _ => unreachable!("hd thresholds derived for hd metrics"),
                    };
                    tally.outages[v * nm + m] += out as u64;
                }
            }
            return Ok(());
        }
        Err(Error::ResampleExhausted {
            trial,
            attempts: self.opts.max_attempts,
            last: Box::new(last.unwrap_or(Error::DegenerateChannel("no attempts"))),
        })
    }

    fn run_chunk(&self, start: u64, end: u64) -> Result<Tally> {
        let mut tally = Tally::zero(self.variants.len() * self.metrics.len());
        let mut topo = Topology::default();
        for trial in start..end {
            self.run_trial(trial, &mut topo, &mut tally)?;
        }
        Ok(tally)
    }

    fn run(&self, trials: u64) -> Result<Tally> {
        let chunks = trials.div_ceil(CHUNK);
        let work = || {
            (0..chunks)
                .into_par_iter()
                .map(|c| self.run_chunk(c * CHUNK, ((c + 1) * CHUNK).min(trials)))
                .try_reduce(
                    || Tally::zero(self.variants.len() * self.metrics.len()),
                    |a, b| Ok(a.merge(b)),
                )
        };
        if self.opts.workers == 0 {
            work()
        } else {
            rayon::ThreadPoolBuilder::new()
                .num_threads(self.opts.workers)
                .build()
                .map_err(|e| invalid("workers", e.to_string()))?
                .install(work)
        }
    }
}

/// Runs `trials` trials once and evaluates every variant in `variants` on
/// the same draws. All variants must satisfy [`same_sampling`] with the
/// first one; they may differ in powers, rates, path loss and the far
/// distance model.
///
/// Each variant's estimates equal those of a separate [`run_trials`] call
/// with the same seed.
pub fn run_batch(
    variants: &[SystemParams],
    strategy: Strategy,
    metrics: &[Metric],
    trials: u64,
    seed: u64,
    opts: RunOptions,
) -> Result<BatchOutcome> {
    if trials == 0 {
        return Err(invalid("trials", "must be >= 1"));
    }
    let Some(first) = variants.first() else {
        return Err(invalid("variants", "need at least one parameter set"));
    };
    let want_hd = metrics.iter().any(Metric::is_hd);
    let mut prepared = Vec::with_capacity(variants.len());
    for p in variants {
        if !same_sampling(first, p) {
            return Err(invalid(
                "variants",
                "batched variants must share geometry, densities, antennas and channel variances",
            ));
        }
        prepared.push(Variant {
            params: p.clone(),
            fd: derive_scalars(p)?,
            hd: if want_hd { Some(derive_scalars_hd(p)?) } else { None },
        });
    }
    let engine = Engine {
        variants: prepared,
        metrics,
        strategy,
        seed,
        opts,
    };
    let tally = engine.run(trials)?;
    let nm = metrics.len();
    let estimates = (0..variants.len())
        .map(|v| {
            metrics
                .iter()
                .enumerate()
                .map(|(m, &metric)| {
                    OutageEstimate::from_counts(tally.outages[v * nm + m], trials, seed, metric, strategy)
                })
                .collect()
        })
        .collect();
    if tally.degenerate as f64 > 1e-4 * trials as f64 {
        log::warn!(
            "{} degenerate channel draws resampled over {} trials",
            tally.degenerate,
            trials
        );
    }
    Ok(BatchOutcome {
        estimates,
        empty_resamples: tally.empty,
        degenerate_resamples: tally.degenerate,
    })
}

/// One estimate per requested metric.
pub fn run_trials(
    params: &SystemParams,
    strategy: Strategy,
    metrics: &[Metric],
    trials: u64,
    seed: u64,
    opts: RunOptions,
) -> Result<Vec<OutageEstimate>> {
    let mut out = run_batch(std::slice::from_ref(params), strategy, metrics, trials, seed, opts)?;
    Ok(out.estimates.swap_remove(0))
}

/// A [`SystemParams`] field that can be swept.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SweepAxis {
    R1,
    R2,
    R3,
    LambdaN,
    LambdaF,
    Alpha,
    PS,
    PR,
    NoisePower,
    /// Also sets a₂ = 1 − a₁.
    A1,
    /// Also sets a₁ = 1 − a₂.
    A2,
    Rate1,
    Rate2,
    NT,
    NR,
    KRelays,
    QR,
    SigmaRrSq,
    RelayOffset,
}

impl SweepAxis {
    pub const ALL: [SweepAxis; 19] = [
        SweepAxis::R1,
        SweepAxis::R2,
        SweepAxis::R3,
        SweepAxis::LambdaN,
        SweepAxis::LambdaF,
        SweepAxis::Alpha,
        SweepAxis::PS,
        SweepAxis::PR,
        SweepAxis::NoisePower,
        SweepAxis::A1,
        SweepAxis::A2,
        SweepAxis::Rate1,
        SweepAxis::Rate2,
        SweepAxis::NT,
        SweepAxis::NR,
        SweepAxis::KRelays,
        SweepAxis::QR,
        SweepAxis::SigmaRrSq,
        SweepAxis::RelayOffset,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            SweepAxis::R1 => "r1",
            SweepAxis::R2 => "r2",
            SweepAxis::R3 => "r3",
            SweepAxis::LambdaN => "lambda_n",
            SweepAxis::LambdaF => "lambda_f",
            SweepAxis::Alpha => "alpha",
            SweepAxis::PS => "p_s",
            SweepAxis::PR => "p_r",
            SweepAxis::NoisePower => "noise_power",
            SweepAxis::A1 => "a1",
            SweepAxis::A2 => "a2",
            SweepAxis::Rate1 => "rate1",
            SweepAxis::Rate2 => "rate2",
            SweepAxis::NT => "n_t",
            SweepAxis::NR => "n_r",
            SweepAxis::KRelays => "k_relays",
            SweepAxis::QR => "q_r",
            SweepAxis::SigmaRrSq => "sigma_rr_sq",
            SweepAxis::RelayOffset => "relay_offset",
        }
    }

    pub fn parse(name: &str) -> Result<SweepAxis> {
        SweepAxis::ALL
            .iter()
            .copied()
            .find(|a| a.name() == name)
            .ok_or_else(|| Error::UnknownAxis {
                name: name.to_string(),
                valid: SweepAxis::ALL.iter().map(|a| a.name()).collect(),
            })
    }

    /// Whether changing this field changes the random draws of a trial.
    pub fn affects_sampling(&self) -> bool {
        !matches!(
            self,
            SweepAxis::Alpha
                | SweepAxis::PS
                | SweepAxis::PR
                | SweepAxis::NoisePower
                | SweepAxis::A1
                | SweepAxis::A2
                | SweepAxis::Rate1
                | SweepAxis::Rate2
        )
    }

    /// Copy of `params` with this field set to `value`.
    pub fn apply(&self, params: &SystemParams, value: f64) -> Result<SystemParams> {
        let mut p = params.clone();
        let count = |field: &'static str| -> Result<usize> {
            if value.fract() == 0.0 && value >= 0.0 {
                Ok(value as usize)
            } else {
                Err(invalid(field, format!("expects an integer, got {value}")))
            }
        };
        match self {
            SweepAxis::R1 => p.r1 = value,
            SweepAxis::R2 => p.r2 = value,
            SweepAxis::R3 => p.r3 = value,
            SweepAxis::LambdaN => p.lambda_n = value,
            SweepAxis::LambdaF => p.lambda_f = value,
            SweepAxis::Alpha => p.alpha = value,
            SweepAxis::PS => p.p_s = value,
            SweepAxis::PR => p.p_r = value,
            SweepAxis::NoisePower => p.noise_power = value,
            SweepAxis::A1 => {
                p.a1 = value;
                p.a2 = 1.0 - value;
            }
            SweepAxis::A2 => {
                p.a2 = value;
                p.a1 = 1.0 - value;
            }
            SweepAxis::Rate1 => p.rate1 = value,
            SweepAxis::Rate2 => p.rate2 = value,
            SweepAxis::NT => p.n_t = count("n_t")?,
            SweepAxis::NR => p.n_r = count("n_r")?,
            SweepAxis::KRelays => p.k_relays = count("k_relays")?,
            SweepAxis::QR => p.q_r = value,
            SweepAxis::SigmaRrSq => p.sigma_rr_sq = value,
            SweepAxis::RelayOffset => p.relay_offset = value,
        }
        p.validate()?;
        Ok(p)
    }
}

/// One sweep point.
#[derive(Clone, Debug)]
pub struct SweepRow {
    pub axis_value: f64,
    pub estimates: Vec<OutageEstimate>,
}

/// Runs one estimate set per axis value, in the given order. Axes that do
/// not affect sampling share one batched pass over the draws; the result is
/// identical to separate runs because every point uses the same seed.
#[allow(clippy::too_many_arguments)]
pub fn sweep(
    template: &SystemParams,
    axis: SweepAxis,
    values: &[f64],
    strategy: Strategy,
    metrics: &[Metric],
    trials: u64,
    seed: u64,
    opts: RunOptions,
) -> Result<Vec<SweepRow>> {
    let variants = values
        .iter()
        .map(|&v| axis.apply(template, v))
        .collect::<Result<Vec<_>>>()?;
    let estimates = if axis.affects_sampling() {
        variants
            .iter()
            .map(|p| run_trials(p, strategy, metrics, trials, seed, opts))
            .collect::<Result<Vec<_>>>()?
    } else if variants.is_empty() {
        Vec::new()
    } else {
        run_batch(&variants, strategy, metrics, trials, seed, opts)?.estimates
    };
    Ok(values
        .iter()
        .zip(estimates)
        .map(|(&axis_value, estimates)| SweepRow { axis_value, estimates })
        .collect())
}
