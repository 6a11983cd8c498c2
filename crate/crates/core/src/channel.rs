//! Small-scale Rayleigh fading draws for one block.

use nalgebra::{Complex, DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::model::SystemParams;

pub type C64 = Complex<f64>;

/// CN(0, variance): independent N(0, variance/2) real and imaginary parts.
pub fn complex_gaussian<R: Rng + ?Sized>(variance: f64, rng: &mut R) -> C64 {
    let s = (0.5 * variance).sqrt();
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(s * re, s * im)
}

fn gaussian_vector<R: Rng + ?Sized>(n: usize, variance: f64, rng: &mut R) -> DVector<C64> {
    DVector::from_fn(n, |_, _| complex_gaussian(variance, rng))
}

/// One fading realization of every link in the model.
#[derive(Clone, Debug)]
pub struct ChannelDraw {
    /// BS → relay receive array, CN(0, 1) entries (length N_R).
    pub h_r: DVector<C64>,
    /// Residual self-interference, N_R × N_T, CN(0, σ²_RR) entries.
    pub h_rr: DMatrix<C64>,
    /// BS → near user, CN(0, 1).
    pub h_1: C64,
    /// Residual relay → near user interference, CN(0, q_r) entries (length N_T).
    pub f_1: DVector<C64>,
    /// Relay → far user, CN(0, 1) entries (length N_T).
    pub f_2: DVector<C64>,
    /// Extra BS → relay entries seen by the half-duplex baseline when its
    /// transmit antennas also receive (length N_T).
    pub h_r_hd_ext: DVector<C64>,
    /// Extra relay → far user entries seen by the half-duplex baseline when
    /// its receive antennas also transmit (length N_R).
    pub f_2_hd_ext: DVector<C64>,
}

/// Draws all channels independently. Block fading: one call per trial.
pub fn draw_channels<R: Rng + ?Sized>(params: &SystemParams, rng: &mut R) -> ChannelDraw {
    let (nt, nr) = (params.n_t, params.n_r);
    let h_r = gaussian_vector(nr, 1.0, rng);
    let h_rr = DMatrix::from_fn(nr, nt, |_, _| complex_gaussian(params.sigma_rr_sq, rng));
    let h_1 = complex_gaussian(1.0, rng);
    let f_1 = gaussian_vector(nt, params.q_r, rng);
    let f_2 = gaussian_vector(nt, 1.0, rng);
    let h_r_hd_ext = gaussian_vector(nt, 1.0, rng);
    let f_2_hd_ext = gaussian_vector(nr, 1.0, rng);
    ChannelDraw {
        h_r,
        h_rr,
        h_1,
        f_1,
        f_2,
        h_r_hd_ext,
        f_2_hd_ext,
    }
}
