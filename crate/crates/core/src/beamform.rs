//! Relay beamformers: MRC on receive, transmit zero-forcing (TZF) on send.
//!
//! TZF restricts the transmit vector to the null space of the effective
//! self-interference row `h_R† H_RR`, and inside that (N_T − 1)-dimensional
//! subspace aligns with the far-user channel. The projection onto the null
//! space is the rank-1 update `B = I − g g† / ‖g‖²` with `g = H_RR† h_R`.

use nalgebra::{DMatrix, DVector};

use crate::channel::{ChannelDraw, C64};
use crate::error::{Error, Result};

/// Degeneracy threshold relative to operand norms.
pub const DEFAULT_EPSILON: f64 = 1e-12;

/// Receive and transmit unit vectors at the relay plus the null-space
/// projection used to build the transmit vector.
#[derive(Clone, Debug)]
pub struct Beamformers {
    pub w_r: DVector<C64>,
    pub w_t: DVector<C64>,
    pub b_proj: DMatrix<C64>,
}

impl Beamformers {
    pub fn compute(channels: &ChannelDraw, epsilon: f64) -> Result<Beamformers> {
        let w_r = mrc_receive(&channels.h_r)?;
        let (w_t, b_proj) = tzf_transmit(&channels.h_r, &channels.h_rr, &channels.f_2, epsilon)?;
        Ok(Beamformers { w_r, w_t, b_proj })
    }

    /// |w_r† H_RR w_t|², the residual self-interference gain.
    pub fn si_gain(&self, h_rr: &DMatrix<C64>) -> f64 {
        self.w_r.dotc(&(h_rr * &self.w_t)).norm_sqr()
    }
}

/// `h_r / ‖h_r‖`.
pub fn mrc_receive(h_r: &DVector<C64>) -> Result<DVector<C64>> {
    let n = h_r.norm();
    if n == 0.0 || !n.is_finite() {
        return Err(Error::DegenerateChannel("zero BS-relay channel"));
    }
    Ok(h_r.unscale(n))
}

/// Maximizes |f₂ᵀ w|² over unit `w` with `h_r† h_rr w = 0`.
///
/// Returns the optimal `w_t = B f₂* / ‖B f₂*‖` and `B`. When the
/// self-interference row vanishes the constraint is vacuous and `B = I`.
pub fn tzf_transmit(
    h_r: &DVector<C64>,
    h_rr: &DMatrix<C64>,
    f_2: &DVector<C64>,
    epsilon: f64,
) -> Result<(DVector<C64>, DMatrix<C64>)> {
    let n_t = h_rr.ncols();
    if n_t < 2 {
        return Err(Error::InvalidParams {
            field: "n_t",
            reason: format!("transmit zero-forcing needs n_t >= 2, got {n_t}"),
        });
    }
    // g = H_RR† h_R, so h_R† H_RR w = g† w.
    let g = h_rr.ad_mul(h_r);
    let g_norm_sq = g.norm_squared();
    let scale = h_r.norm() * h_rr.norm();
    let b_proj = if g_norm_sq.sqrt() <= epsilon * scale || g_norm_sq == 0.0 {
        DMatrix::identity(n_t, n_t)
    } else {
        let mut b = DMatrix::identity(n_t, n_t);
        b -= (&g * g.adjoint()).unscale(g_norm_sq);
        b
    };
    let f_conj = f_2.conjugate();
    let v = &b_proj * &f_conj;
    let v_norm = v.norm();
    if v_norm <= epsilon * f_2.norm() || v_norm == 0.0 {
        return Err(Error::DegenerateChannel("far-user channel lies in the SI direction"));
    }
    Ok((v.unscale(v_norm), b_proj))
}

/// |f₂ᵀ w|² (transpose, not conjugate transpose).
pub fn transmit_gain(f: &DVector<C64>, w: &DVector<C64>) -> f64 {
    f.dot(w).norm_sqr()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{complex_gaussian, draw_channels};
    use crate::model::SystemParams;
    use approx::assert_relative_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn mrc_identity_and_gain() {
        let h = DVector::from_vec(vec![c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]);
        assert_eq!(mrc_receive(&h).unwrap(), h);
        let h1 = DVector::from_vec(vec![c(3.0, 4.0)]);
        let w = mrc_receive(&h1).unwrap();
        assert_relative_eq!(w.dotc(&h1).norm_sqr(), 25.0, max_relative = 1e-14);
        let zero = DVector::from_element(2, c(0.0, 0.0));
        assert!(matches!(mrc_receive(&zero), Err(Error::DegenerateChannel(_))));
    }

    #[test]
    fn mrc_gain_equals_norm() {
        let p = SystemParams::default();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..1000 {
            let ch = draw_channels(&p, &mut rng);
            let w = mrc_receive(&ch.h_r).unwrap();
            assert_relative_eq!(w.norm(), 1.0, epsilon = 1e-12);
            assert_relative_eq!(w.dotc(&ch.h_r).norm_sqr(), ch.h_r.norm_squared(), max_relative = 1e-12);
        }
    }

    #[test]
    fn zero_si_gives_matched_filter() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let h_r = DVector::from_fn(3, |_, _| complex_gaussian(1.0, &mut rng));
        let f_2 = DVector::from_fn(3, |_, _| complex_gaussian(1.0, &mut rng));
        let h_rr = DMatrix::from_element(3, 3, c(0.0, 0.0));
        let (w, b) = tzf_transmit(&h_r, &h_rr, &f_2, DEFAULT_EPSILON).unwrap();
        assert_eq!(b, DMatrix::identity(3, 3));
        let mf = f_2.conjugate().unscale(f_2.norm());
        assert!((w - &mf).norm() < 1e-14);
        assert_relative_eq!(transmit_gain(&f_2, &mf), f_2.norm_squared(), max_relative = 1e-12);
    }

    #[test]
    fn projection_properties_and_null_constraint() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for n_t in 2..=4 {
            let p = SystemParams { n_t, ..SystemParams::default() };
            for _ in 0..500 {
                let ch = draw_channels(&p, &mut rng);
                let bf = Beamformers::compute(&ch, DEFAULT_EPSILON).unwrap();
                let b = &bf.b_proj;
                assert!((b * b - b).norm() < 1e-10);
                assert!((b.adjoint() - b).norm() < 1e-10);
                assert_relative_eq!(bf.w_t.norm(), 1.0, epsilon = 1e-12);
                assert_relative_eq!(bf.w_r.norm(), 1.0, epsilon = 1e-12);
                let trace: f64 = (0..n_t).map(|i| b[(i, i)].re).sum();
                assert_relative_eq!(trace, (n_t - 1) as f64, epsilon = 1e-10);
                let residual = ch.h_r.dotc(&(&ch.h_rr * &bf.w_t)).norm();
                assert!(residual <= 1e-10 * ch.h_rr.norm());
                let gain = transmit_gain(&ch.f_2, &bf.w_t);
                let bf2 = (b * ch.f_2.conjugate()).norm_squared();
                assert_relative_eq!(gain, bf2, max_relative = 1e-10);
                assert!(gain <= ch.f_2.norm_squared() * (1.0 + 1e-12));
            }
        }
    }

    #[test]
    fn far_channel_along_si_direction_is_degenerate() {
        // h_r = e1, H_RR = e1 e1ᵀ → g = e1; f₂ = e1 is projected to zero.
        let h_r = DVector::from_vec(vec![c(1.0, 0.0), c(0.0, 0.0)]);
        let mut h_rr = DMatrix::from_element(2, 2, c(0.0, 0.0));
        h_rr[(0, 0)] = c(1.0, 0.0);
        let f_2 = DVector::from_vec(vec![c(0.0, 2.0), c(0.0, 0.0)]);
        assert!(matches!(
            tzf_transmit(&h_r, &h_rr, &f_2, DEFAULT_EPSILON),
            Err(Error::DegenerateChannel(_))
        ));
    }

    #[test]
    fn single_transmit_antenna_rejected() {
        let h_r = DVector::from_vec(vec![c(1.0, 0.0)]);
        let h_rr = DMatrix::from_element(1, 1, c(1.0, 0.0));
        let f_2 = DVector::from_vec(vec![c(1.0, 0.0)]);
        assert!(matches!(
            tzf_transmit(&h_r, &h_rr, &f_2, DEFAULT_EPSILON),
            Err(Error::InvalidParams { field: "n_t", .. })
        ));
    }
}
