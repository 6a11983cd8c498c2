//! User deployment, relay placement and user/relay selection.
//!
//! Points are stored in polar form around the BS at the origin. Sampling is
//! rejection free: radii come from the inverse radial CDF of a uniform point
//! in a disc or ring, so region constraints hold exactly.

use std::f64::consts::PI;

use rand::Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::SystemParams;

/// A point in the plane, in polar coordinates about the BS.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Point2D {
    /// Distance from the BS.
    pub r: f64,
    /// Angle from the x-axis, in [−π, π].
    pub theta: f64,
}

impl Point2D {
    pub fn polar(r: f64, theta: f64) -> Self {
        Self { r, theta }
    }

    pub fn from_cartesian(x: f64, y: f64) -> Self {
        Self {
            r: x.hypot(y),
            theta: y.atan2(x),
        }
    }

    pub fn x(&self) -> f64 {
        self.r * self.theta.cos()
    }

    pub fn y(&self) -> f64 {
        self.r * self.theta.sin()
    }

    /// Euclidean distance by the law of cosines.
    pub fn distance(&self, other: &Point2D) -> f64 {
        let d2 = self.r * self.r + other.r * other.r
            - 2.0 * self.r * other.r * (self.theta - other.theta).cos();
        d2.max(0.0).sqrt()
    }
}

/// User selection strategy.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Strategy {
    /// Random near user, random far user.
    Rnrf,
    /// Nearest near user, nearest far user (both nearest to the BS).
    Nnnf,
}

impl Strategy {
    pub fn name(&self) -> &'static str {
        match self {
            Strategy::Rnrf => "rnrf",
            Strategy::Nnnf => "nnnf",
        }
    }
}

fn uniform_angle<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    rng.random_range(-PI..PI)
}

fn poisson_count<R: Rng + ?Sized>(mean: f64, rng: &mut R) -> usize {
    if mean <= 0.0 {
        return 0;
    }
    // Poisson::new only fails for non-finite or non-positive means.
    Poisson::new(mean).map(|d| d.sample(rng) as usize).unwrap_or(0)
}

pub(crate) fn sample_ring_into<R: Rng + ?Sized>(
    out: &mut Vec<Point2D>,
    r_in: f64,
    r_out: f64,
    density: f64,
    rng: &mut R,
) {
    out.clear();
    let (a, b) = (r_in * r_in, r_out * r_out);
    let n = poisson_count(density * PI * (b - a), rng);
    out.reserve(n);
    for _ in 0..n {
        let u: f64 = rng.random();
        let r = (a + u * (b - a)).sqrt();
        out.push(Point2D::polar(r, uniform_angle(rng)));
    }
}

/// Homogeneous PPP restricted to a disc centered at the BS.
pub fn sample_disc_ppp<R: Rng + ?Sized>(radius: f64, density: f64, rng: &mut R) -> Vec<Point2D> {
    let mut out = Vec::new();
    sample_ring_into(&mut out, 0.0, radius, density, rng);
    out
}

/// Homogeneous PPP restricted to the ring `r_in ≤ r ≤ r_out`.
pub fn sample_ring_ppp<R: Rng + ?Sized>(
    r_in: f64,
    r_out: f64,
    density: f64,
    rng: &mut R,
) -> Vec<Point2D> {
    let mut out = Vec::new();
    sample_ring_into(&mut out, r_in, r_out, density, rng);
    out
}

/// `k` relays evenly spaced on the circle of radius `r1`.
pub fn place_relays(k: usize, r1: f64, offset_angle: f64) -> Vec<Point2D> {
    (0..k)
        .map(|j| Point2D::polar(r1, offset_angle + 2.0 * PI * j as f64 / k as f64))
        .collect()
}

fn argmin_by<F: Fn(&Point2D) -> f64>(points: &[Point2D], key: F) -> usize {
    let mut best = 0;
    let mut best_key = f64::INFINITY;
    for (i, p) in points.iter().enumerate() {
        let k = key(p);
        if k < best_key {
            best = i;
            best_key = k;
        }
    }
    best
}

fn select_index<R: Rng + ?Sized>(
    points: &[Point2D],
    strategy: Strategy,
    region: &'static str,
    rng: &mut R,
) -> Result<usize> {
    if points.is_empty() {
        return Err(Error::EmptyRegion { region });
    }
    Ok(match strategy {
        Strategy::Rnrf => rng.random_range(0..points.len()),
        Strategy::Nnnf => argmin_by(points, |p| p.r),
    })
}

/// Picks the near and far users. Ties under NNNF go to the lowest index.
pub fn select_users<R: Rng + ?Sized>(
    near: &[Point2D],
    far: &[Point2D],
    strategy: Strategy,
    rng: &mut R,
) -> Result<(Point2D, Point2D)> {
    let i = select_index(near, strategy, "near", rng)?;
    let j = select_index(far, strategy, "far", rng)?;
    Ok((near[i], far[j]))
}

/// Index of the relay closest to `far`; ties go to the lowest index.
///
/// # Panics
/// If `relays` is empty.
pub fn select_relay(relays: &[Point2D], far: &Point2D) -> usize {
    assert!(!relays.is_empty(), "select_relay needs at least one relay");
    argmin_by(relays, |r| r.distance(far))
}

/// Distance from a relay on the ring of radius `r1` at angle `theta_r` to a
/// user at distance `d_bs_user` and angle `theta_i`.
pub fn relay_user_distance(r1: f64, d_bs_user: f64, theta_r: f64, theta_i: f64) -> f64 {
    let d2 = r1 * r1 + d_bs_user * d_bs_user - 2.0 * r1 * d_bs_user * (theta_r - theta_i).cos();
    d2.max(0.0).sqrt()
}

/// One sampled deployment with the selected users and relay.
#[derive(Clone, Debug, Default)]
pub struct Topology {
    pub near_users: Vec<Point2D>,
    pub far_users: Vec<Point2D>,
    pub relays: Vec<Point2D>,
    pub selected_near: Point2D,
    pub selected_far: Point2D,
    pub selected_relay: Point2D,
    pub d_bs_near: f64,
    pub d_bs_far: f64,
    pub d_relay_near: f64,
    pub d_relay_far: f64,
}

impl Default for Point2D {
    fn default() -> Self {
        Point2D::polar(0.0, 0.0)
    }
}

impl Topology {
    /// Samples a fresh deployment and performs user and relay selection.
    /// Returns [`Error::EmptyRegion`] when either user set is empty.
    pub fn sample<R: Rng + ?Sized>(
        params: &SystemParams,
        strategy: Strategy,
        rng: &mut R,
    ) -> Result<Topology> {
        let mut t = Topology::default();
        t.resample(params, strategy, rng)?;
        Ok(t)
    }

    /// Like [`Topology::sample`] but reuses the allocations of `self`.
    pub fn resample<R: Rng + ?Sized>(
        &mut self,
        params: &SystemParams,
        strategy: Strategy,
        rng: &mut R,
    ) -> Result<()> {
        sample_ring_into(&mut self.near_users, 0.0, params.r1, params.lambda_n, rng);
        sample_ring_into(&mut self.far_users, params.r2, params.r3, params.lambda_f, rng);
        if self.relays.len() != params.k_relays
            || self.relays.first().map(|p| (p.r, p.theta)) != Some((params.r1, params.relay_offset))
        {
            self.relays = place_relays(params.k_relays, params.r1, params.relay_offset);
        }
        let (near, far) = select_users(&self.near_users, &self.far_users, strategy, rng)?;
        let relay = self.relays[select_relay(&self.relays, &far)];
        self.selected_near = near;
        self.selected_far = far;
        self.selected_relay = relay;
        self.d_bs_near = near.r;
        self.d_bs_far = far.r;
        self.d_relay_near = relay_user_distance(params.r1, near.r, relay.theta, near.theta);
        self.d_relay_far = relay_user_distance(params.r1, far.r, relay.theta, far.theta);
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    #[test]
    fn disc_points_inside_and_mean_count() {
        let mut r = rng(1);
        let draws = 2000;
        let mut total = 0usize;
        for _ in 0..draws {
            let pts = sample_disc_ppp(2.0, 10.0, &mut r);
            assert!(pts.iter().all(|p| p.r <= 2.0 && p.r >= 0.0));
            total += pts.len();
        }
        let mean = total as f64 / draws as f64;
        let expected = 40.0 * PI;
        // Poisson sd of the mean: sqrt(125.66/2000) ≈ 0.25
        assert!((mean - expected).abs() < 1.25, "mean count {mean}");
    }

    #[test]
    fn ring_points_inside_and_mean_count() {
        let mut r = rng(2);
        let draws = 500;
        let mut total = 0usize;
        for _ in 0..draws {
            let pts = sample_ring_ppp(8.0, 10.0, 10.0, &mut r);
            assert!(pts.iter().all(|p| p.r >= 8.0 && p.r <= 10.0));
            total += pts.len();
        }
        let mean = total as f64 / draws as f64;
        // sd of mean: sqrt(1130.97/500) ≈ 1.5
        assert!((mean - 360.0 * PI).abs() < 7.5, "mean count {mean}");
    }

    #[test]
    fn vanishing_regions_are_empty() {
        let mut r = rng(3);
        for _ in 0..100 {
            assert!(sample_disc_ppp(2.0, 1e-12, &mut r).is_empty());
            assert!(sample_ring_ppp(8.0, 8.0 + 1e-12, 10.0, &mut r).is_empty());
        }
    }

    #[test]
    fn relay_ring() {
        let relays = place_relays(3, 2.0, 0.0);
        let angles: Vec<f64> = relays.iter().map(|p| p.theta).collect();
        assert_relative_eq!(angles[0], 0.0);
        assert_relative_eq!(angles[1], 2.0 * PI / 3.0, epsilon = 1e-15);
        assert_relative_eq!(angles[2], 4.0 * PI / 3.0, epsilon = 1e-15);
        for p in &relays {
            assert_relative_eq!(p.r, 2.0, max_relative = 1e-12);
        }
        let one = place_relays(1, 2.0, 0.7);
        assert_eq!(one, vec![Point2D::polar(2.0, 0.7)]);
    }

    #[test]
    fn nnnf_picks_nearest() {
        let near: Vec<Point2D> = [(1.0, 0.0), (0.5, 0.2), (1.8, -1.0)]
            .iter()
            .map(|&(x, y)| Point2D::from_cartesian(x, y))
            .collect();
        let far = vec![Point2D::polar(9.0, 1.0)];
        let (n, f) = select_users(&near, &far, Strategy::Nnnf, &mut rng(0)).unwrap();
        assert_relative_eq!(n.x(), 0.5, epsilon = 1e-12);
        assert_relative_eq!(n.y(), 0.2, epsilon = 1e-12);
        assert_eq!(f, far[0]);
    }

    #[test]
    fn single_user_sets_coincide() {
        let near = vec![Point2D::polar(1.2, 0.3)];
        let far = vec![Point2D::polar(9.1, -2.0)];
        let a = select_users(&near, &far, Strategy::Rnrf, &mut rng(5)).unwrap();
        let b = select_users(&near, &far, Strategy::Nnnf, &mut rng(5)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn empty_sets_are_reported() {
        let some = vec![Point2D::polar(1.0, 0.0)];
        let err = select_users(&[], &some, Strategy::Nnnf, &mut rng(0)).unwrap_err();
        assert_eq!(err, Error::EmptyRegion { region: "near" });
        let err = select_users(&some, &[], Strategy::Rnrf, &mut rng(0)).unwrap_err();
        assert_eq!(err, Error::EmptyRegion { region: "far" });
    }

    #[test]
    fn rnrf_selection_is_uniform() {
        let near: Vec<Point2D> = (0..3).map(|i| Point2D::polar(0.5 + i as f64 * 0.5, 0.0)).collect();
        let far = vec![Point2D::polar(9.0, 0.0)];
        let mut r = rng(7);
        let n = 100_000;
        let mut counts = [0usize; 3];
        for _ in 0..n {
            let (p, _) = select_users(&near, &far, Strategy::Rnrf, &mut r).unwrap();
            let idx = near.iter().position(|q| *q == p).unwrap();
            counts[idx] += 1;
        }
        // multinomial: var = n p (1-p) with p = 1/3
        let sd = (n as f64 * (1.0 / 3.0) * (2.0 / 3.0)).sqrt();
        for c in counts {
            assert!((c as f64 - n as f64 / 3.0).abs() < 3.0 * sd, "counts {counts:?}");
        }
    }

    #[test]
    fn relay_selection() {
        let relays = place_relays(3, 2.0, 0.0);
        assert_eq!(select_relay(&relays, &Point2D::polar(9.0, 0.0)), 0);
        let one = place_relays(1, 2.0, 1.0);
        assert_eq!(select_relay(&one, &Point2D::polar(9.0, -2.5)), 0);
    }

    #[test]
    fn relay_selection_matches_brute_force() {
        let mut r = rng(11);
        for k in 1..=6 {
            let relays = place_relays(k, 2.0, 0.3);
            for _ in 0..10_000 / 6 {
                let far = Point2D::polar(r.random_range(8.0..10.0), uniform_angle(&mut r));
                let got = select_relay(&relays, &far);
                let dists: Vec<f64> = relays
                    .iter()
                    .map(|q| ((q.x() - far.x()).powi(2) + (q.y() - far.y()).powi(2)).sqrt())
                    .collect();
                let best = dists.iter().cloned().fold(f64::INFINITY, f64::min);
                assert!(dists[got] <= best + 1e-12);
            }
        }
    }

    #[test]
    fn relay_user_distance_cases() {
        assert_relative_eq!(relay_user_distance(2.0, 2.0, 0.4, 0.4), 0.0, epsilon = 1e-7);
        assert_relative_eq!(relay_user_distance(2.0, 1.0, PI, 0.0), 3.0, epsilon = 1e-12);
        assert_relative_eq!(relay_user_distance(2.0, 1.0, PI / 2.0, 0.0), 5f64.sqrt(), epsilon = 1e-12);
        for (d, th) in [(0.3, 0.1), (1.7, -2.0), (2.5, 3.0)] {
            assert_relative_eq!(relay_user_distance(2.0, d, th, th), (2.0 - d).abs(), epsilon = 1e-7);
            assert_relative_eq!(
                relay_user_distance(2.0, d, th, 0.9),
                relay_user_distance(2.0, d, 0.9, th),
                epsilon = 1e-15
            );
        }
    }

    #[test]
    fn topology_law_of_cosines_and_relay_choice() {
        let params = SystemParams::default();
        let mut r = rng(13);
        for strategy in [Strategy::Rnrf, Strategy::Nnnf] {
            for _ in 0..200 {
                let t = match Topology::sample(&params, strategy, &mut r) {
                    Ok(t) => t,
                    Err(_) => continue,
                };
                let dx = t.selected_relay.x() - t.selected_near.x();
                let dy = t.selected_relay.y() - t.selected_near.y();
                assert_relative_eq!(t.d_relay_near, dx.hypot(dy), epsilon = 1e-9);
                let best = t
                    .relays
                    .iter()
                    .map(|q| q.distance(&t.selected_far))
                    .fold(f64::INFINITY, f64::min);
                assert_relative_eq!(t.d_relay_far, best, epsilon = 1e-12);
                assert_eq!(t.d_bs_near, t.selected_near.r);
                assert_eq!(t.d_bs_far, t.selected_far.r);
            }
        }
    }
}
