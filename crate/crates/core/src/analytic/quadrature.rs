//! Gauss–Chebyshev nodes and a globally adaptive Gauss–Kronrod integrator.

use std::collections::BinaryHeap;

use crate::error::{Error, Result};

/// Chebyshev–Gauss nodes φ_m = cos((2m−1)π/(2M)), m = 1..M.
#[derive(Clone, Debug, PartialEq)]
pub struct QuadratureGrid {
    pub m: usize,
    /// Strictly decreasing nodes in (−1, 1).
    pub nodes: Vec<f64>,
    /// √(1 − φ_m²) per node.
    pub sqrt_weights: Vec<f64>,
}

/// Default node count of the Chebyshev-based formulas.
pub const DEFAULT_M: usize = 100;

/// # Panics
/// If `m` is zero.
pub fn chebyshev_grid(m: usize) -> QuadratureGrid {
    assert!(m >= 1, "chebyshev_grid needs m >= 1");
    let nodes: Vec<f64> = (1..=m)
        .map(|k| ((2 * k - 1) as f64 * std::f64::consts::PI / (2 * m) as f64).cos())
        .collect();
    // sin of the same angle is exact where 1 − φ² would cancel.
    let sqrt_weights = (1..=m)
        .map(|k| ((2 * k - 1) as f64 * std::f64::consts::PI / (2 * m) as f64).sin())
        .collect();
    QuadratureGrid {
        m,
        nodes,
        sqrt_weights,
    }
}

impl QuadratureGrid {
    /// ∫₋₁¹ f(φ) dφ ≈ (π/M) Σ √(1−φ_m²) f(φ_m).
    pub fn integrate<F: FnMut(f64) -> f64>(&self, mut f: F) -> f64 {
        let sum: f64 = self
            .nodes
            .iter()
            .zip(&self.sqrt_weights)
            .map(|(&x, &w)| w * f(x))
            .sum();
        std::f64::consts::PI / self.m as f64 * sum
    }

    /// ∫₋₁¹ g(φ)/√(1−φ²) dφ ≈ (π/M) Σ g(φ_m).
    pub fn integrate_weighted<F: FnMut(f64) -> f64>(&self, mut g: F) -> f64 {
        let sum: f64 = self.nodes.iter().map(|&x| g(x)).sum();
        std::f64::consts::PI / self.m as f64 * sum
    }
}

const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

/// 15-point Kronrod estimate and |K15 − G7| on [a, b].
fn gk15<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = WGK[7] * fc;
    let mut g = WG[3] * fc;
    for j in 0..7 {
        let dx = h * XGK[j];
        let s = f(c - dx) + f(c + dx);
        k += WGK[j] * s;
        if j % 2 == 1 {
            g += WG[j / 2] * s;
        }
    }
    (k * h, ((k - g) * h).abs())
}

struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.error.total_cmp(&other.error)
    }
}

/// Result of an adaptive integration.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Integral {
    pub value: f64,
    pub error: f64,
    pub evaluations: usize,
    pub segments: usize,
}

/// Globally adaptive G7/K15 integration of `f` over `[a, b]`, split first at
/// `breaks` (points outside the interval are ignored). Stops when the summed
/// error estimate is below `abs_tol` or fails after `max_segments`.
pub fn integrate_adaptive<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    b: f64,
    breaks: &[f64],
    abs_tol: f64,
    max_segments: usize,
) -> Result<Integral> {
    let mut cuts = vec![a];
    let mut inner: Vec<f64> = breaks.iter().copied().filter(|&x| x > a && x < b).collect();
    inner.sort_by(f64::total_cmp);
    cuts.extend(inner);
    cuts.push(b);
    cuts.dedup();

    let mut heap = BinaryHeap::new();
    let mut evaluations = 0;
    let (mut total, mut total_err) = (0.0, 0.0);
    for w in cuts.windows(2) {
        let (value, error) = gk15(&mut f, w[0], w[1]);
        evaluations += 15;
        total += value;
        total_err += error;
        heap.push(Segment { a: w[0], b: w[1], value, error });
    }
    while total_err > abs_tol {
        if heap.len() >= max_segments {
            return Err(Error::Quadrature {
                estimate: total,
                error: total_err,
                tolerance: abs_tol,
            });
        }
        let worst = heap.pop().expect("heap is never empty");
        let mid = 0.5 * (worst.a + worst.b);
        let (lv, le) = gk15(&mut f, worst.a, mid);
        let (rv, re) = gk15(&mut f, mid, worst.b);
        evaluations += 30;
        total += lv + rv - worst.value;
        total_err += le + re - worst.error;
        heap.push(Segment { a: worst.a, b: mid, value: lv, error: le });
        heap.push(Segment { a: mid, b: worst.b, value: rv, error: re });
    }
    // re-sum to shed the drift of the running updates
    let value = heap.iter().map(|s| s.value).sum();
    let error = heap.iter().map(|s| s.error).sum();
    Ok(Integral {
        value,
        error,
        evaluations,
        segments: heap.len(),
    })
}
