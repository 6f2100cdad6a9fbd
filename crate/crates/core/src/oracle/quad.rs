//! Adaptive Gauss-Kronrod (7/15) quadrature used as an independent check on
//! the closed-form pointer moments.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

/// Quadrature settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureConfig {
    /// Domain padding in pointer widths beyond the extreme eigenvalues.
    pub pad: f64,
    pub abs_tol: f64,
    /// Relative tolerance; the target is `max(abs_tol, rel_tol * |I|)`.
    pub rel_tol: f64,
    pub max_subdivisions: usize,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self {
            pad: 10.0,
            abs_tol: 1e-10,
            rel_tol: 1e-12,
            max_subdivisions: 1 << 16,
        }
    }
}

impl QuadratureConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.pad >= 4.0) {
            return Err(Error::InvalidArgument(format!("quadrature pad {} < 4", self.pad)));
        }
        if !(self.abs_tol > 0.0) || !(self.rel_tol >= 0.0) || self.max_subdivisions == 0 {
            return Err(Error::InvalidArgument("quadrature tolerances must be positive".into()));
        }
        Ok(())
    }
}

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn kronrod(f: &impl Fn(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut k = fc * WGK[7];
    let mut g = fc * WG[3];
    for j in 0..7 {
        let dx = half * XGK[j];
        let s = f(center - dx) + f(center + dx);
        k += WGK[j] * s;
        if j % 2 == 1 {
            g += WG[j / 2] * s;
        }
    }
    (k * half, ((k - g) * half).abs())
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
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

/// Integrates `f` over `[breaks[0], breaks.last()]`, starting from the given
/// partition and bisecting the worst segment until the error target is met.
pub fn integrate(f: impl Fn(f64) -> f64, breaks: &[f64], cfg: &QuadratureConfig) -> Result<f64> {
    if breaks.len() < 2 {
        return Err(Error::InvalidArgument("quadrature needs at least two breakpoints".into()));
    }
    let mut heap = BinaryHeap::new();
    let (mut total, mut total_err) = (0.0, 0.0);
    for w in breaks.windows(2) {
        if !(w[1] > w[0]) {
            continue;
        }
        let (value, error) = kronrod(&f, w[0], w[1]);
        total += value;
        total_err += error;
        heap.push(Segment {
            a: w[0],
            b: w[1],
            value,
            error,
        });
    }
    let mut count = heap.len();
    loop {
        if !total.is_finite() {
            return Err(Error::QuadratureFailure {
                estimate: total,
                error: total_err,
            });
        }
        if total_err <= cfg.abs_tol.max(cfg.rel_tol * total.abs()) {
            return Ok(total);
        }
        if count >= cfg.max_subdivisions {
            return Err(Error::QuadratureFailure {
                estimate: total,
                error: total_err,
            });
        }
        let worst = heap.pop().expect("nonempty partition");
        let mid = 0.5 * (worst.a + worst.b);
        if !(mid > worst.a && mid < worst.b) {
            // Segment can no longer be split in floating point.
            return Err(Error::QuadratureFailure {
                estimate: total,
                error: total_err,
            });
        }
        let (v1, e1) = kronrod(&f, worst.a, mid);
        let (v2, e2) = kronrod(&f, mid, worst.b);
        total += v1 + v2 - worst.value;
        total_err += e1 + e2 - worst.error;
        heap.push(Segment {
            a: worst.a,
            b: mid,
            value: v1,
            error: e1,
        });
        heap.push(Segment {
            a: mid,
            b: worst.b,
            value: v2,
            error: e2,
        });
        count += 1;
        // Refresh the running sums periodically to shed accumulated roundoff.
        if count % 256 == 0 {
            total = heap.iter().map(|s| s.value).sum();
            total_err = heap.iter().map(|s| s.error).sum();
        }
    }
}

/// `int x^n f(x) dx` over the partition `breaks`.
pub fn quad_moment(
    f: impl Fn(f64) -> f64,
    breaks: &[f64],
    n: u32,
    cfg: &QuadratureConfig,
) -> Result<f64> {
    if n > 2 {
        return Err(Error::InvalidOrder { order: n });
    }
    integrate(|x| x.powi(n as i32) * f(x), breaks, cfg)
}

/// Breakpoints covering `[min c - pad sigma, max c + pad sigma]` with a knot
/// every pointer width around each center, so narrow peaks are never missed.
pub fn pointer_breaks(centers: &[f64], sigma: f64, pad: f64) -> Vec<f64> {
    let steps = pad.ceil() as i64;
    let mut pts: Vec<f64> = centers
        .iter()
        .flat_map(|&c| (-steps..=steps).map(move |k| c + k as f64 * sigma))
        .collect();
    let lo = centers.iter().copied().fold(f64::INFINITY, f64::min) - pad * sigma;
    let hi = centers.iter().copied().fold(f64::NEG_INFINITY, f64::max) + pad * sigma;
    pts.push(lo);
    pts.push(hi);
    pts.retain(|&x| x >= lo && x <= hi);
    pts.sort_by(f64::total_cmp);
    pts.dedup_by(|a, b| (*a - *b).abs() <= 1e-14 * (1.0 + b.abs()));
    pts
}
