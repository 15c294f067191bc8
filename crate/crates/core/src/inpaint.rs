//! Harmonic hole filling.
//!
//! Every hole pixel is driven to the mean of its in-bounds 4-neighbors by
//! red-black successive over-relaxation. Red pixels only read black ones and
//! vice versa, so each half-sweep is order independent. Values stay in `f64`
//! until the solve stops and are rounded once.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::imagecore::{check_same, dilate, ImageBuffer, Mask};

/// Iterations between residual evaluations.
const RESIDUAL_CHECK_INTERVAL: u32 = 4;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InpaintConfig {
    /// Disc radius the subject mask grows by before filling.
    pub pre_dilation: u32,
    /// Stop once the largest per-channel Laplace residual is at most this.
    pub tolerance: f64,
    pub max_iterations: u32,
}

impl Default for InpaintConfig {
    fn default() -> Self {
        Self {
            pre_dilation: 3,
            tolerance: 0.1,
            max_iterations: 10_000,
        }
    }
}

impl InpaintConfig {
    pub fn problems(&self) -> Vec<String> {
        let mut out = Vec::new();
        if !(self.tolerance.is_finite() && self.tolerance > 0.0) {
            out.push(format!("inpaint.tolerance must be > 0, got {}", self.tolerance));
        }
        if self.max_iterations == 0 {
            out.push("inpaint.max_iterations must be at least 1".to_owned());
        }
        out
    }

    fn validate(&self) -> Result<()> {
        match self.problems().into_iter().next() {
            Some(p) => Err(Error::InvalidParameter(p)),
            None => Ok(()),
        }
    }
}

/// How the solve ended.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct InpaintReport {
    /// Largest `|mean(neighbors) - value|` over hole pixels and channels,
    /// before rounding.
    pub residual: f64,
    pub iterations: u32,
    /// `false` when the iteration budget ran out above tolerance.
    pub converged: bool,
}

#[derive(Debug, Clone)]
pub struct Inpainted {
    pub image: ImageBuffer,
    pub report: InpaintReport,
}

/// A hole pixel's neighbor: another unknown or a fixed sample.
#[derive(Clone, Copy)]
enum Neighbor {
    Unknown(usize),
    Known([f64; 4]),
}

struct System {
    /// Pixel index of every unknown.
    pixels: Vec<usize>,
    neighbors: Vec<Vec<Neighbor>>,
    red: Vec<usize>,
    black: Vec<usize>,
    lo: [f64; 4],
    hi: [f64; 4],
    span: usize,
}

impl System {
    fn build(image: &ImageBuffer, hole: &Mask) -> Self {
        let (w, h) = image.dimensions();
        let (wu, hu) = (w as usize, h as usize);
        let bits = hole.bits();
        let mut index = vec![usize::MAX; bits.len()];
        let mut pixels = Vec::new();
        for (i, _) in bits.iter().enumerate().filter(|(_, &b)| b) {
            index[i] = pixels.len();
            pixels.push(i);
        }

        let sample = |i: usize| {
            let px = image.get((i % wu) as u32, (i / wu) as u32);
            px.map(f64::from)
        };
        let mut lo = [f64::INFINITY; 4];
        let mut hi = [f64::NEG_INFINITY; 4];
        let (mut x0, mut y0, mut x1, mut y1) = (usize::MAX, usize::MAX, 0, 0);
        let mut neighbors = Vec::with_capacity(pixels.len());
        let (mut red, mut black) = (Vec::new(), Vec::new());
        for (u, &i) in pixels.iter().enumerate() {
            let (x, y) = (i % wu, i / wu);
            (x0, y0, x1, y1) = (x0.min(x), y0.min(y), x1.max(x), y1.max(y));
            if (x + y) % 2 == 0 {
                red.push(u);
            } else {
                black.push(u);
            }
            let mut list = Vec::with_capacity(4);
            let candidates = [
                (x > 0).then(|| i - 1),
                (x + 1 < wu).then(|| i + 1),
                (y > 0).then(|| i - wu),
                (y + 1 < hu).then(|| i + wu),
            ];
            for j in candidates.into_iter().flatten() {
                if bits[j] {
                    list.push(Neighbor::Unknown(index[j]));
                } else {
                    let v = sample(j);
                    for c in 0..4 {
                        lo[c] = lo[c].min(v[c]);
                        hi[c] = hi[c].max(v[c]);
                    }
                    list.push(Neighbor::Known(v));
                }
            }
            neighbors.push(list);
        }
        let span = (x1 - x0).max(y1 - y0) + 1;
        Self {
            pixels,
            neighbors,
            red,
            black,
            lo,
            hi,
            span,
        }
    }

    #[inline]
    fn neighbor_mean(&self, u: usize, values: &[[f64; 4]]) -> [f64; 4] {
        let list = &self.neighbors[u];
        let mut sum = [0.0; 4];
        for n in list {
            let v = match *n {
                Neighbor::Unknown(j) => values[j],
                Neighbor::Known(v) => v,
            };
            for c in 0..4 {
                sum[c] += v[c];
            }
        }
        let k = list.len() as f64;
        sum.map(|s| s / k)
    }

    fn sweep(&self, set: &[usize], values: &mut [[f64; 4]], omega: f64) {
        for &u in set {
            let mean = self.neighbor_mean(u, values);
            let v = &mut values[u];
            for c in 0..4 {
                v[c] += omega * (mean[c] - v[c]);
            }
        }
    }

    fn residual(&self, values: &[[f64; 4]]) -> f64 {
        (0..values.len())
            .map(|u| {
                let mean = self.neighbor_mean(u, values);
                (0..4)
                    .map(|c| (mean[c] - values[u][c]).abs())
                    .fold(0.0, f64::max)
            })
            .fold(0.0, f64::max)
    }
}

/// Fills `hole` so each filled pixel is the mean of its in-bounds
/// 4-neighbors, per channel, to within `config.tolerance`.
///
/// Pixels outside `hole` are returned untouched. Filled values are clamped
/// to the per-channel range of the hole's boundary samples, where the exact
/// harmonic solution already lies.
pub fn inpaint_diffusion(image: &ImageBuffer, hole: &Mask, config: &InpaintConfig) -> Result<Inpainted> {
    check_same(image.dimensions(), hole.dimensions())?;
    config.validate()?;
    if hole.is_empty() {
        return Ok(Inpainted {
            image: image.clone(),
            report: InpaintReport {
                residual: 0.0,
                iterations: 0,
                converged: true,
            },
        });
    }
    if hole.is_full() {
        return Err(Error::NoBoundaryData);
    }

    let system = System::build(image, hole);
    let (lo, hi) = (system.lo, system.hi);
    let start: [f64; 4] = std::array::from_fn(|c| 0.5 * (lo[c] + hi[c]));
    let mut values = vec![start; system.pixels.len()];
    let omega = 2.0 / (1.0 + (std::f64::consts::PI / (system.span as f64 + 1.0)).sin());

    let mut iterations = 0;
    let mut residual = system.residual(&values);
    while residual > config.tolerance && iterations < config.max_iterations {
        system.sweep(&system.red, &mut values, omega);
        system.sweep(&system.black, &mut values, omega);
        iterations += 1;
        if iterations % RESIDUAL_CHECK_INTERVAL == 0 || iterations == config.max_iterations {
            residual = system.residual(&values);
        }
    }

    let mut out = image.clone();
    let w = image.width() as usize;
    for (u, &i) in system.pixels.iter().enumerate() {
        let px: [u8; 4] = std::array::from_fn(|c| values[u][c].clamp(lo[c], hi[c]).round() as u8);
        out.put((i % w) as u32, (i / w) as u32, px);
    }
    Ok(Inpainted {
        image: out,
        report: InpaintReport {
            residual,
            iterations,
            converged: residual <= config.tolerance,
        },
    })
}

/// Grows the subject mask by `config.pre_dilation`, then fills it.
pub fn make_background(image: &ImageBuffer, subject: &Mask, config: &InpaintConfig) -> Result<Inpainted> {
    check_same(image.dimensions(), subject.dimensions())?;
    let hole = dilate(subject, config.pre_dilation);
    inpaint_diffusion(image, &hole, config)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn strip(values: &[u8]) -> ImageBuffer {
        ImageBuffer::from_fn(values.len() as u32, 1, |x, _| {
            let v = values[x as usize];
            [v, v, v, 255]
        })
        .unwrap()
    }

    #[test]
    fn empty_hole_is_a_no_op() {
        let img = ImageBuffer::from_fn(5, 5, |x, y| [x as u8 * 9, y as u8 * 7, 3, 255]).unwrap();
        let out = inpaint_diffusion(&img, &Mask::new(5, 5).unwrap(), &InpaintConfig::default()).unwrap();
        assert_eq!(out.image, img);
        assert_eq!(out.report.iterations, 0);
    }

    #[test]
    fn constant_image_stays_constant() {
        let img = ImageBuffer::filled(9, 7, [12, 34, 56, 255]).unwrap();
        let hole = Mask::from_fn(9, 7, |x, y| (2..7).contains(&x) && y >= 1).unwrap();
        let out = inpaint_diffusion(&img, &hole, &InpaintConfig::default()).unwrap();
        assert_eq!(out.image, img);
    }

    #[test]
    fn strip_midpoint() {
        let img = strip(&[100, 0, 200]);
        let hole = Mask::from_bits(3, 1, vec![false, true, false]).unwrap();
        let out = inpaint_diffusion(&img, &hole, &InpaintConfig::default()).unwrap();
        assert_eq!(out.image.get(1, 0), [150, 150, 150, 255]);
        assert!(out.report.converged);
    }

    #[test]
    fn border_hole_uses_one_sided_average() {
        // Unknowns a (x=0) and b (x=1), known 90 at x=2:
        // a = b, b = (a + 90) / 2  →  a = b = 90.
        let img = strip(&[0, 0, 90]);
        let hole = Mask::from_bits(3, 1, vec![true, true, false]).unwrap();
        let out = make_background(&img, &hole, &InpaintConfig { pre_dilation: 0, ..Default::default() }).unwrap();
        assert_eq!(out.image.get(0, 0)[0], 90);
        assert_eq!(out.image.get(1, 0)[0], 90);
    }

    #[test]
    fn full_hole_has_no_boundary() {
        let img = strip(&[1, 2, 3]);
        let hole = Mask::from_bits(3, 1, vec![true; 3]).unwrap();
        assert!(matches!(
            inpaint_diffusion(&img, &hole, &InpaintConfig::default()),
            Err(Error::NoBoundaryData)
        ));
        let subject = Mask::from_bits(3, 1, vec![false, true, false]).unwrap();
        assert!(matches!(
            make_background(&img, &subject, &InpaintConfig::default()),
            Err(Error::NoBoundaryData)
        ));
    }

    #[test]
    fn dimension_mismatch() {
        let img = strip(&[1, 2, 3]);
        let hole = Mask::new(2, 1).unwrap();
        assert!(matches!(
            inpaint_diffusion(&img, &hole, &InpaintConfig::default()),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn zero_dilation_matches_raw_fill() {
        let img = ImageBuffer::from_fn(12, 10, |x, y| [(x * 20) as u8, (y * 25) as u8, 40, 255]).unwrap();
        let subject = Mask::from_fn(12, 10, |x, y| (3..8).contains(&x) && (2..6).contains(&y)).unwrap();
        let cfg = InpaintConfig { pre_dilation: 0, ..Default::default() };
        let a = make_background(&img, &subject, &cfg).unwrap();
        let b = inpaint_diffusion(&img, &subject, &cfg).unwrap();
        assert_eq!(a.image, b.image);
    }

    #[test]
    fn budget_exhaustion_is_reported() {
        let img = ImageBuffer::from_fn(30, 30, |x, _| if x < 15 { [0, 0, 0, 255] } else { [255, 255, 255, 255] })
            .unwrap();
        let hole = Mask::from_fn(30, 30, |x, y| (3..27).contains(&x) && (3..27).contains(&y)).unwrap();
        let cfg = InpaintConfig { max_iterations: 1, tolerance: 1e-6, ..Default::default() };
        let out = inpaint_diffusion(&img, &hole, &cfg).unwrap();
        assert_eq!(out.report.iterations, 1);
        assert!(!out.report.converged);
        assert!(out.report.residual > 1e-6);
    }

    #[test]
    fn invalid_config() {
        let img = strip(&[1, 2, 3]);
        let hole = Mask::from_bits(3, 1, vec![false, true, false]).unwrap();
        let cfg = InpaintConfig { tolerance: 0.0, ..Default::default() };
        assert!(inpaint_diffusion(&img, &hole, &cfg).is_err());
    }
}
