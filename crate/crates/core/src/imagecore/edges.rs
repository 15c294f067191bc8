//! Sobel gradient magnitude and Canny edge detection on luma.

use std::collections::VecDeque;

use crate::error::{Error, Result};
use crate::imagecore::{ImageBuffer, Mask, ScalarField};

/// Standard deviation of the Gaussian pre-smoothing in [`canny_edges`].
pub const CANNY_SIGMA: f64 = 1.4;
const CANNY_RADIUS: usize = 2;

/// Replicate-border accessor over a row-major real grid.
struct Grid<'a> {
    w: usize,
    h: usize,
    v: &'a [f64],
}

impl Grid<'_> {
    #[inline]
    fn at(&self, x: isize, y: isize) -> f64 {
        let x = x.clamp(0, self.w as isize - 1) as usize;
        let y = y.clamp(0, self.h as isize - 1) as usize;
        self.v[y * self.w + x]
    }

    /// Sobel responses `(gx, gy)` at `(x, y)`.
    #[inline]
    fn sobel(&self, x: isize, y: isize) -> (f64, f64) {
        let gx = (self.at(x + 1, y - 1) + 2.0 * self.at(x + 1, y) + self.at(x + 1, y + 1))
            - (self.at(x - 1, y - 1) + 2.0 * self.at(x - 1, y) + self.at(x - 1, y + 1));
        let gy = (self.at(x - 1, y + 1) + 2.0 * self.at(x, y + 1) + self.at(x + 1, y + 1))
            - (self.at(x - 1, y - 1) + 2.0 * self.at(x, y - 1) + self.at(x + 1, y - 1));
        (gx, gy)
    }
}

fn luma_plane(image: &ImageBuffer) -> Vec<f64> {
    let (w, h) = image.dimensions();
    (0..h)
        .flat_map(|y| (0..w).map(move |x| (x, y)))
        .map(|(x, y)| image.luma(x, y))
        .collect()
}

fn require_kernel_fit(image: &ImageBuffer, min: u32) -> Result<()> {
    let (width, height) = image.dimensions();
    if width < min || height < min {
        Err(Error::ImageTooSmall { width, height, min })
    } else {
        Ok(())
    }
}

/// Gradient magnitude `sqrt(gx² + gy²)` of the luma channel, 3×3 Sobel
/// kernels with replicated borders.
pub fn sobel_gradient(image: &ImageBuffer) -> Result<ScalarField> {
    require_kernel_fit(image, 3)?;
    let (w, h) = image.dimensions();
    let luma = luma_plane(image);
    let grid = Grid {
        w: w as usize,
        h: h as usize,
        v: &luma,
    };
    let mut out = Vec::with_capacity(luma.len());
    for y in 0..h as isize {
        for x in 0..w as isize {
            let (gx, gy) = grid.sobel(x, y);
            out.push((gx * gx + gy * gy).sqrt());
        }
    }
    Ok(ScalarField::from_values(w, h, out))
}

fn gaussian_kernel(sigma: f64, radius: usize) -> Vec<f64> {
    let k: Vec<f64> = (0..=2 * radius)
        .map(|i| {
            let d = i as f64 - radius as f64;
            (-(d * d) / (2.0 * sigma * sigma)).exp()
        })
        .collect();
    let sum: f64 = k.iter().sum();
    k.into_iter().map(|v| v / sum).collect()
}

fn blur(plane: &[f64], w: usize, h: usize) -> Vec<f64> {
    let kernel = gaussian_kernel(CANNY_SIGMA, CANNY_RADIUS);
    let r = CANNY_RADIUS as isize;
    let grid = Grid { w, h, v: plane };
    let mut tmp = vec![0.0; plane.len()];
    for y in 0..h as isize {
        for x in 0..w as isize {
            tmp[y as usize * w + x as usize] = kernel
                .iter()
                .enumerate()
                .map(|(i, k)| k * grid.at(x + i as isize - r, y))
                .sum();
        }
    }
    let grid = Grid { w, h, v: &tmp };
    let mut out = vec![0.0; plane.len()];
    for y in 0..h as isize {
        for x in 0..w as isize {
            out[y as usize * w + x as usize] = kernel
                .iter()
                .enumerate()
                .map(|(i, k)| k * grid.at(x, y + i as isize - r))
                .sum();
        }
    }
    out
}

/// Canny edge map: Gaussian smoothing, Sobel gradient, non-maximum
/// suppression and double-threshold hysteresis.
///
/// Thresholds apply to the Sobel magnitude of the smoothed luma. Along the
/// gradient direction a pixel must strictly beat the neighbor behind it and
/// at least tie the one ahead, so plateaus two pixels wide thin to one.
pub fn canny_edges(image: &ImageBuffer, low: f64, high: f64) -> Result<Mask> {
    if !(low >= 0.0 && low <= high) {
        return Err(Error::InvalidParameter(format!(
            "canny thresholds need 0 <= low <= high, got low={low}, high={high}"
        )));
    }
    require_kernel_fit(image, 3)?;
    let (w, h) = image.dimensions();
    let (wu, hu) = (w as usize, h as usize);
    let smoothed = blur(&luma_plane(image), wu, hu);
    let grid = Grid {
        w: wu,
        h: hu,
        v: &smoothed,
    };

    let mut mag = vec![0.0; wu * hu];
    let mut dir = vec![0u8; wu * hu];
    for y in 0..hu {
        for x in 0..wu {
            let (gx, gy) = grid.sobel(x as isize, y as isize);
            mag[y * wu + x] = (gx * gx + gy * gy).sqrt();
            dir[y * wu + x] = quantize_direction(gx, gy);
        }
    }

    let mags = Grid { w: wu, h: hu, v: &mag };
    let mut thin = vec![0.0; wu * hu];
    for y in 0..hu as isize {
        for x in 0..wu as isize {
            let i = y as usize * wu + x as usize;
            let m = mag[i];
            if m == 0.0 {
                continue;
            }
            let (dx, dy) = match dir[i] {
                0 => (1, 0),
                1 => (1, 1),
                2 => (0, 1),
                _ => (-1, 1),
            };
            let behind = mags.at(x - dx, y - dy);
            let ahead = mags.at(x + dx, y + dy);
            if m > behind && m >= ahead {
                thin[i] = m;
            }
        }
    }

    let mut edges = vec![false; wu * hu];
    let mut queue = VecDeque::new();
    for (i, &m) in thin.iter().enumerate() {
        if m >= high && m > 0.0 {
            edges[i] = true;
            queue.push_back(i);
        }
    }
    while let Some(i) = queue.pop_front() {
        let (x, y) = ((i % wu) as isize, (i / wu) as isize);
        for dy in -1..=1 {
            for dx in -1..=1 {
                let (nx, ny) = (x + dx, y + dy);
                if nx < 0 || ny < 0 || nx >= wu as isize || ny >= hu as isize {
                    continue;
                }
                let j = ny as usize * wu + nx as usize;
                if !edges[j] && thin[j] >= low && thin[j] > 0.0 {
                    edges[j] = true;
                    queue.push_back(j);
                }
            }
        }
    }
    Mask::from_bits(w, h, edges)
}

/// 0: horizontal gradient, 1: 45° (down-right), 2: vertical, 3: 135°.
fn quantize_direction(gx: f64, gy: f64) -> u8 {
    let mut angle = gy.atan2(gx).to_degrees();
    if angle < 0.0 {
        angle += 180.0;
    }
    match angle {
        a if !(22.5..157.5).contains(&a) => 0,
        a if a < 67.5 => 1,
        a if a < 112.5 => 2,
        _ => 3,
    }
}
