//! Exact Euclidean distance transform.
//!
//! Separable lower-envelope-of-parabolas algorithm: one pass down the
//! columns, one along the rows, both on squared distances. Squared
//! distances between pixel centers are integers, so the result is exact
//! in `f64` for any image that fits in memory.

use crate::error::Result;
use crate::imagecore::clicks::{check_point, Point};
use crate::imagecore::{check_dims, ScalarField};

/// Distance from every pixel to the nearest click.
///
/// With no clicks every value is the sentinel `width + height`, which is
/// larger than any distance achievable inside the image.
pub fn distance_transform(clicks: &[Point], width: u32, height: u32) -> Result<ScalarField> {
    check_dims(width, height)?;
    for &p in clicks {
        check_point(p, width, height)?;
    }
    if clicks.is_empty() {
        return ScalarField::filled(width, height, empty_sentinel(width, height));
    }
    let mut seeds = vec![false; width as usize * height as usize];
    for &(x, y) in clicks {
        seeds[y as usize * width as usize + x as usize] = true;
    }
    let sq = squared_edt(&seeds, width as usize, height as usize);
    Ok(ScalarField::from_values(
        width,
        height,
        sq.into_iter().map(f64::sqrt).collect(),
    ))
}

/// Value used for every pixel when there is nothing to measure against.
pub fn empty_sentinel(width: u32, height: u32) -> f64 {
    f64::from(width) + f64::from(height)
}

/// Squared distance to the nearest `true` cell; `f64::INFINITY` when there is none.
pub(crate) fn squared_edt(seeds: &[bool], width: usize, height: usize) -> Vec<f64> {
    debug_assert_eq!(seeds.len(), width * height);
    let mut grid: Vec<f64> = seeds
        .iter()
        .map(|&s| if s { 0.0 } else { f64::INFINITY })
        .collect();

    let n = width.max(height);
    let mut f = vec![0.0; n];
    let mut d = vec![0.0; n];
    let mut v = vec![0usize; n];
    let mut z = vec![0.0; n + 1];

    for x in 0..width {
        for y in 0..height {
            f[y] = grid[y * width + x];
        }
        transform_1d(&f[..height], &mut d[..height], &mut v, &mut z);
        for y in 0..height {
            grid[y * width + x] = d[y];
        }
    }
    for y in 0..height {
        let row = &mut grid[y * width..(y + 1) * width];
        f[..width].copy_from_slice(row);
        transform_1d(&f[..width], &mut d[..width], &mut v, &mut z);
        row.copy_from_slice(&d[..width]);
    }
    grid
}

/// 1-D squared distance transform of the sampled function `f` into `d`.
fn transform_1d(f: &[f64], d: &mut [f64], v: &mut [usize], z: &mut [f64]) {
    // Parabolas rooted at infinite samples never contribute.
    let mut finite = f.iter().enumerate().filter(|(_, x)| x.is_finite()).map(|(q, _)| q);
    let Some(first) = finite.next() else {
        d.fill(f64::INFINITY);
        return;
    };
    let mut k = 0usize;
    v[0] = first;
    z[0] = f64::NEG_INFINITY;
    z[1] = f64::INFINITY;
    for q in finite {
        let qf = q as f64;
        // z[0] is -inf, so the intersection always lands above it eventually.
        let s = loop {
            let p = v[k];
            let pf = p as f64;
            let s = ((f[q] + qf * qf) - (f[p] + pf * pf)) / (2.0 * qf - 2.0 * pf);
            if s <= z[k] {
                k -= 1;
            } else {
                break s;
            }
        };
        k += 1;
        v[k] = q;
        z[k] = s;
        z[k + 1] = f64::INFINITY;
    }
    let mut k = 0usize;
    for (q, out) in d.iter_mut().enumerate() {
        let qf = q as f64;
        while z[k + 1] < qf {
            k += 1;
        }
        let p = v[k];
        let dq = qf - p as f64;
        *out = dq * dq + f[p];
    }
}
