//! Fixtures and independent oracles shared by the integration tests.

#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use stillmotion::segmentation::{Feature, FeatureField};
use stillmotion::{ImageBuffer, Mask};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn noise_image(rng: &mut ChaCha8Rng, w: u32, h: u32) -> ImageBuffer {
    ImageBuffer::from_fn(w, h, |_, _| [rng.random(), rng.random(), rng.random(), 255]).unwrap()
}

/// Union of a few random discs and rectangles, never the whole grid.
pub fn random_hole(rng: &mut ChaCha8Rng, w: u32, h: u32) -> Mask {
    loop {
        let mut m = Mask::new(w, h).unwrap();
        for _ in 0..rng.random_range(1..4) {
            let cx = rng.random_range(0..w) as i64;
            let cy = rng.random_range(0..h) as i64;
            let r = rng.random_range(1..5) as i64;
            let disc = rng.random_bool(0.5);
            for y in 0..h as i64 {
                for x in 0..w as i64 {
                    let inside = if disc {
                        (x - cx).pow(2) + (y - cy).pow(2) <= r * r
                    } else {
                        (x - cx).abs() <= r && (y - cy).abs() <= r / 2 + 1
                    };
                    if inside {
                        m.set(x as u32, y as u32, true);
                    }
                }
            }
        }
        if !m.is_full() && !m.is_empty() {
            return m;
        }
    }
}

/// Direct dense solve of the discrete Laplace system on the hole, one
/// right-hand side per channel. Returns real-valued pixels in raster order
/// of the hole.
pub fn dense_laplace(image: &ImageBuffer, hole: &Mask) -> Vec<(u32, u32, [f64; 4])> {
    let (w, h) = image.dimensions();
    let unknowns: Vec<(u32, u32)> = (0..h)
        .flat_map(|y| (0..w).map(move |x| (x, y)))
        .filter(|&(x, y)| hole.get(x, y))
        .collect();
    let n = unknowns.len();
    let index = |x: u32, y: u32| unknowns.iter().position(|&p| p == (x, y));
    let mut a = DMatrix::<f64>::zeros(n, n);
    let mut b: Vec<DVector<f64>> = (0..4).map(|_| DVector::zeros(n)).collect();
    for (row, &(x, y)) in unknowns.iter().enumerate() {
        let mut nbrs = Vec::new();
        if x > 0 {
            nbrs.push((x - 1, y));
        }
        if x + 1 < w {
            nbrs.push((x + 1, y));
        }
        if y > 0 {
            nbrs.push((x, y - 1));
        }
        if y + 1 < h {
            nbrs.push((x, y + 1));
        }
        a[(row, row)] = nbrs.len() as f64;
        for (nx, ny) in nbrs {
            match index(nx, ny) {
                Some(col) => a[(row, col)] -= 1.0,
                None => {
                    let px = image.get(nx, ny);
                    for c in 0..4 {
                        b[c][row] += f64::from(px[c]);
                    }
                }
            }
        }
    }
    let lu = a.lu();
    let solved: Vec<DVector<f64>> = b.iter().map(|rhs| lu.solve(rhs).expect("nonsingular")).collect();
    unknowns
        .iter()
        .enumerate()
        .map(|(i, &(x, y))| (x, y, [solved[0][i], solved[1][i], solved[2][i], solved[3][i]]))
        .collect()
}

/// Per-channel [min, max] over non-hole pixels 4-adjacent to the hole.
pub fn boundary_range(image: &ImageBuffer, hole: &Mask) -> ([u8; 4], [u8; 4]) {
    let (w, h) = image.dimensions();
    let mut lo = [255u8; 4];
    let mut hi = [0u8; 4];
    for y in 0..h {
        for x in 0..w {
            if hole.get(x, y) {
                continue;
            }
            let touches = (x > 0 && hole.get(x - 1, y))
                || (x + 1 < w && hole.get(x + 1, y))
                || (y > 0 && hole.get(x, y - 1))
                || (y + 1 < h && hole.get(x, y + 1));
            if touches {
                let px = image.get(x, y);
                for c in 0..4 {
                    lo[c] = lo[c].min(px[c]);
                    hi[c] = hi[c].max(px[c]);
                }
            }
        }
    }
    (lo, hi)
}

/// Two or three flat-colored regions: a background, a rectangle and
/// optionally a disc. Returns the image and the region id of every pixel.
pub fn regions(seed: u64, w: u32, h: u32) -> (ImageBuffer, Vec<u8>) {
    let mut rng = rng(seed);
    let palette: [[u8; 4]; 3] = [[20, 40, 200, 255], [230, 50, 30, 255], [40, 210, 60, 255]];
    let rx0 = rng.random_range(2..w / 3);
    let ry0 = rng.random_range(2..h / 3);
    let rx1 = rng.random_range(w / 2..w - 2);
    let ry1 = rng.random_range(h / 2..h - 2);
    let three = rng.random_bool(0.5);
    let (cx, cy, r) = (rng.random_range(0..w) as i64, rng.random_range(0..h) as i64, rng.random_range(3..7) as i64);
    let mut ids = Vec::with_capacity((w * h) as usize);
    for y in 0..h {
        for x in 0..w {
            let mut id = 0;
            if (rx0..rx1).contains(&x) && (ry0..ry1).contains(&y) {
                id = 1;
            }
            if three && (x as i64 - cx).pow(2) + (y as i64 - cy).pow(2) <= r * r {
                id = 2;
            }
            ids.push(id);
        }
    }
    let img = ImageBuffer::from_fn(w, h, |x, y| palette[ids[(y * w + x) as usize] as usize]).unwrap();
    (img, ids)
}

pub fn pixels_of(ids: &[u8], w: u32, id: u8) -> Vec<(u32, u32)> {
    ids.iter()
        .enumerate()
        .filter(|(_, &v)| v == id)
        .map(|(i, _)| (i as u32 % w, i as u32 / w))
        .collect()
}

pub fn flood(img: &ImageBuffer, start: (u32, u32)) -> Mask {
    let (w, h) = img.dimensions();
    let color = img.get(start.0, start.1);
    let mut m = Mask::new(w, h).unwrap();
    let mut stack = vec![start];
    while let Some((x, y)) = stack.pop() {
        if m.get(x, y) || img.get(x, y) != color {
            continue;
        }
        m.set(x, y, true);
        if x > 0 {
            stack.push((x - 1, y));
        }
        if y > 0 {
            stack.push((x, y - 1));
        }
        if x + 1 < w {
            stack.push((x + 1, y));
        }
        if y + 1 < h {
            stack.push((x, y + 1));
        }
    }
    m
}

pub fn sse(points: &[Feature], labels: &[usize], k: usize) -> f64 {
    let mut sum = vec![[0.0; 5]; k];
    let mut count = vec![0usize; k];
    for (p, &l) in points.iter().zip(labels) {
        for d in 0..5 {
            sum[l][d] += p[d];
        }
        count[l] += 1;
    }
    points
        .iter()
        .zip(labels)
        .map(|(p, &l)| (0..5).map(|d| (p[d] - sum[l][d] / count[l] as f64).powi(2)).sum::<f64>())
        .sum()
}

/// Minimum within-cluster sum of squares over every labeling with exactly
/// `k` non-empty groups.
pub fn brute_force_optimum(points: &[Feature], k: usize) -> f64 {
    let n = points.len();
    let mut labels = vec![0usize; n];
    let mut best = f64::INFINITY;
    loop {
        let mut used = vec![false; k];
        labels.iter().for_each(|&l| used[l] = true);
        if used.iter().all(|&u| u) {
            best = best.min(sse(points, &labels, k));
        }
        let mut i = 0;
        loop {
            if i == n {
                return best;
            }
            labels[i] += 1;
            if labels[i] < k {
                break;
            }
            labels[i] = 0;
            i += 1;
        }
    }
}

/// Nine pixels drawn from `k` well-separated colors with small jitter.
pub fn separated(seed: u64, k: usize) -> FeatureField {
    let mut rng = rng(seed);
    let anchors = [[0.0, 0.0, 0.0], [250.0, 10.0, 10.0], [10.0, 240.0, 20.0], [20.0, 20.0, 250.0]];
    let mut features: Vec<Feature> = (0..9)
        .map(|i| {
            let a = anchors[if i < k { i } else { rng.random_range(0..k) }];
            let j = |rng: &mut rand_chacha::ChaCha8Rng| rng.random_range(-4.0..4.0);
            [a[0] + j(&mut rng), a[1] + j(&mut rng), a[2] + j(&mut rng), 0.0, 0.0]
        })
        .collect();
    // Shuffle so the group representatives are not always first.
    for i in (1..features.len()).rev() {
        features.swap(i, rng.random_range(0..=i));
    }
    FeatureField::from_features(3, 3, features).unwrap()
}
