//! Textured triangle rasterization.
//!
//! Vertices snap to a 1/256-pixel fixed-point grid so edge functions are
//! exact integers. A pixel is drawn when its center lies inside a triangle;
//! centers exactly on an edge belong to the triangle for which that edge is
//! a top or left edge, so a shared edge is drawn exactly once.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::imagecore::ImageBuffer;
use crate::meshanim::{Mesh, Vec2};

const SUBPIXEL_BITS: u32 = 8;
const SUBPIXEL: i64 = 1 << SUBPIXEL_BITS;
const HALF: i64 = SUBPIXEL / 2;

/// How texels are looked up from interpolated uvs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sampling {
    /// Texel containing the uv point. Exact for aligned rest meshes.
    Nearest,
    /// Premultiplied bilinear blend of the four nearest texel centers.
    #[default]
    Bilinear,
}

impl std::str::FromStr for Sampling {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "nearest" => Ok(Self::Nearest),
            "bilinear" => Ok(Self::Bilinear),
            other => Err(crate::Error::InvalidParameter(format!(
                "unknown sampling {other:?}, expected nearest|bilinear"
            ))),
        }
    }
}

#[derive(Clone, Copy)]
struct Fixed {
    x: i64,
    y: i64,
}

fn snap(v: Vec2) -> Option<Fixed> {
    let (x, y) = (v.x * SUBPIXEL as f64, v.y * SUBPIXEL as f64);
    // Far outside any raster; also rejects NaN.
    const LIMIT: f64 = (1u64 << 40) as f64;
    if !(x.abs() < LIMIT && y.abs() < LIMIT) {
        return None;
    }
    Some(Fixed {
        x: x.round() as i64,
        y: y.round() as i64,
    })
}

#[inline]
fn edge(u: Fixed, v: Fixed, px: i64, py: i64) -> i64 {
    (v.x - u.x) * (py - u.y) - (v.y - u.y) * (px - u.x)
}

/// Whether centers lying exactly on edge `u → v` are owned by this triangle.
#[inline]
fn is_top_left(u: Fixed, v: Fixed) -> bool {
    let (dx, dy) = (v.x - u.x, v.y - u.y);
    dy < 0 || (dy == 0 && dx > 0)
}

/// Calls `visit(x, y, triangle, [wa, wb, wc])` for every covered pixel
/// center of a `width × height` raster, with barycentric weights of the
/// triangle's three vertices.
pub(crate) fn for_each_covered(
    mesh: &Mesh,
    width: u32,
    height: u32,
    mut visit: impl FnMut(u32, u32, usize, [f64; 3]),
) {
    for (t, tri) in mesh.triangles.iter().enumerate() {
        let [Some(a), Some(mut b), Some(mut c)] = tri.map(|i| snap(mesh.vertices[i as usize])) else {
            continue;
        };
        let mut order = [0usize, 1, 2];
        let mut area = edge(a, b, c.x, c.y);
        if area == 0 {
            continue;
        }
        if area < 0 {
            // Folded triangle: flip to positive orientation.
            std::mem::swap(&mut b, &mut c);
            order.swap(1, 2);
            area = -area;
        }

        let min_x = a.x.min(b.x).min(c.x);
        let max_x = a.x.max(b.x).max(c.x);
        let min_y = a.y.min(b.y).min(c.y);
        let max_y = a.y.max(b.y).max(c.y);
        // Pixel px has its center at px·S + S/2.
        let px0 = (min_x - HALF).div_euclid(SUBPIXEL) + i64::from((min_x - HALF).rem_euclid(SUBPIXEL) != 0);
        let px1 = (max_x - HALF).div_euclid(SUBPIXEL);
        let py0 = (min_y - HALF).div_euclid(SUBPIXEL) + i64::from((min_y - HALF).rem_euclid(SUBPIXEL) != 0);
        let py1 = (max_y - HALF).div_euclid(SUBPIXEL);
        let (px0, px1) = (px0.max(0), px1.min(i64::from(width) - 1));
        let (py0, py1) = (py0.max(0), py1.min(i64::from(height) - 1));
        if px0 > px1 || py0 > py1 {
            continue;
        }

        let bias = [is_top_left(b, c), is_top_left(c, a), is_top_left(a, b)];
        let inv_area = 1.0 / area as f64;
        for py in py0..=py1 {
            let cy = py * SUBPIXEL + HALF;
            for px in px0..=px1 {
                let cx = px * SUBPIXEL + HALF;
                let w = [edge(b, c, cx, cy), edge(c, a, cx, cy), edge(a, b, cx, cy)];
                let inside = w
                    .iter()
                    .zip(bias)
                    .all(|(&wi, owns)| wi > 0 || (wi == 0 && owns));
                if !inside {
                    continue;
                }
                let mut bary = [0.0; 3];
                for k in 0..3 {
                    bary[order[k]] = w[k] as f64 * inv_area;
                }
                visit(px as u32, py as u32, t, bary);
            }
        }
    }
}

/// Number of triangles covering each pixel center, row-major.
pub fn coverage_counts(mesh: &Mesh, width: u32, height: u32) -> Vec<u32> {
    let mut counts = vec![0; width as usize * height as usize];
    for_each_covered(mesh, width, height, |x, y, _, _| {
        counts[y as usize * width as usize + x as usize] += 1;
    });
    counts
}

/// Texture sample at `uv` as straight (non-premultiplied) RGBA reals.
fn sample(texture: &ImageBuffer, uv: Vec2, sampling: Sampling) -> [f64; 4] {
    let (tw, th) = texture.dimensions();
    match sampling {
        Sampling::Nearest => {
            let x = ((uv.x * f64::from(tw)).floor().max(0.0) as u32).min(tw - 1);
            let y = ((uv.y * f64::from(th)).floor().max(0.0) as u32).min(th - 1);
            texture.get(x, y).map(f64::from)
        }
        Sampling::Bilinear => {
            let fx = uv.x * f64::from(tw) - 0.5;
            let fy = uv.y * f64::from(th) - 0.5;
            let (x0, y0) = (fx.floor(), fy.floor());
            let (tx, ty) = (fx - x0, fy - y0);
            let clamp_x = |v: f64| v.clamp(0.0, f64::from(tw - 1)) as u32;
            let clamp_y = |v: f64| v.clamp(0.0, f64::from(th - 1)) as u32;
            let taps = [
                (clamp_x(x0), clamp_y(y0), (1.0 - tx) * (1.0 - ty)),
                (clamp_x(x0 + 1.0), clamp_y(y0), tx * (1.0 - ty)),
                (clamp_x(x0), clamp_y(y0 + 1.0), (1.0 - tx) * ty),
                (clamp_x(x0 + 1.0), clamp_y(y0 + 1.0), tx * ty),
            ];
            let mut acc = [0.0; 4];
            for (x, y, wgt) in taps {
                if wgt == 0.0 {
                    continue;
                }
                let [r, g, b, a] = texture.get(x, y).map(f64::from);
                let pa = a / 255.0 * wgt;
                acc[0] += r * pa;
                acc[1] += g * pa;
                acc[2] += b * pa;
                acc[3] += a * wgt;
            }
            if acc[3] <= 0.0 {
                return [0.0; 4];
            }
            let unpremul = 255.0 / acc[3];
            [acc[0] * unpremul, acc[1] * unpremul, acc[2] * unpremul, acc[3]]
        }
    }
}

#[inline]
fn to_u8(v: f64) -> u8 {
    v.round().clamp(0.0, 255.0) as u8
}

/// Source-over blend of `src` onto `dst`:
/// `round(src·α + dst·(1 − α))` per channel with `α = src_alpha / 255`.
#[inline]
pub fn blend_over(src: [f64; 4], dst: [u8; 4]) -> [u8; 4] {
    let alpha = (src[3] / 255.0).clamp(0.0, 1.0);
    let keep = 1.0 - alpha;
    let mix = |s: f64, d: u8| to_u8(s * alpha + f64::from(d) * keep);
    [
        mix(src[0], dst[0]),
        mix(src[1], dst[1]),
        mix(src[2], dst[2]),
        to_u8(255.0 * alpha + f64::from(dst[3]) * keep),
    ]
}

/// Draws `mesh` textured with `texture` onto `target`.
///
/// Pixels whose centers no triangle covers are left alone; fully
/// transparent samples leave the target pixel unchanged.
pub fn rasterize_mesh(mesh: &Mesh, texture: &ImageBuffer, target: &mut ImageBuffer, sampling: Sampling) -> Result<()> {
    mesh.validate()?;
    let (w, h) = target.dimensions();
    for_each_covered(mesh, w, h, |x, y, t, bary| {
        let tri = mesh.triangles[t];
        let mut uv = Vec2::default();
        for k in 0..3 {
            let v = mesh.uvs[tri[k] as usize];
            uv.x += bary[k] * v.x;
            uv.y += bary[k] * v.y;
        }
        let src = sample(texture, uv, sampling);
        if src[3] <= 0.0 {
            return;
        }
        let dst = target.get(x, y);
        target.put(x, y, blend_over(src, dst));
    });
    Ok(())
}
