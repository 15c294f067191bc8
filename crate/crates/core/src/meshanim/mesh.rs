use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A 2-D point or vector in image-pixel coordinates (y grows downward).
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl Vec2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }
}

/// Axis-aligned rectangle `(x0, y0, width, height)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub x0: f64,
    pub y0: f64,
    pub width: f64,
    pub height: f64,
}

impl Rect {
    pub const fn new(x0: f64, y0: f64, width: f64, height: f64) -> Self {
        Self {
            x0,
            y0,
            width,
            height,
        }
    }
}

/// Vertex positions, per-vertex texture coordinates and triangle indices.
#[derive(Debug, Clone, PartialEq)]
pub struct Mesh {
    pub vertices: Vec<Vec2>,
    pub uvs: Vec<Vec2>,
    pub triangles: Vec<[u32; 3]>,
}

impl Mesh {
    /// Checks index bounds, matching vertex/uv counts and uvs in `[0, 1]²`.
    pub fn validate(&self) -> Result<()> {
        if self.vertices.len() != self.uvs.len() {
            return Err(Error::InvalidMesh(format!(
                "{} vertices but {} uvs",
                self.vertices.len(),
                self.uvs.len()
            )));
        }
        let n = self.vertices.len() as u32;
        if let Some(t) = self.triangles.iter().find(|t| t.iter().any(|&i| i >= n)) {
            return Err(Error::InvalidMesh(format!("triangle {t:?} indexes past {n} vertices")));
        }
        if let Some(uv) = self
            .uvs
            .iter()
            .find(|uv| !((0.0..=1.0).contains(&uv.x) && (0.0..=1.0).contains(&uv.y)))
        {
            return Err(Error::InvalidMesh(format!("uv {uv:?} outside [0, 1]")));
        }
        Ok(())
    }

    /// `(x_min, y_min, x_max, y_max)` of the vertices.
    pub fn bounds(&self) -> Option<(f64, f64, f64, f64)> {
        let first = self.vertices.first()?;
        Some(self.vertices.iter().fold(
            (first.x, first.y, first.x, first.y),
            |(x0, y0, x1, y1), v| (x0.min(v.x), y0.min(v.y), x1.max(v.x), y1.max(v.y)),
        ))
    }

    /// Twice the signed area of triangle `t`; positive for rest grid cells.
    pub fn doubled_area(&self, t: usize) -> f64 {
        let [a, b, c] = self.triangles[t].map(|i| self.vertices[i as usize]);
        (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x)
    }

    /// Same uvs and triangles as `other`.
    pub fn same_topology(&self, other: &Mesh) -> bool {
        self.vertices.len() == other.vertices.len()
            && self.uvs == other.uvs
            && self.triangles == other.triangles
    }

    /// Sets each uv to the vertex position divided by the texture size, so
    /// the rest mesh samples the texel underneath it.
    pub fn fit_uvs_to_texture(&mut self, width: u32, height: u32) {
        let (w, h) = (f64::from(width), f64::from(height));
        for (uv, v) in self.uvs.iter_mut().zip(&self.vertices) {
            *uv = Vec2::new((v.x / w).clamp(0.0, 1.0), (v.y / h).clamp(0.0, 1.0));
        }
    }

    /// Copy with new vertex positions and this mesh's uvs and triangles.
    pub(crate) fn with_vertices(&self, vertices: Vec<Vec2>) -> Mesh {
        debug_assert_eq!(vertices.len(), self.vertices.len());
        Mesh {
            vertices,
            uvs: self.uvs.clone(),
            triangles: self.triangles.clone(),
        }
    }
}

/// Regular `nx × ny` grid over `rect`.
///
/// Vertex `(i, j)` sits at `(x0 + i·width/nx, y0 + j·height/ny)` with uv
/// `(i/nx, j/ny)` and index `j·(nx+1) + i`. Each cell is split along its
/// top-left to bottom-right diagonal into two triangles of positive
/// [`Mesh::doubled_area`].
pub fn make_grid_mesh(rect: Rect, nx: u32, ny: u32) -> Result<Mesh> {
    if nx == 0 || ny == 0 {
        return Err(Error::InvalidParameter(format!(
            "grid needs at least one cell per axis, got {nx}x{ny}"
        )));
    }
    if !(rect.width > 0.0 && rect.height > 0.0) || !rect.x0.is_finite() || !rect.y0.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "grid rectangle needs positive size, got {}x{}",
            rect.width, rect.height
        )));
    }
    let mut vertices = Vec::with_capacity(((nx + 1) * (ny + 1)) as usize);
    let mut uvs = Vec::with_capacity(vertices.capacity());
    for j in 0..=ny {
        for i in 0..=nx {
            let (fi, fj) = (f64::from(i), f64::from(j));
            vertices.push(Vec2::new(
                rect.x0 + rect.width * fi / f64::from(nx),
                rect.y0 + rect.height * fj / f64::from(ny),
            ));
            uvs.push(Vec2::new(fi / f64::from(nx), fj / f64::from(ny)));
        }
    }
    let stride = nx + 1;
    let mut triangles = Vec::with_capacity((2 * nx * ny) as usize);
    for j in 0..ny {
        for i in 0..nx {
            let v00 = j * stride + i;
            let v10 = v00 + 1;
            let v01 = v00 + stride;
            let v11 = v01 + 1;
            triangles.push([v00, v10, v11]);
            triangles.push([v00, v11, v01]);
        }
    }
    Ok(Mesh {
        vertices,
        uvs,
        triangles,
    })
}
