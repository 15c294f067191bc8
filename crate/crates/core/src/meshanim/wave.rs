use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::meshanim::mesh::{Mesh, Vec2};

/// A travelling sine wave.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WaveParams {
    /// Peak displacement in pixels.
    pub amplitude: f64,
    /// Full periods across the travel axis of the rest mesh.
    pub wave_count: f64,
    /// Periods per second.
    pub speed: f64,
    /// Phase offset in radians.
    pub phase0: f64,
}

impl Default for WaveParams {
    fn default() -> Self {
        Self {
            amplitude: 4.0,
            wave_count: 1.0,
            speed: 1.0,
            phase0: 0.0,
        }
    }
}

impl WaveParams {
    pub fn problems(&self) -> Vec<String> {
        let mut out = Vec::new();
        if !(self.amplitude.is_finite() && self.amplitude >= 0.0) {
            out.push(format!("amplitude must be >= 0, got {}", self.amplitude));
        }
        if !(self.wave_count.is_finite() && self.wave_count > 0.0) {
            out.push(format!("waves must be > 0, got {}", self.wave_count));
        }
        if !self.speed.is_finite() {
            out.push(format!("speed must be finite, got {}", self.speed));
        }
        if !self.phase0.is_finite() {
            out.push(format!("phase0 must be finite, got {}", self.phase0));
        }
        out
    }

    fn validate(&self) -> Result<()> {
        match self.problems().into_iter().next() {
            Some(p) => Err(Error::InvalidParameter(p)),
            None => Ok(()),
        }
    }

    #[inline]
    fn displacement(&self, along: f64, origin: f64, extent: f64, t: f64) -> f64 {
        self.amplitude
            * (TAU * self.wave_count * (along - origin) / extent + self.phase0 + TAU * self.speed * t).sin()
    }
}

/// Shifts vertices horizontally by a sine of their height: the wave travels
/// vertically, `x' = x + A·sin(2π·n·(y − y_min)/H + φ₀ + 2π·s·t)`.
pub fn horizontal_wave(rest: &Mesh, params: &WaveParams, t: f64) -> Result<Mesh> {
    params.validate()?;
    let (_, y0, _, y1) = rest
        .bounds()
        .ok_or_else(|| Error::InvalidMesh("mesh has no vertices".into()))?;
    let extent = y1 - y0;
    if extent <= 0.0 {
        return Err(Error::InvalidMesh("wave needs a mesh of positive height".into()));
    }
    let vertices = rest
        .vertices
        .iter()
        .map(|v| Vec2::new(v.x + params.displacement(v.y, y0, extent, t), v.y))
        .collect();
    Ok(rest.with_vertices(vertices))
}

/// Shifts vertices vertically by a sine of their x position: the wave
/// travels horizontally, normalized by the mesh width.
pub fn vertical_wave(rest: &Mesh, params: &WaveParams, t: f64) -> Result<Mesh> {
    params.validate()?;
    let (x0, _, x1, _) = rest
        .bounds()
        .ok_or_else(|| Error::InvalidMesh("mesh has no vertices".into()))?;
    let extent = x1 - x0;
    if extent <= 0.0 {
        return Err(Error::InvalidMesh("wave needs a mesh of positive width".into()));
    }
    let vertices = rest
        .vertices
        .iter()
        .map(|v| Vec2::new(v.x, v.y + params.displacement(v.x, x0, extent, t)))
        .collect();
    Ok(rest.with_vertices(vertices))
}
