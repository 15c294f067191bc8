use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::imagecore::{distance_transform, ClickSet, ImageBuffer};

/// Number of feature channels: R, G, B, distance to nearest positive click,
/// distance to nearest negative click.
pub const FEATURE_DIMS: usize = 5;

pub type Feature = [f64; FEATURE_DIMS];

/// Per-channel multipliers applied to `(R, G, B, dpos, dneg)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ChannelWeights(pub [f64; FEATURE_DIMS]);

impl Default for ChannelWeights {
    fn default() -> Self {
        Self([1.0, 1.0, 1.0, 0.5, 0.5])
    }
}

impl ChannelWeights {
    pub fn validate(&self) -> Result<()> {
        for (i, &w) in self.0.iter().enumerate() {
            if !(w.is_finite() && w > 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "channel weight {i} must be positive and finite, got {w}"
                )));
            }
        }
        Ok(())
    }
}

/// Per-pixel color plus click-distance features, already weighted.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureField {
    width: u32,
    height: u32,
    features: Vec<Feature>,
    weights: ChannelWeights,
}

impl FeatureField {
    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn dimensions(&self) -> (u32, u32) {
        (self.width, self.height)
    }

    pub fn features(&self) -> &[Feature] {
        &self.features
    }

    pub fn weights(&self) -> ChannelWeights {
        self.weights
    }

    #[inline]
    pub fn get(&self, x: u32, y: u32) -> Feature {
        self.features[y as usize * self.width as usize + x as usize]
    }

    /// Builds a field straight from feature vectors, bypassing the image.
    pub fn from_features(width: u32, height: u32, features: Vec<Feature>) -> Result<Self> {
        crate::imagecore::check_dims(width, height)?;
        let expected = width as usize * height as usize;
        if features.len() != expected {
            return Err(Error::BufferSize {
                expected,
                actual: features.len(),
            });
        }
        Ok(Self {
            width,
            height,
            features,
            weights: ChannelWeights([1.0; FEATURE_DIMS]),
        })
    }

    /// Diagonal of the axis-aligned box enclosing all features.
    pub fn bounding_diameter(&self) -> f64 {
        let mut lo = [f64::INFINITY; FEATURE_DIMS];
        let mut hi = [f64::NEG_INFINITY; FEATURE_DIMS];
        for f in &self.features {
            for c in 0..FEATURE_DIMS {
                lo[c] = lo[c].min(f[c]);
                hi[c] = hi[c].max(f[c]);
            }
        }
        (0..FEATURE_DIMS)
            .map(|c| (hi[c] - lo[c]).powi(2))
            .sum::<f64>()
            .sqrt()
    }
}

/// Concatenates color with the positive and negative click distance
/// channels and scales each channel by its weight.
///
/// Distances are clamped to twice the image diagonal before weighting. An
/// empty click polarity yields the distance-transform sentinel
/// (`width + height`), which is always below the clamp.
pub fn build_feature_field(
    image: &ImageBuffer,
    clicks: &ClickSet,
    weights: ChannelWeights,
) -> Result<FeatureField> {
    weights.validate()?;
    let (w, h) = image.dimensions();
    clicks.validate(w, h)?;
    let dpos = distance_transform(&clicks.positives, w, h)?;
    let dneg = distance_transform(&clicks.negatives, w, h)?;
    let clamp = 2.0 * f64::from(w).hypot(f64::from(h));
    let wt = weights.0;

    let features = image
        .pixels()
        .zip(dpos.values().iter().zip(dneg.values()))
        .map(|([r, g, b, _], (&dp, &dn))| {
            [
                f64::from(r) * wt[0],
                f64::from(g) * wt[1],
                f64::from(b) * wt[2],
                dp.min(clamp) * wt[3],
                dn.min(clamp) * wt[4],
            ]
        })
        .collect();
    Ok(FeatureField {
        width: w,
        height: h,
        features,
        weights,
    })
}
