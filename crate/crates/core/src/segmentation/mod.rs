//! Click-guided subject extraction: k-means over color and click-distance
//! features, component selection by clicks, morphological refinement.

mod extract;
mod features;
mod kmeans;

use serde::{Deserialize, Serialize};

pub use extract::{extract_subject, refine_mask, ComponentPolicy};
pub use features::{build_feature_field, ChannelWeights, Feature, FeatureField, FEATURE_DIMS};
pub use kmeans::{
    default_merge_threshold, kmeans, ClusterModel, DEFAULT_MERGE_FRACTION, MAX_LLOYD_ITERATIONS,
};

use crate::error::{Error, Result};
use crate::imagecore::{ClickSet, ImageBuffer, Mask};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SegmentationConfig {
    pub k: usize,
    pub seed: u64,
    pub weights: ChannelWeights,
    /// Absolute merge threshold; `None` uses [`default_merge_threshold`].
    pub merge_threshold: Option<f64>,
    pub closing_radius: u32,
    pub policy: ComponentPolicy,
}

impl Default for SegmentationConfig {
    fn default() -> Self {
        Self {
            k: 6,
            seed: 0,
            weights: ChannelWeights::default(),
            merge_threshold: None,
            closing_radius: 2,
            policy: ComponentPolicy::Clicked,
        }
    }
}

impl SegmentationConfig {
    /// Every range violation, not just the first.
    pub fn problems(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.k == 0 {
            out.push("segmentation.k must be at least 1".to_owned());
        }
        if let Err(Error::InvalidParameter(msg)) = self.weights.validate() {
            out.push(format!("segmentation.weights: {msg}"));
        }
        if let Some(t) = self.merge_threshold {
            if !(t.is_finite() && t >= 0.0) {
                out.push(format!("segmentation.merge_threshold must be >= 0, got {t}"));
            }
        }
        out
    }
}

/// Features → k-means → click-selected components → refinement.
pub fn segment_subject(image: &ImageBuffer, clicks: &ClickSet, config: &SegmentationConfig) -> Result<Mask> {
    let features = build_feature_field(image, clicks, config.weights)?;
    let threshold = config
        .merge_threshold
        .unwrap_or_else(|| default_merge_threshold(&features));
    let k = config.k.min(image.pixel_count());
    let model = kmeans(&features, k, config.seed, threshold)?;
    let raw = extract_subject(&model, clicks)?;
    refine_mask(&raw, config.closing_radius, config.policy, clicks)
}
