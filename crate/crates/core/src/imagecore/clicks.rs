use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A pixel coordinate `(x, y)`.
pub type Point = (u32, u32);

/// Positive ("include") and negative ("exclude") user clicks.
///
/// Serializes as `{"positives": [[x, y], ...], "negatives": [[x, y], ...]}`.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClickSet {
    #[serde(default)]
    pub positives: Vec<Point>,
    #[serde(default)]
    pub negatives: Vec<Point>,
}

impl ClickSet {
    pub fn new(positives: Vec<Point>, negatives: Vec<Point>) -> Self {
        Self {
            positives,
            negatives,
        }
    }

    pub fn positive(points: impl IntoIterator<Item = Point>) -> Self {
        Self::new(points.into_iter().collect(), Vec::new())
    }

    pub fn is_empty(&self) -> bool {
        self.positives.is_empty() && self.negatives.is_empty()
    }

    pub fn from_json(text: &str) -> serde_json::Result<Self> {
        serde_json::from_str(text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("click set serializes")
    }

    /// Checks bounds and that no pixel carries both polarities.
    pub fn validate(&self, width: u32, height: u32) -> Result<()> {
        for &(x, y) in self.positives.iter().chain(&self.negatives) {
            check_point((x, y), width, height)?;
        }
        let positives: HashSet<Point> = self.positives.iter().copied().collect();
        if let Some(&(x, y)) = self.negatives.iter().find(|p| positives.contains(p)) {
            return Err(Error::ConflictingClick { x, y });
        }
        Ok(())
    }
}

pub(crate) fn check_point((x, y): Point, width: u32, height: u32) -> Result<()> {
    if x >= width || y >= height {
        Err(Error::ClickOutOfBounds {
            x,
            y,
            width,
            height,
        })
    } else {
        Ok(())
    }
}
