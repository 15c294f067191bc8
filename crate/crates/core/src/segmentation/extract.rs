use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::imagecore::{close, connected_components, ClickSet, Mask};
use crate::segmentation::kmeans::ClusterModel;

/// Selects the subject from a cluster model.
///
/// Candidate pixels are those whose cluster holds at least one positive
/// click. Of their 4-connected components, those containing a positive click
/// are kept and those containing a negative click are dropped. If that leaves
/// any positive click outside the mask the clicks conflict.
pub fn extract_subject(model: &ClusterModel, clicks: &ClickSet) -> Result<Mask> {
    let (w, h) = model.dimensions();
    clicks.validate(w, h)?;
    if clicks.positives.is_empty() {
        return Err(Error::NoPositiveClick);
    }

    let clusters: HashSet<u32> = clicks
        .positives
        .iter()
        .map(|&(x, y)| model.label(x, y))
        .collect();
    let candidate = Mask::from_fn(w, h, |x, y| clusters.contains(&model.label(x, y)))?;
    let labels = connected_components(&candidate);

    let positive: HashSet<u32> = clicks.positives.iter().map(|&(x, y)| labels.get(x, y)).collect();
    let negative: HashSet<u32> = clicks
        .negatives
        .iter()
        .map(|&(x, y)| labels.get(x, y))
        .filter(|&l| l != 0)
        .collect();
    if positive.iter().any(|l| negative.contains(l)) {
        return Err(Error::ClicksConflict);
    }
    Ok(labels.select(|l| positive.contains(&l)))
}

/// Which connected components survive [`refine_mask`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ComponentPolicy {
    /// Keep everything.
    All,
    /// Keep only the largest component (lowest label on ties).
    Largest,
    /// Keep components containing a positive click; negative-clicked pixels
    /// are cleared before labeling.
    #[default]
    Clicked,
}

impl std::str::FromStr for ComponentPolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "all" => Ok(Self::All),
            "largest" => Ok(Self::Largest),
            "clicked" => Ok(Self::Clicked),
            other => Err(Error::InvalidParameter(format!(
                "unknown component policy {other:?}, expected all|largest|clicked"
            ))),
        }
    }
}

/// Morphological closing followed by component filtering.
///
/// `clicks` is consulted only by [`ComponentPolicy::Clicked`].
pub fn refine_mask(
    mask: &Mask,
    closing_radius: u32,
    policy: ComponentPolicy,
    clicks: &ClickSet,
) -> Result<Mask> {
    let mut closed = close(mask, closing_radius);
    match policy {
        ComponentPolicy::All => Ok(closed),
        ComponentPolicy::Largest => {
            let labels = connected_components(&closed);
            let sizes = labels.sizes();
            let Some(best) = (1..sizes.len()).max_by(|&a, &b| sizes[a].cmp(&sizes[b]).then(b.cmp(&a)))
            else {
                return Ok(closed);
            };
            Ok(labels.select(|l| l as usize == best))
        }
        ComponentPolicy::Clicked => {
            let (w, h) = mask.dimensions();
            clicks.validate(w, h)?;
            for &(x, y) in &clicks.negatives {
                closed.set(x, y, false);
            }
            let labels = connected_components(&closed);
            let keep: HashSet<u32> = clicks
                .positives
                .iter()
                .map(|&(x, y)| labels.get(x, y))
                .filter(|&l| l != 0)
                .collect();
            Ok(labels.select(|l| keep.contains(&l)))
        }
    }
}
