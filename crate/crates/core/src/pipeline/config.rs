use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::imagecore::ClickSet;
use crate::inpaint::InpaintConfig;
use crate::meshanim::AnimationSpec;
use crate::pipeline::PipelineError;
use crate::render::{Sampling, DEFAULT_MESH_CELLS, MAX_FRAMES};
use crate::segmentation::SegmentationConfig;

/// Upper bound on mesh cells per axis.
pub const MAX_MESH_CELLS: u32 = 512;

/// Clicks given either as a path to a ClickSet JSON file or inline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ClicksSource {
    Path(PathBuf),
    Inline(ClickSet),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MeshDensity {
    pub nx: u32,
    pub ny: u32,
}

impl Default for MeshDensity {
    fn default() -> Self {
        Self {
            nx: DEFAULT_MESH_CELLS.0,
            ny: DEFAULT_MESH_CELLS.1,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub gif: Option<PathBuf>,
    /// Receives `frame_0000.png`, `frame_0001.png`, ...
    pub frames_dir: Option<PathBuf>,
    /// Receives the intermediate `mask.png` and `inpainted.png`. Required
    /// for staged runs.
    pub artifacts_dir: Option<PathBuf>,
    /// Frame delay in hundredths of a second; defaults to the clip
    /// duration spread evenly over the frames.
    pub delay_cs: Option<u16>,
}

/// A full headless run, loaded from one JSON document:
///
/// ```json
/// {
///   "input": "photo.png",
///   "clicks": {"positives": [[40, 52]], "negatives": []},
///   "segmentation": {"k": 6, "seed": 0},
///   "inpaint": {"pre_dilation": 3},
///   "animation": {"kind": "jump", "frames": 24, "duration": 2},
///   "output": {"gif": "out.gif", "artifacts_dir": "work"},
///   "sampling": "bilinear",
///   "mesh": {"nx": 24, "ny": 24}
/// }
/// ```
///
/// `clicks` may also be a path to a ClickSet file. Relative paths are
/// resolved against the config file's directory by [`PipelineConfig::load`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    pub input: PathBuf,
    pub clicks: ClicksSource,
    #[serde(default)]
    pub segmentation: SegmentationConfig,
    #[serde(default)]
    pub inpaint: InpaintConfig,
    #[serde(default)]
    pub animation: AnimationSpec,
    #[serde(default)]
    pub output: OutputConfig,
    #[serde(default)]
    pub sampling: Sampling,
    #[serde(default)]
    pub mesh: MeshDensity,
}

impl PipelineConfig {
    /// Minimal config with every parameter at its default.
    pub fn new(input: impl Into<PathBuf>, clicks: ClicksSource) -> Self {
        Self {
            input: input.into(),
            clicks,
            segmentation: SegmentationConfig::default(),
            inpaint: InpaintConfig::default(),
            animation: AnimationSpec::default(),
            output: OutputConfig::default(),
            sampling: Sampling::default(),
            mesh: MeshDensity::default(),
        }
    }

    /// Reads and parses a config file, resolving relative paths against
    /// its directory. Read and parse failures are validation errors.
    pub fn load(path: &Path) -> Result<Self, PipelineError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| PipelineError::Validation(vec![format!("cannot read config {}: {e}", path.display())]))?;
        let mut config = Self::from_json(&text)?;
        if let Some(base) = path.parent() {
            config.resolve_paths(base);
        }
        Ok(config)
    }

    pub fn from_json(text: &str) -> Result<Self, PipelineError> {
        serde_json::from_str(text).map_err(|e| PipelineError::Validation(vec![format!("malformed config: {e}")]))
    }

    /// Prefixes every relative path with `base`.
    pub fn resolve_paths(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        fix(&mut self.input);
        if let ClicksSource::Path(p) = &mut self.clicks {
            fix(p);
        }
        for p in [&mut self.output.gif, &mut self.output.frames_dir, &mut self.output.artifacts_dir]
            .into_iter()
            .flatten()
        {
            fix(p);
        }
    }

    /// Every problem with the config, not just the first.
    pub fn problems(&self) -> Vec<String> {
        let mut out = Vec::new();
        if !self.input.is_file() {
            out.push(format!("input image not found: {}", self.input.display()));
        }
        if let ClicksSource::Path(p) = &self.clicks {
            if !p.is_file() {
                out.push(format!("clicks file not found: {}", p.display()));
            } else if let Err(e) = read_clicks(p) {
                out.push(e);
            }
        }
        for (section, items) in [
            ("segmentation", self.segmentation.problems()),
            ("inpaint", self.inpaint.problems()),
            ("animation", self.animation.problems()),
        ] {
            out.extend(items.into_iter().map(|p| format!("{section}: {p}")));
        }
        for (axis, n) in [("nx", self.mesh.nx), ("ny", self.mesh.ny)] {
            if !(1..=MAX_MESH_CELLS).contains(&n) {
                out.push(format!("mesh: {axis} must be in 1..={MAX_MESH_CELLS}, got {n}"));
            }
        }
        if self.output.gif.is_none() && self.output.frames_dir.is_none() {
            out.push("output: set at least one of gif or frames_dir".to_owned());
        }
        if self.output.frames_dir.is_some() && self.animation.frames as usize > MAX_FRAMES {
            out.push(format!(
                "output: frames_dir holds at most {MAX_FRAMES} frames, animation has {}",
                self.animation.frames
            ));
        }
        if self.output.delay_cs == Some(0) {
            out.push("output: delay_cs must be at least 1".to_owned());
        }
        out
    }

    pub fn validate(&self) -> Result<(), PipelineError> {
        let problems = self.problems();
        if problems.is_empty() {
            Ok(())
        } else {
            Err(PipelineError::Validation(problems))
        }
    }

    /// The click set, read from disk when given as a path.
    pub fn clicks(&self) -> Result<ClickSet, PipelineError> {
        match &self.clicks {
            ClicksSource::Inline(c) => Ok(c.clone()),
            ClicksSource::Path(p) => read_clicks(p).map_err(|e| PipelineError::Validation(vec![e])),
        }
    }

    pub fn delay_cs(&self) -> u16 {
        self.output
            .delay_cs
            .unwrap_or_else(|| default_delay_cs(&self.animation))
    }
}

/// `duration / frames` in centiseconds, at least 1.
pub fn default_delay_cs(spec: &AnimationSpec) -> u16 {
    let cs = (100.0 * spec.duration / f64::from(spec.frames.max(1))).round();
    cs.clamp(1.0, f64::from(u16::MAX)) as u16
}

fn read_clicks(path: &Path) -> Result<ClickSet, String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("cannot read clicks file {}: {e}", path.display()))?;
    ClickSet::from_json(&text).map_err(|e| format!("malformed clicks file {}: {e}", path.display()))
}
