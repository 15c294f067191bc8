//! Headless orchestration: image and clicks in, mask, background plate and
//! animation out. The in-memory steps here are the only code paths the CLI
//! and the HTTP service use, so both produce identical artifacts.

mod config;

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use serde::Serialize;
use thiserror::Error;

pub use config::{default_delay_cs, ClicksSource, MeshDensity, OutputConfig, PipelineConfig, MAX_MESH_CELLS};

use crate::error::Error;
use crate::imagecore::{load_image, save_image, ClickSet, ImageBuffer, Mask};
use crate::inpaint::{make_background, InpaintConfig, InpaintReport, Inpainted};
use crate::meshanim::{deform, frame_time, AnimationSpec};
use crate::render::{composite_frame, encode_gif, write_frame_sequence, Frame, Sampling, Scene};
use crate::segmentation::{segment_subject, SegmentationConfig};

/// File name of the mask artifact.
pub const MASK_ARTIFACT: &str = "mask.png";
/// File name of the inpainted plate artifact.
pub const PLATE_ARTIFACT: &str = "inpainted.png";
/// Stem of frame files written to `frames_dir`.
pub const FRAME_STEM: &str = "frame";

/// One labelled step of a run, used for timings and error prefixes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Step {
    Load,
    Segment,
    Inpaint,
    Animate,
    Render,
    Encode,
    Write,
}

impl fmt::Display for Step {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Step::Load => "load",
            Step::Segment => "segment",
            Step::Inpaint => "inpaint",
            Step::Animate => "animate",
            Step::Render => "render",
            Step::Encode => "encode",
            Step::Write => "write",
        };
        f.write_str(name)
    }
}

/// A stage that can run on its own from artifacts on disk.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Stage {
    Segment,
    Inpaint,
    Animate,
}

impl Stage {
    fn step(self) -> Step {
        match self {
            Stage::Segment => Step::Segment,
            Stage::Inpaint => Step::Inpaint,
            Stage::Animate => Step::Animate,
        }
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.step().fmt(f)
    }
}

impl FromStr for Stage {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "segment" => Ok(Stage::Segment),
            "inpaint" => Ok(Stage::Inpaint),
            "animate" => Ok(Stage::Animate),
            other => Err(format!("unknown stage {other:?}, expected segment|inpaint|animate")),
        }
    }
}

#[derive(Debug, Error)]
pub enum PipelineError {
    /// The config is unusable; lists every problem found.
    #[error("invalid config: {}", .0.join("; "))]
    Validation(Vec<String>),

    #[error("{step}: {source}")]
    Stage {
        step: Step,
        #[source]
        source: Error,
    },

    #[error("{stage}: missing artifact: {name} ({})", path.display())]
    MissingArtifact {
        stage: Stage,
        name: &'static str,
        path: PathBuf,
    },
}

impl PipelineError {
    pub fn is_validation(&self) -> bool {
        matches!(self, PipelineError::Validation(_))
    }
}

trait AtStep<T> {
    fn at(self, step: Step) -> Result<T, PipelineError>;
}

impl<T> AtStep<T> for crate::Result<T> {
    fn at(self, step: Step) -> Result<T, PipelineError> {
        self.map_err(|source| PipelineError::Stage { step, source })
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct StepTiming {
    pub step: Step,
    pub millis: f64,
}

/// Summary of a full run.
#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub width: u32,
    pub height: u32,
    /// Subject pixels in the mask.
    pub mask_area: usize,
    pub inpaint: InpaintReport,
    pub frame_count: usize,
    pub delay_cs: u16,
    pub outputs: Vec<PathBuf>,
    pub timings: Vec<StepTiming>,
}

#[derive(Debug, Clone, Serialize)]
pub struct StageReport {
    pub stage: Stage,
    pub outputs: Vec<PathBuf>,
    pub millis: f64,
}

struct Timer(Vec<StepTiming>);

impl Timer {
    fn run<T>(&mut self, step: Step, f: impl FnOnce() -> Result<T, PipelineError>) -> Result<T, PipelineError> {
        let start = Instant::now();
        let out = f()?;
        self.0.push(StepTiming {
            step,
            millis: start.elapsed().as_secs_f64() * 1e3,
        });
        Ok(out)
    }
}

/// Subject mask from image and clicks.
pub fn segment(image: &ImageBuffer, clicks: &ClickSet, config: &SegmentationConfig) -> crate::Result<Mask> {
    segment_subject(image, clicks, config)
}

/// Background plate with the subject region filled in.
pub fn inpaint(image: &ImageBuffer, mask: &Mask, config: &InpaintConfig) -> crate::Result<Inpainted> {
    make_background(image, mask, config)
}

/// Scene for rendering frames of `image`'s subject over `plate`.
pub fn build_scene(
    image: &ImageBuffer,
    mask: &Mask,
    plate: &ImageBuffer,
    mesh: MeshDensity,
    sampling: Sampling,
) -> crate::Result<Scene> {
    Scene::new(image, mask, plate, (mesh.nx, mesh.ny), sampling)
}

/// The frame at clip fraction `t ∈ [0, 1]`.
pub fn render_frame(scene: &Scene, spec: &AnimationSpec, t: f64, index: u32) -> crate::Result<Frame> {
    spec.validate()?;
    let subject = deform(scene.subject_rest(), &spec.animation(), t, spec.duration)?;
    composite_frame(scene, &subject, index)
}

/// All `spec.frames` frames, frame `i` at `t = i / (frames − 1)`.
pub fn render_clip(scene: &Scene, spec: &AnimationSpec) -> crate::Result<Vec<Frame>> {
    spec.validate()?;
    (0..spec.frames)
        .map(|i| render_frame(scene, spec, frame_time(i, spec.frames), i))
        .collect()
}

fn write_png(image: &ImageBuffer, dir: &Path, name: &str) -> crate::Result<PathBuf> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let path = dir.join(name);
    save_image(image, &path)?;
    Ok(path)
}

fn write_clip(config: &PipelineConfig, frames: &[Frame], timer: &mut Timer) -> Result<Vec<PathBuf>, PipelineError> {
    let mut outputs = Vec::new();
    if let Some(gif) = &config.output.gif {
        let bytes = timer.run(Step::Encode, || encode_gif(frames, config.delay_cs()).at(Step::Encode))?;
        timer.run(Step::Write, || {
            if let Some(dir) = gif.parent().filter(|d| !d.as_os_str().is_empty()) {
                std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e)).at(Step::Write)?;
            }
            std::fs::write(gif, bytes).map_err(|e| Error::io(gif, e)).at(Step::Write)
        })?;
        outputs.push(gif.clone());
    }
    if let Some(dir) = &config.output.frames_dir {
        let paths = timer.run(Step::Write, || write_frame_sequence(frames, dir, FRAME_STEM).at(Step::Write))?;
        outputs.extend(paths);
    }
    Ok(outputs)
}

/// Runs every stage in memory and writes the configured outputs, plus the
/// mask and plate artifacts when `artifacts_dir` is set.
pub fn run_pipeline(config: &PipelineConfig) -> Result<RunReport, PipelineError> {
    config.validate()?;
    let mut timer = Timer(Vec::new());
    let (image, clicks) = timer.run(Step::Load, || {
        let image = load_image(&config.input).at(Step::Load)?;
        Ok((image, config.clicks()?))
    })?;
    let mask = timer.run(Step::Segment, || segment(&image, &clicks, &config.segmentation).at(Step::Segment))?;
    let plate = timer.run(Step::Inpaint, || inpaint(&image, &mask, &config.inpaint).at(Step::Inpaint))?;

    let mut outputs = Vec::new();
    if let Some(dir) = &config.output.artifacts_dir {
        timer.run(Step::Write, || {
            outputs.push(write_png(&mask.to_image(), dir, MASK_ARTIFACT).at(Step::Write)?);
            outputs.push(write_png(&plate.image, dir, PLATE_ARTIFACT).at(Step::Write)?);
            Ok(())
        })?;
    }

    let scene = timer.run(Step::Animate, || {
        build_scene(&image, &mask, &plate.image, config.mesh, config.sampling).at(Step::Animate)
    })?;
    let frames = timer.run(Step::Render, || render_clip(&scene, &config.animation).at(Step::Render))?;
    outputs.extend(write_clip(config, &frames, &mut timer)?);

    Ok(RunReport {
        width: image.width(),
        height: image.height(),
        mask_area: mask.count(),
        inpaint: plate.report,
        frame_count: frames.len(),
        delay_cs: config.delay_cs(),
        outputs,
        timings: timer.0,
    })
}

fn artifact(config: &PipelineConfig, stage: Stage, name: &'static str) -> Result<ImageBuffer, PipelineError> {
    let dir = artifacts_dir(config)?;
    let path = dir.join(name);
    if !path.is_file() {
        return Err(PipelineError::MissingArtifact {
            stage,
            name: name.trim_end_matches(".png"),
            path,
        });
    }
    load_image(&path).at(stage.step())
}

fn artifacts_dir(config: &PipelineConfig) -> Result<&Path, PipelineError> {
    config
        .output
        .artifacts_dir
        .as_deref()
        .ok_or_else(|| PipelineError::Validation(vec!["output: staged runs need artifacts_dir".to_owned()]))
}

/// Runs one stage from the artifacts of the previous ones:
/// `segment` writes `mask.png`, `inpaint` reads it and writes
/// `inpainted.png`, `animate` reads both and writes the clip outputs.
pub fn run_stage(config: &PipelineConfig, stage: Stage) -> Result<StageReport, PipelineError> {
    config.validate()?;
    let dir = artifacts_dir(config)?;
    let step = stage.step();
    let start = Instant::now();
    let image = load_image(&config.input).at(Step::Load)?;
    let outputs = match stage {
        Stage::Segment => {
            let clicks = config.clicks()?;
            let mask = segment(&image, &clicks, &config.segmentation).at(step)?;
            vec![write_png(&mask.to_image(), dir, MASK_ARTIFACT).at(Step::Write)?]
        }
        Stage::Inpaint => {
            let mask = Mask::from_image(&artifact(config, stage, MASK_ARTIFACT)?);
            let plate = inpaint(&image, &mask, &config.inpaint).at(step)?;
            vec![write_png(&plate.image, dir, PLATE_ARTIFACT).at(Step::Write)?]
        }
        Stage::Animate => {
            let mask = Mask::from_image(&artifact(config, stage, MASK_ARTIFACT)?);
            let plate = artifact(config, stage, PLATE_ARTIFACT)?;
            let scene = build_scene(&image, &mask, &plate, config.mesh, config.sampling).at(step)?;
            let frames = render_clip(&scene, &config.animation).at(Step::Render)?;
            write_clip(config, &frames, &mut Timer(Vec::new()))?
        }
    };
    Ok(StageReport {
        stage,
        outputs,
        millis: start.elapsed().as_secs_f64() * 1e3,
    })
}
