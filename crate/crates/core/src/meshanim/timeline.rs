use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::meshanim::jump::{apply_pose, jump_pose, JumpTimeline};
use crate::meshanim::mesh::{Mesh, Vec2};
use crate::meshanim::wave::{horizontal_wave, vertical_wave, WaveParams};

/// A deformation of the subject mesh over the clip.
#[derive(Debug, Clone, PartialEq)]
pub enum Animation {
    HorizontalWave(WaveParams),
    VerticalWave(WaveParams),
    /// Scales about the bottom-center of the rest mesh and lifts by a
    /// fraction of its height.
    Jump(JumpTimeline),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AnimationKind {
    Hwave,
    Vwave,
    Jump,
}

/// The animation document shared by the CLI config and the HTTP service:
///
/// ```json
/// {"kind": "hwave", "amplitude": 4, "waves": 1, "speed": 1, "phase0": 0,
///  "frames": 24, "duration": 2, "keyframes": null}
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnimationSpec {
    pub kind: AnimationKind,
    pub amplitude: f64,
    pub waves: f64,
    pub speed: f64,
    pub phase0: f64,
    pub frames: u32,
    /// Clip length in seconds.
    pub duration: f64,
    /// Replaces the default jump timeline.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub keyframes: Option<JumpTimeline>,
}

impl Default for AnimationSpec {
    fn default() -> Self {
        let wave = WaveParams::default();
        Self {
            kind: AnimationKind::Jump,
            amplitude: wave.amplitude,
            waves: wave.wave_count,
            speed: wave.speed,
            phase0: wave.phase0,
            frames: 24,
            duration: 2.0,
            keyframes: None,
        }
    }
}

impl AnimationSpec {
    pub fn wave_params(&self) -> WaveParams {
        WaveParams {
            amplitude: self.amplitude,
            wave_count: self.waves,
            speed: self.speed,
            phase0: self.phase0,
        }
    }

    pub fn animation(&self) -> Animation {
        match self.kind {
            AnimationKind::Hwave => Animation::HorizontalWave(self.wave_params()),
            AnimationKind::Vwave => Animation::VerticalWave(self.wave_params()),
            AnimationKind::Jump => Animation::Jump(self.keyframes.clone().unwrap_or_default()),
        }
    }

    /// Every out-of-range field.
    pub fn problems(&self) -> Vec<String> {
        let mut out: Vec<String> = match self.kind {
            AnimationKind::Hwave | AnimationKind::Vwave => self.wave_params().problems(),
            AnimationKind::Jump => Vec::new(),
        };
        if self.frames == 0 {
            out.push("frames must be at least 1".to_owned());
        }
        if !(self.duration.is_finite() && self.duration > 0.0) {
            out.push(format!("duration must be > 0, got {}", self.duration));
        }
        out
    }

    pub fn validate(&self) -> Result<()> {
        let problems = self.problems();
        if problems.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidParameter(problems.join("; ")))
        }
    }
}

/// Clip fraction of frame `index` out of `frame_count`.
pub fn frame_time(index: u32, frame_count: u32) -> f64 {
    if frame_count <= 1 {
        0.0
    } else {
        f64::from(index) / f64::from(frame_count - 1)
    }
}

/// The rest mesh deformed at clip fraction `t ∈ [0, 1]`.
///
/// Waves run on wall-clock time `t · duration`; the jump runs on the clip
/// fraction directly.
pub fn deform(rest: &Mesh, animation: &Animation, t: f64, duration: f64) -> Result<Mesh> {
    if !(0.0..=1.0).contains(&t) {
        return Err(Error::InvalidParameter(format!("clip time {t} outside [0, 1]")));
    }
    match animation {
        Animation::HorizontalWave(p) => horizontal_wave(rest, p, t * duration),
        Animation::VerticalWave(p) => vertical_wave(rest, p, t * duration),
        Animation::Jump(timeline) => {
            let (x0, y0, x1, y1) = rest
                .bounds()
                .ok_or_else(|| Error::InvalidMesh("mesh has no vertices".into()))?;
            let pose = jump_pose(timeline, t)?;
            apply_pose(rest, &pose, Vec2::new(0.5 * (x0 + x1), y1), y1 - y0)
        }
    }
}

/// `frame_count` deformed meshes at `t = i / (frame_count − 1)`.
pub fn sample_timeline(rest: &Mesh, animation: &Animation, frame_count: u32, duration: f64) -> Result<Vec<Mesh>> {
    if frame_count == 0 {
        return Err(Error::InvalidParameter("frame count must be at least 1".into()));
    }
    if !(duration.is_finite() && duration > 0.0) {
        return Err(Error::InvalidParameter(format!("duration must be > 0, got {duration}")));
    }
    (0..frame_count)
        .map(|i| deform(rest, animation, frame_time(i, frame_count), duration))
        .collect()
}
