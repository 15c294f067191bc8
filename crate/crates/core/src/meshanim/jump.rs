//! Keyframed squash-and-stretch jump.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::meshanim::mesh::{Mesh, Vec2};

/// Scale about an anchor plus an upward translation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PoseParams {
    pub scale_x: f64,
    pub scale_y: f64,
    /// Fraction of the subject height; positive moves up (towards smaller y).
    pub translate_y: f64,
}

impl PoseParams {
    pub const REST: PoseParams = PoseParams::new(1.0, 1.0, 0.0);

    pub const fn new(scale_x: f64, scale_y: f64, translate_y: f64) -> Self {
        Self {
            scale_x,
            scale_y,
            translate_y,
        }
    }

    fn lerp(a: &Self, b: &Self, s: f64) -> Self {
        let mix = |p: f64, q: f64| p + (q - p) * s;
        Self::new(
            mix(a.scale_x, b.scale_x),
            mix(a.scale_y, b.scale_y),
            mix(a.translate_y, b.translate_y),
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Keyframe {
    /// Fraction of the clip in `[0, 1]`.
    pub time: f64,
    #[serde(flatten)]
    pub pose: PoseParams,
}

/// Keyframes with strictly increasing times from 0 to 1, starting and
/// ending at rest.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct JumpTimeline {
    keyframes: Vec<Keyframe>,
}

impl<'de> Deserialize<'de> for JumpTimeline {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let keyframes = Vec::<Keyframe>::deserialize(d)?;
        JumpTimeline::new(keyframes).map_err(serde::de::Error::custom)
    }
}

impl JumpTimeline {
    pub fn new(keyframes: Vec<Keyframe>) -> Result<Self> {
        let bad = |msg: String| Err(Error::InvalidParameter(format!("jump timeline: {msg}")));
        let (Some(first), Some(last)) = (keyframes.first(), keyframes.last()) else {
            return bad("no keyframes".into());
        };
        if keyframes.len() < 2 {
            return bad("needs at least two keyframes".into());
        }
        if first.time != 0.0 || last.time != 1.0 {
            return bad(format!("times must run from 0 to 1, got {} .. {}", first.time, last.time));
        }
        if first.pose != PoseParams::REST || last.pose != PoseParams::REST {
            return bad("first and last poses must be the rest pose (1, 1, 0)".into());
        }
        if let Some(w) = keyframes.windows(2).find(|w| !(w[1].time > w[0].time)) {
            return bad(format!("times must strictly increase ({} then {})", w[0].time, w[1].time));
        }
        for k in &keyframes {
            let p = k.pose;
            if !(p.scale_x > 0.0 && p.scale_y > 0.0 && p.scale_x.is_finite() && p.scale_y.is_finite())
                || !p.translate_y.is_finite()
            {
                return bad(format!("pose at t={} needs finite positive scales", k.time));
            }
        }
        Ok(Self { keyframes })
    }

    pub fn keyframes(&self) -> &[Keyframe] {
        &self.keyframes
    }
}

impl Default for JumpTimeline {
    fn default() -> Self {
        default_jump_timeline()
    }
}

/// Six phases: rest, crouch, peak, landing squash, small bounce, rest.
pub fn default_jump_timeline() -> JumpTimeline {
    let k = |time, sx, sy, ty| Keyframe {
        time,
        pose: PoseParams::new(sx, sy, ty),
    };
    JumpTimeline {
        keyframes: vec![
            k(0.00, 1.00, 1.00, 0.00),
            k(0.15, 1.10, 0.90, 0.00),
            k(0.45, 0.90, 1.10, 0.50),
            k(0.70, 1.05, 0.95, 0.00),
            k(0.85, 1.00, 1.00, 0.02),
            k(1.00, 1.00, 1.00, 0.00),
        ],
    }
}

/// Component-wise linear interpolation between the keyframes around `t`.
pub fn jump_pose(timeline: &JumpTimeline, t: f64) -> Result<PoseParams> {
    if !(0.0..=1.0).contains(&t) {
        return Err(Error::InvalidParameter(format!("jump time {t} outside [0, 1]")));
    }
    let keys = timeline.keyframes();
    if let Some(k) = keys.iter().find(|k| k.time == t) {
        return Ok(k.pose);
    }
    let after = keys.iter().position(|k| k.time > t).expect("last keyframe is at t = 1");
    let (a, b) = (&keys[after - 1], &keys[after]);
    Ok(PoseParams::lerp(&a.pose, &b.pose, (t - a.time) / (b.time - a.time)))
}

/// Scales every vertex about `anchor`, then lifts it by
/// `translate_y · subject_height` pixels.
pub fn apply_pose(rest: &Mesh, pose: &PoseParams, anchor: Vec2, subject_height: f64) -> Result<Mesh> {
    if !(subject_height > 0.0 && subject_height.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "subject height must be positive, got {subject_height}"
        )));
    }
    if !(pose.scale_x > 0.0 && pose.scale_y > 0.0) {
        return Err(Error::InvalidParameter(format!("pose scales must be positive: {pose:?}")));
    }
    let lift = pose.translate_y * subject_height;
    // Written as offsets from the rest position so the rest pose is exact.
    let vertices = rest
        .vertices
        .iter()
        .map(|v| {
            Vec2::new(
                v.x + (pose.scale_x - 1.0) * (v.x - anchor.x),
                v.y + (pose.scale_y - 1.0) * (v.y - anchor.y) - lift,
            )
        })
        .collect();
    Ok(rest.with_vertices(vertices))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::meshanim::mesh::{make_grid_mesh, Rect};

    fn close(a: PoseParams, b: PoseParams) -> bool {
        (a.scale_x - b.scale_x).abs() < 1e-12
            && (a.scale_y - b.scale_y).abs() < 1e-12
            && (a.translate_y - b.translate_y).abs() < 1e-12
    }

    #[test]
    fn default_keyframes() {
        let tl = default_jump_timeline();
        let k = tl.keyframes();
        assert_eq!(k.len(), 6);
        assert_eq!(k[1].pose, PoseParams::new(1.10, 0.90, 0.00));
        assert_eq!(k[2].pose, PoseParams::new(0.90, 1.10, 0.50));
        assert_eq!(k[4].pose, PoseParams::new(1.00, 1.00, 0.02));
        assert_eq!(
            k.iter().map(|k| k.time).collect::<Vec<_>>(),
            vec![0.0, 0.15, 0.45, 0.70, 0.85, 1.0]
        );
        assert!(JumpTimeline::new(k.to_vec()).is_ok());
    }

    #[test]
    fn pose_at_keyframes_and_between() {
        let tl = default_jump_timeline();
        assert_eq!(jump_pose(&tl, 0.0).unwrap(), PoseParams::REST);
        assert_eq!(jump_pose(&tl, 0.45).unwrap(), PoseParams::new(0.90, 1.10, 0.50));
        assert_eq!(jump_pose(&tl, 1.0).unwrap(), PoseParams::REST);
        assert!(close(jump_pose(&tl, 0.075).unwrap(), PoseParams::new(1.05, 0.95, 0.0)));
        assert!(jump_pose(&tl, 1.01).is_err());
        assert!(jump_pose(&tl, -0.1).is_err());
    }

    #[test]
    fn pose_is_continuous_at_keyframes() {
        let tl = default_jump_timeline();
        for k in &tl.keyframes()[1..] {
            let before = jump_pose(&tl, k.time - 1e-6).unwrap();
            let at = jump_pose(&tl, k.time).unwrap();
            assert!((before.scale_x - at.scale_x).abs() < 1e-5);
            assert!((before.scale_y - at.scale_y).abs() < 1e-5);
            assert!((before.translate_y - at.translate_y).abs() < 1e-5);
        }
    }

    #[test]
    fn timeline_validation() {
        let rest = |time| Keyframe { time, pose: PoseParams::REST };
        assert!(JumpTimeline::new(vec![rest(0.0), rest(1.0)]).is_ok());
        assert!(JumpTimeline::new(vec![rest(0.0), rest(0.5), rest(0.5), rest(1.0)]).is_err());
        assert!(JumpTimeline::new(vec![rest(0.1), rest(1.0)]).is_err());
        let squashed = Keyframe { time: 1.0, pose: PoseParams::new(1.2, 0.8, 0.0) };
        assert!(JumpTimeline::new(vec![rest(0.0), squashed]).is_err());
        let json = r#"[{"time":0,"scale_x":1,"scale_y":1,"translate_y":0},
                       {"time":0.5,"scale_x":1.2,"scale_y":0.8,"translate_y":0.3},
                       {"time":1,"scale_x":1,"scale_y":1,"translate_y":0}]"#;
        let tl: JumpTimeline = serde_json::from_str(json).unwrap();
        assert_eq!(tl.keyframes()[1].pose.translate_y, 0.3);
        assert!(serde_json::from_str::<JumpTimeline>("[]").is_err());
    }

    #[test]
    fn apply_pose_arithmetic() {
        let m = make_grid_mesh(Rect::new(0.0, 0.0, 6.0, 4.0), 2, 1).unwrap();
        assert_eq!(apply_pose(&m, &PoseParams::REST, Vec2::new(3.1, 0.7), 10.0).unwrap(), m);

        let anchor = m.vertices[0];
        let wide = apply_pose(&m, &PoseParams::new(2.0, 1.0, 0.0), anchor, 4.0).unwrap();
        assert_eq!(wide.vertices[0], anchor);
        assert_eq!(m.vertices[1].x, anchor.x + 3.0);
        assert_eq!(wide.vertices[1].x, anchor.x + 6.0);

        let lifted = apply_pose(&m, &PoseParams::new(1.0, 1.0, 0.5), anchor, 100.0).unwrap();
        for (a, b) in m.vertices.iter().zip(&lifted.vertices) {
            assert_eq!(b.y, a.y - 50.0);
            assert_eq!(b.x, a.x);
        }
        assert!(apply_pose(&m, &PoseParams::REST, anchor, 0.0).is_err());
    }
}
