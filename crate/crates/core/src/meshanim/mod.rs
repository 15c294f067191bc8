//! Scene meshes and their deformation over time: horizontal and vertical
//! travelling waves and a keyframed jump.

mod jump;
mod mesh;
mod timeline;
mod wave;

pub use jump::{apply_pose, default_jump_timeline, jump_pose, JumpTimeline, Keyframe, PoseParams};
pub use mesh::{make_grid_mesh, Mesh, Rect, Vec2};
pub use timeline::{deform, frame_time, sample_timeline, Animation, AnimationKind, AnimationSpec};
pub use wave::{horizontal_wave, vertical_wave, WaveParams};
