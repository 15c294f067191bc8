//! Mesh rasterization, frame compositing and clip export.

mod composite;
mod frames;
mod gif;
mod quantize;
mod raster;

pub use composite::{composite_frame, Frame, Scene, DEFAULT_MESH_CELLS};
pub use frames::{write_frame_sequence, FRAME_INDEX_DIGITS, MAX_FRAMES};
pub use gif::encode_gif;
pub use quantize::{quantize, Indexed, Rgb};
pub use raster::{blend_over, coverage_counts, rasterize_mesh, Sampling};
