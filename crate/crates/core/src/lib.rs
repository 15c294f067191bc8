//! Turn a still image into a short animation: segment a subject from
//! user clicks, inpaint the background behind it, then deform a textured
//! triangle mesh of the subject over the filled plate.

pub mod error;
pub mod imagecore;
pub mod inpaint;
pub mod meshanim;
pub mod pipeline;
pub mod render;
pub mod segmentation;

pub use error::{Error, Result};
pub use imagecore::{ClickSet, ImageBuffer, Mask, ScalarField};
