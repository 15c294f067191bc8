//! Raster primitives: image and mask containers, file I/O, distance
//! transform, morphology, connected components and edge detectors.

mod buffer;
mod clicks;
mod components;
mod distance;
mod edges;
mod io;
mod morphology;

pub use buffer::{ImageBuffer, Mask, Rgba, ScalarField};
pub(crate) use buffer::{check_dims, check_same};
pub use clicks::{ClickSet, Point};

pub use components::{connected_components, Labels};
pub use distance::{distance_transform, empty_sentinel};
pub use edges::{canny_edges, sobel_gradient, CANNY_SIGMA};
pub use io::{decode_image, encode_png, load_image, save_image};
pub use morphology::{close, dilate, erode};
