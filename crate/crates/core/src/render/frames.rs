use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::imagecore::save_image;
use crate::render::composite::Frame;

/// Digits in a frame file name.
pub const FRAME_INDEX_DIGITS: usize = 4;

/// Longest sequence [`write_frame_sequence`] accepts; a 10000-frame clip is
/// rejected even though its last index would still fit four digits.
pub const MAX_FRAMES: usize = 9999;

/// Writes `<stem>_0000.png`, `<stem>_0001.png`, ... into `dir`, creating it
/// if needed. Frames are numbered by position in `frames`.
///
/// At most [`MAX_FRAMES`] frames; larger clips fail before touching the disk.
pub fn write_frame_sequence(frames: &[Frame], dir: &Path, stem: &str) -> Result<Vec<PathBuf>> {
    let max = MAX_FRAMES;
    if frames.len() > max {
        return Err(Error::FrameIndexOverflow { count: frames.len(), max });
    }
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    frames
        .iter()
        .enumerate()
        .map(|(i, frame)| {
            let path = dir.join(format!("{stem}_{i:0width$}.png", width = FRAME_INDEX_DIGITS));
            save_image(&frame.image, &path)?;
            Ok(path)
        })
        .collect()
}
