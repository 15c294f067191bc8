//! PNG and binary PPM reading, PNG writing.

use std::io::Cursor;
use std::path::Path;

use image::{ImageError, ImageFormat, ImageReader};

use crate::error::{Error, Result};
use crate::imagecore::ImageBuffer;

/// Decodes a PNG or PPM file. Gray and RGB inputs come back with alpha 255.
pub fn load_image(path: impl AsRef<Path>) -> Result<ImageBuffer> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|e| match e.kind() {
        std::io::ErrorKind::NotFound => Error::NotFound(path.to_path_buf()),
        _ => Error::io(path, e),
    })?;
    decode_image(&bytes).map_err(|e| match e {
        Error::Decode { reason, .. } => Error::Decode {
            path: path.to_path_buf(),
            reason,
        },
        other => other,
    })
}

/// Decodes PNG or PPM bytes held in memory.
pub fn decode_image(bytes: &[u8]) -> Result<ImageBuffer> {
    let decode_err = |reason: String| Error::Decode {
        path: "<memory>".into(),
        reason,
    };
    let reader = ImageReader::new(Cursor::new(bytes))
        .with_guessed_format()
        .map_err(|e| decode_err(e.to_string()))?;
    match reader.format() {
        Some(ImageFormat::Png | ImageFormat::Pnm) => {}
        _ => return Err(decode_err("unsupported or unrecognized format".into())),
    }
    let decoded = reader.decode().map_err(|e| decode_err(e.to_string()))?;
    let rgba = decoded.to_rgba8();
    let (w, h) = rgba.dimensions();
    if w == 0 || h == 0 {
        return Err(Error::ZeroDimension {
            width: w,
            height: h,
        });
    }
    ImageBuffer::from_raw(w, h, rgba.into_raw())
}

/// Writes an 8-bit RGBA, non-interlaced PNG.
pub fn save_image(image: &ImageBuffer, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let bytes = encode_png(image);
    std::fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

/// PNG bytes for `image`.
pub fn encode_png(image: &ImageBuffer) -> Vec<u8> {
    let mut out = Vec::new();
    image::write_buffer_with_format(
        &mut Cursor::new(&mut out),
        image.as_raw(),
        image.width(),
        image.height(),
        image::ExtendedColorType::Rgba8,
        ImageFormat::Png,
    )
    .map_err(|e| match e {
        ImageError::IoError(e) => e,
        other => std::io::Error::other(other),
    })
    .expect("in-memory PNG encoding of a valid buffer");
    out
}
