//! Looping GIF89a encoder.
//!
//! Each frame carries its own 256-entry color table from
//! [`quantize`](crate::render::quantize), so clips with at most 256 colors
//! per frame round-trip exactly.

use crate::error::{Error, Result};
use crate::imagecore::ImageBuffer;
use crate::render::composite::Frame;
use crate::render::quantize::{quantize, Rgb};

const MAX_CODE: u16 = 4095;

/// Encodes frames as an infinitely looping GIF with `delay_cs`
/// hundredths of a second between frames.
///
/// Alpha is dropped: frames are expected to be opaque composites.
pub fn encode_gif(frames: &[Frame], delay_cs: u16) -> Result<Vec<u8>> {
    let first = frames.first().ok_or(Error::EmptyClip)?;
    let (w, h) = first.image.dimensions();
    if w > u32::from(u16::MAX) || h > u32::from(u16::MAX) {
        return Err(Error::InvalidParameter(format!("{w}x{h} exceeds the GIF size limit")));
    }
    let mut out = Vec::with_capacity(1024 + frames.len() * (w * h) as usize);
    out.extend_from_slice(b"GIF89a");
    out.extend_from_slice(&(w as u16).to_le_bytes());
    out.extend_from_slice(&(h as u16).to_le_bytes());
    // No global color table.
    out.extend_from_slice(&[0x00, 0x00, 0x00]);
    // Loop forever.
    out.extend_from_slice(&[0x21, 0xFF, 0x0B]);
    out.extend_from_slice(b"NETSCAPE2.0");
    out.extend_from_slice(&[0x03, 0x01, 0x00, 0x00, 0x00]);

    for frame in frames {
        let image = &frame.image;
        if image.dimensions() != (w, h) {
            let (aw, ah) = image.dimensions();
            return Err(Error::DimensionMismatch {
                expected_w: w,
                expected_h: h,
                actual_w: aw,
                actual_h: ah,
            });
        }
        write_frame(&mut out, image, delay_cs);
    }
    out.push(0x3B);
    Ok(out)
}

fn write_frame(out: &mut Vec<u8>, image: &ImageBuffer, delay_cs: u16) {
    let (w, h) = image.dimensions();
    let rgb: Vec<Rgb> = image.pixels().map(|[r, g, b, _]| [r, g, b]).collect();
    let indexed = quantize(&rgb, 256);

    // Graphic control: dispose "do not dispose", no transparency.
    out.extend_from_slice(&[0x21, 0xF9, 0x04, 0x04]);
    out.extend_from_slice(&delay_cs.to_le_bytes());
    out.extend_from_slice(&[0x00, 0x00]);

    out.push(0x2C);
    out.extend_from_slice(&[0, 0, 0, 0]);
    out.extend_from_slice(&(w as u16).to_le_bytes());
    out.extend_from_slice(&(h as u16).to_le_bytes());
    // Local table of 2^8 entries.
    out.push(0x80 | 0x07);
    for i in 0..256 {
        out.extend_from_slice(&indexed.palette.get(i).copied().unwrap_or([0, 0, 0]));
    }

    const MIN_CODE_SIZE: u8 = 8;
    out.push(MIN_CODE_SIZE);
    let data = lzw_encode(&indexed.indices, MIN_CODE_SIZE);
    for block in data.chunks(255) {
        out.push(block.len() as u8);
        out.extend_from_slice(block);
    }
    out.push(0x00);
}

struct BitWriter {
    bytes: Vec<u8>,
    acc: u32,
    nbits: u32,
}

impl BitWriter {
    fn write(&mut self, code: u16, width: u32) {
        self.acc |= u32::from(code) << self.nbits;
        self.nbits += width;
        while self.nbits >= 8 {
            self.bytes.push(self.acc as u8);
            self.acc >>= 8;
            self.nbits -= 8;
        }
    }

    fn finish(mut self) -> Vec<u8> {
        if self.nbits > 0 {
            self.bytes.push(self.acc as u8);
        }
        self.bytes
    }
}

/// Variable-width LZW with LSB-first packing. Emits a clear code when the
/// 12-bit table fills.
pub(crate) fn lzw_encode(indices: &[u8], min_code_size: u8) -> Vec<u8> {
    let clear: u16 = 1 << min_code_size;
    let end = clear + 1;
    let base_width = u32::from(min_code_size) + 1;
    let mut writer = BitWriter {
        bytes: Vec::with_capacity(indices.len()),
        acc: 0,
        nbits: 0,
    };
    let mut width = base_width;
    let mut next = end + 1;
    let mut table: std::collections::HashMap<(u16, u8), u16> = std::collections::HashMap::new();

    writer.write(clear, width);
    let Some((&head, rest)) = indices.split_first() else {
        writer.write(end, width);
        return writer.finish();
    };

    let mut prefix = u16::from(head);
    for &k in rest {
        if let Some(&code) = table.get(&(prefix, k)) {
            prefix = code;
            continue;
        }
        writer.write(prefix, width);
        // The decoder adds its entry one code later, so widen as soon as
        // `next` reaches the current width limit.
        if u32::from(next) >= (1 << width) && width < 12 {
            width += 1;
        }
        if next < MAX_CODE {
            table.insert((prefix, k), next);
            next += 1;
        } else {
            writer.write(clear, width);
            table.clear();
            next = end + 1;
            width = base_width;
        }
        prefix = u16::from(k);
    }
    writer.write(prefix, width);
    if u32::from(next) >= (1 << width) && width < 12 {
        width += 1;
    }
    writer.write(end, width);
    writer.finish()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn decode_lzw(data: &[u8], min_code_size: u8) -> Vec<u8> {
        // Straightforward reference decoder.
        let clear = 1usize << min_code_size;
        let end = clear + 1;
        let mut pos = 0usize;
        let read = |pos: &mut usize, width: usize| -> usize {
            let mut v = 0;
            for i in 0..width {
                let bit = (data[(*pos + i) / 8] >> ((*pos + i) % 8)) & 1;
                v |= usize::from(bit) << i;
            }
            *pos += width;
            v
        };
        let mut out = Vec::new();
        let mut dict: Vec<Vec<u8>> = Vec::new();
        let mut width = usize::from(min_code_size) + 1;
        let mut prev: Option<Vec<u8>> = None;
        loop {
            let code = read(&mut pos, width);
            if code == clear {
                dict = (0..clear).map(|i| vec![i as u8]).collect();
                dict.push(vec![]);
                dict.push(vec![]);
                width = usize::from(min_code_size) + 1;
                prev = None;
                continue;
            }
            if code == end {
                return out;
            }
            let entry = if code < dict.len() {
                dict[code].clone()
            } else {
                let p = prev.clone().unwrap();
                let mut e = p.clone();
                e.push(p[0]);
                e
            };
            out.extend_from_slice(&entry);
            if let Some(p) = prev {
                let mut e = p;
                e.push(entry[0]);
                dict.push(e);
                if dict.len() == (1 << width) && width < 12 {
                    width += 1;
                }
            }
            prev = Some(entry);
        }
    }

    #[test]
    fn lzw_round_trip() {
        for data in [
            vec![],
            vec![7u8],
            vec![0; 10_000],
            (0..20_000u32).map(|i| (i.wrapping_mul(2_654_435_761) >> 24) as u8).collect(),
            (0..9000u32).map(|i| (i % 3) as u8).collect(),
        ] {
            assert_eq!(decode_lzw(&lzw_encode(&data, 8), 8), data);
        }
    }

    #[test]
    fn empty_clip_rejected() {
        assert!(matches!(encode_gif(&[], 4), Err(Error::EmptyClip)));
    }

    #[test]
    fn header_and_trailer() {
        let frame = Frame {
            index: 0,
            image: ImageBuffer::filled(3, 2, [1, 2, 3, 255]).unwrap(),
        };
        let bytes = encode_gif(&[frame], 4).unwrap();
        assert_eq!(&bytes[..6], b"GIF89a");
        assert_eq!(&bytes[6..10], &[3, 0, 2, 0]);
        assert_eq!(*bytes.last().unwrap(), 0x3B);
    }
}
