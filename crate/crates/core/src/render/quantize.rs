//! Median-cut palette reduction to at most 256 colors.

use std::collections::HashMap;

pub type Rgb = [u8; 3];

/// A palette and one palette index per input pixel.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Indexed {
    pub palette: Vec<Rgb>,
    pub indices: Vec<u8>,
}

struct ColorBox {
    /// (color, pixel count), a contiguous slice of the sorted color list.
    colors: Vec<(Rgb, u32)>,
}

impl ColorBox {
    fn ranges(&self) -> [u8; 3] {
        let mut lo = [u8::MAX; 3];
        let mut hi = [0u8; 3];
        for (c, _) in &self.colors {
            for k in 0..3 {
                lo[k] = lo[k].min(c[k]);
                hi[k] = hi[k].max(c[k]);
            }
        }
        [0, 1, 2].map(|k| hi[k].saturating_sub(lo[k]))
    }

    fn widest(&self) -> (usize, u8) {
        let r = self.ranges();
        // Ties go to the lower channel.
        (0..3).fold((0, r[0]), |best, k| if r[k] > best.1 { (k, r[k]) } else { best })
    }

    fn mean(&self) -> Rgb {
        let mut sum = [0u64; 3];
        let mut n = 0u64;
        for (c, count) in &self.colors {
            for k in 0..3 {
                sum[k] += u64::from(c[k]) * u64::from(*count);
            }
            n += u64::from(*count);
        }
        sum.map(|s| ((s + n / 2) / n) as u8)
    }

    /// Splits at the pixel-weighted median of the widest channel.
    fn split(mut self) -> (ColorBox, ColorBox) {
        let (axis, _) = self.widest();
        self.colors.sort_unstable_by_key(|(c, _)| (c[axis], *c));
        let total: u64 = self.colors.iter().map(|(_, n)| u64::from(*n)).sum();
        let mut acc = 0u64;
        let mut cut = 1;
        for (i, (_, n)) in self.colors.iter().enumerate() {
            acc += u64::from(*n);
            if 2 * acc >= total {
                cut = i + 1;
                break;
            }
        }
        // Both halves keep at least one color.
        let cut = cut.clamp(1, self.colors.len() - 1);
        let rest = self.colors.split_off(cut);
        (self, ColorBox { colors: rest })
    }
}

/// Reduces `pixels` to at most `max_colors` (2..=256) palette entries.
///
/// Inputs with no more distinct colors than that get an exact palette in
/// ascending color order. Otherwise boxes are split repeatedly, always the
/// box with the widest channel range, and each box maps to its
/// pixel-weighted mean color.
pub fn quantize(pixels: &[Rgb], max_colors: usize) -> Indexed {
    let max_colors = max_colors.clamp(2, 256);
    let mut histogram: HashMap<Rgb, u32> = HashMap::new();
    for &p in pixels {
        *histogram.entry(p).or_default() += 1;
    }
    let mut colors: Vec<(Rgb, u32)> = histogram.into_iter().collect();
    colors.sort_unstable();

    let (palette, lookup): (Vec<Rgb>, HashMap<Rgb, u8>) = if colors.len() <= max_colors {
        let palette: Vec<Rgb> = colors.iter().map(|(c, _)| *c).collect();
        let lookup = palette.iter().enumerate().map(|(i, c)| (*c, i as u8)).collect();
        (palette, lookup)
    } else {
        let mut boxes = vec![ColorBox { colors }];
        while boxes.len() < max_colors {
            let Some(pick) = boxes
                .iter()
                .enumerate()
                .filter(|(_, b)| b.colors.len() > 1)
                .max_by_key(|(i, b)| (b.widest().1, std::cmp::Reverse(*i)))
                .map(|(i, _)| i)
            else {
                break;
            };
            let (a, b) = boxes.swap_remove(pick).split();
            boxes.push(a);
            boxes.push(b);
        }
        let mut lookup = HashMap::new();
        let palette = boxes
            .iter()
            .enumerate()
            .map(|(i, b)| {
                for (c, _) in &b.colors {
                    lookup.insert(*c, i as u8);
                }
                b.mean()
            })
            .collect();
        (palette, lookup)
    };
    let indices = pixels.iter().map(|p| lookup[p]).collect();
    Indexed { palette, indices }
}
