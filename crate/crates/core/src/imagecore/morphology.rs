//! Binary dilation and erosion with a disc structuring element.
//!
//! A pixel lies in `dilate(m, r)` iff some set pixel is within Euclidean
//! distance `r` of it, which is a threshold on the exact squared distance
//! transform of `m`. Erosion is the complement dual, so pixels outside the
//! image behave as unset for dilation and as set for erosion.

use crate::imagecore::distance::squared_edt;
use crate::imagecore::Mask;

pub fn dilate(mask: &Mask, radius: u32) -> Mask {
    if radius == 0 {
        return mask.clone();
    }
    let (w, h) = mask.dimensions();
    let limit = f64::from(radius) * f64::from(radius);
    let sq = squared_edt(mask.bits(), w as usize, h as usize);
    Mask::from_bits(w, h, sq.into_iter().map(|d| d <= limit).collect())
        .expect("dimensions preserved")
}

pub fn erode(mask: &Mask, radius: u32) -> Mask {
    if radius == 0 {
        return mask.clone();
    }
    dilate(&mask.complement(), radius).complement()
}

/// Dilation followed by erosion, computed as if the image extended
/// without bound with unset pixels, then cropped. Regions near the border
/// are not pulled towards it.
pub fn close(mask: &Mask, radius: u32) -> Mask {
    if radius == 0 {
        return mask.clone();
    }
    let (w, h) = mask.dimensions();
    let pad = radius;
    let padded = Mask::from_fn(w + 2 * pad, h + 2 * pad, |x, y| {
        x >= pad && y >= pad && x - pad < w && y - pad < h && mask.get(x - pad, y - pad)
    })
    .expect("non-empty");
    let closed = erode(&dilate(&padded, radius), radius);
    Mask::from_fn(w, h, |x, y| closed.get(x + pad, y + pad)).expect("dimensions preserved")
}
