use crate::error::{Error, Result};
use crate::imagecore::{check_same, ImageBuffer, Mask};
use crate::meshanim::{make_grid_mesh, Mesh, Rect};
use crate::render::raster::{rasterize_mesh, Sampling};

/// Default subject mesh density.
pub const DEFAULT_MESH_CELLS: (u32, u32) = (24, 24);

/// Everything needed to draw any frame of a clip.
#[derive(Debug, Clone)]
pub struct Scene {
    background: ImageBuffer,
    subject_texture: ImageBuffer,
    background_mesh: Mesh,
    subject_rest: Mesh,
    sampling: Sampling,
}

/// One rendered animation frame.
#[derive(Debug, Clone, PartialEq)]
pub struct Frame {
    pub index: u32,
    pub image: ImageBuffer,
}

impl Scene {
    /// Builds a scene from the original image, its subject mask and the
    /// inpainted background plate.
    ///
    /// The subject texture is the original with alpha cleared outside the
    /// mask; its rest mesh is an `nx × ny` grid over the mask's bounding box.
    pub fn new(image: &ImageBuffer, mask: &Mask, plate: &ImageBuffer, cells: (u32, u32), sampling: Sampling) -> Result<Self> {
        let (w, h) = image.dimensions();
        check_same((w, h), plate.dimensions())?;
        check_same((w, h), mask.dimensions())?;
        let (x0, y0, x1, y1) = mask
            .bounding_box()
            .ok_or_else(|| Error::InvalidParameter("subject mask is empty".into()))?;
        let rect = Rect::new(f64::from(x0), f64::from(y0), f64::from(x1 - x0 + 1), f64::from(y1 - y0 + 1));
        let mut subject_rest = make_grid_mesh(rect, cells.0, cells.1)?;
        subject_rest.fit_uvs_to_texture(w, h);
        let mut background_mesh = make_grid_mesh(Rect::new(0.0, 0.0, f64::from(w), f64::from(h)), 2, 2)?;
        background_mesh.fit_uvs_to_texture(w, h);
        Ok(Self {
            background: plate.clone(),
            subject_texture: image.with_mask_alpha(mask)?,
            background_mesh,
            subject_rest,
            sampling,
        })
    }

    pub fn dimensions(&self) -> (u32, u32) {
        self.background.dimensions()
    }

    pub fn subject_rest(&self) -> &Mesh {
        &self.subject_rest
    }

    pub fn subject_texture(&self) -> &ImageBuffer {
        &self.subject_texture
    }

    pub fn background(&self) -> &ImageBuffer {
        &self.background
    }

    pub fn sampling(&self) -> Sampling {
        self.sampling
    }
}

/// Draws the background plate and then the subject deformed to `subject`
/// onto a transparent canvas.
pub fn composite_frame(scene: &Scene, subject: &Mesh, index: u32) -> Result<Frame> {
    if !subject.same_topology(&scene.subject_rest) {
        return Err(Error::TopologyMismatch);
    }
    let (w, h) = scene.dimensions();
    let mut image = ImageBuffer::transparent(w, h)?;
    rasterize_mesh(&scene.background_mesh, &scene.background, &mut image, scene.sampling)?;
    rasterize_mesh(subject, &scene.subject_texture, &mut image, scene.sampling)?;
    Ok(Frame { index, image })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fixture() -> (ImageBuffer, Mask, ImageBuffer) {
        let image = ImageBuffer::from_fn(16, 12, |x, y| [(x * 15) as u8, (y * 20) as u8, 77, 255]).unwrap();
        let mask = Mask::from_fn(16, 12, |x, y| (4..9).contains(&x) && (3..8).contains(&y)).unwrap();
        let plate = ImageBuffer::filled(16, 12, [10, 20, 30, 255]).unwrap();
        (image, mask, plate)
    }

    #[test]
    fn rest_frame_is_plate_with_subject() {
        let (image, mask, plate) = fixture();
        let scene = Scene::new(&image, &mask, &plate, (5, 5), Sampling::Nearest).unwrap();
        let frame = composite_frame(&scene, scene.subject_rest(), 3).unwrap();
        assert_eq!(frame.index, 3);
        for y in 0..12 {
            for x in 0..16 {
                let expect = if mask.get(x, y) { image.get(x, y) } else { plate.get(x, y) };
                assert_eq!(frame.image.get(x, y), expect, "({x}, {y})");
            }
        }
    }

    #[test]
    fn subject_moved_off_canvas_leaves_plate() {
        let (image, mask, plate) = fixture();
        let scene = Scene::new(&image, &mask, &plate, (4, 4), Sampling::Bilinear).unwrap();
        let mut gone = scene.subject_rest().clone();
        for v in &mut gone.vertices {
            v.x += 1000.0;
        }
        assert_eq!(composite_frame(&scene, &gone, 0).unwrap().image, plate);
    }

    #[test]
    fn topology_must_match() {
        let (image, mask, plate) = fixture();
        let scene = Scene::new(&image, &mask, &plate, (4, 4), Sampling::Nearest).unwrap();
        let mut other = scene.subject_rest().clone();
        other.triangles.pop();
        assert!(matches!(composite_frame(&scene, &other, 0), Err(Error::TopologyMismatch)));
    }

    #[test]
    fn empty_mask_or_size_mismatch_rejected() {
        let (image, mask, plate) = fixture();
        let empty = Mask::new(16, 12).unwrap();
        assert!(Scene::new(&image, &empty, &plate, (4, 4), Sampling::Nearest).is_err());
        let small = ImageBuffer::filled(8, 8, [0; 4]).unwrap();
        assert!(Scene::new(&image, &mask, &small, (4, 4), Sampling::Nearest).is_err());
    }
}
