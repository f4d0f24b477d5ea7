//! Fill order: confidence times data term.

use crate::image::{Coord, MaskImage, RasterImage};
use crate::inpaint::cost::target_origin;

/// Floor of the data term, so flat regions are still ordered by confidence.
pub const EPSILON: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq)]
pub struct ConfidenceMap {
    width: usize,
    height: usize,
    values: Vec<f64>,
}

impl ConfidenceMap {
    /// 1 on KNOWN pixels, 0 elsewhere.
    pub fn new(mask: &MaskImage) -> Self {
        Self {
            width: mask.width(),
            height: mask.height(),
            values: mask
                .flags()
                .iter()
                .map(|&k| if k { 1.0 } else { 0.0 })
                .collect(),
        }
    }

    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.values[y * self.width + x]
    }

    /// Clamped to `[0, 1]`.
    pub fn set(&mut self, x: usize, y: usize, value: f64) {
        self.values[y * self.width + x] = value.clamp(0.0, 1.0);
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    /// Mean confidence of KNOWN pixels over the window at `origin`, unknown
    /// pixels counting as 0.
    pub fn window_term(&self, mask: &MaskImage, origin: Coord, size: usize) -> f64 {
        let mut sum = 0.0;
        for y in origin.y..origin.y + size {
            for x in origin.x..origin.x + size {
                if mask.is_known(x, y) {
                    sum += self.get(x, y);
                }
            }
        }
        sum / (size * size) as f64
    }
}

/// Central difference using only the neighbors that exist; one-sided with a
/// single neighbor, 0 with none.
fn difference(prev: Option<f64>, here: f64, next: Option<f64>) -> f64 {
    match (prev, next) {
        (Some(p), Some(n)) => (n - p) / 2.0,
        (Some(p), None) => here - p,
        (None, Some(n)) => n - here,
        (None, None) => 0.0,
    }
}

/// Intensity gradient at a KNOWN pixel, reading only KNOWN neighbors.
pub fn intensity_gradient(image: &RasterImage, mask: &MaskImage, p: Coord) -> (f64, f64) {
    let (w, h) = (image.width(), image.height());
    let at = |x: usize, y: usize| mask.is_known(x, y).then(|| image.intensity(x, y));
    let here = image.intensity(p.x, p.y);
    let left = if p.x > 0 { at(p.x - 1, p.y) } else { None };
    let right = if p.x + 1 < w { at(p.x + 1, p.y) } else { None };
    let up = if p.y > 0 { at(p.x, p.y - 1) } else { None };
    let down = if p.y + 1 < h { at(p.x, p.y + 1) } else { None };
    (difference(left, here, right), difference(up, here, down))
}

/// Unit normal of the fill boundary at `p` from differences of the KNOWN
/// indicator; `None` where that gradient vanishes.
pub fn boundary_normal(mask: &MaskImage, p: Coord) -> Option<(f64, f64)> {
    let (w, h) = (mask.width(), mask.height());
    let at = |x: usize, y: usize| Some(if mask.is_known(x, y) { 1.0 } else { 0.0 });
    let here = if mask.is_known(p.x, p.y) { 1.0 } else { 0.0 };
    let left = if p.x > 0 { at(p.x - 1, p.y) } else { None };
    let right = if p.x + 1 < w { at(p.x + 1, p.y) } else { None };
    let up = if p.y > 0 { at(p.x, p.y - 1) } else { None };
    let down = if p.y + 1 < h { at(p.x, p.y + 1) } else { None };
    let (nx, ny) = (difference(left, here, right), difference(up, here, down));
    let len = nx.hypot(ny);
    (len > 0.0).then(|| (nx / len, ny / len))
}

/// Isophote strength across the boundary, over 255, plus [`EPSILON`].
pub fn data_term(image: &RasterImage, mask: &MaskImage, center: Coord, size: usize) -> f64 {
    data_term_with(image, mask, center, size, |p| {
        intensity_gradient(image, mask, p)
    })
}

/// [`data_term`] reading gradients of KNOWN pixels from `gradient`.
pub(crate) fn data_term_with(
    image: &RasterImage,
    mask: &MaskImage,
    center: Coord,
    size: usize,
    gradient: impl Fn(Coord) -> (f64, f64),
) -> f64 {
    let Some((nx, ny)) = boundary_normal(mask, center) else {
        return EPSILON;
    };
    let origin = target_origin(image.width(), image.height(), center, size);
    let mut best = (0.0, 0.0);
    let mut best_mag = -1.0;
    for y in origin.y..origin.y + size {
        for x in origin.x..origin.x + size {
            if !mask.is_known(x, y) {
                continue;
            }
            let g = gradient(Coord::new(x, y));
            let mag = g.0 * g.0 + g.1 * g.1;
            if mag > best_mag {
                best_mag = mag;
                best = g;
            }
        }
    }
    // isophote is the gradient rotated by 90 degrees
    let (ix, iy) = (-best.1, best.0);
    (ix * nx + iy * ny).abs() / 255.0 + EPSILON
}

/// `C · Dt` for the target window around `center`.
pub fn compute_priority(
    center: Coord,
    image: &RasterImage,
    mask: &MaskImage,
    confidence: &ConfidenceMap,
    size: usize,
) -> f64 {
    let origin = target_origin(image.width(), image.height(), center, size);
    confidence.window_term(mask, origin, size) * data_term(image, mask, center, size)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn step_scene(step: u8) -> (RasterImage, MaskImage) {
        // vertical edge at x = 10, rows from y = 10 down unknown
        let (w, h) = (20, 20);
        let data = (0..w * h)
            .map(|i| if i % w < 10 { 0 } else { step })
            .collect();
        let img = RasterImage::new(w, h, 1, data).unwrap();
        let mut mask = MaskImage::all_known(w, h);
        for y in 10..h {
            for x in 0..w {
                mask.set_known(x, y, false);
            }
        }
        (img, mask)
    }

    #[test]
    fn flat_image_priority_is_epsilon_times_known_fraction() {
        let img = RasterImage::filled(20, 20, 1, 77).unwrap();
        let (_, mask) = step_scene(0);
        let conf = ConfidenceMap::new(&mask);
        let p = compute_priority(Coord::new(5, 9), &img, &mask, &conf, 9);
        // window rows 5..=13: five known rows of nine
        let expected = EPSILON * (45.0 / 81.0);
        assert!((p - expected).abs() < 1e-15);
    }

    #[test]
    fn one_missing_pixel_confidence() {
        let mut mask = MaskImage::all_known(9, 9);
        mask.set_known(4, 4, false);
        let conf = ConfidenceMap::new(&mask);
        assert_eq!(conf.window_term(&mask, Coord::new(0, 0), 9), 80.0 / 81.0);
    }

    #[test]
    fn step_edge_data_term() {
        for step in [40u8, 100, 255] {
            let (img, mask) = step_scene(step);
            // hand evaluation: the steepest known pixel sits next to the
            // edge with central difference step/2 in x; the boundary normal
            // points along y, parallel to the isophote
            let expected = f64::from(step) / 2.0 / 255.0 + EPSILON;
            let dt = data_term(&img, &mask, Coord::new(10, 9), 9);
            assert!((dt - expected).abs() < 1e-12, "{dt} vs {expected}");
        }
    }

    #[test]
    fn edge_pixel_outranks_flat_pixel() {
        let (img, mask) = step_scene(120);
        let conf = ConfidenceMap::new(&mask);
        let on_edge = compute_priority(Coord::new(10, 9), &img, &mask, &conf, 9);
        let flat = compute_priority(Coord::new(2, 9), &img, &mask, &conf, 9);
        assert!(on_edge > flat);
    }

    #[test]
    fn gradient_ignores_unknown_neighbors() {
        let data = vec![0, 50, 100, 0, 50, 100, 0, 50, 100];
        let img = RasterImage::new(3, 3, 1, data).unwrap();
        let mut mask = MaskImage::all_known(3, 3);
        assert_eq!(
            intensity_gradient(&img, &mask, Coord::new(1, 1)),
            (50.0, 0.0)
        );
        mask.set_known(2, 1, false);
        assert_eq!(
            intensity_gradient(&img, &mask, Coord::new(1, 1)),
            (50.0, 0.0)
        );
        mask.set_known(0, 1, false);
        assert_eq!(
            intensity_gradient(&img, &mask, Coord::new(1, 1)),
            (0.0, 0.0)
        );
    }

    #[test]
    fn normal_of_straight_boundary() {
        let (_, mask) = step_scene(0);
        assert_eq!(boundary_normal(&mask, Coord::new(4, 9)), Some((0.0, -1.0)));
        assert_eq!(
            boundary_normal(&MaskImage::all_known(5, 5), Coord::new(2, 2)),
            None
        );
    }

    #[test]
    fn confidence_stays_in_unit_interval() {
        let mut conf = ConfidenceMap::new(&MaskImage::all_known(2, 2));
        conf.set(0, 0, 1.5);
        conf.set(1, 0, -0.5);
        assert_eq!(conf.get(0, 0), 1.0);
        assert_eq!(conf.get(1, 0), 0.0);
    }
}
