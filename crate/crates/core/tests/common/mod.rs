//! Synthetic images and masks shared by the integration tests.
#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use zinpaint::image::{MaskImage, RasterImage};

fn smooth(t: f64) -> f64 {
    t * t * (3.0 - 2.0 * t)
}

/// Value noise on a lattice of spacing `cell`.
struct Lattice {
    cell: usize,
    cols: usize,
    values: Vec<f64>,
}

impl Lattice {
    fn new(w: usize, h: usize, cell: usize, rng: &mut ChaCha8Rng) -> Self {
        let cols = w / cell + 2;
        let rows = h / cell + 2;
        Self {
            cell,
            cols,
            values: (0..cols * rows).map(|_| rng.gen_range(-1.0..1.0)).collect(),
        }
    }

    fn at(&self, x: usize, y: usize) -> f64 {
        let (gx, gy) = (x / self.cell, y / self.cell);
        let tx = smooth((x % self.cell) as f64 / self.cell as f64);
        let ty = smooth((y % self.cell) as f64 / self.cell as f64);
        let v = |cx: usize, cy: usize| self.values[cy * self.cols + cx];
        let top = v(gx, gy) * (1.0 - tx) + v(gx + 1, gy) * tx;
        let bottom = v(gx, gy + 1) * (1.0 - tx) + v(gx + 1, gy + 1) * tx;
        top * (1.0 - ty) + bottom * ty
    }
}

/// Natural-looking RGB image: several octaves of value noise per channel,
/// a few flat-colored shapes with hard edges, and slight grain.
pub fn synthetic_photo(w: usize, h: usize, seed: u64) -> RasterImage {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let octaves: Vec<(Lattice, f64)> = [96, 48, 24, 12, 6, 3]
        .iter()
        .map(|&cell| (Lattice::new(w, h, cell, &mut rng), (cell as f64).powf(0.7)))
        .collect();
    let tint: Vec<[f64; 3]> = (0..octaves.len())
        .map(|_| {
            [
                rng.gen_range(0.5..1.5),
                rng.gen_range(0.5..1.5),
                rng.gen_range(0.5..1.5),
            ]
        })
        .collect();
    let norm: f64 = octaves.iter().map(|(_, a)| a).sum();
    let base = [
        rng.gen_range(70.0..190.0),
        rng.gen_range(70.0..190.0),
        rng.gen_range(70.0..190.0),
    ];
    let shapes: Vec<(f64, f64, f64, [f64; 3])> = (0..12)
        .map(|_| {
            (
                rng.gen_range(0.0..w as f64),
                rng.gen_range(0.0..h as f64),
                rng.gen_range(10.0..(w.min(h) as f64 / 5.0).max(11.0)),
                [
                    rng.gen_range(0.0..255.0),
                    rng.gen_range(0.0..255.0),
                    rng.gen_range(0.0..255.0),
                ],
            )
        })
        .collect();
    let mut data = Vec::with_capacity(w * h * 3);
    for y in 0..h {
        for x in 0..w {
            let mut px = base;
            for ((lat, amp), t) in octaves.iter().zip(&tint) {
                let v = lat.at(x, y) * amp / norm * 170.0;
                for c in 0..3 {
                    px[c] += v * t[c];
                }
            }
            for &(cx, cy, r, color) in &shapes {
                let (dx, dy) = (x as f64 - cx, y as f64 - cy);
                if dx * dx + dy * dy < r * r {
                    for c in 0..3 {
                        px[c] = 0.35 * px[c] + 0.65 * color[c];
                    }
                }
            }
            for v in px {
                let grain: f64 = rng.gen_range(-2.0..2.0);
                data.push((v + grain).round().clamp(0.0, 255.0) as u8);
            }
        }
    }
    RasterImage::new(w, h, 3, data).unwrap()
}

/// Grayscale version of [`synthetic_photo`].
pub fn synthetic_gray(w: usize, h: usize, seed: u64) -> RasterImage {
    let rgb = synthetic_photo(w, h, seed);
    let data = rgb
        .data()
        .chunks_exact(3)
        .map(|p| ((u32::from(p[0]) + u32::from(p[1]) + u32::from(p[2])) / 3) as u8)
        .collect();
    RasterImage::new(w, h, 1, data).unwrap()
}

fn stamp(mask: &mut MaskImage, x: f64, y: f64, radius: f64) {
    let (w, h) = (mask.width() as i64, mask.height() as i64);
    let r = radius.ceil() as i64;
    let (cx, cy) = (x.round() as i64, y.round() as i64);
    for py in cy - r..=cy + r {
        for px in cx - r..=cx + r {
            if px < 0 || py < 0 || px >= w || py >= h {
                continue;
            }
            let (dx, dy) = (px as f64 - x, py as f64 - y);
            if dx * dx + dy * dy <= radius * radius {
                mask.set_known(px as usize, py as usize, false);
            }
        }
    }
}

/// Text-like mask: glyphs of a few thick strokes set in lines, added in
/// random order until `fraction` of the pixels are UNKNOWN.
pub fn text_mask(w: usize, h: usize, fraction: f64, seed: u64) -> MaskImage {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut mask = MaskImage::all_known(w, h);
    let (glyph_w, glyph_h, advance) = (14.0, 22.0, 18.0);
    let pitch = ((h as f64) / 20.0).clamp(28.0, 48.0);
    let margin = 6.0;
    let mut cells = Vec::new();
    let mut y = margin;
    while y + glyph_h + margin <= h as f64 {
        let mut x = margin;
        while x + glyph_w + margin <= w as f64 {
            if rng.gen_bool(0.95) {
                cells.push((x, y));
            }
            x += advance;
        }
        y += pitch;
    }
    // shuffle
    for i in (1..cells.len()).rev() {
        let j = rng.gen_range(0..=i);
        cells.swap(i, j);
    }
    let target = (fraction * (w * h) as f64).round() as usize;
    for (x0, y0) in cells {
        if mask.unknown_count() >= target {
            break;
        }
        let strokes = rng.gen_range(3..=5);
        let node = |rng: &mut ChaCha8Rng| {
            (
                x0 + glyph_w * f64::from(rng.gen_range(0..3)) / 2.0,
                y0 + glyph_h * f64::from(rng.gen_range(0..3)) / 2.0,
            )
        };
        for _ in 0..strokes {
            let (ax, ay) = node(&mut rng);
            let (bx, by) = node(&mut rng);
            let steps = ((bx - ax).hypot(by - ay) * 2.0).ceil().max(1.0) as usize;
            for s in 0..=steps {
                let t = s as f64 / steps as f64;
                stamp(&mut mask, ax + (bx - ax) * t, ay + (by - ay) * t, 1.6);
            }
        }
    }
    mask
}

/// Filled axis-aligned rectangles of UNKNOWN pixels.
pub fn box_mask(w: usize, h: usize, boxes: &[(usize, usize, usize, usize)]) -> MaskImage {
    let mut mask = MaskImage::all_known(w, h);
    for &(x0, y0, x1, y1) in boxes {
        for y in y0..y1 {
            for x in x0..x1 {
                mask.set_known(x, y, false);
            }
        }
    }
    mask
}

/// Random uniform or clustered byte points.
pub fn random_points(n: usize, dims: usize, clustered: bool, rng: &mut ChaCha8Rng) -> Vec<u8> {
    if !clustered {
        return (0..n * dims).map(|_| rng.gen()).collect();
    }
    let centers: Vec<Vec<f64>> = (0..8)
        .map(|_| (0..dims).map(|_| rng.gen_range(0.0..255.0)).collect())
        .collect();
    let mut out = Vec::with_capacity(n * dims);
    for _ in 0..n {
        let c = &centers[rng.gen_range(0..centers.len())];
        for &m in c {
            let spread: f64 = rng.gen_range(-12.0..12.0) + rng.gen_range(-12.0..12.0);
            out.push((m + spread).round().clamp(0.0, 255.0) as u8);
        }
    }
    out
}
