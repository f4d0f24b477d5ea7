use crate::image::{Coord, PatchKey, PatchView, RasterImage};
use crate::zcurve::Norm;

/// Sum over the target's known pixels (all channels) of the squared (L2) or
/// absolute (L1) difference to `candidate`.
pub fn masked_cost(target: &PatchView, candidate: &PatchView, norm: Norm) -> u64 {
    assert_eq!(
        (target.size, target.channels),
        (candidate.size, candidate.channels),
        "patches differ in shape"
    );
    let ch = target.channels;
    let mut cost = 0u64;
    for (p, _) in target.known.iter().enumerate().filter(|(_, &k)| k) {
        for c in p * ch..(p + 1) * ch {
            let gap = u64::from(target.values[c].abs_diff(candidate.values[c]));
            cost += norm.axis_term(gap);
        }
    }
    cost
}

/// The target's known pixels laid out for evaluation directly against image
/// rows, so candidates need not be copied out.
#[derive(Debug, Clone)]
pub(crate) struct CostKernel {
    norm: Norm,
    row_len: usize,
    row_stride: usize,
    channels: usize,
    /// `(patch row, values, masks)` for rows holding any known pixel; a
    /// mask is all ones on known bytes and zero elsewhere.
    rows: Vec<(usize, Vec<i16>, Vec<i16>)>,
}

impl CostKernel {
    pub fn new(target: &PatchView, image_width: usize, norm: Norm) -> Self {
        let (size, ch) = (target.size, target.channels);
        let row_len = size * ch;
        let rows = (0..size)
            .filter(|&r| target.known[r * size..(r + 1) * size].iter().any(|&k| k))
            .map(|r| {
                let values = target.values[r * row_len..(r + 1) * row_len]
                    .iter()
                    .map(|&v| i16::from(v))
                    .collect();
                let masks = (0..row_len)
                    .map(|i| {
                        if target.known[r * size + i / ch] {
                            -1
                        } else {
                            0
                        }
                    })
                    .collect();
                (r, values, masks)
            })
            .collect();
        Self {
            norm,
            row_len,
            row_stride: image_width * ch,
            channels: ch,
            rows,
        }
    }

    /// Cost of the window whose top-left pixel is `key`.
    #[inline]
    pub fn cost(&self, image: &RasterImage, key: PatchKey) -> u64 {
        let base = (key.y as usize * self.row_stride) + key.x as usize * self.channels;
        let data = image.data();
        let mut total = 0u64;
        for (r, values, masks) in &self.rows {
            let start = base + r * self.row_stride;
            let src = &data[start..start + self.row_len];
            let mut row = 0i32;
            match self.norm {
                Norm::L2 => {
                    for ((&s, &t), &m) in src.iter().zip(values).zip(masks) {
                        let d = (i16::from(s) - t) & m;
                        row += i32::from(d) * i32::from(d);
                    }
                }
                Norm::L1 => {
                    for ((&s, &t), &m) in src.iter().zip(values).zip(masks) {
                        row += i32::from((i16::from(s) - t).abs() & m);
                    }
                }
            }
            total += row as u64;
        }
        total
    }
}

/// Top-left corner of the window used for a target at `center`, shifted
/// inward where the centered window would leave the image.
pub fn target_origin(width: usize, height: usize, center: Coord, size: usize) -> Coord {
    let half = size / 2;
    Coord::new(
        center.x.saturating_sub(half).min(width - size),
        center.y.saturating_sub(half).min(height - size),
    )
}
