//! Pixel grids, known/unknown masks and patch windows.

use std::cmp::Ordering;

use crate::error::{Error, Result};

/// A pixel position, ordered row-major (by `y`, then `x`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct Coord {
    pub x: usize,
    pub y: usize,
}

impl Coord {
    pub const fn new(x: usize, y: usize) -> Self {
        Self { x, y }
    }
}

impl Ord for Coord {
    fn cmp(&self, other: &Self) -> Ordering {
        (self.y, self.x).cmp(&(other.y, other.x))
    }
}

impl PartialOrd for Coord {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Top-left corner of a dictionary patch. Ordered row-major, which is the
/// tie-break used everywhere a choice between equal candidates is made.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct PatchKey {
    pub x: u32,
    pub y: u32,
}

impl PatchKey {
    pub const fn new(x: u32, y: u32) -> Self {
        Self { x, y }
    }

    pub fn top_left(self) -> Coord {
        Coord::new(self.x as usize, self.y as usize)
    }
}

impl Ord for PatchKey {
    fn cmp(&self, other: &Self) -> Ordering {
        (self.y, self.x).cmp(&(other.y, other.x))
    }
}

impl PartialOrd for PatchKey {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// An 8-bit raster with one (grayscale) or three (RGB) interleaved channels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RasterImage {
    width: usize,
    height: usize,
    channels: usize,
    data: Vec<u8>,
}

impl RasterImage {
    pub fn new(width: usize, height: usize, channels: usize, data: Vec<u8>) -> Result<Self> {
        if channels != 1 && channels != 3 {
            return Err(Error::Config(format!(
                "images must have 1 or 3 channels, got {channels}"
            )));
        }
        if data.len() != width * height * channels {
            return Err(Error::DimensionMismatch {
                expected: format!("{} bytes", width * height * channels),
                actual: format!("{} bytes", data.len()),
            });
        }
        Ok(Self {
            width,
            height,
            channels,
            data,
        })
    }

    pub fn filled(width: usize, height: usize, channels: usize, value: u8) -> Result<Self> {
        Self::new(
            width,
            height,
            channels,
            vec![value; width * height * channels],
        )
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn data(&self) -> &[u8] {
        &self.data
    }

    pub fn into_data(self) -> Vec<u8> {
        self.data
    }

    /// Offset of the first channel of `(x, y)` in [`data`](Self::data).
    #[inline]
    pub fn offset(&self, x: usize, y: usize) -> usize {
        (y * self.width + x) * self.channels
    }

    #[inline]
    pub fn pixel(&self, x: usize, y: usize) -> &[u8] {
        let o = self.offset(x, y);
        &self.data[o..o + self.channels]
    }

    #[inline]
    pub fn pixel_mut(&mut self, x: usize, y: usize) -> &mut [u8] {
        let o = self.offset(x, y);
        let c = self.channels;
        &mut self.data[o..o + c]
    }

    /// Grayscale intensity: the channel mean.
    #[inline]
    pub fn intensity(&self, x: usize, y: usize) -> f64 {
        let p = self.pixel(x, y);
        p.iter().map(|&v| f64::from(v)).sum::<f64>() / p.len() as f64
    }
}

/// Per-pixel KNOWN/UNKNOWN state.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MaskImage {
    width: usize,
    height: usize,
    known: Vec<bool>,
}

impl MaskImage {
    pub fn from_flags(width: usize, height: usize, known: Vec<bool>) -> Result<Self> {
        if known.len() != width * height {
            return Err(Error::DimensionMismatch {
                expected: format!("{} mask flags", width * height),
                actual: format!("{}", known.len()),
            });
        }
        Ok(Self {
            width,
            height,
            known,
        })
    }

    pub fn all_known(width: usize, height: usize) -> Self {
        Self {
            width,
            height,
            known: vec![true; width * height],
        }
    }

    pub fn all_unknown(width: usize, height: usize) -> Self {
        Self {
            width,
            height,
            known: vec![false; width * height],
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn flags(&self) -> &[bool] {
        &self.known
    }

    #[inline]
    pub fn is_known(&self, x: usize, y: usize) -> bool {
        self.known[y * self.width + x]
    }

    #[inline]
    pub fn set_known(&mut self, x: usize, y: usize, known: bool) {
        self.known[y * self.width + x] = known;
    }

    pub fn unknown_count(&self) -> usize {
        self.known.iter().filter(|&&k| !k).count()
    }

    pub fn is_fully_known(&self) -> bool {
        self.known.iter().all(|&k| k)
    }

    pub fn matches(&self, image: &RasterImage) -> Result<()> {
        if self.width != image.width() || self.height != image.height() {
            return Err(Error::DimensionMismatch {
                expected: format!("{}x{} mask", image.width(), image.height()),
                actual: format!("{}x{}", self.width, self.height),
            });
        }
        Ok(())
    }

    /// True when `p` is KNOWN and has at least one UNKNOWN 4-neighbor.
    #[inline]
    pub fn is_front(&self, p: Coord) -> bool {
        if !self.is_known(p.x, p.y) {
            return false;
        }
        (p.x > 0 && !self.is_known(p.x - 1, p.y))
            || (p.x + 1 < self.width && !self.is_known(p.x + 1, p.y))
            || (p.y > 0 && !self.is_known(p.x, p.y - 1))
            || (p.y + 1 < self.height && !self.is_known(p.x, p.y + 1))
    }
}

/// Values and known-flags of a K×K window. Unknown pixels read as 0.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PatchView {
    pub size: usize,
    pub channels: usize,
    pub values: Vec<u8>,
    pub known: Vec<bool>,
}

impl PatchView {
    pub fn known_count(&self) -> usize {
        self.known.iter().filter(|&&k| k).count()
    }
}

/// Top-left corner of the `size`×`size` window centered on `center`, or an
/// error when that window leaves the image.
pub fn window_origin(width: usize, height: usize, center: Coord, size: usize) -> Result<Coord> {
    let half = size / 2;
    if size.is_multiple_of(2)
        || center.x < half
        || center.y < half
        || center.x + half >= width
        || center.y + half >= height
    {
        return Err(Error::OutOfRange {
            x: center.x,
            y: center.y,
            size,
            width,
            height,
        });
    }
    Ok(Coord::new(center.x - half, center.y - half))
}

pub fn extract_patch(
    image: &RasterImage,
    mask: &MaskImage,
    center: Coord,
    size: usize,
) -> Result<PatchView> {
    mask.matches(image)?;
    let origin = window_origin(image.width(), image.height(), center, size)?;
    let channels = image.channels();
    let mut values = Vec::with_capacity(size * size * channels);
    let mut known = Vec::with_capacity(size * size);
    for y in origin.y..origin.y + size {
        for x in origin.x..origin.x + size {
            let k = mask.is_known(x, y);
            known.push(k);
            if k {
                values.extend_from_slice(image.pixel(x, y));
            } else {
                values.extend(std::iter::repeat_n(0, channels));
            }
        }
    }
    Ok(PatchView {
        size,
        channels,
        values,
        known,
    })
}

/// KNOWN pixels with at least one UNKNOWN 4-neighbor, in row-major order.
pub fn compute_fillfront(mask: &MaskImage) -> Vec<Coord> {
    let mut front = Vec::new();
    for y in 0..mask.height() {
        for x in 0..mask.width() {
            let p = Coord::new(x, y);
            if mask.is_front(p) {
                front.push(p);
            }
        }
    }
    front
}
