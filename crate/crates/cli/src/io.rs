use std::path::Path;

use anyhow::{bail, Context, Result};
use image::{ColorType, DynamicImage, GrayImage, RgbImage};
use zinpaint::image::{MaskImage, RasterImage};

/// Mask values at or above this are KNOWN.
pub const KNOWN_THRESHOLD: u8 = 128;

/// Grayscale files load with one channel, everything else as RGB.
pub fn read_image(path: &Path) -> Result<RasterImage> {
    let img = image::open(path).with_context(|| format!("cannot read image {}", path.display()))?;
    let (w, h) = (img.width() as usize, img.height() as usize);
    let gray = matches!(
        img.color(),
        ColorType::L8 | ColorType::La8 | ColorType::L16 | ColorType::La16
    );
    let raster = if gray {
        RasterImage::new(w, h, 1, img.to_luma8().into_raw())
    } else {
        RasterImage::new(w, h, 3, img.to_rgb8().into_raw())
    };
    Ok(raster?)
}

pub fn read_mask(path: &Path) -> Result<MaskImage> {
    let img = image::open(path).with_context(|| format!("cannot read mask {}", path.display()))?;
    let luma = img.to_luma8();
    let (w, h) = (luma.width() as usize, luma.height() as usize);
    let flags = luma
        .into_raw()
        .into_iter()
        .map(|v| v >= KNOWN_THRESHOLD)
        .collect();
    Ok(MaskImage::from_flags(w, h, flags)?)
}

/// Format follows the extension (`.png`, `.ppm`, `.pgm`, `.pnm`).
pub fn write_image(path: &Path, image: &RasterImage) -> Result<()> {
    let (w, h) = (image.width() as u32, image.height() as u32);
    let data = image.data().to_vec();
    let dynamic = match image.channels() {
        1 => {
            DynamicImage::ImageLuma8(GrayImage::from_raw(w, h, data).context("image buffer size")?)
        }
        3 => DynamicImage::ImageRgb8(RgbImage::from_raw(w, h, data).context("image buffer size")?),
        c => bail!("cannot write {c}-channel images"),
    };
    dynamic
        .save(path)
        .with_context(|| format!("cannot write image {}", path.display()))
}
