//! Binary index files.
//!
//! One record per layout: the magic `ZIDX1`, then little-endian
//! `K: u32, c: f64, D: u32, layout: u32, count: u64, channels: u32`,
//! the model (mean, components row by row, eigenvalues) and quantizer bounds
//! as `f64`, and finally `count` entries of `D` bytes followed by `x: u32,
//! y: u32` in z-order. A multi-index file is its records back to back.

use std::io::{Read, Write};

use super::{
    build_subset_layouts, subset_size, IndexConfig, LayoutIndex, MultiIndex, PcaModel, Quantizer,
};
use crate::error::{Error, Result};
use crate::image::PatchKey;
use crate::zcurve::ZCurveIndex;

pub const MAGIC: &[u8; 5] = b"ZIDX1";

/// Fixed-size fields of one record.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RecordHeader {
    pub patch_size: usize,
    pub coverage: f64,
    pub dims: usize,
    pub layout_id: usize,
    pub count: usize,
    pub channels: usize,
}

fn put_u32<W: Write>(w: &mut W, v: usize) -> Result<()> {
    let v = u32::try_from(v).map_err(|_| Error::Format(format!("{v} does not fit in u32")))?;
    w.write_all(&v.to_le_bytes())?;
    Ok(())
}

fn put_f64s<W: Write>(w: &mut W, vs: &[f64]) -> Result<()> {
    for v in vs {
        w.write_all(&v.to_le_bytes())?;
    }
    Ok(())
}

fn take<const N: usize, R: Read>(r: &mut R) -> Result<[u8; N]> {
    let mut buf = [0u8; N];
    r.read_exact(&mut buf).map_err(|e| match e.kind() {
        std::io::ErrorKind::UnexpectedEof => Error::Format("index file is truncated".into()),
        _ => Error::Io(e),
    })?;
    Ok(buf)
}

fn get_u32<R: Read>(r: &mut R) -> Result<usize> {
    Ok(u32::from_le_bytes(take(r)?) as usize)
}

fn get_f64s<R: Read>(r: &mut R, n: usize) -> Result<Vec<f64>> {
    (0..n).map(|_| Ok(f64::from_le_bytes(take(r)?))).collect()
}

pub fn write_record<W: Write>(
    w: &mut W,
    index: &LayoutIndex,
    config: &IndexConfig,
    channels: usize,
) -> Result<()> {
    let dims = index.index.dims();
    w.write_all(MAGIC)?;
    put_u32(w, config.patch_size)?;
    w.write_all(&config.coverage.to_le_bytes())?;
    put_u32(w, dims)?;
    put_u32(w, index.layout.id)?;
    w.write_all(&(index.index.len() as u64).to_le_bytes())?;
    put_u32(w, channels)?;
    put_f64s(w, &index.model.mean)?;
    for comp in &index.model.components {
        put_f64s(w, comp)?;
    }
    put_f64s(w, &index.model.eigenvalues)?;
    put_f64s(w, &index.quantizer.lo)?;
    put_f64s(w, &index.quantizer.hi)?;
    for i in 0..index.index.len() {
        w.write_all(index.index.coords(i))?;
        let key = index.index.key(i);
        w.write_all(&key.x.to_le_bytes())?;
        w.write_all(&key.y.to_le_bytes())?;
    }
    Ok(())
}

fn read_header<R: Read>(r: &mut R) -> Result<RecordHeader> {
    if &take::<5, _>(r)? != MAGIC {
        return Err(Error::Format("bad magic, not an index file".into()));
    }
    let patch_size = get_u32(r)?;
    let coverage = f64::from_le_bytes(take(r)?);
    let dims = get_u32(r)?;
    let layout_id = get_u32(r)?;
    let count = u64::from_le_bytes(take(r)?) as usize;
    let channels = get_u32(r)?;
    Ok(RecordHeader {
        patch_size,
        coverage,
        dims,
        layout_id,
        count,
        channels,
    })
}

pub fn read_record<R: Read>(r: &mut R) -> Result<(RecordHeader, LayoutIndex)> {
    let header = read_header(r)?;
    let RecordHeader {
        patch_size,
        coverage,
        dims,
        layout_id,
        count,
        channels,
    } = header;
    if !(1..=3).contains(&channels) || channels == 2 {
        return Err(Error::Format(format!(
            "unsupported channel count {channels}"
        )));
    }
    let layouts =
        build_subset_layouts(patch_size, coverage).map_err(|e| Error::Format(e.to_string()))?;
    let layout = layouts
        .into_iter()
        .nth(layout_id)
        .ok_or_else(|| Error::Format(format!("layout id {layout_id} out of range")))?;
    let inputs = subset_size(patch_size, coverage) * channels;
    if dims == 0 || dims > inputs {
        return Err(Error::Format(format!(
            "{dims} dimensions for {inputs} inputs"
        )));
    }
    let mean = get_f64s(r, inputs)?;
    let components = (0..dims)
        .map(|_| get_f64s(r, inputs))
        .collect::<Result<Vec<_>>>()?;
    let eigenvalues = get_f64s(r, dims)?;
    let model = PcaModel::new(mean, components, eigenvalues)?;
    let quantizer = Quantizer::new(get_f64s(r, dims)?, get_f64s(r, dims)?)
        .map_err(|e| Error::Format(e.to_string()))?;
    let mut coords = Vec::with_capacity(count.min(1 << 24) * dims);
    let mut keys = Vec::with_capacity(count.min(1 << 24));
    let mut entry = vec![0u8; dims + 8];
    for _ in 0..count {
        r.read_exact(&mut entry)
            .map_err(|_| Error::Format("index file is truncated".into()))?;
        coords.extend_from_slice(&entry[..dims]);
        let x = u32::from_le_bytes(entry[dims..dims + 4].try_into().unwrap());
        let y = u32::from_le_bytes(entry[dims + 4..].try_into().unwrap());
        keys.push(PatchKey::new(x, y));
    }
    let index = ZCurveIndex::from_sorted(dims, layout_id, coords, keys)?;
    Ok((
        header,
        LayoutIndex {
            layout,
            model,
            quantizer,
            index,
        },
    ))
}

pub fn write_multi<W: Write>(w: &mut W, multi: &MultiIndex) -> Result<()> {
    for index in &multi.indices {
        write_record(w, index, &multi.config, multi.channels)?;
    }
    Ok(())
}

/// Read eight records. Search parameters (`knn`, `mu`, `nu`, `norm`) are not
/// stored and are taken from `search`.
pub fn read_multi<R: Read>(r: &mut R, search: &IndexConfig) -> Result<MultiIndex> {
    let mut indices = Vec::with_capacity(8);
    let mut first: Option<RecordHeader> = None;
    for expected in 0..8 {
        let (header, index) = read_record(r)?;
        if header.layout_id != expected {
            return Err(Error::Format(format!(
                "expected layout {expected}, found {}",
                header.layout_id
            )));
        }
        if let Some(f) = first {
            let same = f.patch_size == header.patch_size
                && f.coverage == header.coverage
                && f.dims == header.dims
                && f.count == header.count
                && f.channels == header.channels;
            if !same {
                return Err(Error::Format("records disagree on shape".into()));
            }
        }
        first.get_or_insert(header);
        indices.push(index);
    }
    let header = first.expect("eight records were read");
    let mut keys = indices[0].index.keys().to_vec();
    keys.sort_unstable();
    Ok(MultiIndex {
        config: IndexConfig {
            patch_size: header.patch_size,
            coverage: header.coverage,
            dims: header.dims,
            ..*search
        },
        channels: header.channels,
        keys,
        indices,
    })
}
