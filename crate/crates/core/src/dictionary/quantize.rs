use crate::dictionary::PcaModel;
use crate::error::{Error, Result};

/// Per-dimension affine map from the dictionary's projection range onto
/// `0..=255`. Values outside the range clamp to its ends.
#[derive(Debug, Clone, PartialEq)]
pub struct Quantizer {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl Quantizer {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        // negated so that NaN bounds are rejected too
        #[allow(clippy::neg_cmp_op_on_partial_ord)]
        if lo.len() != hi.len() || lo.iter().zip(&hi).any(|(l, h)| !(l <= h)) {
            return Err(Error::Config(
                "quantizer bounds must satisfy lo <= hi".into(),
            ));
        }
        Ok(Self { lo, hi })
    }

    /// Min/max per dimension over `projections`, stored back to back.
    pub fn fit(projections: &[f64], dims: usize) -> Self {
        let mut lo = vec![f64::INFINITY; dims];
        let mut hi = vec![f64::NEG_INFINITY; dims];
        for row in projections.chunks_exact(dims) {
            for d in 0..dims {
                lo[d] = lo[d].min(row[d]);
                hi[d] = hi[d].max(row[d]);
            }
        }
        for d in 0..dims {
            if lo[d] > hi[d] {
                lo[d] = 0.0;
                hi[d] = 0.0;
            }
        }
        Self { lo, hi }
    }

    pub fn dims(&self) -> usize {
        self.lo.len()
    }

    #[inline]
    pub fn quantize_value(&self, d: usize, y: f64) -> u8 {
        let (lo, hi) = (self.lo[d], self.hi[d]);
        if hi <= lo {
            return 0;
        }
        let t = (y.clamp(lo, hi) - lo) / (hi - lo) * 255.0;
        // f64::round rounds half away from zero
        t.round() as u8
    }

    pub fn quantize(&self, y: &[f64], out: &mut [u8]) {
        for (d, (o, &v)) in out.iter_mut().zip(y).enumerate() {
            *o = self.quantize_value(d, v);
        }
    }
}

/// Project `x` (layout pixels, all channels) into principal space and
/// quantize to one byte per dimension.
pub fn project_quantize(x: &[f64], model: &PcaModel, quantizer: &Quantizer) -> Vec<u8> {
    let y = model.project(x);
    let mut out = vec![0; y.len()];
    quantizer.quantize(&y, &mut out);
    out
}
