//! Principal component analysis over patch pixel vectors.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};

/// Running first and second moments of sample vectors.
///
/// Byte-valued samples make every sum and cross-product an integer well
/// below 2^53, so accumulation is exact in `f64` and independent of the
/// order chunks are merged in.
#[derive(Debug, Clone, PartialEq)]
pub struct Moments {
    dims: usize,
    count: usize,
    sum: Vec<f64>,
    /// Row-major `dims × dims` sum of outer products.
    cross: Vec<f64>,
}

impl Moments {
    pub fn new(dims: usize) -> Self {
        Self {
            dims,
            count: 0,
            sum: vec![0.0; dims],
            cross: vec![0.0; dims * dims],
        }
    }

    pub fn dims(&self) -> usize {
        self.dims
    }

    pub fn count(&self) -> usize {
        self.count
    }

    /// Add `rows.len() / dims` samples stored row-major.
    pub fn add_rows(&mut self, rows: &[f64]) {
        let d = self.dims;
        if d == 0 || rows.is_empty() {
            return;
        }
        assert_eq!(rows.len() % d, 0);
        let n = rows.len() / d;
        for row in rows.chunks_exact(d) {
            for (s, &v) in self.sum.iter_mut().zip(row) {
                *s += v;
            }
        }
        // cross += rowsᵀ · rows
        unsafe {
            matrixmultiply::dgemm(
                d,
                n,
                d,
                1.0,
                rows.as_ptr(),
                1,
                d as isize,
                rows.as_ptr(),
                d as isize,
                1,
                1.0,
                self.cross.as_mut_ptr(),
                d as isize,
                1,
            );
        }
        self.count += n;
    }

    pub fn merge(mut self, other: &Moments) -> Self {
        assert_eq!(self.dims, other.dims);
        self.count += other.count;
        for (a, b) in self.sum.iter_mut().zip(&other.sum) {
            *a += b;
        }
        for (a, b) in self.cross.iter_mut().zip(&other.cross) {
            *a += b;
        }
        self
    }

    /// Moments of the sub-vector made of coordinates `coords`.
    pub fn restrict(&self, coords: &[usize]) -> Moments {
        let m = coords.len();
        let mut cross = vec![0.0; m * m];
        for (i, &a) in coords.iter().enumerate() {
            for (j, &b) in coords.iter().enumerate() {
                cross[i * m + j] = self.cross[a * self.dims + b];
            }
        }
        Moments {
            dims: m,
            count: self.count,
            sum: coords.iter().map(|&a| self.sum[a]).collect(),
            cross,
        }
    }

    pub fn mean(&self) -> Vec<f64> {
        let n = self.count.max(1) as f64;
        self.sum.iter().map(|s| s / n).collect()
    }

    /// Sample covariance (divided by `n - 1`, or `1` for a single sample).
    pub fn covariance(&self) -> DMatrix<f64> {
        let d = self.dims;
        let n = self.count as f64;
        let denom = if self.count > 1 { n - 1.0 } else { 1.0 };
        DMatrix::from_fn(d, d, |i, j| {
            let centered = self.cross[i * d + j] - self.sum[i] * self.sum[j] / n.max(1.0);
            centered / denom
        })
    }
}

/// Leading principal directions of a sample set.
#[derive(Debug, Clone, PartialEq)]
pub struct PcaModel {
    pub mean: Vec<f64>,
    /// `dims` unit vectors of length `input_dims`, by descending eigenvalue.
    pub components: Vec<Vec<f64>>,
    pub eigenvalues: Vec<f64>,
    /// `components` transposed, `input_dims × dims`, for projection.
    by_input: Vec<f64>,
}

impl PcaModel {
    pub fn new(mean: Vec<f64>, components: Vec<Vec<f64>>, eigenvalues: Vec<f64>) -> Result<Self> {
        let n = mean.len();
        if components.len() != eigenvalues.len() || components.iter().any(|c| c.len() != n) {
            return Err(Error::DimensionMismatch {
                expected: format!("{} components of length {n}", eigenvalues.len()),
                actual: format!("{} components", components.len()),
            });
        }
        let dims = components.len();
        let mut by_input = vec![0.0; n * dims];
        for (d, comp) in components.iter().enumerate() {
            for (i, &v) in comp.iter().enumerate() {
                by_input[i * dims + d] = v;
            }
        }
        Ok(Self {
            mean,
            components,
            eigenvalues,
            by_input,
        })
    }

    /// Keep the top `dims` eigenvectors of `covariance`.
    pub fn from_covariance(mean: Vec<f64>, covariance: DMatrix<f64>, dims: usize) -> Result<Self> {
        let n = mean.len();
        if dims == 0 || dims > n {
            return Err(Error::Config(format!(
                "cannot keep {dims} principal components of {n}-dimensional data"
            )));
        }
        let eigen = SymmetricEigen::new(covariance);
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| {
            eigen.eigenvalues[b]
                .total_cmp(&eigen.eigenvalues[a])
                .then(a.cmp(&b))
        });
        let mut components = Vec::with_capacity(dims);
        let mut eigenvalues = Vec::with_capacity(dims);
        for &idx in order.iter().take(dims) {
            let mut v: Vec<f64> = eigen.eigenvectors.column(idx).iter().copied().collect();
            // sign convention: the largest-magnitude coefficient is positive
            let pivot =
                v.iter().enumerate().fold(
                    0,
                    |best, (i, x)| if x.abs() > v[best].abs() { i } else { best },
                );
            if v[pivot] < 0.0 {
                v.iter_mut().for_each(|x| *x = -*x);
            }
            components.push(v);
            eigenvalues.push(eigen.eigenvalues[idx].max(0.0));
        }
        Self::new(mean, components, eigenvalues)
    }

    pub fn from_moments(moments: &Moments, dims: usize) -> Result<Self> {
        if moments.count() < dims {
            return Err(Error::Config(format!(
                "{} samples are too few for {dims} principal components",
                moments.count()
            )));
        }
        Self::from_covariance(moments.mean(), moments.covariance(), dims)
    }

    pub fn input_dims(&self) -> usize {
        self.mean.len()
    }

    pub fn dims(&self) -> usize {
        self.components.len()
    }

    /// `out = componentsᵀ · centered`, where `centered = x - mean`.
    pub fn project_centered(&self, centered: &[f64], out: &mut [f64]) {
        self.project_rows(centered, out);
    }

    /// Row-wise [`project_centered`](Self::project_centered) over
    /// back-to-back centered vectors. Each output row is bit-identical to
    /// projecting that row alone.
    pub fn project_rows(&self, centered: &[f64], out: &mut [f64]) {
        let (n, dims) = (self.input_dims(), self.dims());
        assert!(
            n > 0 && centered.len().is_multiple_of(n),
            "centered rows have the wrong length"
        );
        let rows = centered.len() / n;
        assert_eq!(out.len(), rows * dims, "output has the wrong length");
        if rows == 0 {
            return;
        }
        // out = centered · by_input
        unsafe {
            matrixmultiply::dgemm(
                rows,
                n,
                dims,
                1.0,
                centered.as_ptr(),
                n as isize,
                1,
                self.by_input.as_ptr(),
                dims as isize,
                1,
                0.0,
                out.as_mut_ptr(),
                dims as isize,
                1,
            );
        }
    }

    pub fn project(&self, x: &[f64]) -> Vec<f64> {
        let centered: Vec<f64> = x.iter().zip(&self.mean).map(|(a, m)| a - m).collect();
        let mut out = vec![0.0; self.dims()];
        self.project_centered(&centered, &mut out);
        out
    }

    /// Map principal coordinates back to input space.
    pub fn reconstruct(&self, y: &[f64]) -> Vec<f64> {
        let mut x = self.mean.clone();
        for (comp, &c) in self.components.iter().zip(y) {
            for (xi, &w) in x.iter_mut().zip(comp) {
                *xi += c * w;
            }
        }
        x
    }
}

/// Fit a model keeping `dims` components; the covariance is formed from
/// mean-centered samples.
pub fn fit_pca(samples: &[Vec<f64>], dims: usize) -> Result<PcaModel> {
    if samples.len() < dims {
        return Err(Error::Config(format!(
            "{} samples are too few for {dims} principal components",
            samples.len()
        )));
    }
    let Some(first) = samples.first() else {
        return Err(Error::Config("no samples".into()));
    };
    let n = first.len();
    if samples.iter().any(|s| s.len() != n) {
        return Err(Error::Config("samples differ in length".into()));
    }
    let count = samples.len() as f64;
    let mut mean = vec![0.0; n];
    for s in samples {
        for (m, &v) in mean.iter_mut().zip(s) {
            *m += v;
        }
    }
    mean.iter_mut().for_each(|m| *m /= count);
    let mut cov = DMatrix::<f64>::zeros(n, n);
    let mut centered = vec![0.0; n];
    for s in samples {
        for ((c, &v), &m) in centered.iter_mut().zip(s).zip(&mean) {
            *c = v - m;
        }
        for i in 0..n {
            for j in i..n {
                cov[(i, j)] += centered[i] * centered[j];
            }
        }
    }
    let denom = if samples.len() > 1 { count - 1.0 } else { 1.0 };
    for i in 0..n {
        for j in i..n {
            let v = cov[(i, j)] / denom;
            cov[(i, j)] = v;
            cov[(j, i)] = v;
        }
    }
    PcaModel::from_covariance(mean, cov, dims)
}
