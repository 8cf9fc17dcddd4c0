//! Real and complex 2D grids, the zero-padding embedding and its left inverse.
//!
//! All grids are stored row-major. An [`ImageGrid`] lives in the n1×n2 image
//! domain, a [`PaddedGrid`] in the m1×m2 measurement domain. The two share one
//! representation and differ only by a marker type, so `pad` and `crop` are the
//! only ways to move between domains.

use std::fmt;
use std::marker::PhantomData;

use num_complex::Complex64;

use crate::error::{check_dims, invalid, Result};

/// Marker for the n1×n2 image domain.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ImageDomain;

/// Marker for the m1×m2 measurement domain.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PaddedDomain;

/// Row-major real 2D array tagged with the domain it lives in.
pub struct Grid<D> {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
    _domain: PhantomData<D>,
}

pub type ImageGrid = Grid<ImageDomain>;
pub type PaddedGrid = Grid<PaddedDomain>;

impl<D> Grid<D> {
    /// Builds a grid, rejecting zero dimensions, wrong lengths and non-finite entries.
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(invalid(format!("grid dimensions must be positive, got {rows}x{cols}")));
        }
        if data.len() != rows * cols {
            return Err(invalid(format!(
                "grid {rows}x{cols} needs {} values, got {}",
                rows * cols,
                data.len()
            )));
        }
        if let Some(pos) = data.iter().position(|v| !v.is_finite()) {
            return Err(invalid(format!("non-finite grid entry at index {pos}")));
        }
        Ok(Self::from_raw(rows, cols, data))
    }

    pub(crate) fn from_raw(rows: usize, cols: usize, data: Vec<f64>) -> Self {
        debug_assert_eq!(data.len(), rows * cols);
        Self { rows, cols, data, _domain: PhantomData }
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        assert!(rows > 0 && cols > 0, "grid dimensions must be positive");
        Self::from_raw(rows, cols, vec![0.0; rows * cols])
    }

    pub fn filled(rows: usize, cols: usize, value: f64) -> Self {
        assert!(rows > 0 && cols > 0, "grid dimensions must be positive");
        Self::from_raw(rows, cols, vec![value; rows * cols])
    }

    /// Builds a grid from a function of `(row, col)`.
    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        assert!(rows > 0 && cols > 0, "grid dimensions must be positive");
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self::from_raw(rows, cols, data)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.data[row * self.cols + col]
    }

    pub fn set(&mut self, row: usize, col: usize, value: f64) {
        self.data[row * self.cols + col] = value;
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self::from_raw(self.rows, self.cols, self.data.iter().map(|&v| f(v)).collect())
    }

    /// Element-wise `a*self + b*other`.
    pub fn lin_comb(&self, a: f64, other: &Self, b: f64) -> Self {
        assert_eq!(self.dims(), other.dims(), "lin_comb on grids of different shape");
        let data = self.data.iter().zip(&other.data).map(|(&x, &y)| a * x + b * y).collect();
        Self::from_raw(self.rows, self.cols, data)
    }

    pub fn sum(&self) -> f64 {
        self.data.iter().sum()
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.dims(), other.dims());
        self.data.iter().zip(&other.data).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    }
}

impl<D> Clone for Grid<D> {
    fn clone(&self) -> Self {
        Self::from_raw(self.rows, self.cols, self.data.clone())
    }
}

impl<D> PartialEq for Grid<D> {
    fn eq(&self, other: &Self) -> bool {
        self.rows == other.rows && self.cols == other.cols && self.data == other.data
    }
}

impl<D> fmt::Debug for Grid<D> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Grid")
            .field("rows", &self.rows)
            .field("cols", &self.cols)
            .field("domain", &std::any::type_name::<D>().rsplit("::").next().unwrap_or(""))
            .finish_non_exhaustive()
    }
}

/// Row-major complex m1×m2 array holding a spectrum.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexSpectrum {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl ComplexSpectrum {
    pub fn new(rows: usize, cols: usize, data: Vec<Complex64>) -> Result<Self> {
        if rows == 0 || cols == 0 || data.len() != rows * cols {
            return Err(invalid(format!("spectrum {rows}x{cols} cannot hold {} values", data.len())));
        }
        Ok(Self { rows, cols, data })
    }

    pub(crate) fn from_raw(rows: usize, cols: usize, data: Vec<Complex64>) -> Self {
        debug_assert_eq!(data.len(), rows * cols);
        Self { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.data[row * self.cols + col]
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [Complex64] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<Complex64> {
        self.data
    }
}

/// Image and measurement geometry. Defines the padding operator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeasurementPlan {
    n1: usize,
    n2: usize,
    m1: usize,
    m2: usize,
    ratio: f64,
}

impl MeasurementPlan {
    /// Plan with the ratio derived as `sqrt(m)/sqrt(n)`.
    pub fn new(n1: usize, n2: usize, m1: usize, m2: usize) -> Result<Self> {
        let ratio = ((m1 * m2) as f64).sqrt() / ((n1 * n2) as f64).sqrt();
        Self::with_ratio(n1, n2, m1, m2, ratio)
    }

    pub fn with_ratio(n1: usize, n2: usize, m1: usize, m2: usize, ratio: f64) -> Result<Self> {
        if n1 == 0 || n2 == 0 {
            return Err(invalid("image dimensions must be positive"));
        }
        if m1 < n1 || m2 < n2 {
            return Err(invalid(format!("measurement grid {m1}x{m2} is smaller than image {n1}x{n2}")));
        }
        if !ratio.is_finite() || ratio < 1.0 {
            return Err(invalid(format!("sampling ratio must be >= 1, got {ratio}")));
        }
        Ok(Self { n1, n2, m1, m2, ratio })
    }

    pub fn image_dims(&self) -> (usize, usize) {
        (self.n1, self.n2)
    }

    pub fn measurement_dims(&self) -> (usize, usize) {
        (self.m1, self.m2)
    }

    /// n = n1·n2
    pub fn n(&self) -> usize {
        self.n1 * self.n2
    }

    /// m = m1·m2
    pub fn m(&self) -> usize {
        self.m1 * self.m2
    }

    pub fn ratio(&self) -> f64 {
        self.ratio
    }
}

/// Embeds `x` at the top-left corner of an m1×m2 zero canvas.
pub fn pad(x: &ImageGrid, plan: &MeasurementPlan) -> Result<PaddedGrid> {
    check_dims("image", plan.image_dims(), x.dims())?;
    Ok(pad_unchecked(x.as_slice(), plan))
}

pub(crate) fn pad_unchecked(x: &[f64], plan: &MeasurementPlan) -> PaddedGrid {
    let (n1, n2) = plan.image_dims();
    let (m1, m2) = plan.measurement_dims();
    let mut out = vec![0.0; m1 * m2];
    for (dst, src) in out.chunks_exact_mut(m2).zip(x.chunks_exact(n2)).take(n1) {
        dst[..n2].copy_from_slice(src);
    }
    PaddedGrid::from_raw(m1, m2, out)
}

/// Extracts the top-left n1×n2 block; the left inverse of [`pad`].
pub fn crop(u: &PaddedGrid, plan: &MeasurementPlan) -> Result<ImageGrid> {
    check_dims("padded grid", plan.measurement_dims(), u.dims())?;
    Ok(crop_unchecked(u.as_slice(), plan))
}

pub(crate) fn crop_unchecked(u: &[f64], plan: &MeasurementPlan) -> ImageGrid {
    let (n1, n2) = plan.image_dims();
    let (_, m2) = plan.measurement_dims();
    let mut out = Vec::with_capacity(n1 * n2);
    for row in u.chunks_exact(m2).take(n1) {
        out.extend_from_slice(&row[..n2]);
    }
    ImageGrid::from_raw(n1, n2, out)
}
