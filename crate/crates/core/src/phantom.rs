//! Deterministic synthetic images. Geometry is specified in relative
//! coordinates so every phantom can be rendered at any size.

use crate::error::{invalid, Result};
use crate::grid::ImageGrid;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PhantomKind {
    /// Piecewise-constant rectangles, discs and an ellipse on a gray background.
    Shapes,
    /// Sum of smooth Gaussian blobs.
    Blobs,
    /// Fine line gratings of period 2 and 3 pixels.
    Grating,
    /// Smooth blobs, piecewise shapes and a fine grating in one image.
    Mixed,
    /// 0/1 shapes that touch every edge of the frame.
    Binary,
}

impl PhantomKind {
    pub const ALL: [PhantomKind; 5] = [Self::Shapes, Self::Blobs, Self::Grating, Self::Mixed, Self::Binary];

    pub fn name(self) -> &'static str {
        match self {
            Self::Shapes => "shapes",
            Self::Blobs => "blobs",
            Self::Grating => "grating",
            Self::Mixed => "mixed",
            Self::Binary => "binary",
        }
    }
}

impl std::fmt::Display for PhantomKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for PhantomKind {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL.into_iter().find(|k| k.name() == s).ok_or_else(|| invalid(format!("unknown phantom '{s}'")))
    }
}

fn in_ellipse(y: f64, x: f64, cy: f64, cx: f64, ry: f64, rx: f64) -> bool {
    let dy = (y - cy) / ry;
    let dx = (x - cx) / rx;
    dy * dy + dx * dx <= 1.0
}

fn in_rect(y: f64, x: f64, y0: f64, x0: f64, y1: f64, x1: f64) -> bool {
    y >= y0 && y < y1 && x >= x0 && x < x1
}

fn shapes_at(y: f64, x: f64) -> f64 {
    if in_ellipse(y, x, 0.30, 0.68, 0.16, 0.16) {
        0.9
    } else if in_rect(y, x, 0.12, 0.10, 0.45, 0.42) {
        0.6
    } else if in_ellipse(y, x, 0.72, 0.40, 0.14, 0.28) {
        0.4
    } else if in_rect(y, x, 0.58, 0.74, 0.90, 0.92) {
        0.75
    } else {
        0.15
    }
}

fn blobs_at(y: f64, x: f64) -> f64 {
    const BLOBS: [(f64, f64, f64, f64); 4] = [
        (0.30, 0.30, 0.18, 0.55),
        (0.65, 0.70, 0.14, 0.45),
        (0.75, 0.25, 0.10, 0.35),
        (0.25, 0.75, 0.08, 0.30),
    ];
    let v: f64 = BLOBS
        .iter()
        .map(|&(cy, cx, s, a)| a * (-((y - cy).powi(2) + (x - cx).powi(2)) / (2.0 * s * s)).exp())
        .sum();
    (0.1 + v).min(0.95)
}

fn grating_at(i: usize, j: usize, y: f64, x: f64) -> f64 {
    if in_rect(y, x, 0.0, 0.0, 0.5, 1.0) {
        if j.is_multiple_of(2) {
            0.8
        } else {
            0.2
        }
    } else if i.is_multiple_of(3) {
        0.9
    } else {
        0.3
    }
}

fn mixed_at(i: usize, j: usize, y: f64, x: f64) -> f64 {
    if x < 0.5 {
        blobs_at(y, 2.0 * x * 0.8 + 0.1)
    } else if y < 0.22 {
        if j.is_multiple_of(2) {
            0.85
        } else {
            0.25
        }
    } else if y < 0.45 {
        if i.is_multiple_of(3) {
            0.85
        } else {
            0.25
        }
    } else if in_ellipse(y, x, 0.72, 0.75, 0.14, 0.14) {
        0.9
    } else if in_rect(y, x, 0.52, 0.55, 0.95, 0.68) {
        0.55
    } else {
        0.2
    }
}

fn binary_at(y: f64, x: f64) -> f64 {
    let on = in_rect(y, x, 0.0, 0.0, 0.25, 0.6)
        || in_rect(y, x, 0.0, 0.0, 1.0, 0.2)
        || in_rect(y, x, 0.55, 0.45, 1.0, 0.7)
        || in_rect(y, x, 0.3, 0.8, 0.7, 1.0)
        || in_ellipse(y, x, 0.45, 0.5, 0.12, 0.12);
    if on {
        1.0
    } else {
        0.0
    }
}

/// Renders a phantom at `rows×cols`; values lie in [0, 1].
pub fn phantom(kind: PhantomKind, rows: usize, cols: usize) -> ImageGrid {
    ImageGrid::from_fn(rows, cols, |i, j| {
        let y = (i as f64 + 0.5) / rows as f64;
        let x = (j as f64 + 0.5) / cols as f64;
        match kind {
            PhantomKind::Shapes => shapes_at(y, x),
            PhantomKind::Blobs => blobs_at(y, x),
            PhantomKind::Grating => grating_at(i, j, y, x),
            PhantomKind::Mixed => mixed_at(i, j, y, x),
            PhantomKind::Binary => binary_at(y, x),
        }
    })
}
