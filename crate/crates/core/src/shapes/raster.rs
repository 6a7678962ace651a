//! Pixelized planar sets on a uniform grid.
//!
//! Cell `(i, j)` covers `origin + pitch·([i, i+1) × [j, j+1))`. Grids built by
//! this module are anchored to the global lattice `pitch·ℤ²`, so two rasters
//! with the same pitch can be compared or summed cell by cell.
//!
//! Text format (PGM P2):
//!
//! ```text
//! P2
//! # gamow raster v1
//! # origin <x> <y>
//! # pitch <h>
//! <width> <height>
//! 1
//! <rows, top row first, 1 = occupied>
//! ```

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::real::Real;

use super::StarShape;

const FORMAT_TAG: &str = "# gamow raster v1";

#[derive(Clone, Debug, PartialEq)]
pub struct RasterSet<T> {
    origin: [T; 2],
    pitch: T,
    width: usize,
    height: usize,
    mask: Vec<bool>,
}

impl<T: Real> RasterSet<T> {
    /// `mask` is row-major with row `j` at `j * width`.
    pub fn new(
        origin: [T; 2],
        pitch: T,
        width: usize,
        height: usize,
        mask: Vec<bool>,
    ) -> Result<Self> {
        if !(pitch > T::zero()) || !pitch.is_finite() {
            return Err(Error::Argument(format!(
                "pitch must be positive, got {pitch}"
            )));
        }
        if !origin[0].is_finite() || !origin[1].is_finite() {
            return Err(Error::Argument("origin must be finite".into()));
        }
        if mask.len() != width * height {
            return Err(Error::Argument(format!(
                "mask has {} cells, expected {width} x {height}",
                mask.len()
            )));
        }
        Ok(Self {
            origin,
            pitch,
            width,
            height,
            mask,
        })
    }

    pub fn empty(origin: [T; 2], pitch: T, width: usize, height: usize) -> Result<Self> {
        Self::new(origin, pitch, width, height, vec![false; width * height])
    }

    /// Grid whose cell `(i, j)` is occupied when `f(i, j)` holds.
    pub fn from_fn<F>(origin: [T; 2], pitch: T, width: usize, height: usize, f: F) -> Result<Self>
    where
        F: Fn(usize, usize) -> bool,
    {
        let mut mask = Vec::with_capacity(width * height);
        for j in 0..height {
            for i in 0..width {
                mask.push(f(i, j));
            }
        }
        Self::new(origin, pitch, width, height, mask)
    }

    /// Union of axis-parallel rectangles `[x0, x1] × [y0, y1]` under the
    /// cell-center rule, on the lattice grid covering their bounding box.
    pub fn from_rects(pitch: T, rects: &[[T; 4]]) -> Result<Self> {
        if rects.is_empty() {
            return Self::empty([T::zero(); 2], pitch, 0, 0);
        }
        let mut lo = [T::infinity(); 2];
        let mut hi = [T::neg_infinity(); 2];
        for r in rects {
            if !(r[1] > r[0] && r[3] > r[2]) {
                return Err(Error::Argument(format!("degenerate rectangle {r:?}")));
            }
            lo = [lo[0].min(r[0]), lo[1].min(r[2])];
            hi = [hi[0].max(r[1]), hi[1].max(r[3])];
        }
        let (origin, width, height) = lattice_box(pitch, lo, hi)?;
        let h = pitch;
        Self::from_fn(origin, pitch, width, height, |i, j| {
            let x = origin[0] + (T::from_usize_lossy(i) + T::half()) * h;
            let y = origin[1] + (T::from_usize_lossy(j) + T::half()) * h;
            rects
                .iter()
                .any(|r| x > r[0] && x < r[1] && y > r[2] && y < r[3])
        })
    }

    /// Cells whose centers lie inside the star shape.
    pub fn from_star(shape: &StarShape<T>, pitch: T) -> Result<Self> {
        if !(pitch > T::zero()) {
            return Err(Error::Argument(format!(
                "pitch must be positive, got {pitch}"
            )));
        }
        let reach = shape.max_radius_bound();
        let c = shape.center();
        let (origin, width, height) = lattice_box(
            pitch,
            [c[0] - reach, c[1] - reach],
            [c[0] + reach, c[1] + reach],
        )?;
        let rows: Vec<Vec<bool>> = (0..height)
            .into_par_iter()
            .map(|j| {
                let y = origin[1] + (T::from_usize_lossy(j) + T::half()) * pitch;
                (0..width)
                    .map(|i| {
                        let x = origin[0] + (T::from_usize_lossy(i) + T::half()) * pitch;
                        shape.contains([x, y])
                    })
                    .collect()
            })
            .collect();
        Self::new(origin, pitch, width, height, rows.concat())
    }

    pub fn origin(&self) -> [T; 2] {
        self.origin
    }

    pub fn pitch(&self) -> T {
        self.pitch
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn mask(&self) -> &[bool] {
        &self.mask
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> bool {
        i < self.width && j < self.height && self.mask[j * self.width + i]
    }

    pub fn set(&mut self, i: usize, j: usize, value: bool) {
        assert!(
            i < self.width && j < self.height,
            "cell ({i}, {j}) outside grid"
        );
        self.mask[j * self.width + i] = value;
    }

    pub fn count(&self) -> usize {
        self.mask.iter().filter(|&&m| m).count()
    }

    pub fn is_empty(&self) -> bool {
        !self.mask.iter().any(|&m| m)
    }

    /// Occupied count times `pitch²`.
    pub fn area(&self) -> T {
        T::from_usize_lossy(self.count()) * self.pitch * self.pitch
    }

    /// Number of occupied/empty cell interfaces (grid border counts as empty)
    /// times the pitch.
    pub fn perimeter(&self) -> T {
        let mut edges = 0usize;
        for j in 0..self.height {
            for i in 0..self.width {
                if !self.get(i, j) {
                    continue;
                }
                edges += usize::from(i == 0 || !self.get(i - 1, j));
                edges += usize::from(!self.get(i + 1, j));
                edges += usize::from(j == 0 || !self.get(i, j - 1));
                edges += usize::from(!self.get(i, j + 1));
            }
        }
        T::from_usize_lossy(edges) * self.pitch
    }

    pub fn cell_center(&self, i: usize, j: usize) -> [T; 2] {
        [
            self.origin[0] + (T::from_usize_lossy(i) + T::half()) * self.pitch,
            self.origin[1] + (T::from_usize_lossy(j) + T::half()) * self.pitch,
        ]
    }

    /// Grid indices of occupied cells.
    pub fn occupied(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::with_capacity(self.count());
        for j in 0..self.height {
            for i in 0..self.width {
                if self.mask[j * self.width + i] {
                    out.push((i, j));
                }
            }
        }
        out
    }

    /// Position of the origin on the lattice `pitch·ℤ²`; errors if the origin
    /// is off-lattice.
    pub fn lattice_offset(&self) -> Result<[i64; 2]> {
        let mut out = [0i64; 2];
        for (o, v) in out.iter_mut().zip(self.origin) {
            let q = v / self.pitch;
            let r = q.round();
            if (q - r).abs() > T::lit(1e-6) {
                return Err(Error::Argument(format!(
                    "raster origin {v} is not on the lattice of pitch {}",
                    self.pitch
                )));
            }
            *o = r
                .to_i64()
                .ok_or_else(|| Error::Argument("raster origin out of range".into()))?;
        }
        Ok(out)
    }

    /// Occupied cells as global lattice indices.
    pub fn lattice_cells(&self) -> Result<Vec<[i64; 2]>> {
        let off = self.lattice_offset()?;
        Ok(self
            .occupied()
            .into_iter()
            .map(|(i, j)| [off[0] + i as i64, off[1] + j as i64])
            .collect())
    }

    /// Errors unless both rasters share the pitch and the lattice.
    pub fn check_compatible(&self, other: &Self) -> Result<()> {
        let rel = (self.pitch - other.pitch).abs() / self.pitch;
        if rel > T::lit(1e-9) {
            return Err(Error::Argument(format!(
                "rasters have different pitches {} and {}",
                self.pitch, other.pitch
            )));
        }
        self.lattice_offset()?;
        other.lattice_offset()?;
        Ok(())
    }

    /// `|self Δ other|` for rasters on a common lattice.
    pub fn symmetric_difference_area(&self, other: &Self) -> Result<T> {
        self.check_compatible(other)?;
        let a: std::collections::HashSet<[i64; 2]> = self.lattice_cells()?.into_iter().collect();
        let b: std::collections::HashSet<[i64; 2]> = other.lattice_cells()?.into_iter().collect();
        let n = a.symmetric_difference(&b).count();
        Ok(T::from_usize_lossy(n) * self.pitch * self.pitch)
    }

    /// Splits occupied cells by a predicate on their centers into
    /// `(kept, removed)`, both on this grid.
    pub fn split_by<F: Fn([T; 2]) -> bool>(&self, remove: F) -> (Self, Self) {
        let mut kept = self.clone();
        let mut removed = self.clone();
        for j in 0..self.height {
            for i in 0..self.width {
                let idx = j * self.width + i;
                if !self.mask[idx] {
                    continue;
                }
                let r = remove(self.cell_center(i, j));
                kept.mask[idx] = !r;
                removed.mask[idx] = r;
            }
        }
        (kept, removed)
    }

    /// Length of the slice `{x_axis = t}`: occupied cells in the column
    /// (axis 1) or row (axis 2) containing `t`, times the pitch.
    pub fn cross_section(&self, axis: u8, t: T) -> Result<T> {
        let (o, n) = match axis {
            1 => (self.origin[0], self.width),
            2 => (self.origin[1], self.height),
            _ => return Err(Error::Argument(format!("axis must be 1 or 2, got {axis}"))),
        };
        let x = (t - o) / self.pitch;
        if !(x >= T::zero()) || x >= T::from_usize_lossy(n) {
            return Ok(T::zero());
        }
        let k = x.floor().to_usize().unwrap_or(0).min(n - 1);
        Ok(self.line_count(axis, k))
    }

    /// Occupied cells in column (axis 1) or row (axis 2) `k`, times the pitch.
    pub(crate) fn line_count(&self, axis: u8, k: usize) -> T {
        let n = if axis == 1 {
            (0..self.height).filter(|&j| self.get(k, j)).count()
        } else {
            (0..self.width).filter(|&i| self.get(i, k)).count()
        };
        T::from_usize_lossy(n) * self.pitch
    }

    pub fn to_pgm(&self) -> String {
        let mut s = String::with_capacity(self.mask.len() * 2 + 128);
        s.push_str("P2\n");
        s.push_str(FORMAT_TAG);
        s.push('\n');
        s.push_str(&format!("# origin {} {}\n", self.origin[0], self.origin[1]));
        s.push_str(&format!("# pitch {}\n", self.pitch));
        s.push_str(&format!("{} {}\n1\n", self.width, self.height));
        for j in (0..self.height).rev() {
            let row: Vec<&str> = (0..self.width)
                .map(|i| if self.get(i, j) { "1" } else { "0" })
                .collect();
            s.push_str(&row.join(" "));
            s.push('\n');
        }
        s
    }

    pub fn from_pgm(text: &str) -> Result<Self> {
        let mut origin = None;
        let mut pitch = None;
        let mut tokens = Vec::new();
        for line in text.lines() {
            let line = line.trim();
            if let Some(comment) = line.strip_prefix('#') {
                let mut parts = comment.split_whitespace();
                match parts.next() {
                    Some("origin") => {
                        let x = parse_num::<T>(parts.next())?;
                        let y = parse_num::<T>(parts.next())?;
                        origin = Some([x, y]);
                    }
                    Some("pitch") => pitch = Some(parse_num::<T>(parts.next())?),
                    Some("gamow") => {
                        if comment.trim() != FORMAT_TAG.trim_start_matches('#').trim() {
                            return Err(Error::Parse(format!("unsupported raster format: {line}")));
                        }
                    }
                    _ => {}
                }
                continue;
            }
            tokens.extend(line.split_whitespace().map(str::to_owned));
        }
        let mut it = tokens.into_iter();
        if it.next().as_deref() != Some("P2") {
            return Err(Error::Parse("raster text must start with P2".into()));
        }
        let mut next_usize = |what: &str| -> Result<usize> {
            it.next()
                .ok_or_else(|| Error::Parse(format!("missing {what}")))?
                .parse::<usize>()
                .map_err(|e| Error::Parse(format!("bad {what}: {e}")))
        };
        let width = next_usize("width")?;
        let height = next_usize("height")?;
        let maxval = next_usize("maxval")?;
        if maxval == 0 {
            return Err(Error::Parse("maxval must be positive".into()));
        }
        let mut values = Vec::with_capacity(width * height);
        for _ in 0..width * height {
            values.push(next_usize("pixel")? > 0);
        }
        if it.next().is_some() {
            return Err(Error::Parse("trailing data after raster".into()));
        }
        let mut mask = vec![false; width * height];
        for (r, row) in values.chunks(width.max(1)).enumerate() {
            let j = height - 1 - r;
            mask[j * width..(j + 1) * width].copy_from_slice(row);
        }
        let origin = origin.ok_or_else(|| Error::Parse("missing '# origin' header".into()))?;
        let pitch = pitch.ok_or_else(|| Error::Parse("missing '# pitch' header".into()))?;
        Self::new(origin, pitch, width, height, mask)
    }
}

fn parse_num<T: Real>(s: Option<&str>) -> Result<T> {
    let s = s.ok_or_else(|| Error::Parse("missing number in header".into()))?;
    let v: f64 = s
        .parse()
        .map_err(|e| Error::Parse(format!("bad number '{s}': {e}")))?;
    Ok(T::lit(v))
}

/// Lattice-aligned grid covering `[lo, hi]`.
fn lattice_box<T: Real>(pitch: T, lo: [T; 2], hi: [T; 2]) -> Result<([T; 2], usize, usize)> {
    let i0 = (lo[0] / pitch).floor();
    let j0 = (lo[1] / pitch).floor();
    let i1 = (hi[0] / pitch).ceil();
    let j1 = (hi[1] / pitch).ceil();
    let w = (i1 - i0).to_usize();
    let h = (j1 - j0).to_usize();
    match (w, h) {
        (Some(w), Some(h)) if w.saturating_mul(h) <= 1 << 28 => {
            Ok(([i0 * pitch, j0 * pitch], w, h))
        }
        _ => Err(Error::Argument(format!(
            "raster grid too large at pitch {pitch}"
        ))),
    }
}

/// Fixed test sets.
pub mod fixtures {
    use super::*;

    /// Thickness of the dumbbell's connecting strip.
    pub const DUMBBELL_NECK: f64 = 0.05;

    /// Unit squares `[0,1]²` and `[5,6]×[0,1]` joined by the strip
    /// `[1,5] × [0.475, 0.525]`. The pitch must resolve the neck.
    pub fn dumbbell<T: Real>(pitch: T) -> Result<RasterSet<T>> {
        let cells = T::lit(DUMBBELL_NECK) / pitch;
        if (cells - cells.round()).abs() > T::lit(1e-9) || cells.round() < T::one() {
            return Err(Error::Argument(format!(
                "pitch {pitch} does not divide the neck thickness {DUMBBELL_NECK}"
            )));
        }
        let l = |x: f64| T::lit(x);
        RasterSet::from_rects(
            pitch,
            &[
                [l(0.0), l(1.0), l(0.0), l(1.0)],
                [l(5.0), l(6.0), l(0.0), l(1.0)],
                [l(1.0), l(5.0), l(0.475), l(0.525)],
            ],
        )
    }

    /// Raster of the disk of the given radius centred at the origin.
    pub fn disk<T: Real>(radius: T, pitch: T) -> Result<RasterSet<T>> {
        StarShape::disk([T::zero(); 2], radius)?.rasterize(pitch)
    }
}
