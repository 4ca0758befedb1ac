//! Compact planar sets discretized as a square cell grid.
//!
//! A cell belongs to the set iff its center does (center-in rasterization).
//! The boundary error of that rule is first order in the cell width.
//! Swiss-cheese sets only approximate empty interior: holes narrower than
//! two cell widths are widened to that floor.

use std::fmt::Write as _;

use rand_core::{RngCore, SeedableRng};
use rand_xoshiro::SplitMix64;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::scalar::{c, Real, C};

/// Smallest resolution accepted by [`Region::build_disk`].
pub const MIN_DISK_RESOLUTION: usize = 8;
/// Smallest resolution accepted by [`Region::build_swiss_cheese`].
pub const MIN_CHEESE_RESOLUTION: usize = 64;
/// Fraction of the outer disk area budgeted for the holes.
pub const HOLE_AREA_BUDGET: f64 = 0.4;
/// Minimum hole radius, in cell widths.
pub const MIN_HOLE_CELLS: f64 = 2.0;

const EMPTY: u32 = u32::MAX;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cell<T> {
    pub row: usize,
    pub col: usize,
    pub center: C<T>,
    pub area: T,
}

/// A compact set `X` as an `n x n` bitmap over the square
/// `[origin, origin + side(1 + i)]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Region<T> {
    origin: C<T>,
    side: T,
    resolution: usize,
    filled: Vec<bool>,
    cell_area: T,
    width: T,
    // filled cell ordinal -> grid index (row-major), and the inverse map
    cells: Vec<u32>,
    slot: Vec<u32>,
}

impl<T: Real> Region<T> {
    /// Builds a region from a row-major bitmap of `resolution^2` flags.
    pub fn from_bitmap(origin: C<T>, side: T, resolution: usize, filled: Vec<bool>) -> Result<Self> {
        if !(side > T::zero()) || !side.is_finite() {
            return Err(Error::InvalidArgument(format!("side must be positive, got {side}")));
        }
        if resolution == 0 || resolution > 1 << 15 {
            return Err(Error::InvalidArgument(format!("resolution {resolution} out of range")));
        }
        if filled.len() != resolution * resolution {
            return Err(Error::InvalidArgument(format!(
                "bitmap has {} entries, expected {}",
                filled.len(),
                resolution * resolution
            )));
        }
        let mut cells = Vec::new();
        let mut slot = vec![EMPTY; filled.len()];
        for (g, &f) in filled.iter().enumerate() {
            if f {
                slot[g] = cells.len() as u32;
                cells.push(g as u32);
            }
        }
        if cells.is_empty() {
            return Err(Error::InvalidArgument("region has no filled cell".into()));
        }
        let width = side / T::from_usize_lossy(resolution);
        Ok(Self { origin, side, resolution, filled, cell_area: width * width, width, cells, slot })
    }

    /// The whole bounding square.
    pub fn full_square(origin: C<T>, side: T, resolution: usize) -> Result<Self> {
        Self::from_bitmap(origin, side, resolution, vec![true; resolution * resolution])
    }

    /// Closed disk `|z - center| <= radius` rasterized on its bounding square.
    pub fn build_disk(center: C<T>, radius: T, resolution: usize) -> Result<Self> {
        if !(radius > T::zero()) || !radius.is_finite() {
            return Err(Error::InvalidArgument(format!("radius must be positive, got {radius}")));
        }
        if resolution < MIN_DISK_RESOLUTION {
            return Err(Error::InvalidArgument(format!(
                "resolution {resolution} below minimum {MIN_DISK_RESOLUTION}"
            )));
        }
        let origin = center - c(radius, radius);
        let side = radius + radius;
        let mut filled = vec![false; resolution * resolution];
        let w = side / T::from_usize_lossy(resolution);
        let half = T::lit(0.5);
        for row in 0..resolution {
            for col in 0..resolution {
                let z = origin
                    + c(
                        (T::from_usize_lossy(col) + half) * w,
                        (T::from_usize_lossy(row) + half) * w,
                    );
                filled[row * resolution + col] = (z - center).norm() <= radius;
            }
        }
        Self::from_bitmap(origin, side, resolution, filled)
    }

    /// Disk of `outer_radius` about 0 minus `hole_count` open disks.
    ///
    /// Hole `k` has radius `max(r0 * hole_scale^k, 2 cell widths)`, where
    /// `r0` spends [`HOLE_AREA_BUDGET`] of the disk area on the geometric
    /// series. Centers come from a SplitMix64 stream seeded with `seed`:
    /// two draws per hole, each `u = (next_u64 >> 11) * 2^-53`, giving the
    /// polar center `(outer_radius - r_k) * sqrt(u1) * exp(2 pi i u2)`.
    pub fn build_swiss_cheese(
        outer_radius: T,
        hole_count: usize,
        hole_scale: T,
        seed: u64,
        resolution: usize,
    ) -> Result<Self> {
        if resolution < MIN_CHEESE_RESOLUTION {
            return Err(Error::InvalidArgument(format!(
                "resolution {resolution} below minimum {MIN_CHEESE_RESOLUTION}"
            )));
        }
        let disk = Self::build_disk(C::new(T::zero(), T::zero()), outer_radius, resolution)?;
        if hole_count == 0 {
            return Ok(disk);
        }
        if !(hole_scale > T::zero() && hole_scale < T::one()) {
            return Err(Error::InvalidArgument(format!("hole_scale must lie in (0,1), got {hole_scale}")));
        }
        let radii = hole_radii(outer_radius.as_f64(), hole_count, hole_scale.as_f64(), disk.width.as_f64());
        let removed: f64 = radii.iter().map(|r| std::f64::consts::PI * r * r).sum();
        let outer = outer_radius.as_f64();
        let outer_area = std::f64::consts::PI * outer * outer;
        if removed >= 0.5 * outer_area {
            return Err(Error::InvalidArgument(format!(
                "holes remove {removed:.6} of area {outer_area:.6}; at most half is allowed"
            )));
        }
        let mut rng = SplitMix64::from_seed(seed.to_le_bytes());
        let holes: Vec<(C<T>, T)> = radii
            .iter()
            .map(|&r| {
                let u1 = unit_draw(&mut rng);
                let u2 = unit_draw(&mut rng);
                let rho = (outer - r) * u1.sqrt();
                let theta = std::f64::consts::TAU * u2;
                (c(T::lit(rho * theta.cos()), T::lit(rho * theta.sin())), T::lit(r))
            })
            .collect();
        let mut filled = disk.filled.clone();
        let n = resolution;
        for &g in &disk.cells {
            let g = g as usize;
            let z = disk.center_at(g / n, g % n);
            if holes.iter().any(|&(hc, hr)| (z - hc).norm() < hr) {
                filled[g] = false;
            }
        }
        Self::from_bitmap(disk.origin, disk.side, n, filled)
    }

    pub fn origin(&self) -> C<T> {
        self.origin
    }

    pub fn side(&self) -> T {
        self.side
    }

    pub fn resolution(&self) -> usize {
        self.resolution
    }

    pub fn cell_area(&self) -> T {
        self.cell_area
    }

    pub fn cell_width(&self) -> T {
        self.width
    }

    pub fn filled_count(&self) -> usize {
        self.cells.len()
    }

    pub fn bitmap(&self) -> &[bool] {
        &self.filled
    }

    /// `m(X)`: cell area times filled-cell count.
    pub fn area(&self) -> T {
        // side^2 * count / n^2 keeps dyadic and full-square areas exact
        let n = T::from_usize_lossy(self.resolution);
        self.side * self.side * T::from_usize_lossy(self.cells.len()) / (n * n)
    }

    /// Center of grid cell `(row, col)`; indices may lie outside the grid.
    #[inline]
    pub fn lattice_center(&self, row: i64, col: i64) -> C<T> {
        let half = T::lit(0.5);
        self.origin
            + c(
                (T::lit(col as f64) + half) * self.width,
                (T::lit(row as f64) + half) * self.width,
            )
    }

    #[inline]
    pub fn center_at(&self, row: usize, col: usize) -> C<T> {
        self.lattice_center(row as i64, col as i64)
    }

    /// The `i`-th filled cell in row-major order.
    #[inline]
    pub fn cell(&self, i: usize) -> Cell<T> {
        let g = self.cells[i] as usize;
        let (row, col) = (g / self.resolution, g % self.resolution);
        Cell { row, col, center: self.center_at(row, col), area: self.cell_area }
    }

    pub fn cells(&self) -> impl ExactSizeIterator<Item = Cell<T>> + '_ {
        (0..self.cells.len()).map(move |i| self.cell(i))
    }

    /// Centers of all filled cells, in cell order.
    pub fn centers(&self) -> Vec<C<T>> {
        self.cells().map(|cl| cl.center).collect()
    }

    /// Ordinal of the filled cell at `(row, col)`, if it is filled.
    #[inline]
    pub fn filled_index(&self, row: i64, col: i64) -> Option<usize> {
        let n = self.resolution as i64;
        if row < 0 || col < 0 || row >= n || col >= n {
            return None;
        }
        let s = self.slot[(row * n + col) as usize];
        (s != EMPTY).then_some(s as usize)
    }

    /// Lattice coordinates of the half-open cell `[left, left + w) x [bottom, bottom + w)`
    /// containing `z`; may lie outside the grid.
    #[inline]
    pub fn lattice_coords(&self, z: C<T>) -> (i64, i64) {
        let d = z - self.origin;
        let col = (d.re / self.width).floor().as_f64() as i64;
        let row = (d.im / self.width).floor().as_f64() as i64;
        (row, col)
    }

    /// Filled cell containing `z` under the half-open convention.
    pub fn locate(&self, z: C<T>) -> Option<usize> {
        let (row, col) = self.lattice_coords(z);
        self.filled_index(row, col)
    }

    /// Filled cells whose closed squares contain `z`: one cell in the
    /// interior, two on an edge, four at a vertex.
    pub fn cells_containing(&self, z: C<T>) -> Vec<usize> {
        let d = z - self.origin;
        let u = d.re / self.width;
        let v = d.im / self.width;
        let eps = T::lit(1e-9);
        let cols = touching(u, eps);
        let rows = touching(v, eps);
        let mut out = Vec::new();
        for &r in &rows {
            for &cc in &cols {
                if let Some(i) = self.filled_index(r, cc) {
                    out.push(i);
                }
            }
        }
        out
    }

    /// Filled cells with `|center - x0| <= r`, in cell order.
    pub fn ball_cells(&self, x0: C<T>, r: T) -> Vec<Cell<T>> {
        self.cells().filter(|cl| (cl.center - x0).norm() <= r).collect()
    }

    /// Lattice cells (inside the grid or not) with `|center - x0| <= r`,
    /// ordered by row then column.
    pub fn lattice_ball(&self, x0: C<T>, r: T) -> Vec<(i64, i64)> {
        let (r0, c0) = self.lattice_coords(x0);
        let span = (r / self.width).ceil().as_f64() as i64 + 1;
        let mut out = Vec::new();
        for row in r0 - span..=r0 + span {
            for col in c0 - span..=c0 + span {
                if (self.lattice_center(row, col) - x0).norm() <= r {
                    out.push((row, col));
                }
            }
        }
        out
    }

    /// RGN1 text encoding.
    pub fn to_rgn1(&self) -> String {
        let mut s = String::new();
        writeln!(s, "RGN1").unwrap();
        writeln!(s, "origin {} {}", self.origin.re, self.origin.im).unwrap();
        writeln!(s, "side {}", self.side).unwrap();
        writeln!(s, "resolution {}", self.resolution).unwrap();
        for row in self.filled.chunks(self.resolution) {
            s.push_str(&rle_encode(row));
            s.push('\n');
        }
        s
    }

    pub fn from_rgn1(text: &str) -> Result<Self> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let bad = |m: &str| Error::Parse(format!("RGN1: {m}"));
        if lines.next().map(str::trim) != Some("RGN1") {
            return Err(bad("missing magic line"));
        }
        let origin_line = lines.next().ok_or_else(|| bad("missing origin"))?;
        let toks: Vec<&str> = origin_line.split_whitespace().collect();
        if toks.len() != 3 || toks[0] != "origin" {
            return Err(bad("malformed origin line"));
        }
        let ore = toks[1].parse::<T>().map_err(|_| bad("origin re"))?;
        let oim = toks[2].parse::<T>().map_err(|_| bad("origin im"))?;
        let side = keyed(lines.next(), "side")?.parse::<T>().map_err(|_| bad("side"))?;
        let n = keyed(lines.next(), "resolution")?
            .parse::<usize>()
            .map_err(|_| bad("resolution"))?;
        let mut filled = Vec::with_capacity(n * n);
        for _ in 0..n {
            let line = lines.next().ok_or_else(|| bad("truncated bitmap"))?;
            let row = rle_decode(line)?;
            if row.len() != n {
                return Err(bad("bitmap row has wrong length"));
            }
            filled.extend(row);
        }
        if lines.next().is_some() {
            return Err(bad("trailing data"));
        }
        Self::from_bitmap(c(ore, oim), side, n, filled)
    }

    /// Hex SHA-256 of the RGN1 encoding (first 16 characters).
    pub fn checksum(&self) -> String {
        let digest = Sha256::digest(self.to_rgn1().as_bytes());
        digest.iter().take(8).map(|b| format!("{b:02x}")).collect()
    }
}

fn touching<T: Real>(u: T, eps: T) -> Vec<i64> {
    let fl = u.floor();
    let frac = u - fl;
    let base = fl.as_f64() as i64;
    if frac < eps {
        vec![base - 1, base]
    } else if T::one() - frac < eps {
        vec![base, base + 1]
    } else {
        vec![base]
    }
}

fn keyed<'a>(line: Option<&'a str>, key: &str) -> Result<&'a str> {
    let line = line.ok_or_else(|| Error::Parse(format!("RGN1: missing {key}")))?;
    let mut it = line.split_whitespace();
    match (it.next(), it.next(), it.next()) {
        (Some(k), Some(v), None) if k == key => Ok(v),
        _ => Err(Error::Parse(format!("RGN1: malformed {key} line"))),
    }
}

/// Hole radii `max(r0 s^k, floor)` with `r0` fixed by the area budget.
fn hole_radii(outer: f64, count: usize, scale: f64, width: f64) -> Vec<f64> {
    let s2 = scale * scale;
    let series = (1.0 - s2.powi(count as i32)) / (1.0 - s2);
    let r0 = outer * (HOLE_AREA_BUDGET / series).sqrt();
    let floor = MIN_HOLE_CELLS * width;
    (0..count).map(|k| (r0 * scale.powi(k as i32)).max(floor)).collect()
}

fn unit_draw(rng: &mut SplitMix64) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

pub(crate) fn rle_encode(bits: &[bool]) -> String {
    let mut out = Vec::new();
    let mut i = 0;
    while i < bits.len() {
        let b = bits[i];
        let mut j = i;
        while j < bits.len() && bits[j] == b {
            j += 1;
        }
        out.push(format!("{}x{}", j - i, u8::from(b)));
        i = j;
    }
    out.join(" ")
}

pub(crate) fn rle_decode(line: &str) -> Result<Vec<bool>> {
    let mut out = Vec::new();
    for tok in line.split_whitespace() {
        let (count, bit) = tok
            .split_once('x')
            .ok_or_else(|| Error::Parse(format!("bad RLE token {tok:?}")))?;
        let count: usize = count.parse().map_err(|_| Error::Parse(format!("bad RLE count {tok:?}")))?;
        let bit = match bit {
            "0" => false,
            "1" => true,
            _ => return Err(Error::Parse(format!("bad RLE bit {tok:?}"))),
        };
        out.extend(std::iter::repeat(bit).take(count));
    }
    Ok(out)
}
