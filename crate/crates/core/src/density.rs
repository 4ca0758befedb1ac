//! Sets of full area density at `x0`: the kernel averages `w_n`, the
//! sets `E_delta`, the exceptional set `E`, and its step-space image `E'`.
//!
//! Ball measures are lattice counts: `Delta_n(x0)` is discretized as every
//! lattice cell whose center lies within `1/n` of `x0`, inside the region
//! or not.

use std::fmt::Write as _;
use std::sync::Arc;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::quadrature::singular::power_sigma;
use crate::quadrature::{newtonian_field, singular_weight_field, LocalFrame, SingularRule, WeightFunction};
use crate::region::{rle_decode, rle_encode, Region};
use crate::scalar::{format_complex, parse_complex, Real, C};
use crate::sum::NeumaierSum;

/// Balls narrower than this many cells are flagged unreliable.
pub const MIN_BALL_CELLS: f64 = 4.0;

/// Which quantity a weight contributes to the membership test.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TestKind {
    /// `|x - x0|^q int |k(z)|^q / |z - x|^q dA`.
    Integral,
    /// `|x - x0| int |k(z)| / |z - x| dA`.
    Potential,
}

/// Member cells of a region, with the tested quantities per cell.
#[derive(Debug, Clone)]
pub struct DensitySet<T> {
    region: Arc<Region<T>>,
    member: Vec<bool>,
    x0: C<T>,
    delta0: T,
    /// One vector per test, indexed by filled cell.
    property_values: Vec<Vec<T>>,
}

impl<T: Real> DensitySet<T> {
    /// A set given directly by membership flags over the filled cells.
    pub fn from_members(region: Arc<Region<T>>, member: Vec<bool>, x0: C<T>, delta0: T) -> Result<Self> {
        if member.len() != region.filled_count() {
            return Err(Error::InvalidArgument(format!(
                "{} membership flags for {} filled cells",
                member.len(),
                region.filled_count()
            )));
        }
        Ok(Self { region, member, x0, delta0, property_values: Vec::new() })
    }

    pub fn region(&self) -> &Arc<Region<T>> {
        &self.region
    }

    /// Membership flag per filled cell.
    pub fn member(&self) -> &[bool] {
        &self.member
    }

    pub fn x0(&self) -> C<T> {
        self.x0
    }

    pub fn delta0(&self) -> T {
        self.delta0
    }

    pub fn property_values(&self) -> &[Vec<T>] {
        &self.property_values
    }

    pub fn member_count(&self) -> usize {
        self.member.iter().filter(|&&b| b).count()
    }

    pub fn contains_cell(&self, i: usize) -> bool {
        self.member[i]
    }

    /// Membership of the filled cell holding `z` (half-open cells).
    pub fn contains(&self, z: C<T>) -> bool {
        self.region.locate(z).is_some_and(|i| self.member[i])
    }

    fn lattice_member(&self, row: i64, col: i64) -> bool {
        self.region.filled_index(row, col).is_some_and(|i| self.member[i])
    }

    /// DEN1 text: magic, region checksum, `x0`, `delta0`, then one RLE line
    /// of membership bits over filled cells.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        writeln!(s, "DEN1").unwrap();
        writeln!(s, "region {}", self.region.checksum()).unwrap();
        writeln!(s, "x0 {}", format_complex(self.x0)).unwrap();
        writeln!(s, "delta0 {}", self.delta0).unwrap();
        writeln!(s, "{}", rle_encode(&self.member)).unwrap();
        s
    }

    /// Property values are not serialized and come back empty.
    pub fn from_text(region: Arc<Region<T>>, text: &str) -> Result<Self> {
        let bad = |m: &str| Error::Parse(format!("DEN1: {m}"));
        let mut lines = text.lines();
        if lines.next().map(str::trim) != Some("DEN1") {
            return Err(bad("missing magic line"));
        }
        let mut field = |key: &str| -> Result<String> {
            let line = lines.next().ok_or_else(|| bad("truncated header"))?;
            match line.trim().split_once(' ') {
                Some((k, v)) if k == key => Ok(v.trim().to_string()),
                _ => Err(bad(&format!("expected {key}"))),
            }
        };
        if field("region")? != region.checksum() {
            return Err(bad("region checksum mismatch"));
        }
        let x0 = parse_complex::<T>(&field("x0")?).ok_or_else(|| bad("x0"))?;
        let delta0 = field("delta0")?.parse::<T>().map_err(|_| bad("delta0"))?;
        let member = rle_decode(lines.next().unwrap_or(""))?;
        if member.len() != region.filled_count() {
            return Err(bad("membership length does not match region"));
        }
        Ok(Self { region, member, x0, delta0, property_values: Vec::new() })
    }
}

/// `w_n(z)`: mean over `Delta_n(x0)` of `|x - x0|^q / |z - x|^q`.
///
/// Only the region's lattice is used; membership is irrelevant. The cells
/// touching `z` take the lattice-corrected singular term.
pub fn w_n<T: Real>(region: &Region<T>, z: C<T>, x0: C<T>, n: usize, q: T) -> T {
    if z == x0 {
        return T::one();
    }
    let r = T::one() / T::from_usize_lossy(n.max(1));
    let ball = region.lattice_ball(x0, r);
    if ball.is_empty() {
        return T::zero();
    }
    let h = region.cell_width();
    let d = z - region.origin();
    let frame = LocalFrame::new((d.re / h).as_f64(), (d.im / h).as_f64());
    let mut acc = NeumaierSum::new();
    let mut frozen = NeumaierSum::new();
    let mut hits = 0usize;
    for &(row, col) in &ball {
        let x = region.lattice_center(row, col);
        let num = (x - x0).norm().powf(q);
        if frame.singular.contains(&(row, col)) {
            frozen.add(num);
            hits += 1;
        } else {
            acc.add(num / (z - x).norm().powf(q));
        }
    }
    let mut total = acc.value();
    if hits > 0 {
        // sum is in cell units; the singular term h^{2-q} sigma / h^2 is
        // weighted by the share of singular cells inside the ball
        let sigma = T::lit(power_sigma(SingularRule::LatticeCorrected, q.as_f64(), &frame));
        let share = T::from_usize_lossy(hits) / T::from_usize_lossy(frame.singular.len());
        let mean = frozen.value() / T::from_usize_lossy(hits);
        total = total + mean * sigma * h.powf(-q) * share;
    }
    (total / T::from_usize_lossy(ball.len())).max(T::zero())
}

fn check_delta<T: Real>(delta: T, open_unit: bool) -> Result<()> {
    let ok = delta > T::zero() && (!open_unit || delta < T::one());
    if !ok {
        let range = if open_unit { "(0, 1)" } else { "(0, inf)" };
        return Err(Error::InvalidArgument(format!("delta = {delta} must lie in {range}")));
    }
    Ok(())
}

fn property_field<T: Real>(region: &Region<T>, k: &WeightFunction<T>, kind: TestKind, x0: C<T>, q: T) -> Result<Vec<T>> {
    if !std::ptr::eq(&**k.region(), region) && k.region().checksum() != region.checksum() {
        return Err(Error::InvalidArgument("weight lives on a different region".into()));
    }
    let (field, power) = match kind {
        TestKind::Integral => (singular_weight_field(k, q)?, q),
        TestKind::Potential => (newtonian_field(k), T::one()),
    };
    Ok((0..field.len())
        .into_par_iter()
        .map(|i| (region.cell(i).center - x0).norm().powf(power) * field[i])
        .collect())
}

fn assemble<T: Real>(region: Arc<Region<T>>, x0: C<T>, delta0: T, property_values: Vec<Vec<T>>) -> DensitySet<T> {
    let member = (0..region.filled_count())
        .map(|i| property_values.iter().all(|p| p[i] < delta0))
        .collect();
    DensitySet { region, member, x0, delta0, property_values }
}

/// `E_delta = {x : |x - x0|^q int |k|^q / |z - x|^q dA < delta}`.
pub fn build_e_delta<T: Real>(
    region: Arc<Region<T>>,
    k: &WeightFunction<T>,
    x0: C<T>,
    q: T,
    delta: T,
) -> Result<DensitySet<T>> {
    check_delta(delta, false)?;
    let values = property_field(&region, k, TestKind::Integral, x0, q)?;
    Ok(assemble(region, x0, delta, vec![values]))
}

/// Cells passing every listed test with threshold `delta0`.
pub fn build_e<T: Real>(
    region: Arc<Region<T>>,
    weights: &[(&WeightFunction<T>, TestKind)],
    x0: C<T>,
    q: T,
    delta0: T,
) -> Result<DensitySet<T>> {
    check_delta(delta0, true)?;
    let values = weights
        .iter()
        .map(|(k, kind)| property_field(&region, k, *kind, x0, q))
        .collect::<Result<Vec<_>>>()?;
    Ok(assemble(region, x0, delta0, values))
}

/// `E' = {h : x0 + s h in E for s = 1..t}` on an h-grid congruent to the
/// region lattice shifted by `-x0`, so `t = 1` gives a cell-exact
/// translate of `E`. The result's `x0` is `0`.
pub fn build_e_prime<T: Real>(e: &DensitySet<T>, t: usize) -> Result<DensitySet<T>> {
    if t == 0 {
        return Err(Error::InvalidArgument("order t must be at least 1".into()));
    }
    let region = &e.region;
    let grid = Arc::new(Region::full_square(
        region.origin() - e.x0,
        region.side(),
        region.resolution(),
    )?);
    let member = (0..grid.filled_count())
        .into_par_iter()
        .map(|i| {
            let h = grid.cell(i).center;
            (1..=t).all(|s| {
                let node = e.x0 + h * T::from_usize_lossy(s);
                if s == 1 {
                    // exact lattice correspondence, free of rounding in x0 + h
                    let cell = grid.cell(i);
                    e.lattice_member(cell.row as i64, cell.col as i64)
                } else {
                    e.contains(node)
                }
            })
        })
        .collect();
    Ok(DensitySet { region: grid, member, x0: C::new(T::zero(), T::zero()), delta0: e.delta0, property_values: Vec::new() })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DenominatorMode {
    FullBall,
    SetRelative,
}

#[derive(Debug, Clone)]
pub struct DensityReport<T> {
    pub n: Vec<usize>,
    /// `1/n`.
    pub radii: Vec<T>,
    /// `m(Delta_n \ E) / m(Delta_n)` over the full ball.
    pub ratios: Vec<T>,
    /// Same with the ball restricted to the region.
    pub ratios_set_relative: Vec<T>,
    pub reliable: Vec<bool>,
    pub denominator_mode: DenominatorMode,
}

impl<T: Real> DensityReport<T> {
    /// CSV with columns `n,radius,ratio_full_ball,ratio_set_relative,reliable_flag`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("n,radius,ratio_full_ball,ratio_set_relative,reliable_flag\n");
        for i in 0..self.n.len() {
            writeln!(
                s,
                "{},{:e},{:e},{:e},{}",
                self.n[i],
                self.radii[i],
                self.ratios[i],
                self.ratios_set_relative[i],
                u8::from(self.reliable[i])
            )
            .unwrap();
        }
        s
    }
}

pub fn density_scan<T: Real>(e: &DensitySet<T>, n_schedule: &[usize]) -> Result<DensityReport<T>> {
    if n_schedule.is_empty() || n_schedule[0] == 0 || n_schedule.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidArgument("n schedule must be nonempty, positive and increasing".into()));
    }
    let region = &e.region;
    let h = region.cell_width();
    let mut report = DensityReport {
        n: n_schedule.to_vec(),
        radii: Vec::new(),
        ratios: Vec::new(),
        ratios_set_relative: Vec::new(),
        reliable: Vec::new(),
        denominator_mode: DenominatorMode::FullBall,
    };
    for &n in n_schedule {
        let r = T::one() / T::from_usize_lossy(n);
        let ball = region.lattice_ball(e.x0, r);
        let total = ball.len();
        let filled = ball.iter().filter(|&&(a, b)| region.filled_index(a, b).is_some()).count();
        let inside = ball.iter().filter(|&&(a, b)| e.lattice_member(a, b)).count();
        let ratio = |miss: usize, of: usize| {
            if of == 0 {
                T::one()
            } else {
                T::from_usize_lossy(miss) / T::from_usize_lossy(of)
            }
        };
        report.radii.push(r);
        report.ratios.push(ratio(total - inside, total));
        report.ratios_set_relative.push(if filled == 0 { T::zero() } else { ratio(filled - inside, filled) });
        report.reliable.push(T::lit(2.0) * r >= T::lit(MIN_BALL_CELLS) * h);
    }
    Ok(report)
}

/// `(1/m(Delta_n)) sum_{x in Delta_n cap X} |x - x0|^q int |k|^q/|z - x|^q dA |cell|`.
pub fn averaged_weight_integral<T: Real>(k: &WeightFunction<T>, x0: C<T>, q: T, n: usize) -> Result<T> {
    let region = k.region();
    let values = property_field(region, k, TestKind::Integral, x0, q)?;
    let r = T::one() / T::from_usize_lossy(n.max(1));
    let ball = region.lattice_ball(x0, r);
    let mut acc = NeumaierSum::new();
    for &(a, b) in &ball {
        if let Some(i) = region.filled_index(a, b) {
            acc.add(values[i]);
        }
    }
    Ok(acc.value() / T::from_usize_lossy(ball.len().max(1)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::c;
    use std::f64::consts::PI;

    fn disk(n: usize) -> Arc<Region<f64>> {
        Arc::new(Region::build_disk(c(0.0, 0.0), 1.0, n).unwrap())
    }

    #[test]
    fn w_n_examples() {
        let r = disk(256);
        assert_eq!(w_n(&r, c(0.0, 0.0), c(0.0, 0.0), 8, 1.5), 1.0);
        // z next to x0 but not equal; value near 1 and under the bound
        let v = w_n(&r, c(1e-9, 0.0), c(0.0, 0.0), 8, 1.5);
        assert!(v <= 4.0 * 1.02 && v > 0.5, "{v}");
        let fine = Region::full_square(c(-0.05, -0.05), 0.1, 80).unwrap();
        let v = w_n(&fine, c(1.0, 0.0), c(0.0, 0.0), 100, 1.5);
        let bound = 100f64.powf(-1.5) / (1.0 - 0.01f64).powf(1.5);
        assert!(v <= bound * 1.02, "{v} vs {bound}");
    }

    #[test]
    fn w_n_bound_on_probe_grid() {
        let r = disk(128);
        for &q in &[1.2, 1.5, 1.8] {
            for &n in &[4usize, 8, 16] {
                let rad = 1.0 / n as f64;
                for i in 0..16 {
                    for j in 0..16 {
                        let z = c(-2.0 * rad + 4.0 * rad * i as f64 / 15.0, -2.0 * rad + 4.0 * rad * j as f64 / 15.0);
                        let v = w_n(&r, z, c(0.0, 0.0), n, q);
                        assert!(v * (2.0 - q) / 2.0 <= 1.02, "q={q} n={n} z={z} v={v}");
                    }
                }
            }
        }
    }

    #[test]
    fn e_delta_examples() {
        let r = disk(128);
        let zero = WeightFunction::constant(r.clone(), c(0.0, 0.0), 1.5).unwrap();
        let e = build_e_delta(r.clone(), &zero, c(0.0, 0.0), 1.5, 1e-6).unwrap();
        assert_eq!(e.member_count(), r.filled_count());
        let k = WeightFunction::constant(r.clone(), c(1.0 / PI, 0.0), 1.5).unwrap();
        let e = build_e_delta(r.clone(), &k, c(0.0, 0.0), 1.5, 0.5).unwrap();
        assert!(r.ball_cells(c(0.0, 0.0), 0.1).iter().all(|cl| e.contains(cl.center)));
        assert!(e.member_count() < r.filled_count());
        let all = build_e_delta(r.clone(), &k, c(0.0, 0.0), 1.5, 1e9).unwrap();
        assert_eq!(all.member_count(), r.filled_count());
        for (i, v) in e.property_values()[0].iter().enumerate() {
            assert_eq!(e.member()[i], *v < 0.5);
        }
        // monotone in delta
        let mut prev = build_e_delta(r.clone(), &k, c(0.0, 0.0), 1.5, 0.01).unwrap();
        for d in [0.05, 0.1, 0.5, 1.0] {
            let next = build_e_delta(r.clone(), &k, c(0.0, 0.0), 1.5, d).unwrap();
            assert!(prev.member().iter().zip(next.member()).all(|(a, b)| !a || *b));
            prev = next;
        }
        assert!(build_e_delta(r, &k, c(0.0, 0.0), 1.5, 0.0).is_err());
    }

    #[test]
    fn e_examples() {
        let r = disk(128);
        let x0 = c(0.0, 0.0);
        let e = build_e(r.clone(), &[], x0, 1.5, 0.5).unwrap();
        assert_eq!(e.member_count(), r.filled_count());
        let k = WeightFunction::constant(r.clone(), c(1.0 / PI, 0.0), 1.5).unwrap();
        let k1 = crate::measures::PointFunctional::disk(r.clone(), x0, 1, 1.5).unwrap();
        let tests = [(k1.weight(), TestKind::Integral), (&k, TestKind::Integral), (&k, TestKind::Potential)];
        let e = build_e(r.clone(), &tests, x0, 1.5, 0.5).unwrap();
        assert!(r.ball_cells(x0, 0.05).iter().all(|cl| e.contains(cl.center)));
        let ed = build_e_delta(r.clone(), &k, x0, 1.5, 0.5).unwrap();
        assert!(e.member().iter().zip(ed.member()).all(|(a, b)| !a || *b));
        let tiny = build_e(r.clone(), &tests, x0, 1.5, 1e-6).unwrap();
        let rep = density_scan(&tiny, &[4, 8]).unwrap();
        assert!(rep.ratios.iter().all(|v| (0.0..=1.0).contains(v)));
        assert!(build_e(r, &tests, x0, 1.5, 1.0).is_err());
    }

    #[test]
    fn e_prime_examples() {
        let r = disk(64);
        let x0 = c(0.0, 0.0);
        let k = WeightFunction::constant(r.clone(), c(1.0 / PI, 0.0), 1.5).unwrap();
        let e = build_e_delta(r.clone(), &k, x0, 1.5, 0.3).unwrap();
        let p1 = build_e_prime(&e, 1).unwrap();
        for i in 0..p1.region().filled_count() {
            let cell = p1.region().cell(i);
            assert_eq!(p1.member()[i], e.lattice_member(cell.row as i64, cell.col as i64));
        }
        // E = disk of radius 0.4 about x0 gives E' containing radius 0.2
        let all = build_e(r.clone(), &[], x0, 1.5, 0.5).unwrap();
        let member = (0..r.filled_count()).map(|i| r.cell(i).center.norm() < 0.4).collect();
        let ball = DensitySet { member, ..all };
        let p2 = build_e_prime(&ball, 2).unwrap();
        for i in 0..p2.region().filled_count() {
            let h = p2.region().cell(i).center;
            if h.norm() < 0.2 - 0.05 {
                assert!(p2.member()[i], "{h}");
            }
        }
        assert!(build_e_prime(&ball, 0).is_err());
    }

    #[test]
    fn scan_examples() {
        let r = disk(256);
        let all = build_e(r.clone(), &[], c(0.0, 0.0), 1.5, 0.5).unwrap();
        let rep = density_scan(&all, &[4, 8, 16]).unwrap();
        assert!(rep.ratios.iter().all(|&v| v == 0.0));
        let edge = DensitySet { x0: c(1.0, 0.0), ..all.clone() };
        let rep = density_scan(&edge, &[8, 16, 32]).unwrap();
        assert!((rep.ratios[2] - 0.5).abs() < 0.05, "{:?}", rep.ratios);
        assert!(rep.reliable.iter().all(|&b| b));
        let coarse = density_scan(&edge, &[8, 1000]).unwrap();
        assert!(!coarse.reliable[1]);
        assert!(density_scan(&all, &[]).is_err());
        assert!(density_scan(&all, &[8, 4]).is_err());

        let sq = Arc::new(Region::full_square(c(-1.0, -1.0), 2.0, 128).unwrap());
        let member = sq.cells().map(|cl| cl.center.re < 0.0).collect();
        let half = DensitySet { region: sq.clone(), member, x0: c(0.0, 0.0), delta0: 0.5, property_values: vec![] };
        let rep = density_scan(&half, &[4, 8, 16]).unwrap();
        assert!(rep.ratios.iter().all(|v: &f64| (v - 0.5).abs() < 0.02), "{:?}", rep.ratios);
        assert!(rep.to_csv().starts_with("n,radius,ratio_full_ball,ratio_set_relative,reliable_flag\n"));
    }

    #[test]
    fn averaged_integral_decays() {
        let r = disk(256);
        let k = WeightFunction::constant(r.clone(), c(1.0 / PI, 0.0), 1.5).unwrap();
        let vals: Vec<f64> = [4, 8, 16, 32].iter().map(|&n| averaged_weight_integral(&k, c(0.0, 0.0), 1.5, n).unwrap()).collect();
        assert!(vals.windows(2).all(|w| w[1] <= w[0]));
        assert!(vals[3] < vals[0] / 4.0, "{vals:?}");
    }

    #[test]
    fn text_roundtrip() {
        let r = disk(32);
        let k = WeightFunction::constant(r.clone(), c(1.0 / PI, 0.0), 1.5).unwrap();
        let e = build_e_delta(r.clone(), &k, c(0.0, 0.0), 1.5, 0.3).unwrap();
        let back = DensitySet::from_text(r, &e.to_text()).unwrap();
        assert_eq!(back.member(), e.member());
        assert_eq!(back.delta0(), 0.3);
    }
}
