//! End-to-end experiments. Every entry point returns a [`TheoremReport`]
//! whose tables are byte-identical across runs and thread counts.

use std::fmt::Write as _;
use std::fs;
use std::sync::Arc;

use rayon::prelude::*;

use super::config::{ExperimentConfig, RegionSpec};
use super::report::{Check, TheoremReport, ThresholdSource};
use crate::approx::{build_sequence, ApproximationSequence, Basis};
use crate::density::{build_e, build_e_prime, density_scan, DensitySet, TestKind};
use crate::diffquot::{convergence_csv, convergence_table, diff_quotient};
use crate::error::{Error, Result};
use crate::measures::{
    apply_functional, bishop_transplant, default_battery, verify_representing, wilken_reduce, PointFunctional,
};
use crate::rational::RationalFunction;
use crate::region::Region;
use crate::scalar::{format_complex, C};

/// Probes within this many cell widths of `x0` are not judged.
pub const RELIABLE_FLOOR_CELLS: f64 = 2.0;
/// Stages with `||g - g_j||_p` below this are skipped by the bound check.
pub const BOUND_SKIP_NORM: f64 = 1e-12;
/// The density scan must end below this fraction of its first ratio.
pub const DENSITY_DECAY_FACTOR: f64 = 0.25;

use ThresholdSource::{ConfigTolerance, TheoryConstant};

pub fn build_region(cfg: &ExperimentConfig) -> Result<Region<f64>> {
    match &cfg.region {
        RegionSpec::Disk { center, radius } => Region::build_disk(*center, *radius, cfg.resolution),
        RegionSpec::SwissCheese { radius, holes, hole_scale } => {
            Region::build_swiss_cheese(*radius, *holes, *hole_scale, cfg.seed, cfg.resolution)
        }
        RegionSpec::Square { origin, side } => Region::full_square(*origin, *side, cfg.resolution),
    }
}

/// `(q, exploratory)`. With the override, `p <= 2` gives an exploratory weight.
fn exponent(cfg: &ExperimentConfig) -> Result<(f64, bool)> {
    if cfg.p > 2.0 {
        Ok((crate::quadrature::conjugate_exponent(cfg.p)?, false))
    } else if cfg.p > 1.0 {
        Ok((cfg.p / (cfg.p - 1.0), true))
    } else {
        Err(Error::OutOfRange(format!("p = {} has no finite conjugate exponent", cfg.p)))
    }
}

/// Order-`t` functional at `x0`: closed form on disks, else from `functional_file`.
pub fn load_functional(cfg: &ExperimentConfig, region: Arc<Region<f64>>, t: usize) -> Result<PointFunctional<f64>> {
    if let Some(path) = &cfg.functional_file {
        let text = fs::read_to_string(path)?;
        let f = PointFunctional::from_text(region, &text)?;
        if f.order() != t || f.x0() != cfg.x0 {
            return Err(Error::InvalidArgument(format!(
                "functional file holds order {} at {}, need order {t} at {}",
                f.order(),
                format_complex(f.x0()),
                format_complex(cfg.x0)
            )));
        }
        return Ok(f);
    }
    match cfg.region {
        RegionSpec::Disk { .. } => {
            let (q, exploratory) = exponent(cfg)?;
            PointFunctional::disk_with(region, cfg.x0, t, q, exploratory)
        }
        _ => Err(Error::UnsupportedRegion(
            "no built-in functional for this region; supply functional_file".into(),
        )),
    }
}

fn region_for(cfg: &ExperimentConfig, report: &mut TheoremReport) -> Result<Arc<Region<f64>>> {
    let region = Arc::new(build_region(cfg)?);
    if region.locate(cfg.x0).is_none() {
        return Err(Error::InvalidArgument(format!("x0 = {} is not in a filled cell", format_complex(cfg.x0))));
    }
    report.note(format!(
        "region: {} filled cells at resolution {}, area {:.6}, checksum {}",
        region.filled_count(),
        region.resolution(),
        region.area(),
        region.checksum()
    ));
    if !matches!(cfg.region, RegionSpec::Disk { .. }) {
        report.note("non-disk region: functional is user supplied and the run is experimental");
    }
    let (q, exploratory) = exponent(cfg)?;
    if exploratory {
        report.note(format!("exploratory run: p = {} outside (2, inf), q = {q}", cfg.p));
    }
    report.table("config.cfg", cfg.to_text());
    report.table("region.rgn", region.to_rgn1());
    Ok(region)
}

fn battery_check(report: &mut TheoremReport, cfg: &ExperimentConfig, func: &PointFunctional<f64>, label: &str) -> Result<bool> {
    let rep = verify_representing(func, &default_battery(func.region()))?;
    report.table(format!("representing_{label}.csv"), rep.to_csv());
    let check = Check::le(
        format!("battery max error, {label}"),
        rep.max_error,
        cfg.tol_battery,
        ConfigTolerance,
    );
    let ok = check.passed;
    if !ok {
        report.note(format!("no verified functional at x0 for {label}"));
    }
    report.check(check);
    Ok(ok)
}

/// Region, functionals of orders `0..=t` reduced from `k_t`, and the set
/// `E` built from `k_t` and the order-0 weight.
pub struct Setup {
    pub region: Arc<Region<f64>>,
    pub q: f64,
    pub t: usize,
    pub functionals: Vec<PointFunctional<f64>>,
    pub e: DensitySet<f64>,
}

pub fn setup(cfg: &ExperimentConfig, t: usize, report: &mut TheoremReport) -> Result<Setup> {
    let region = region_for(cfg, report)?;
    let (q, _) = exponent(cfg)?;
    let kt = load_functional(cfg, region.clone(), t)?;
    let functionals = (0..=t).map(|m| wilken_reduce(&kt, m)).collect::<Result<Vec<_>>>()?;
    for (m, f) in functionals.iter().enumerate() {
        battery_check(report, cfg, f, &format!("order{m}"))?;
    }
    let k = &functionals[0];
    let tests = [
        (kt.weight(), TestKind::Integral),
        (k.weight(), TestKind::Integral),
        (k.weight(), TestKind::Potential),
    ];
    let e = build_e(region.clone(), &tests, cfg.x0, q, cfg.delta0)?;
    report.note(format!("E: {} of {} cells, delta0 = {}", e.member_count(), region.filled_count(), cfg.delta0));
    report.note(format!(
        "reliability floor: probes within {RELIABLE_FLOOR_CELLS} cell widths ({:.3e}) of the origin are not judged",
        RELIABLE_FLOOR_CELLS * region.cell_width()
    ));
    Ok(Setup { region, q, t, functionals, e })
}

/// Target `f`, its functional values `D^m f`, and `g = f - sum D^m f (z-x0)^m/m!`.
pub struct Pipeline {
    pub setup: Setup,
    pub f: RationalFunction<f64>,
    pub dvals: Vec<C<f64>>,
    pub g: RationalFunction<f64>,
    /// `f` is a polynomial of degree `<= t`, so `g` is identically zero.
    pub g_zero: bool,
}

pub fn pipeline(cfg: &ExperimentConfig, t: usize, report: &mut TheoremReport) -> Result<Pipeline> {
    let setup = setup(cfg, t, report)?;
    let f = cfg.target.function();
    let dvals = setup.functionals.iter().map(|func| apply_functional(func, &f)).collect::<Result<Vec<_>>>()?;
    let g_zero = f.is_polynomial() && f.poly().len() <= t + 1;
    let g = if g_zero { RationalFunction::zero() } else { f.taylor_correct(cfg.x0, &dvals) };
    let exact = f.derivative(t).eval(cfg.x0)?;
    report.note(format!(
        "D^{t} f = {} (analytic {})",
        format_complex(dvals[t]),
        format_complex(exact)
    ));
    report.check(Check::le(
        format!("|D^{t} f - f^({t})(x0)|"),
        (dvals[t] - exact).norm(),
        cfg.tol_derivative(t),
        ConfigTolerance,
    ));
    if g_zero {
        report.note("target is a polynomial of degree <= t: g is identically zero");
    }
    Ok(Pipeline { setup, f, dvals, g, g_zero })
}

struct Probe {
    point: C<f64>,
    dist: f64,
    quotient: C<f64>,
    functional: C<f64>,
    residual: f64,
    extra: Option<f64>,
    reliable: bool,
}

/// Members of a set ordered by distance from its base point, outermost first.
fn ordered_members(set: &DensitySet<f64>) -> Vec<(C<f64>, f64)> {
    let region = set.region();
    let mut out: Vec<(usize, C<f64>, f64)> = (0..region.filled_count())
        .filter(|&i| set.member()[i])
        .map(|i| {
            let p = region.cell(i).center;
            (i, p, (p - set.x0()).norm())
        })
        .collect();
    out.sort_by(|a, b| b.2.total_cmp(&a.2).then(a.0.cmp(&b.0)));
    out.into_iter().map(|(_, p, d)| (p, d)).collect()
}

fn probe_checks(report: &mut TheoremReport, probes: &[Probe], k: usize, tol: f64) {
    let reliable: Vec<&Probe> = probes.iter().filter(|p| p.reliable).collect();
    let k = k.max(1);
    if reliable.is_empty() {
        report.note("no reliable probes: E is empty outside the reliability floor");
        report.check(Check::failed("innermost reliable residual", tol, ConfigTolerance));
        return;
    }
    let inner = &reliable[reliable.len().saturating_sub(k)..];
    let outer = &reliable[..k.min(reliable.len())];
    let max_inner = inner.iter().map(|p| p.residual).fold(0.0, f64::max);
    let mean = |s: &[&Probe]| s.iter().map(|p| p.residual).sum::<f64>() / s.len() as f64;
    let (mi, mo) = (mean(inner), mean(outer));
    report.note(format!(
        "{} reliable probes; innermost at distance {:.3e}, outermost at {:.3e}",
        reliable.len(),
        inner.last().map_or(0.0, |p| p.dist),
        outer[0].dist
    ));
    report.check(Check::le(
        format!("max residual over {} innermost reliable probes", inner.len()),
        max_inner,
        tol,
        ConfigTolerance,
    ));
    let trend = if mo == 0.0 { 0.0 } else { mi / mo };
    report.check(Check::le("residual trend (inner mean / outer mean)", trend, 1.0, TheoryConstant));
}

fn probes_csv(probes: &[Probe], point_label: &str, extra: Option<&str>) -> String {
    let mut s = format!(
        "{point_label}_re,{point_label}_im,abs_{point_label},quotient_re,quotient_im,functional_re,functional_im,residual_abs"
    );
    if let Some(e) = extra {
        write!(s, ",{e}").unwrap();
    }
    s.push_str(",reliable\n");
    for p in probes {
        write!(
            s,
            "{:e},{:e},{:e},{:e},{:e},{:e},{:e},{:e}",
            p.point.re, p.point.im, p.dist, p.quotient.re, p.quotient.im, p.functional.re, p.functional.im, p.residual
        )
        .unwrap();
        if let Some(v) = p.extra {
            write!(s, ",{v:e}").unwrap();
        }
        writeln!(s, ",{}", u8::from(p.reliable)).unwrap();
    }
    s
}

/// Approximate first derivative through `E`: for members `x`,
/// `L_x(g) = g(x)/(x - x0) - D^1 g`.
pub fn run_theorem1(cfg: &ExperimentConfig) -> Result<TheoremReport> {
    let mut report = TheoremReport::new("theorem1");
    if cfg.t != 1 {
        report.note(format!("config t = {} ignored: this experiment is first order", cfg.t));
    }
    let pipe = pipeline(cfg, 1, &mut report)?;
    let s = &pipe.setup;
    let x0 = cfg.x0;
    let d1g = if pipe.g_zero { C::new(0.0, 0.0) } else { apply_functional(&s.functionals[1], &pipe.g)? };
    let g_x0 = if pipe.g_zero { C::new(0.0, 0.0) } else { pipe.g.eval(x0)? };
    let floor = RELIABLE_FLOOR_CELLS * s.region.cell_width();
    let members = ordered_members(&s.e);
    let probes = members
        .par_iter()
        .filter(|(_, d)| *d > 0.0)
        .map(|&(x, dist)| -> Result<Probe> {
            let dx = x - x0;
            let (gx, fx) = (if pipe.g_zero { C::new(0.0, 0.0) } else { pipe.g.eval(x)? }, pipe.f.eval(x)?);
            Ok(Probe {
                point: x,
                dist,
                quotient: (fx - pipe.dvals[0]) / dx,
                functional: pipe.dvals[1],
                residual: (gx / dx - d1g).norm(),
                extra: Some(((gx - g_x0) / dx - d1g).norm()),
                reliable: dist > floor,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    report.table("probes.csv", probes_csv(&probes, "x", Some("theorem_residual_abs")));
    probe_checks(&mut report, &probes, cfg.inner_probes, cfg.tol_residual(1));
    let scan = density_scan(&s.e, &cfg.n_schedule)?;
    report.table("density.csv", scan.to_csv());
    Ok(report)
}

/// Approximate `t`-th derivative through `E'`: for members `h`,
/// `Delta_h^t g(x0) - D^t g`.
pub fn run_theorem2(cfg: &ExperimentConfig) -> Result<TheoremReport> {
    let mut report = TheoremReport::new("theorem2");
    let t = cfg.t;
    if t == 0 {
        return Err(Error::InvalidArgument("theorem2 needs t >= 1".into()));
    }
    let pipe = pipeline(cfg, t, &mut report)?;
    let s = &pipe.setup;
    let x0 = cfg.x0;
    let dtg = if pipe.g_zero { C::new(0.0, 0.0) } else { apply_functional(&s.functionals[t], &pipe.g)? };
    let e_prime = build_e_prime(&s.e, t)?;
    report.note(format!("E': {} of {} step cells", e_prime.member_count(), e_prime.region().filled_count()));
    let floor = RELIABLE_FLOOR_CELLS * s.region.cell_width();
    let members = ordered_members(&e_prime);
    let probes = members
        .par_iter()
        .filter(|(_, d)| *d > 0.0)
        .map(|&(h, dist)| -> Result<Probe> {
            let qf = diff_quotient(&pipe.f, x0, h, t)?.value;
            let qg = if pipe.g_zero { C::new(0.0, 0.0) } else { diff_quotient(&pipe.g, x0, h, t)?.value };
            Ok(Probe {
                point: h,
                dist,
                quotient: qf,
                functional: pipe.dvals[t],
                residual: (qg - dtg).norm(),
                extra: None,
                reliable: dist > floor,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    report.table("probes.csv", probes_csv(&probes, "h", None));
    probe_checks(&mut report, &probes, cfg.inner_probes, cfg.tol_residual(t));
    let scan = density_scan(&e_prime, &cfg.n_schedule)?;
    report.table("density.csv", scan.to_csv());
    Ok(report)
}

/// Bound check outcome: checks plus the per-stage table.
pub struct BoundTable {
    pub checks: Vec<Check>,
    pub csv: String,
    pub max_ratio: Vec<f64>,
    /// Largest `|g(x0) - g_j(x0)| / ||g - g_j||_p` over stages. The discrete
    /// functionals force this to zero, so what remains is discretization error.
    pub offset: f64,
}

/// `|g(x) - g_j(x)| / (|x - x0|^t ||g - g_j||_p)` over members of `E` for
/// `t = 1`; for `t >= 2`, `|g(x0+sh) - g_j(x0+sh)| / (|h|^t ||g - g_j||_p)`
/// over `h` in `E'` and `s = 1..t`, judged against `s^t` times the threshold.
/// Probes inside the reliability floor are excluded.
pub fn check_bound_lemma(cfg: &ExperimentConfig, pipe: &Pipeline, seq: &ApproximationSequence<f64>) -> Result<BoundTable> {
    let s = &pipe.setup;
    let t = s.t;
    let x0 = cfg.x0;
    let threshold = cfg.delta0 / (1.0 - cfg.delta0) * cfg.bound_slack;
    let floor = RELIABLE_FLOOR_CELLS * s.region.cell_width();
    let (probes, steps): (Vec<C<f64>>, Vec<usize>) = if t <= 1 {
        (ordered_members(&s.e).into_iter().filter(|(_, d)| *d > floor).map(|(x, _)| x - x0).collect(), vec![1])
    } else {
        let ep = build_e_prime(&s.e, t)?;
        (ordered_members(&ep).into_iter().filter(|(_, d)| *d > floor).map(|(h, _)| h).collect(), (1..=t).collect())
    };
    let mut csv = String::from("stage,basis_size,s,norm_g_minus_gj,max_ratio,argmax_re,argmax_im,skipped\n");
    let mut max_ratio = vec![0.0f64; steps.len()];
    let mut offset = 0.0f64;
    for (j, st) in seq.stages.iter().enumerate() {
        let diff = &pipe.g - &st.g;
        let norm = diff.lp_norm(&s.region, cfg.p.max(1.0))?;
        if norm < BOUND_SKIP_NORM {
            for &sv in &steps {
                writeln!(csv, "{j},{},{sv},{norm:e},,,,1", st.basis_size).unwrap();
            }
            continue;
        }
        offset = offset.max(diff.eval(x0)?.norm() / norm);
        for (si, &sv) in steps.iter().enumerate() {
            let ratios = probes
                .par_iter()
                .map(|&h| -> Result<(f64, C<f64>)> {
                    let x = x0 + h * sv as f64;
                    Ok((diff.eval(x)?.norm() / (h.norm().powi(t as i32) * norm), h))
                })
                .collect::<Result<Vec<_>>>()?;
            let (best, at) = ratios
                .into_iter()
                .fold((0.0, C::new(0.0, 0.0)), |acc, r| if r.0 > acc.0 { r } else { acc });
            max_ratio[si] = max_ratio[si].max(best);
            writeln!(csv, "{j},{},{sv},{norm:e},{best:e},{:e},{:e},0", st.basis_size, at.re, at.im).unwrap();
        }
    }
    let checks = steps
        .iter()
        .zip(&max_ratio)
        .map(|(&sv, &m)| {
            let name = if t <= 1 { "bound ratio".to_string() } else { format!("bound ratio, s = {sv}") };
            Check::le(name, m, threshold * (sv as f64).powi(t as i32), TheoryConstant)
        })
        .collect();
    Ok(BoundTable { checks, csv, max_ratio, offset })
}

pub fn run_bounds(cfg: &ExperimentConfig) -> Result<TheoremReport> {
    let mut report = TheoremReport::new("bounds");
    let t = cfg.t.max(1);
    let pipe = pipeline(cfg, t, &mut report)?;
    let bases: Vec<Basis<f64>> = cfg.basis_degrees.iter().map(|&d| Basis::polynomial(d)).collect();
    let seq = build_sequence(
        &pipe.f,
        &cfg.target.to_text(),
        cfg.x0,
        &bases,
        &pipe.setup.region,
        cfg.p,
        &pipe.setup.functionals,
    )?;
    if let Some(why) = &seq.truncated {
        report.note(format!("sequence truncated: {why}"));
    }
    for (j, st) in seq.stages.iter().enumerate() {
        if st.stalled {
            report.note(format!("stage {j}: IRLS stalled after {} iterations", st.iterations));
        }
        if st.non_improving {
            report.note(format!("stage {j}: residual did not improve"));
        }
    }
    report.table("sequence.csv", seq.to_csv());
    let bound = check_bound_lemma(cfg, &pipe, &seq)?;
    let threshold = cfg.delta0 / (1.0 - cfg.delta0) * cfg.bound_slack;
    report.note(format!(
        "discretization offset |g - g_j|(x0) / ||g - g_j||_p up to {:.3e}; it alone exceeds the threshold for |h| below {:.3e}",
        bound.offset,
        (bound.offset / threshold).powf(1.0 / t as f64)
    ));
    report.table("bounds.csv", bound.csv);
    for c in bound.checks {
        report.check(c);
    }
    Ok(report)
}

pub fn run_region_gen(cfg: &ExperimentConfig) -> Result<TheoremReport> {
    let mut report = TheoremReport::new("region-gen");
    let region = build_region(cfg)?;
    report.note(format!(
        "{} filled cells at resolution {}, area {:.6}, checksum {}",
        region.filled_count(),
        region.resolution(),
        region.area(),
        region.checksum()
    ));
    report.table("config.cfg", cfg.to_text());
    report.table("region.rgn", region.to_rgn1());
    Ok(report)
}

pub fn run_verify_representing(cfg: &ExperimentConfig) -> Result<TheoremReport> {
    let mut report = TheoremReport::new("verify-representing");
    let region = region_for(cfg, &mut report)?;
    let func = load_functional(cfg, region, cfg.t)?;
    battery_check(&mut report, cfg, &func, &format!("order{}", cfg.t))?;
    report.table("functional.fun", func.to_text());
    Ok(report)
}

pub fn run_verify_wilken(cfg: &ExperimentConfig) -> Result<TheoremReport> {
    let mut report = TheoremReport::new("verify-wilken");
    let region = region_for(cfg, &mut report)?;
    let kt = load_functional(cfg, region, cfg.t)?;
    for m in 0..cfg.t {
        let km = wilken_reduce(&kt, m)?;
        battery_check(&mut report, cfg, &km, &format!("order{m}_from_order{}", cfg.t))?;
    }
    let same = wilken_reduce(&kt, cfg.t)?;
    let mismatches = same
        .weight()
        .values()
        .iter()
        .zip(kt.weight().values())
        .filter(|(a, b)| a.re.to_bits() != b.re.to_bits() || a.im.to_bits() != b.im.to_bits())
        .count();
    report.check(Check::le("m = t reduction bit mismatches", mismatches as f64, 0.0, TheoryConstant));
    Ok(report)
}

pub fn run_verify_bishop(cfg: &ExperimentConfig) -> Result<TheoremReport> {
    let mut report = TheoremReport::new("verify-bishop");
    let region = region_for(cfg, &mut report)?;
    let k = load_functional(cfg, region.clone(), 0)?;
    let radius = match cfg.region {
        RegionSpec::Disk { radius, .. } => radius,
        _ => region.side() / 2.0,
    };
    let x = cfg.transplant_x.unwrap_or(cfg.x0 + C::new(0.5 * radius, 0.0));
    let delta = cfg.transplant_delta;
    let tr = match bishop_transplant(&k, x, delta) {
        Ok(tr) => tr,
        Err(e @ (Error::TransplantHypothesis { .. } | Error::NumericalConsistency(_))) => {
            report.note(format!("transplant to {} refused: {e}", format_complex(x)));
            report.check(Check::failed("transplant hypothesis", delta, TheoryConstant));
            return Ok(report);
        }
        Err(e) => return Err(e),
    };
    report.note(format!(
        "x = {}, c = {}, |x - x0| k~(x) = {:.6}",
        format_complex(x),
        format_complex(tr.c),
        tr.hypothesis_lhs
    ));
    report.check(Check::le("||c| - 1|", (tr.c.norm() - 1.0).abs(), delta, TheoryConstant));
    if let RegionSpec::Disk { center, radius } = cfg.region {
        if center == cfg.x0 && k.weight().values().windows(2).all(|w| w[0] == w[1]) {
            let closed = 1.0 - (x - cfg.x0).norm_sqr() / (radius * radius);
            report.check(Check::le("|c - closed form|", (tr.c - C::new(closed, 0.0)).norm(), cfg.tol_c, ConfigTolerance));
        }
    }
    battery_check(&mut report, cfg, &tr.functional(), "order0_transplanted")?;
    Ok(report)
}

pub fn run_density_scan(cfg: &ExperimentConfig) -> Result<TheoremReport> {
    let mut report = TheoremReport::new("density-scan");
    let s = setup(cfg, cfg.t.max(1), &mut report)?;
    let scan = density_scan(&s.e, &cfg.n_schedule)?;
    report.table("density.csv", scan.to_csv());
    report.table("set.den", s.e.to_text());
    let rising = scan.ratios.windows(2).map(|w| w[1] - w[0]).fold(f64::NEG_INFINITY, f64::max).max(0.0);
    report.check(Check::le("largest increase of the full-ball ratio", rising, 0.0, TheoryConstant));
    let first = scan.ratios[0];
    let last = *scan.ratios.last().unwrap();
    let decay = if first == 0.0 { 0.0 } else { last / first };
    report.check(Check::le("final ratio / first ratio", decay, DENSITY_DECAY_FACTOR, ConfigTolerance));
    if scan.reliable.iter().any(|r| !r) {
        report.note("some scan radii are below the resolution floor; their ratios are reported but unreliable");
    }
    Ok(report)
}

pub fn run_diffquot_table(cfg: &ExperimentConfig) -> Result<TheoremReport> {
    let mut report = TheoremReport::new("diffquot-table");
    let t = cfg.t.max(1);
    let f = cfg.target.function();
    let reference = f.derivative(t).eval(cfg.x0)?;
    let rows = convergence_table(&f, cfg.x0, t, &cfg.h_schedule, reference)?;
    report.table("diffquot.csv", convergence_csv(&rows));
    let best = rows.iter().map(|r| r.abs_error).fold(f64::INFINITY, f64::min);
    report.check(Check::le("smallest quotient error over the schedule", best, cfg.tol_derivative(t), ConfigTolerance));
    Ok(report)
}

/// Runs one experiment by name.
pub fn run_named(name: &str, cfg: &ExperimentConfig) -> Result<TheoremReport> {
    match name {
        "theorem1" => run_theorem1(cfg),
        "theorem2" => run_theorem2(cfg),
        "bounds" => run_bounds(cfg),
        other => Err(Error::InvalidArgument(format!("unknown experiment {other:?}"))),
    }
}
