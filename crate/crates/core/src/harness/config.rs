//! Line-oriented experiment configuration: `key = value`, `#` comments,
//! complex values written `re+imi`.

use std::fmt::Write as _;
use std::path::PathBuf;

use crate::error::{Error, Result};
use crate::rational::RationalFunction;
use crate::scalar::{format_complex, parse_complex, C};

#[derive(Debug, Clone, PartialEq)]
pub enum RegionSpec {
    Disk { center: C<f64>, radius: f64 },
    SwissCheese { radius: f64, holes: usize, hole_scale: f64 },
    Square { origin: C<f64>, side: f64 },
}

/// `pole:<location>[:<order>]` or `poly:<c0>,<c1>,...`.
#[derive(Debug, Clone, PartialEq)]
pub enum TargetSpec {
    Pole { location: C<f64>, order: usize },
    Poly(Vec<C<f64>>),
}

impl TargetSpec {
    pub fn parse(s: &str) -> Result<Self> {
        let bad = || Error::Parse(format!("target {s:?}: expected pole:<loc>[:<order>] or poly:<c0>,<c1>,..."));
        let (kind, rest) = s.split_once(':').ok_or_else(bad)?;
        match kind.trim() {
            "pole" => {
                let mut parts = rest.split(':');
                let location = parse_complex(parts.next().ok_or_else(bad)?.trim()).ok_or_else(bad)?;
                let order = match parts.next() {
                    Some(o) => o.trim().parse().map_err(|_| bad())?,
                    None => 1,
                };
                if order == 0 || parts.next().is_some() {
                    return Err(bad());
                }
                Ok(Self::Pole { location, order })
            }
            "poly" => {
                let coeffs = rest
                    .split(',')
                    .map(|c| parse_complex(c.trim()).ok_or_else(bad))
                    .collect::<Result<Vec<_>>>()?;
                Ok(Self::Poly(coeffs))
            }
            _ => Err(bad()),
        }
    }

    pub fn to_text(&self) -> String {
        match self {
            Self::Pole { location, order } => format!("pole:{}:{order}", format_complex(*location)),
            Self::Poly(cs) => format!("poly:{}", cs.iter().map(|c| format_complex(*c)).collect::<Vec<_>>().join(",")),
        }
    }

    pub fn function(&self) -> RationalFunction<f64> {
        match self {
            Self::Pole { location, order } => RationalFunction::pole_power(*location, *order, C::new(1.0, 0.0)),
            Self::Poly(cs) => RationalFunction::polynomial(cs.clone()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub region: RegionSpec,
    pub resolution: usize,
    pub seed: u64,
    pub p: f64,
    pub x0: C<f64>,
    pub t: usize,
    pub delta0: f64,
    pub target: TargetSpec,
    /// Polynomial degrees of the nested bases `{1, z, ..., z^d}`.
    pub basis_degrees: Vec<usize>,
    pub n_schedule: Vec<usize>,
    pub h_schedule: Vec<C<f64>>,
    pub out: PathBuf,
    /// FUN1 file with a user-supplied order-`t` functional.
    pub functional_file: Option<PathBuf>,
    pub tol_battery: f64,
    /// Defaults to `2e-3` for `t = 1` and `5e-3` otherwise.
    pub tol_derivative: Option<f64>,
    /// Defaults to `1e-2` for `t = 1` and `2e-2` otherwise.
    pub tol_residual: Option<f64>,
    pub tol_c: f64,
    pub bound_slack: f64,
    pub inner_probes: usize,
    pub transplant_x: Option<C<f64>>,
    pub transplant_delta: f64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            region: RegionSpec::Disk { center: C::new(0.0, 0.0), radius: 1.0 },
            resolution: 1024,
            seed: 0,
            p: 3.0,
            x0: C::new(0.0, 0.0),
            t: 1,
            delta0: 0.1,
            target: TargetSpec::Pole { location: C::new(2.0, 0.0), order: 1 },
            basis_degrees: (1..=8).collect(),
            n_schedule: vec![4, 8, 16, 32],
            h_schedule: (1..=4).map(|k| C::new(10f64.powi(-k), 0.0)).collect(),
            out: PathBuf::from("out"),
            functional_file: None,
            tol_battery: 2e-3,
            tol_derivative: None,
            tol_residual: None,
            tol_c: 1e-3,
            bound_slack: 1.1,
            inner_probes: 8,
            transplant_x: None,
            transplant_delta: 0.95,
        }
    }
}

fn list<T>(v: &str, f: impl Fn(&str) -> Option<T>) -> Option<Vec<T>> {
    v.split(',').map(|s| f(s.trim())).collect()
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        let mut shape = String::from("disk");
        let mut center = C::new(0.0, 0.0);
        let mut radius = 1.0;
        let mut holes = 12usize;
        let mut hole_scale = 0.7;
        let mut origin = C::new(-1.0, -1.0);
        let mut side = 2.0;
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("line {}: expected key = value", lineno + 1)))?;
            let (key, value) = (key.trim(), value.trim());
            let bad = || Error::Parse(format!("line {}: bad value for {key}: {value:?}", lineno + 1));
            let real = || value.parse::<f64>().map_err(|_| bad());
            let int = || value.parse::<usize>().map_err(|_| bad());
            let cplx = || parse_complex::<f64>(value).ok_or_else(bad);
            match key {
                "region" => shape = value.to_string(),
                "center" => center = cplx()?,
                "radius" => radius = real()?,
                "holes" => holes = int()?,
                "hole_scale" => hole_scale = real()?,
                "origin" => origin = cplx()?,
                "side" => side = real()?,
                "resolution" => cfg.resolution = int()?,
                "seed" => cfg.seed = value.parse().map_err(|_| bad())?,
                "p" => cfg.p = real()?,
                "x0" => cfg.x0 = cplx()?,
                "t" => cfg.t = int()?,
                "delta0" => cfg.delta0 = real()?,
                "target" => cfg.target = TargetSpec::parse(value)?,
                "basis_degrees" => cfg.basis_degrees = list(value, |s| s.parse().ok()).ok_or_else(bad)?,
                "n_schedule" => cfg.n_schedule = list(value, |s| s.parse().ok()).ok_or_else(bad)?,
                "h_schedule" => cfg.h_schedule = list(value, parse_complex).ok_or_else(bad)?,
                "out" => cfg.out = PathBuf::from(value),
                "functional_file" => cfg.functional_file = Some(PathBuf::from(value)),
                "tol_battery" => cfg.tol_battery = real()?,
                "tol_derivative" => cfg.tol_derivative = Some(real()?),
                "tol_residual" => cfg.tol_residual = Some(real()?),
                "tol_c" => cfg.tol_c = real()?,
                "bound_slack" => cfg.bound_slack = real()?,
                "inner_probes" => cfg.inner_probes = int()?,
                "transplant_x" => cfg.transplant_x = Some(cplx()?),
                "transplant_delta" => cfg.transplant_delta = real()?,
                _ => return Err(Error::Parse(format!("line {}: unknown key {key:?}", lineno + 1))),
            }
        }
        cfg.region = match shape.as_str() {
            "disk" => RegionSpec::Disk { center, radius },
            "swiss_cheese" => RegionSpec::SwissCheese { radius, holes, hole_scale },
            "square" => RegionSpec::Square { origin, side },
            other => return Err(Error::Parse(format!("unknown region shape {other:?}"))),
        };
        Ok(cfg)
    }

    /// Checks everything except the `p > 2` restriction, which
    /// [`ExperimentConfig::check_p`] handles so the caller can override it.
    pub fn validate(&self) -> Result<()> {
        if !(self.delta0 > 0.0 && self.delta0 < 1.0) {
            return Err(Error::InvalidArgument(format!("delta0 = {} must lie in (0, 1)", self.delta0)));
        }
        if !(self.p >= 1.0) || !self.p.is_finite() {
            return Err(Error::OutOfRange(format!("p = {} must be a finite number >= 1", self.p)));
        }
        if self.resolution == 0 {
            return Err(Error::InvalidArgument("resolution must be positive".into()));
        }
        if self.n_schedule.is_empty() || self.n_schedule.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidArgument("n_schedule must be nonempty and increasing".into()));
        }
        if self.basis_degrees.is_empty() || self.basis_degrees.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidArgument("basis_degrees must be nonempty and increasing".into()));
        }
        if self.h_schedule.iter().any(|h| h.norm() == 0.0) {
            return Err(Error::InvalidArgument("h_schedule entries must be nonzero".into()));
        }
        if !(self.transplant_delta > 0.0 && self.transplant_delta < 1.0) {
            return Err(Error::InvalidArgument("transplant_delta must lie in (0, 1)".into()));
        }
        Ok(())
    }

    pub fn check_p(&self, allow_p_le_2: bool) -> Result<()> {
        if self.p > 2.0 || allow_p_le_2 {
            return Ok(());
        }
        Err(Error::OutOfRange(format!(
            "p = {}: point derivations are only meaningful for 2 < p < infinity; \
             for 1 <= p < 2 rational functions are already dense in L^p and p = 2 is open. \
             Pass --allow-p-le-2 to run anyway",
            self.p
        )))
    }

    pub fn tol_derivative(&self, t: usize) -> f64 {
        self.tol_derivative.unwrap_or(if t <= 1 { 2e-3 } else { 5e-3 })
    }

    pub fn tol_residual(&self, t: usize) -> f64 {
        self.tol_residual.unwrap_or(if t <= 1 { 1e-2 } else { 2e-2 })
    }

    /// Canonical text form; parsing it gives back an equal config.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        match &self.region {
            RegionSpec::Disk { center, radius } => {
                writeln!(s, "region = disk\ncenter = {}\nradius = {radius}", format_complex(*center)).unwrap();
            }
            RegionSpec::SwissCheese { radius, holes, hole_scale } => {
                writeln!(s, "region = swiss_cheese\nradius = {radius}\nholes = {holes}\nhole_scale = {hole_scale}").unwrap();
            }
            RegionSpec::Square { origin, side } => {
                writeln!(s, "region = square\norigin = {}\nside = {side}", format_complex(*origin)).unwrap();
            }
        }
        let join = |v: Vec<String>| v.join(", ");
        writeln!(s, "resolution = {}", self.resolution).unwrap();
        writeln!(s, "seed = {}", self.seed).unwrap();
        writeln!(s, "p = {}", self.p).unwrap();
        writeln!(s, "x0 = {}", format_complex(self.x0)).unwrap();
        writeln!(s, "t = {}", self.t).unwrap();
        writeln!(s, "delta0 = {}", self.delta0).unwrap();
        writeln!(s, "target = {}", self.target.to_text()).unwrap();
        writeln!(s, "basis_degrees = {}", join(self.basis_degrees.iter().map(|d| d.to_string()).collect())).unwrap();
        writeln!(s, "n_schedule = {}", join(self.n_schedule.iter().map(|d| d.to_string()).collect())).unwrap();
        writeln!(s, "h_schedule = {}", join(self.h_schedule.iter().map(|h| format_complex(*h)).collect())).unwrap();
        writeln!(s, "out = {}", self.out.display()).unwrap();
        if let Some(f) = &self.functional_file {
            writeln!(s, "functional_file = {}", f.display()).unwrap();
        }
        writeln!(s, "tol_battery = {}", self.tol_battery).unwrap();
        if let Some(v) = self.tol_derivative {
            writeln!(s, "tol_derivative = {v}").unwrap();
        }
        if let Some(v) = self.tol_residual {
            writeln!(s, "tol_residual = {v}").unwrap();
        }
        writeln!(s, "tol_c = {}", self.tol_c).unwrap();
        writeln!(s, "bound_slack = {}", self.bound_slack).unwrap();
        writeln!(s, "inner_probes = {}", self.inner_probes).unwrap();
        if let Some(x) = self.transplant_x {
            writeln!(s, "transplant_x = {}", format_complex(x)).unwrap();
        }
        writeln!(s, "transplant_delta = {}", self.transplant_delta).unwrap();
        s
    }
}
