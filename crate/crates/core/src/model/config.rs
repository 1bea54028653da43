//! Plain-text `key = value` case files.
//!
//! `#` starts a comment. Every key may appear once. Per-harmonic keys take
//! the form `harmonic.<l>.omega`, `harmonic.<l>.inlet` and
//! `harmonic.<l>.outlet`; the forcing lists are whitespace-separated
//! `re im` pairs.

use std::collections::{BTreeMap, BTreeSet};
use std::f64::consts::PI;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use num_complex::Complex64;

use super::{GasModel, HarmonicEntry, HarmonicSpec};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CaseKind {
    NozzleEuler,
    ScalarAdvDiff1d,
    ScalarAdvDiff2d,
}

impl CaseKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            CaseKind::NozzleEuler => "nozzle-euler",
            CaseKind::ScalarAdvDiff1d => "scalar-advdiff-1d",
            CaseKind::ScalarAdvDiff2d => "scalar-advdiff-2d",
        }
    }

    pub fn dimension(&self) -> usize {
        match self {
            CaseKind::ScalarAdvDiff2d => 2,
            _ => 1,
        }
    }

    pub fn is_scalar(&self) -> bool {
        !matches!(self, CaseKind::NozzleEuler)
    }
}

impl FromStr for CaseKind {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "nozzle-euler" => Ok(CaseKind::NozzleEuler),
            "scalar-advdiff-1d" => Ok(CaseKind::ScalarAdvDiff1d),
            "scalar-advdiff-2d" => Ok(CaseKind::ScalarAdvDiff2d),
            _ => Err(format!("unknown case kind `{s}`")),
        }
    }
}

impl fmt::Display for CaseKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Explicit,
    Implicit,
}

impl Mode {
    pub fn as_str(&self) -> &'static str {
        match self {
            Mode::Explicit => "explicit",
            Mode::Implicit => "implicit",
        }
    }

    pub fn default_cfl(&self) -> f64 {
        match self {
            Mode::Explicit => 2.0,
            Mode::Implicit => 50.0,
        }
    }
}

impl FromStr for Mode {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "explicit" => Ok(Mode::Explicit),
            "implicit" => Ok(Mode::Implicit),
            _ => Err(format!("unknown mode `{s}` (expected explicit or implicit)")),
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum AreaProfile {
    /// `A(x) = 1 + c (x - L/2)^2`
    Parabolic { curvature: f64 },
    /// Linear interpolation in an `(x, A)` table, clamped at the ends.
    Table { path: PathBuf, points: Vec<(f64, f64)> },
}

impl AreaProfile {
    pub fn area(&self, x: f64, length: f64) -> f64 {
        match self {
            AreaProfile::Parabolic { curvature } => 1.0 + curvature * (x - 0.5 * length).powi(2),
            AreaProfile::Table { points, .. } => {
                let k = points.partition_point(|(px, _)| *px < x);
                if k == 0 {
                    points[0].1
                } else if k == points.len() {
                    points[k - 1].1
                } else {
                    let (x0, a0) = points[k - 1];
                    let (x1, a1) = points[k];
                    a0 + (a1 - a0) * (x - x0) / (x1 - x0)
                }
            }
        }
    }

    pub fn read_table(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let mut points = Vec::new();
        for (n, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let cols: Vec<&str> = line.split(|c: char| c == ',' || c.is_whitespace()).filter(|s| !s.is_empty()).collect();
            let parse = |s: &str| {
                s.parse::<f64>().map_err(|_| Error::Parse { line: n + 1, message: format!("bad number `{s}` in area table") })
            };
            if cols.len() != 2 {
                return Err(Error::Parse { line: n + 1, message: "area table rows need two columns (x, A)".into() });
            }
            let (x, a) = (parse(cols[0])?, parse(cols[1])?);
            if !(a > 0.0) {
                return Err(Error::Parse { line: n + 1, message: format!("area must be positive, got {a}") });
            }
            if let Some((px, _)) = points.last() {
                if x <= *px {
                    return Err(Error::Parse { line: n + 1, message: "area table x must increase".into() });
                }
            }
            points.push((x, a));
        }
        if points.len() < 2 {
            return Err(Error::Config("area table needs at least two rows".into()));
        }
        Ok(AreaProfile::Table { path: path.to_path_buf(), points })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NozzleParams {
    pub inlet_total_pressure: f64,
    pub inlet_total_temperature: f64,
    pub outlet_pressure: f64,
    pub area: AreaProfile,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalarParams {
    pub advection_speed: f64,
    pub diffusivity: f64,
    pub transverse_wavenumber: f64,
    pub inlet_value: f64,
}

/// Coefficients of the pressure-switched second/fourth difference blend.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DissipationParams {
    pub k2: f64,
    pub k4: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SchemeConfig {
    pub mode: Mode,
    pub cfl: f64,
    pub eps: f64,
    pub mg_levels: usize,
    pub partitions: usize,
    pub workers: usize,
    pub target_drop: f64,
    pub max_iters: usize,
    pub linear_tol: f64,
    pub linear_max_iter: usize,
    pub reference_time: Option<f64>,
}

impl Default for SchemeConfig {
    fn default() -> Self {
        Self {
            mode: Mode::Implicit,
            cfl: Mode::Implicit.default_cfl(),
            eps: 0.6,
            mg_levels: 1,
            partitions: 1,
            workers: 1,
            target_drop: 8.0,
            max_iters: 10_000,
            linear_tol: 1e-2,
            linear_max_iter: 10,
            reference_time: None,
        }
    }
}

impl SchemeConfig {
    pub fn explicit(cfl: f64, mg_levels: usize) -> Self {
        Self { mode: Mode::Explicit, cfl, mg_levels, ..Self::default() }
    }

    pub fn implicit(cfl: f64) -> Self {
        Self { mode: Mode::Implicit, cfl, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if !(self.cfl > 0.0) || !self.cfl.is_finite() {
            return bad(format!("cfl must be positive, got {}", self.cfl));
        }
        if !(self.eps > 0.0) || !self.eps.is_finite() {
            return bad(format!("eps must be positive, got {}", self.eps));
        }
        if self.mg_levels == 0 {
            return bad("mg_levels must be at least 1".into());
        }
        if self.mode == Mode::Implicit && self.mg_levels > 1 {
            return bad("multigrid is available in explicit mode only".into());
        }
        if self.partitions == 0 || self.workers == 0 {
            return bad("partitions and workers must be at least 1".into());
        }
        if !(self.target_drop > 0.0) {
            return bad(format!("target_drop must be positive, got {}", self.target_drop));
        }
        if !(self.linear_tol > 0.0 && self.linear_tol < 1.0) {
            return bad(format!("linear_tol must lie in (0, 1), got {}", self.linear_tol));
        }
        if self.linear_max_iter == 0 {
            return bad("linear_max_iter must be at least 1".into());
        }
        if let Some(t) = self.reference_time {
            if !(t > 0.0) {
                return bad(format!("reference_time must be positive, got {t}"));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CaseConfig {
    pub case_id: String,
    pub kind: CaseKind,
    pub nx: usize,
    pub ny: usize,
    pub length_x: f64,
    pub length_y: f64,
    pub periodic_y: bool,
    pub gas: GasModel,
    pub nozzle: NozzleParams,
    pub scalar: ScalarParams,
    pub dissipation: DissipationParams,
    pub base_omega: f64,
    pub harmonics: HarmonicSpec,
    pub forcing_amplitude: f64,
    pub scheme: SchemeConfig,
}

struct RawEntry {
    line: usize,
    value: String,
}

struct Raw {
    entries: BTreeMap<String, RawEntry>,
    used: BTreeSet<String>,
}

impl Raw {
    fn parse(text: &str) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for (n, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((k, v)) = line.split_once('=') else {
                return Err(Error::Parse { line: n + 1, message: format!("expected `key = value`, got `{line}`") });
            };
            let key = k.trim().to_string();
            if key.is_empty() {
                return Err(Error::Parse { line: n + 1, message: "empty key".into() });
            }
            if entries.contains_key(&key) {
                return Err(Error::Parse { line: n + 1, message: format!("duplicate key `{key}`") });
            }
            entries.insert(key, RawEntry { line: n + 1, value: v.trim().to_string() });
        }
        Ok(Self { entries, used: BTreeSet::new() })
    }

    fn set(&mut self, key: &str, value: &str) {
        self.entries.insert(key.to_string(), RawEntry { line: 0, value: value.to_string() });
    }

    fn raw(&mut self, key: &str) -> Option<(usize, String)> {
        let e = self.entries.get(key)?;
        self.used.insert(key.to_string());
        Some((e.line, e.value.clone()))
    }

    fn get<T: FromStr>(&mut self, key: &str) -> Result<Option<T>>
    where
        T::Err: fmt::Display,
    {
        match self.raw(key) {
            None => Ok(None),
            Some((line, v)) => v
                .parse::<T>()
                .map(Some)
                .map_err(|e| Error::Parse { line, message: format!("key `{key}`: cannot parse `{v}`: {e}") }),
        }
    }

    fn or<T: FromStr>(&mut self, key: &str, default: T) -> Result<T>
    where
        T::Err: fmt::Display,
    {
        Ok(self.get(key)?.unwrap_or(default))
    }

    fn bool_or(&mut self, key: &str, default: bool) -> Result<bool> {
        match self.raw(key) {
            None => Ok(default),
            Some((line, v)) => match v.as_str() {
                "true" | "yes" | "1" => Ok(true),
                "false" | "no" | "0" => Ok(false),
                _ => Err(Error::Parse { line, message: format!("key `{key}`: expected a boolean, got `{v}`") }),
            },
        }
    }

    fn complex_list(&mut self, key: &str) -> Result<Option<Vec<Complex64>>> {
        let Some((line, v)) = self.raw(key) else { return Ok(None) };
        let nums: std::result::Result<Vec<f64>, _> = v.split_whitespace().map(str::parse::<f64>).collect();
        let nums = nums.map_err(|_| Error::Parse { line, message: format!("key `{key}`: expected numbers, got `{v}`") })?;
        if !nums.len().is_multiple_of(2) {
            return Err(Error::Parse { line, message: format!("key `{key}`: expected `re im` pairs") });
        }
        Ok(Some(nums.chunks(2).map(|c| Complex64::new(c[0], c[1])).collect()))
    }

    fn finish(self) -> Result<()> {
        for (k, e) in &self.entries {
            if !self.used.contains(k) {
                return Err(Error::Parse { line: e.line, message: format!("unknown key `{k}`") });
            }
        }
        Ok(())
    }
}

fn format_complex_list(v: &[Complex64]) -> String {
    v.iter().map(|c| format!("{} {}", c.re, c.im)).collect::<Vec<_>>().join(" ")
}

impl CaseConfig {
    pub fn from_file(path: &Path) -> Result<Self> {
        Self::from_file_with_overrides(path, &[])
    }

    pub fn from_file_with_overrides(path: &Path, overrides: &[(String, String)]) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("case");
        Self::parse_in(&text, overrides, path.parent(), stem)
    }

    pub fn parse(text: &str) -> Result<Self> {
        Self::parse_in(text, &[], None, "case")
    }

    pub fn parse_with_overrides(text: &str, overrides: &[(String, String)]) -> Result<Self> {
        Self::parse_in(text, overrides, None, "case")
    }

    fn parse_in(text: &str, overrides: &[(String, String)], dir: Option<&Path>, default_id: &str) -> Result<Self> {
        let mut raw = Raw::parse(text)?;
        for (k, v) in overrides {
            raw.set(k, v);
        }
        let kind: CaseKind = match raw.get("kind")? {
            Some(k) => k,
            None => return Err(Error::MissingKey("kind".into())),
        };
        let nx: usize = raw.get("nx")?.ok_or_else(|| Error::MissingKey("nx".into()))?;
        let ny: usize = match kind {
            CaseKind::ScalarAdvDiff2d => raw.get("ny")?.ok_or_else(|| Error::MissingKey("ny".into()))?,
            _ => raw.or("ny", 1)?,
        };
        let scalar_kind = kind.is_scalar();
        let mode: Mode = raw.or("mode", Mode::Implicit)?;
        let cfl = raw.or("cfl", mode.default_cfl())?;
        let scheme = SchemeConfig {
            mode,
            cfl,
            eps: raw.or("eps", 0.6)?,
            mg_levels: raw.or("mg_levels", 1)?,
            partitions: raw.or("partitions", 1)?,
            workers: raw.or("workers", 1)?,
            target_drop: raw.or("target_drop", 8.0)?,
            max_iters: raw.or("max_iters", 10_000)?,
            linear_tol: raw.or("linear_tol", 1e-2)?,
            linear_max_iter: raw.or("linear_max_iter", 10)?,
            reference_time: raw.get("reference_time")?,
        };
        let gas = GasModel::new(raw.or("gamma", 1.4)?, raw.or("gas_constant", 287.0)?)?;
        let area = match raw.raw("area_file") {
            Some((_, p)) => {
                let p = PathBuf::from(p);
                let p = match dir {
                    Some(d) if p.is_relative() => d.join(p),
                    _ => p,
                };
                let curvature_given = raw.raw("area_curvature").is_some();
                if curvature_given {
                    return Err(Error::Config("area_file and area_curvature are mutually exclusive".into()));
                }
                AreaProfile::read_table(&p)?
            }
            None => AreaProfile::Parabolic { curvature: raw.or("area_curvature", 1.0)? },
        };
        let nozzle = NozzleParams {
            inlet_total_pressure: raw.or("inlet_total_pressure", 101_325.0)?,
            inlet_total_temperature: raw.or("inlet_total_temperature", 300.0)?,
            outlet_pressure: raw.or("outlet_pressure", 90_000.0)?,
            area,
        };
        let scalar = ScalarParams {
            advection_speed: raw.or("advection_speed", 1.0)?,
            diffusivity: raw.or("diffusivity", 0.01)?,
            transverse_wavenumber: raw.or(
                "transverse_wavenumber",
                if kind == CaseKind::ScalarAdvDiff2d { 2.0 * PI } else { 0.0 },
            )?,
            inlet_value: raw.or("inlet_value", 1.0)?,
        };
        let dissipation = DissipationParams { k2: raw.or("k2", 0.5)?, k4: raw.or("k4", 1.0 / 32.0)? };
        let base_omega = raw.or("base_omega", if scalar_kind { PI } else { 2.0 * PI * 200.0 })?;
        let n_h: usize = raw.or("harmonics", if scalar_kind { 1 } else { 2 })?;
        let (inlet_len, outlet_len) = if scalar_kind { (1, 0) } else { (2, 1) };
        let mut entries = Vec::with_capacity(n_h);
        for l in 1..=n_h {
            let omega = raw.or(&format!("harmonic.{l}.omega"), base_omega * l as f64)?;
            let default_inlet = if scalar_kind { vec![Complex64::new(1.0, 0.0)] } else { vec![Complex64::new(0.0, 0.0); 2] };
            let default_outlet = if scalar_kind { vec![] } else { vec![Complex64::new(1.0, 0.0)] };
            let inlet = raw.complex_list(&format!("harmonic.{l}.inlet"))?.unwrap_or(default_inlet);
            let outlet = raw.complex_list(&format!("harmonic.{l}.outlet"))?.unwrap_or(default_outlet);
            if inlet.len() != inlet_len || outlet.len() != outlet_len {
                return Err(Error::Config(format!(
                    "harmonic {l}: {kind} expects {inlet_len} inlet and {outlet_len} outlet forcing values"
                )));
            }
            entries.push(HarmonicEntry { index: l, omega, inlet, outlet });
        }
        // per-harmonic keys beyond the retained count are accepted and ignored
        let extra: Vec<String> = raw
            .entries
            .keys()
            .filter(|k| {
                let mut parts = k.split('.');
                parts.next() == Some("harmonic")
                    && parts.next().and_then(|l| l.parse::<usize>().ok()).is_some_and(|l| l > n_h)
                    && matches!(parts.next(), Some("omega" | "inlet" | "outlet"))
                    && parts.next().is_none()
            })
            .cloned()
            .collect();
        raw.used.extend(extra);
        let cfg = CaseConfig {
            case_id: raw.or("case_id", default_id.to_string())?,
            kind,
            nx,
            ny,
            length_x: raw.or("length_x", 1.0)?,
            length_y: raw.or("length_y", 1.0)?,
            periodic_y: raw.bool_or("periodic_y", kind == CaseKind::ScalarAdvDiff2d)?,
            gas,
            nozzle,
            scalar,
            dissipation,
            base_omega,
            harmonics: HarmonicSpec::new(entries)?,
            forcing_amplitude: raw.or("forcing_amplitude", if scalar_kind { 1.0 } else { 1e-3 })?,
            scheme,
        };
        raw.raw("output_dir");
        raw.finish()?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.nx < 4 {
            return bad(format!("nx must be at least 4, got {}", self.nx));
        }
        match self.kind.dimension() {
            2 if self.ny < 4 => return bad(format!("ny must be at least 4, got {}", self.ny)),
            1 if self.ny != 1 => return bad(format!("{} is one-dimensional; ny must be 1", self.kind)),
            _ => {}
        }
        if !(self.length_x > 0.0 && self.length_y > 0.0) {
            return bad("domain lengths must be positive".into());
        }
        if !(self.forcing_amplitude >= 0.0) {
            return bad(format!("forcing_amplitude must be non-negative, got {}", self.forcing_amplitude));
        }
        if !(self.dissipation.k2 >= 0.0 && self.dissipation.k4 >= 0.0) {
            return bad("dissipation coefficients must be non-negative".into());
        }
        if self.kind == CaseKind::NozzleEuler {
            let n = &self.nozzle;
            if !(n.inlet_total_pressure > 0.0 && n.inlet_total_temperature > 0.0 && n.outlet_pressure > 0.0) {
                return bad("nozzle boundary pressures and temperature must be positive".into());
            }
        } else {
            let s = &self.scalar;
            if !(s.advection_speed > 0.0) {
                return bad(format!("advection_speed must be positive, got {}", s.advection_speed));
            }
            if !(s.diffusivity >= 0.0) {
                return bad(format!("diffusivity must be non-negative, got {}", s.diffusivity));
            }
        }
        self.scheme.validate()
    }

    pub fn n_harmonics(&self) -> usize {
        self.harmonics.len()
    }

    /// Every setting with defaults filled in, in a form `parse` accepts.
    pub fn materialized(&self) -> Vec<(String, String)> {
        let mut kv: Vec<(String, String)> = Vec::new();
        let mut put = |k: &str, v: String| kv.push((k.to_string(), v));
        put("case_id", self.case_id.clone());
        put("kind", self.kind.to_string());
        put("nx", self.nx.to_string());
        put("ny", self.ny.to_string());
        put("length_x", self.length_x.to_string());
        put("length_y", self.length_y.to_string());
        put("periodic_y", self.periodic_y.to_string());
        put("gamma", self.gas.gamma().to_string());
        put("gas_constant", self.gas.gas_constant().to_string());
        match &self.nozzle.area {
            AreaProfile::Parabolic { curvature } => put("area_curvature", curvature.to_string()),
            AreaProfile::Table { path, .. } => put("area_file", path.display().to_string()),
        }
        put("inlet_total_pressure", self.nozzle.inlet_total_pressure.to_string());
        put("inlet_total_temperature", self.nozzle.inlet_total_temperature.to_string());
        put("outlet_pressure", self.nozzle.outlet_pressure.to_string());
        put("advection_speed", self.scalar.advection_speed.to_string());
        put("diffusivity", self.scalar.diffusivity.to_string());
        put("transverse_wavenumber", self.scalar.transverse_wavenumber.to_string());
        put("inlet_value", self.scalar.inlet_value.to_string());
        put("k2", self.dissipation.k2.to_string());
        put("k4", self.dissipation.k4.to_string());
        put("forcing_amplitude", self.forcing_amplitude.to_string());
        put("base_omega", self.base_omega.to_string());
        put("harmonics", self.harmonics.len().to_string());
        for e in self.harmonics.entries() {
            put(&format!("harmonic.{}.omega", e.index), e.omega.to_string());
            put(&format!("harmonic.{}.inlet", e.index), format_complex_list(&e.inlet));
            put(&format!("harmonic.{}.outlet", e.index), format_complex_list(&e.outlet));
        }
        let s = &self.scheme;
        put("mode", s.mode.to_string());
        put("cfl", s.cfl.to_string());
        put("eps", s.eps.to_string());
        put("mg_levels", s.mg_levels.to_string());
        put("partitions", s.partitions.to_string());
        put("workers", s.workers.to_string());
        put("target_drop", s.target_drop.to_string());
        put("max_iters", s.max_iters.to_string());
        put("linear_tol", s.linear_tol.to_string());
        put("linear_max_iter", s.linear_max_iter.to_string());
        if let Some(t) = s.reference_time {
            put("reference_time", t.to_string());
        }
        kv
    }

    /// Default nozzle case at the given resolution.
    pub fn nozzle(nx: usize, n_harmonics: usize) -> Self {
        Self::parse(&format!("kind = nozzle-euler\nnx = {nx}\nharmonics = {n_harmonics}\n")).expect("default nozzle case")
    }

    /// Default scalar case; `ny = 1` selects the one-dimensional variant.
    pub fn scalar(nx: usize, ny: usize, n_harmonics: usize) -> Self {
        let text = if ny == 1 {
            format!("kind = scalar-advdiff-1d\nnx = {nx}\nharmonics = {n_harmonics}\n")
        } else {
            format!("kind = scalar-advdiff-2d\nnx = {nx}\nny = {ny}\nharmonics = {n_harmonics}\n")
        };
        Self::parse(&text).expect("default scalar case")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_nozzle_materializes_defaults() {
        let c = CaseConfig::parse("kind = nozzle-euler\nnx = 64\n").unwrap();
        assert_eq!(c.n_harmonics(), 2);
        assert_eq!(c.scheme.mode, Mode::Implicit);
        assert_eq!(c.scheme.cfl, 50.0);
        assert_eq!(c.scheme.eps, 0.6);
        assert_eq!(c.scheme.linear_tol, 1e-2);
        assert_eq!(c.scheme.linear_max_iter, 10);
        assert!((c.harmonics.entries()[1].omega - 2.0 * 2.0 * PI * 200.0).abs() < 1e-9);
        let text: String = c.materialized().iter().map(|(k, v)| format!("{k} = {v}\n")).collect();
        assert_eq!(CaseConfig::parse(&text).unwrap(), c);
    }

    #[test]
    fn explicit_mode_defaults_to_cfl_two() {
        let c = CaseConfig::parse("kind = nozzle-euler\nnx = 8\nmode = explicit\n").unwrap();
        assert_eq!(c.scheme.cfl, 2.0);
    }

    #[test]
    fn missing_resolution_names_key() {
        match CaseConfig::parse("kind = nozzle-euler\n") {
            Err(Error::MissingKey(k)) => assert_eq!(k, "nx"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn unknown_key_reports_line() {
        match CaseConfig::parse("kind = nozzle-euler\nnx = 8\nbogus = 1\n") {
            Err(Error::Parse { line, message }) => {
                assert_eq!(line, 3);
                assert!(message.contains("bogus"));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn bad_value_reports_line_and_key() {
        match CaseConfig::parse("kind = nozzle-euler\nnx = many\n") {
            Err(Error::Parse { line, message }) => {
                assert_eq!(line, 2);
                assert!(message.contains("nx"));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn resolution_below_minimum_rejected() {
        assert!(matches!(CaseConfig::parse("kind = nozzle-euler\nnx = 3\n"), Err(Error::Config(_))));
        assert!(matches!(CaseConfig::parse("kind = scalar-advdiff-2d\nnx = 8\nny = 2\n"), Err(Error::Config(_))));
    }

    #[test]
    fn implicit_multigrid_rejected() {
        let r = CaseConfig::parse("kind = nozzle-euler\nnx = 16\nmode = implicit\nmg_levels = 2\n");
        assert!(matches!(r, Err(Error::Config(_))));
    }

    #[test]
    fn overrides_replace_file_values() {
        let o = vec![("mode".to_string(), "explicit".to_string()), ("cfl".to_string(), "3".to_string())];
        let c = CaseConfig::parse_with_overrides("kind = nozzle-euler\nnx = 8\nmode = implicit\n", &o).unwrap();
        assert_eq!(c.scheme.mode, Mode::Explicit);
        assert_eq!(c.scheme.cfl, 3.0);
    }

    #[test]
    fn harmonic_forcing_lists() {
        let c = CaseConfig::parse(
            "kind = nozzle-euler\nnx = 8\nharmonics = 1\nharmonic.1.outlet = 0.5 -0.5\nharmonic.1.omega = 0\nharmonic.3.omega = 7\n",
        )
        .unwrap();
        let e = &c.harmonics.entries()[0];
        assert_eq!(e.omega, 0.0);
        assert_eq!(e.outlet, vec![Complex64::new(0.5, -0.5)]);
        assert!(CaseConfig::parse("kind = nozzle-euler\nnx = 8\nharmonic.1.outlet = 1\n").is_err());
    }

    #[test]
    fn parabolic_area() {
        let a = AreaProfile::Parabolic { curvature: 1.0 };
        assert_eq!(a.area(0.5, 1.0), 1.0);
        assert!((a.area(0.0, 1.0) - 1.25).abs() < 1e-15);
    }
}
