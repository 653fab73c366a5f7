//! Run configuration: a TOML document with units in every key name.
//!
//! Every section is optional and falls back to the baseline forearm setup
//! (1/7/15/20 mm skin/fat/muscle/bone, 100 mm link, 50 mm electrode
//! separations, 10 mm square electrodes). Unknown keys are rejected.
//!
//! ```toml
//! table = "human_forearm"
//! paths = ["ss", "mm"]
//!
//! [stack]
//! layers = ["skin", "fat", "muscle", "cortical_bone"]
//! thickness_mm = [1.0, 7.0, 15.0, 20.0]
//!
//! [geometry]
//! d_mm = 100.0
//!
//! [sweep]
//! param = "d_mm"
//! start = 20.0
//! stop = 100.0
//! count = 5
//! ```

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::impedance::{ChannelGeometry, ElectrodeConfig};
use crate::network::ChannelPath;
use crate::safety::SafetyLimits;
use crate::sweeps::{linear_grid, log_grid, log_points, Scenario, SweepParam, SweepSpec};
use crate::tissue::{TableSource, TissueName, TissueTable};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    /// Bundled table name or path to a table file.
    pub table: String,
    /// Placements to evaluate: any of `ss`, `sm`, `ms`, `mm`, or `all`.
    pub paths: Vec<String>,
    pub stack: StackConfig,
    pub geometry: GeometryConfig,
    pub electrode: ElectrodeSection,
    pub frequency: FrequencyConfig,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepConfig>,
    pub safety: SafetyConfig,
    pub output: OutputConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            table: "human_forearm".to_string(),
            paths: vec!["all".to_string()],
            stack: StackConfig::default(),
            geometry: GeometryConfig::default(),
            electrode: ElectrodeSection::default(),
            frequency: FrequencyConfig::default(),
            sweep: None,
            safety: SafetyConfig::default(),
            output: OutputConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct StackConfig {
    /// Tissue names from the surface down.
    pub layers: Vec<String>,
    pub thickness_mm: Vec<f64>,
    /// Replaces the hydration factor of every layer when set.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub f_w: Option<f64>,
}

impl Default for StackConfig {
    fn default() -> Self {
        Self {
            layers: ["skin", "fat", "muscle", "cortical_bone"]
                .map(String::from)
                .to_vec(),
            thickness_mm: vec![1.0, 7.0, 15.0, 20.0],
            f_w: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GeometryConfig {
    pub d_mm: f64,
    pub e_st_mm: f64,
    pub e_sr_mm: f64,
    pub delta_l_mm: f64,
}

impl Default for GeometryConfig {
    fn default() -> Self {
        Self {
            d_mm: 100.0,
            e_st_mm: 50.0,
            e_sr_mm: 50.0,
            delta_l_mm: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ElectrodeSection {
    pub e_l_mm: f64,
    /// Contact area; defaults to the square of `e_l_mm`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub a_e_mm2: Option<f64>,
    /// Contact resistance constant, Ω·m²·Hz^(−m).
    pub k1_ohm_m2: f64,
    /// Contact reactance constant, Ω·m²·Hz^(−m').
    pub k2_ohm_m2: f64,
    pub m: f64,
    pub m_prime: f64,
}

impl Default for ElectrodeSection {
    fn default() -> Self {
        Self {
            e_l_mm: 10.0,
            a_e_mm2: None,
            k1_ohm_m2: ElectrodeConfig::DEFAULT_K1,
            k2_ohm_m2: ElectrodeConfig::DEFAULT_K2,
            m: ElectrodeConfig::DEFAULT_M,
            m_prime: ElectrodeConfig::DEFAULT_M_PRIME,
        }
    }
}

/// Log-spaced frequency grid; a single point when `start_hz == stop_hz`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FrequencyConfig {
    pub start_hz: f64,
    pub stop_hz: f64,
    /// Explicit point count; overrides `points_per_decade`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub count: Option<usize>,
    pub points_per_decade: usize,
}

impl Default for FrequencyConfig {
    fn default() -> Self {
        Self {
            start_hz: 100e3,
            stop_hz: 1e6,
            count: None,
            points_per_decade: crate::sweeps::DEFAULT_POINTS_PER_DECADE,
        }
    }
}

impl FrequencyConfig {
    pub fn single(freq_hz: f64) -> Self {
        Self {
            start_hz: freq_hz,
            stop_hz: freq_hz,
            count: None,
            ..Self::default()
        }
    }

    pub fn grid(&self) -> Vec<f64> {
        if self.start_hz == self.stop_hz {
            return vec![self.start_hz];
        }
        match self.count {
            Some(n) => log_points(self.start_hz, self.stop_hz, n),
            None => log_grid(self.start_hz, self.stop_hz, self.points_per_decade),
        }
    }
}

/// Sweep of one parameter. `param` carries its unit (`d_mm`,
/// `frequency_hz`, ...) and `start`/`stop` are in that unit. Non-frequency
/// sweeps are evaluated at `frequency.start_hz`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub param: String,
    pub start: f64,
    pub stop: f64,
    pub count: usize,
    #[serde(default)]
    pub log_spacing: bool,
}

impl SweepConfig {
    pub fn param(&self) -> Result<SweepParam> {
        let p: SweepParam = self.param.parse()?;
        if self.param.trim().to_ascii_lowercase() != p.label() {
            return Err(Error::validation(
                "sweep.param",
                format!("`{}` must name its unit, e.g. `{}`", self.param, p.label()),
            ));
        }
        Ok(p)
    }

    /// Values in SI units.
    pub fn values(&self) -> Result<Vec<f64>> {
        let p = self.param()?;
        let raw = if self.log_spacing {
            if !(self.start > 0.0) {
                return Err(Error::validation(
                    "sweep.start",
                    "log spacing needs start > 0",
                ));
            }
            log_points(self.start, self.stop, self.count)
        } else {
            linear_grid(self.start, self.stop, self.count)
        };
        Ok(raw.into_iter().map(|v| p.from_report_unit(v)).collect())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SafetyConfig {
    pub drive_current_ma: f64,
    pub contact_limit_ma: f64,
    pub density_limit_ma_per_m2: f64,
    pub max_operating_hz: f64,
}

impl Default for SafetyConfig {
    fn default() -> Self {
        let l = SafetyLimits::default();
        Self {
            drive_current_ma: 1.0,
            contact_limit_ma: l.contact_current_a * 1e3,
            density_limit_ma_per_m2: l.density_a_per_m2 * 1e3,
            max_operating_hz: l.max_operating_hz,
        }
    }
}

impl SafetyConfig {
    pub fn limits(&self) -> SafetyLimits {
        SafetyLimits {
            contact_current_a: self.contact_limit_ma * 1e-3,
            density_a_per_m2: self.density_limit_ma_per_m2 * 1e-3,
            max_operating_hz: self.max_operating_hz,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    pub dir: PathBuf,
    pub plot: bool,
    /// Treat an empty result as an error.
    pub strict: bool,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            dir: PathBuf::from("out"),
            plot: false,
            strict: false,
        }
    }
}

fn positive(field: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::validation(field, format!("must be > 0, got {v}")))
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        if self.stack.layers.len() != self.stack.thickness_mm.len() {
            return Err(Error::validation(
                "stack.thickness_mm",
                format!(
                    "{} thicknesses for {} layers",
                    self.stack.thickness_mm.len(),
                    self.stack.layers.len()
                ),
            ));
        }
        for (i, t) in self.stack.thickness_mm.iter().enumerate() {
            positive(&format!("stack.thickness_mm[{i}]"), *t)?;
        }
        for (i, name) in self.stack.layers.iter().enumerate() {
            name.parse::<TissueName>()
                .map_err(|e| Error::validation(format!("stack.layers[{i}]"), e.to_string()))?;
        }
        if let Some(f_w) = self.stack.f_w {
            positive("stack.f_w", f_w)?;
        }
        positive("geometry.d_mm", self.geometry.d_mm)?;
        positive("geometry.e_st_mm", self.geometry.e_st_mm)?;
        positive("geometry.e_sr_mm", self.geometry.e_sr_mm)?;
        if !(self.geometry.delta_l_mm >= 0.0) || !self.geometry.delta_l_mm.is_finite() {
            return Err(Error::validation(
                "geometry.delta_l_mm",
                format!("must be >= 0, got {}", self.geometry.delta_l_mm),
            ));
        }
        positive("electrode.e_l_mm", self.electrode.e_l_mm)?;
        if let Some(a) = self.electrode.a_e_mm2 {
            positive("electrode.a_e_mm2", a)?;
        }
        self.electrode().map_err(|e| match e {
            Error::Validation { field, message } => Error::Validation {
                field: format!("electrode.{field}"),
                message,
            },
            other => other,
        })?;
        positive("frequency.start_hz", self.frequency.start_hz)?;
        positive("frequency.stop_hz", self.frequency.stop_hz)?;
        if self.frequency.stop_hz < self.frequency.start_hz {
            return Err(Error::validation(
                "frequency.stop_hz",
                "must not be below frequency.start_hz",
            ));
        }
        self.channel_paths()?;
        if let Some(s) = &self.sweep {
            s.values()?;
        }
        positive("safety.drive_current_ma", self.safety.drive_current_ma)?;
        self.safety.limits().validate()?;
        Ok(())
    }

    pub fn channel_paths(&self) -> Result<Vec<ChannelPath>> {
        let mut out = Vec::new();
        for (i, p) in self.paths.iter().enumerate() {
            if p.eq_ignore_ascii_case("all") {
                for q in ChannelPath::ALL {
                    if !out.contains(&q) {
                        out.push(q);
                    }
                }
                continue;
            }
            let q: ChannelPath = p
                .parse()
                .map_err(|e: Error| Error::validation(format!("paths[{i}]"), e.to_string()))?;
            if !out.contains(&q) {
                out.push(q);
            }
        }
        if out.is_empty() {
            return Err(Error::validation("paths", "no paths selected"));
        }
        Ok(out)
    }

    pub fn electrode(&self) -> Result<ElectrodeConfig> {
        let e_l = self.electrode.e_l_mm * 1e-3;
        let cfg = ElectrodeConfig {
            e_l,
            a_e: self.electrode.a_e_mm2.map_or(e_l * e_l, |a| a * 1e-6),
            k1: self.electrode.k1_ohm_m2,
            k2: self.electrode.k2_ohm_m2,
            m: self.electrode.m,
            m_prime: self.electrode.m_prime,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn geometry(&self) -> ChannelGeometry {
        ChannelGeometry {
            d: self.geometry.d_mm * 1e-3,
            e_st: self.geometry.e_st_mm * 1e-3,
            e_sr: self.geometry.e_sr_mm * 1e-3,
            delta_l: self.geometry.delta_l_mm * 1e-3,
            ..ChannelGeometry::default()
        }
    }

    pub fn load_table(&self) -> Result<TissueTable> {
        TissueTable::load(&TableSource::parse(&self.table))
    }

    /// Scenario at the first grid frequency, using `table` for tissue data.
    pub fn scenario(&self, table: &TissueTable) -> Result<Scenario> {
        self.validate()?;
        let mut stack = Vec::with_capacity(self.stack.layers.len());
        for (name, t) in self.stack.layers.iter().zip(&self.stack.thickness_mm) {
            let name: TissueName = name.parse()?;
            let mut layer = table.layer(&name, Some(t * 1e-3))?;
            if let Some(f_w) = self.stack.f_w {
                layer.f_w = f_w;
            }
            stack.push(layer);
        }
        Ok(Scenario {
            stack,
            geom: self.geometry(),
            elec: self.electrode()?,
            freq_hz: self.frequency.start_hz,
        })
    }

    /// Sweep described by the `[sweep]` section, or a frequency sweep over
    /// the frequency grid when there is none.
    pub fn sweep_spec(&self, table: &TissueTable) -> Result<SweepSpec> {
        let base = self.scenario(table)?;
        let paths = self.channel_paths()?;
        match &self.sweep {
            Some(s) => SweepSpec::new(base, s.param()?, s.values()?, paths),
            None => SweepSpec::new(base, SweepParam::Frequency, self.frequency.grid(), paths),
        }
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("run config serializes")
    }
}

/// Parses a config document and applies `key=value` overrides. Keys are
/// dotted paths such as `geometry.d_mm`; values are TOML literals, with bare
/// words taken as strings.
pub fn parse_config_str(text: &str, origin: &str, overrides: &[String]) -> Result<RunConfig> {
    let parse_err = |message: String| Error::Parse {
        origin: origin.to_string(),
        message,
    };
    let mut doc: toml::Table = toml::from_str(text).map_err(|e| parse_err(e.to_string()))?;
    for ov in overrides {
        apply_override(&mut doc, ov)?;
    }
    let cfg: RunConfig = toml::Value::Table(doc)
        .try_into()
        .map_err(|e: toml::de::Error| parse_err(e.to_string()))?;
    cfg.validate()?;
    Ok(cfg)
}

/// Reads `path` (or starts from an empty document) and applies overrides.
pub fn parse_config(path: Option<&Path>, overrides: &[String]) -> Result<RunConfig> {
    match path {
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|source| Error::Io {
                path: p.to_path_buf(),
                source,
            })?;
            parse_config_str(&text, &p.display().to_string(), overrides)
        }
        None => parse_config_str("", "<defaults>", overrides),
    }
}

fn apply_override(doc: &mut toml::Table, ov: &str) -> Result<()> {
    let (key, raw) = ov
        .split_once('=')
        .ok_or_else(|| Error::validation(ov, "override must look like key=value"))?;
    let key = key.trim();
    let raw = raw.trim();
    let value = match toml::from_str::<toml::Table>(&format!("v = {raw}")) {
        Ok(mut t) => t.remove("v").expect("parsed key"),
        Err(_) => toml::Value::String(raw.to_string()),
    };
    let parts: Vec<&str> = key.split('.').collect();
    if parts.iter().any(|p| p.is_empty()) {
        return Err(Error::validation(key, "empty key segment"));
    }
    let mut table = doc;
    for part in &parts[..parts.len() - 1] {
        let entry = table
            .entry(part.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()));
        table = entry
            .as_table_mut()
            .ok_or_else(|| Error::validation(key, format!("`{part}` is not a section")))?;
    }
    table.insert(parts[parts.len() - 1].to_string(), value);
    Ok(())
}
