//! One-factor-at-a-time parameter studies over the channel model.
//!
//! A sweep varies one parameter of a base scenario while holding all others
//! fixed, and evaluates every selected path at each value. Points are solved
//! in parallel; results keep the order of the spec.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::impedance::{ChannelGeometry, ElectrodeConfig};
use crate::network::{channel_gain, ChannelPath, GainPoint};
use crate::tissue::{TissueLayer, TissueName};

/// Points per decade of the default frequency grid.
pub const DEFAULT_POINTS_PER_DECADE: usize = 50;

/// A complete model configuration at one frequency.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    /// Layers from the surface down.
    pub stack: Vec<TissueLayer>,
    /// Geometry; its placement layers are replaced per path when sweeping.
    pub geom: ChannelGeometry,
    pub elec: ElectrodeConfig,
    pub freq_hz: f64,
}

impl Scenario {
    pub fn gain(&self, path: ChannelPath) -> Result<GainPoint> {
        channel_gain(
            &self.stack,
            &path.place(&self.geom),
            &self.elec,
            self.freq_hz,
        )
    }

    fn set_thickness(&mut self, name: &TissueName, thickness: f64) -> Result<()> {
        let layer = self
            .stack
            .iter_mut()
            .find(|l| &l.name == name)
            .ok_or_else(|| Error::Config(format!("no `{name}` layer in the stack to sweep")))?;
        *layer = layer.with_thickness(thickness)?;
        Ok(())
    }

    /// Copy with `param` set to `value` (SI units).
    pub fn with(&self, param: SweepParam, value: f64) -> Result<Self> {
        let mut s = self.clone();
        match param {
            SweepParam::Frequency => s.freq_hz = value,
            SweepParam::FatThickness => s.set_thickness(&TissueName::Fat, value)?,
            SweepParam::MuscleThickness => s.set_thickness(&TissueName::Muscle, value)?,
            SweepParam::D => s.geom.d = value,
            SweepParam::ESBoth => {
                s.geom.e_st = value;
                s.geom.e_sr = value;
            }
            SweepParam::DeltaL => s.geom.delta_l = value,
            SweepParam::EL => {
                // Keep an explicitly overridden contact area; otherwise the
                // area follows the square side.
                let square =
                    (self.elec.a_e - self.elec.e_l * self.elec.e_l).abs() <= 1e-12 * self.elec.a_e;
                s.elec.e_l = value;
                if square {
                    s.elec.a_e = value * value;
                }
            }
        }
        s.geom.validate()?;
        s.elec.validate()?;
        Ok(s)
    }
}

/// Parameter varied by a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepParam {
    Frequency,
    FatThickness,
    MuscleThickness,
    D,
    #[serde(rename = "e_s_both")]
    ESBoth,
    DeltaL,
    #[serde(rename = "e_l")]
    EL,
}

impl SweepParam {
    pub const ALL: [SweepParam; 7] = [
        SweepParam::Frequency,
        SweepParam::FatThickness,
        SweepParam::MuscleThickness,
        SweepParam::D,
        SweepParam::ESBoth,
        SweepParam::DeltaL,
        SweepParam::EL,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SweepParam::Frequency => "frequency",
            SweepParam::FatThickness => "fat_thickness",
            SweepParam::MuscleThickness => "muscle_thickness",
            SweepParam::D => "d",
            SweepParam::ESBoth => "e_s_both",
            SweepParam::DeltaL => "delta_l",
            SweepParam::EL => "e_l",
        }
    }

    pub fn is_length(self) -> bool {
        !matches!(self, SweepParam::Frequency)
    }

    /// Column label with the unit used in reports (Hz or mm).
    pub fn label(self) -> String {
        if self.is_length() {
            format!("{}_mm", self.name())
        } else {
            "frequency_hz".to_string()
        }
    }

    /// Converts an SI value to the reporting unit.
    pub fn to_report_unit(self, si: f64) -> f64 {
        if self.is_length() {
            si * 1e3
        } else {
            si
        }
    }

    /// Converts a value in the reporting unit to SI.
    pub fn from_report_unit(self, v: f64) -> f64 {
        if self.is_length() {
            v * 1e-3
        } else {
            v
        }
    }

    fn check_value(self, v: f64) -> Result<()> {
        let ok = v.is_finite()
            && match self {
                SweepParam::DeltaL => v >= 0.0,
                _ => v > 0.0,
            };
        if ok {
            Ok(())
        } else {
            Err(Error::Config(format!(
                "sweep value {v} is outside the domain of `{}`",
                self.name()
            )))
        }
    }

    /// Grid used when no values are given, in SI units.
    pub fn default_grid(self) -> Vec<f64> {
        match self {
            SweepParam::Frequency => log_grid(100e3, 1e6, DEFAULT_POINTS_PER_DECADE),
            SweepParam::FatThickness => linear_grid(0.5e-3, 60e-3, 60),
            SweepParam::MuscleThickness => linear_grid(15e-3, 55e-3, 41),
            SweepParam::D | SweepParam::ESBoth => linear_grid(20e-3, 100e-3, 17),
            SweepParam::DeltaL => linear_grid(0.0, 40e-3, 41),
            SweepParam::EL => linear_grid(5e-3, 30e-3, 26),
        }
    }
}

impl fmt::Display for SweepParam {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SweepParam {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim().to_ascii_lowercase();
        let key = key
            .strip_suffix("_mm")
            .or_else(|| key.strip_suffix("_hz"))
            .unwrap_or(&key);
        SweepParam::ALL
            .into_iter()
            .find(|p| p.name() == key)
            .or(match key {
                "freq" | "f" => Some(SweepParam::Frequency),
                "e_s" | "es" => Some(SweepParam::ESBoth),
                _ => None,
            })
            .ok_or_else(|| Error::validation("sweep", format!("unknown sweep parameter `{s}`")))
    }
}

/// `count` log-spaced points from `start` to `stop` inclusive.
pub fn log_points(start: f64, stop: f64, count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![start],
        _ => {
            let (a, b) = (start.log10(), stop.log10());
            (0..count)
                .map(|i| {
                    if i == count - 1 {
                        stop
                    } else {
                        10f64.powf(a + (b - a) * i as f64 / (count - 1) as f64)
                    }
                })
                .collect()
        }
    }
}

/// Log-spaced grid with `per_decade` intervals per decade, both ends included.
pub fn log_grid(start: f64, stop: f64, per_decade: usize) -> Vec<f64> {
    let decades = (stop / start).log10();
    let intervals = (decades * per_decade as f64).round().max(1.0) as usize;
    log_points(start, stop, intervals + 1)
}

/// `count` evenly spaced points from `start` to `stop` inclusive.
pub fn linear_grid(start: f64, stop: f64, count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![start],
        _ => (0..count)
            .map(|i| {
                if i == count - 1 {
                    stop
                } else {
                    start + (stop - start) * i as f64 / (count - 1) as f64
                }
            })
            .collect(),
    }
}

/// A validated one-factor sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub base: Scenario,
    pub param: SweepParam,
    /// Values in SI units, strictly increasing.
    pub values: Vec<f64>,
    pub paths: Vec<ChannelPath>,
}

impl SweepSpec {
    pub fn new(
        base: Scenario,
        param: SweepParam,
        values: Vec<f64>,
        paths: Vec<ChannelPath>,
    ) -> Result<Self> {
        for v in &values {
            param.check_value(*v)?;
        }
        if let Some(w) = values.windows(2).find(|w| !(w[1] > w[0])) {
            return Err(Error::Config(format!(
                "sweep values for `{param}` must be strictly increasing ({} then {})",
                w[0], w[1]
            )));
        }
        Ok(Self {
            base,
            param,
            values,
            paths,
        })
    }
}

/// One evaluated point of a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRecord {
    /// Swept value in SI units.
    pub value: f64,
    pub path: ChannelPath,
    pub point: GainPoint,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub param: SweepParam,
    pub base: Scenario,
    /// Ordered by value, then by path in the order of the spec.
    pub records: Vec<SweepRecord>,
}

impl SweepResult {
    /// Records of one path, in value order.
    pub fn series(&self, path: ChannelPath) -> Vec<SweepRecord> {
        self.records
            .iter()
            .filter(|r| r.path == path)
            .copied()
            .collect()
    }

    pub fn paths(&self) -> Vec<ChannelPath> {
        let mut out: Vec<ChannelPath> = Vec::new();
        for r in &self.records {
            if !out.contains(&r.path) {
                out.push(r.path);
            }
        }
        out
    }
}

/// Evaluates every (value, path) pair of `spec`.
pub fn run_sweep(spec: &SweepSpec) -> Result<SweepResult> {
    let jobs: Vec<(f64, ChannelPath)> = spec
        .values
        .iter()
        .flat_map(|&v| spec.paths.iter().map(move |&p| (v, p)))
        .collect();
    let records = jobs
        .par_iter()
        .map(|&(value, path)| {
            spec.base
                .with(spec.param, value)
                .and_then(|s| s.gain(path))
                .map(|point| SweepRecord { value, path, point })
                .map_err(|e| Error::SweepPoint {
                    param: format!("{} ({})", spec.param, path),
                    value,
                    source: Box::new(e),
                })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SweepResult {
        param: spec.param,
        base: spec.base.clone(),
        records,
    })
}

fn run_expecting(spec: &SweepSpec, allowed: &[SweepParam]) -> Result<SweepResult> {
    if !allowed.contains(&spec.param) {
        return Err(Error::Config(format!(
            "sweep over `{}` passed to a sweep of {:?}",
            spec.param, allowed
        )));
    }
    run_sweep(spec)
}

pub fn frequency_sweep(spec: &SweepSpec) -> Result<SweepResult> {
    run_expecting(spec, &[SweepParam::Frequency])
}

pub fn thickness_sweep(spec: &SweepSpec) -> Result<SweepResult> {
    run_expecting(
        spec,
        &[SweepParam::FatThickness, SweepParam::MuscleThickness],
    )
}

pub fn distance_sweep(spec: &SweepSpec) -> Result<SweepResult> {
    run_expecting(spec, &[SweepParam::D])
}

pub fn separation_sweep(spec: &SweepSpec) -> Result<SweepResult> {
    run_expecting(spec, &[SweepParam::ESBoth])
}

pub fn misalignment_sweep(spec: &SweepSpec) -> Result<SweepResult> {
    run_expecting(spec, &[SweepParam::DeltaL])
}

pub fn electrode_size_sweep(spec: &SweepSpec) -> Result<SweepResult> {
    run_expecting(spec, &[SweepParam::EL])
}

/// All four placements evaluated on the same stack at each frequency.
#[derive(Debug, Clone, PartialEq)]
pub struct PathComparison {
    /// One row per frequency, paths in S-S, S-M, M-S, M-M order.
    pub rows: Vec<[GainPoint; 4]>,
}

impl PathComparison {
    /// Paths sorted from highest to lowest gain at row `i`.
    pub fn ranking(&self, i: usize) -> Vec<ChannelPath> {
        let mut points = self.rows[i].to_vec();
        points.sort_by(|a, b| b.gain_db.total_cmp(&a.gain_db));
        points.into_iter().filter_map(|p| p.path).collect()
    }

    /// Whether row `i` is ordered M-M > S-M > M-S > S-S.
    pub fn has_expected_ordering(&self, i: usize) -> bool {
        self.ranking(i)
            == [
                ChannelPath::MM,
                ChannelPath::SM,
                ChannelPath::MS,
                ChannelPath::SS,
            ]
    }

    pub fn gain(&self, i: usize, path: ChannelPath) -> f64 {
        self.rows[i][ChannelPath::ALL.iter().position(|&p| p == path).unwrap()].gain_db
    }
}

pub fn path_comparison(base: &Scenario, freqs: &[f64]) -> Result<PathComparison> {
    let spec = SweepSpec::new(
        base.clone(),
        SweepParam::Frequency,
        freqs.to_vec(),
        ChannelPath::ALL.to_vec(),
    )?;
    let result = run_sweep(&spec)?;
    let rows = result
        .records
        .chunks(4)
        .map(|c| [c[0].point, c[1].point, c[2].point, c[3].point])
        .collect();
    Ok(PathComparison { rows })
}
