//! Frequency-dependent dielectric properties of tissue.
//!
//! Each tissue is described by a single-pole Debye relaxation plus a static
//! conductivity. The complex relative permittivity used by the admittance
//! model is
//!
//! ```text
//! ε_r(ω) = ε'(ω) − j·(ε''(ω) + σ/(ω·ε₀))
//! ε'(ω)  = ε_∞ + (ε_s − ε_∞)/(1 + ω²τ²)
//! ε''(ω) = (ε_s − ε_∞)·ωτ/(1 + ω²τ²)
//! ```
//!
//! Two tables are bundled: `human_forearm` (skin, fat, muscle, cortical bone)
//! and `porcine_loin` (skin, fat, muscle). Custom tables are read from TOML
//! files with explicit units in every key.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Vacuum permittivity in F/m.
pub const EPS0: f64 = 8.854_187_812_8e-12;

/// Single-pole Debye dispersion with static conductivity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DispersionParams {
    /// Relative permittivity at very low frequency.
    pub eps_s: f64,
    /// Relative permittivity at very high frequency.
    pub eps_inf: f64,
    /// Relaxation time in seconds.
    pub tau_s: f64,
    /// Static conductivity in S/m.
    pub sigma_s_per_m: f64,
}

impl DispersionParams {
    pub fn new(eps_s: f64, eps_inf: f64, tau_s: f64, sigma_s_per_m: f64) -> Result<Self> {
        let p = Self {
            eps_s,
            eps_inf,
            tau_s,
            sigma_s_per_m,
        };
        p.validate("dispersion")?;
        Ok(p)
    }

    pub fn validate(&self, field: &str) -> Result<()> {
        let all_finite = [self.eps_s, self.eps_inf, self.tau_s, self.sigma_s_per_m]
            .iter()
            .all(|v| v.is_finite());
        if !all_finite {
            return Err(Error::validation(field, "non-finite dispersion parameter"));
        }
        if self.eps_inf < 1.0 {
            return Err(Error::validation(
                format!("{field}.eps_inf"),
                format!("must be >= 1, got {}", self.eps_inf),
            ));
        }
        if self.eps_s <= self.eps_inf {
            return Err(Error::validation(
                format!("{field}.eps_s"),
                format!("must exceed eps_inf ({}), got {}", self.eps_inf, self.eps_s),
            ));
        }
        if self.tau_s <= 0.0 {
            return Err(Error::validation(
                format!("{field}.tau_s"),
                format!("must be > 0, got {}", self.tau_s),
            ));
        }
        if self.sigma_s_per_m < 0.0 {
            return Err(Error::validation(
                format!("{field}.sigma_s_per_m"),
                format!("must be >= 0, got {}", self.sigma_s_per_m),
            ));
        }
        Ok(())
    }

    /// Dielectric constant ε'(ω).
    pub fn eps_prime(&self, omega: f64) -> f64 {
        let wt = omega * self.tau_s;
        self.eps_inf + (self.eps_s - self.eps_inf) / (1.0 + wt * wt)
    }

    /// Debye loss factor ε''(ω); peaks at ωτ = 1 with value (ε_s − ε_∞)/2.
    pub fn eps_double_prime(&self, omega: f64) -> f64 {
        let wt = omega * self.tau_s;
        (self.eps_s - self.eps_inf) * wt / (1.0 + wt * wt)
    }

    /// Complex relative permittivity including the conduction term.
    pub fn complex_permittivity(&self, omega: f64) -> Result<Complex64> {
        if !(omega > 0.0) || !omega.is_finite() {
            return Err(Error::Domain(format!(
                "complex permittivity needs omega > 0, got {omega}"
            )));
        }
        let loss = self.eps_double_prime(omega) + self.sigma_s_per_m / (omega * EPS0);
        Ok(Complex64::new(self.eps_prime(omega), -loss))
    }

    /// Conductivity entering the admittance model. Loss growth with
    /// frequency is carried by ε'', so this is the static value.
    pub fn conductivity(&self, _omega: f64) -> f64 {
        self.sigma_s_per_m
    }
}

/// Tissue identity.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum TissueName {
    Skin,
    Fat,
    Muscle,
    CorticalBone,
    Custom(String),
}

impl TissueName {
    pub fn as_str(&self) -> &str {
        match self {
            TissueName::Skin => "skin",
            TissueName::Fat => "fat",
            TissueName::Muscle => "muscle",
            TissueName::CorticalBone => "cortical_bone",
            TissueName::Custom(s) => s,
        }
    }
}

impl fmt::Display for TissueName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for TissueName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let name = s.trim();
        if name.is_empty() {
            return Err(Error::validation("name", "tissue name is empty"));
        }
        Ok(match name {
            "skin" => TissueName::Skin,
            "fat" => TissueName::Fat,
            "muscle" => TissueName::Muscle,
            "cortical_bone" | "bone" => TissueName::CorticalBone,
            other => TissueName::Custom(other.to_string()),
        })
    }
}

impl Serialize for TissueName {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(self.as_str())
    }
}

impl<'de> Deserialize<'de> for TissueName {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Electrical and hydration properties of one tissue, independent of how
/// thick a particular layer of it is.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TissueProperties {
    pub name: TissueName,
    pub eps_s: f64,
    pub eps_inf: f64,
    pub tau_s: f64,
    pub sigma_s_per_m: f64,
    /// Default layer thickness in millimetres.
    pub thickness_mm: f64,
    /// Hydration correction factor.
    pub f_w: f64,
    /// Ratio of external to internal cell resistance.
    pub kappa: f64,
}

impl TissueProperties {
    pub fn dispersion(&self) -> DispersionParams {
        DispersionParams {
            eps_s: self.eps_s,
            eps_inf: self.eps_inf,
            tau_s: self.tau_s,
            sigma_s_per_m: self.sigma_s_per_m,
        }
    }

    fn validate(&self) -> Result<()> {
        let field = format!("tissue.{}", self.name);
        self.dispersion().validate(&field)?;
        check_positive(&format!("{field}.thickness_mm"), self.thickness_mm)?;
        check_positive(&format!("{field}.f_w"), self.f_w)?;
        check_positive(&format!("{field}.kappa"), self.kappa)?;
        Ok(())
    }

    /// Layer of this tissue with the given thickness in metres.
    pub fn layer(&self, thickness_m: f64) -> Result<TissueLayer> {
        TissueLayer::new(
            self.name.clone(),
            thickness_m,
            self.dispersion(),
            self.f_w,
            self.kappa,
        )
    }
}

fn check_positive(field: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::validation(field, format!("must be > 0, got {v}")))
    }
}

/// A tissue slab of definite thickness in the layered model.
#[derive(Debug, Clone, PartialEq)]
pub struct TissueLayer {
    pub name: TissueName,
    /// Thickness in metres.
    pub thickness: f64,
    pub dispersion: DispersionParams,
    pub f_w: f64,
    pub kappa: f64,
}

impl TissueLayer {
    pub fn new(
        name: TissueName,
        thickness: f64,
        dispersion: DispersionParams,
        f_w: f64,
        kappa: f64,
    ) -> Result<Self> {
        let field = format!("layer.{name}");
        dispersion.validate(&field)?;
        check_positive(&format!("{field}.thickness"), thickness)?;
        check_positive(&format!("{field}.f_w"), f_w)?;
        check_positive(&format!("{field}.kappa"), kappa)?;
        Ok(Self {
            name,
            thickness,
            dispersion,
            f_w,
            kappa,
        })
    }

    pub fn with_thickness(&self, thickness: f64) -> Result<Self> {
        Self::new(
            self.name.clone(),
            thickness,
            self.dispersion,
            self.f_w,
            self.kappa,
        )
    }
}

/// Named collection of tissue properties with a frequency validity band.
#[derive(Debug, Clone, PartialEq)]
pub struct TissueTable {
    pub name: String,
    pub f_min_hz: f64,
    pub f_max_hz: f64,
    tissues: BTreeMap<TissueName, TissueProperties>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TableFile {
    name: String,
    f_min_hz: f64,
    f_max_hz: f64,
    #[serde(rename = "tissue")]
    tissues: Vec<TissueProperties>,
}

/// Source for [`TissueTable::load`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TableSource {
    Bundled(String),
    File(std::path::PathBuf),
}

impl TableSource {
    /// Bundled dataset names resolve to themselves; anything else is a path.
    pub fn parse(selector: &str) -> Self {
        if BUNDLED.iter().any(|(name, _)| *name == selector) {
            TableSource::Bundled(selector.to_string())
        } else {
            TableSource::File(selector.into())
        }
    }
}

const HUMAN_FOREARM: &str = include_str!("../data/human_forearm.toml");
const PORCINE_LOIN: &str = include_str!("../data/porcine_loin.toml");
const BUNDLED: [(&str, &str); 2] = [
    ("human_forearm", HUMAN_FOREARM),
    ("porcine_loin", PORCINE_LOIN),
];

impl TissueTable {
    pub fn new(
        name: impl Into<String>,
        f_min_hz: f64,
        f_max_hz: f64,
        tissues: Vec<TissueProperties>,
    ) -> Result<Self> {
        check_positive("f_min_hz", f_min_hz)?;
        if !(f_max_hz > f_min_hz) {
            return Err(Error::validation(
                "f_max_hz",
                format!("must exceed f_min_hz ({f_min_hz}), got {f_max_hz}"),
            ));
        }
        let mut map = BTreeMap::new();
        for t in tissues {
            t.validate()?;
            let key = t.name.clone();
            if map.insert(key.clone(), t).is_some() {
                return Err(Error::validation(
                    "tissue.name",
                    format!("duplicate tissue `{key}`"),
                ));
            }
        }
        if map.is_empty() {
            return Err(Error::validation("tissue", "table has no tissues"));
        }
        Ok(Self {
            name: name.into(),
            f_min_hz,
            f_max_hz,
            tissues: map,
        })
    }

    pub fn load(source: &TableSource) -> Result<Self> {
        match source {
            TableSource::Bundled(name) => Self::bundled(name),
            TableSource::File(path) => Self::from_file(path),
        }
    }

    pub fn bundled(name: &str) -> Result<Self> {
        let text = BUNDLED
            .iter()
            .find(|(n, _)| *n == name)
            .map(|(_, t)| *t)
            .ok_or_else(|| Error::Config(format!("no bundled tissue table named `{name}`")))?;
        Self::from_toml_str(text, name)
    }

    pub fn human_forearm() -> Self {
        Self::bundled("human_forearm").expect("bundled human table is valid")
    }

    pub fn porcine_loin() -> Self {
        Self::bundled("porcine_loin").expect("bundled porcine table is valid")
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_toml_str(&text, &path.display().to_string())
    }

    pub fn from_toml_str(text: &str, origin: &str) -> Result<Self> {
        let file: TableFile = toml::from_str(text).map_err(|e| Error::Parse {
            origin: origin.to_string(),
            message: e.to_string(),
        })?;
        Self::new(file.name, file.f_min_hz, file.f_max_hz, file.tissues)
    }

    pub fn to_toml_string(&self) -> String {
        let file = TableFile {
            name: self.name.clone(),
            f_min_hz: self.f_min_hz,
            f_max_hz: self.f_max_hz,
            tissues: self.tissues.values().cloned().collect(),
        };
        toml::to_string(&file).expect("tissue table serializes")
    }

    pub fn get(&self, name: &TissueName) -> Option<&TissueProperties> {
        self.tissues.get(name)
    }

    pub fn contains(&self, name: &TissueName) -> bool {
        self.tissues.contains_key(name)
    }

    pub fn len(&self) -> usize {
        self.tissues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tissues.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &TissueProperties> {
        self.tissues.values()
    }

    /// Layer of a named tissue; `thickness_m` falls back to the table default.
    pub fn layer(&self, name: &TissueName, thickness_m: Option<f64>) -> Result<TissueLayer> {
        let props = self.get(name).ok_or_else(|| {
            Error::Config(format!("tissue `{name}` not in table `{}`", self.name))
        })?;
        props.layer(thickness_m.unwrap_or(props.thickness_mm * 1e-3))
    }

    pub fn in_band(&self, freq_hz: f64) -> bool {
        freq_hz >= self.f_min_hz && freq_hz <= self.f_max_hz
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn toy() -> DispersionParams {
        DispersionParams::new(100.0, 10.0, 1e-6, 0.0).unwrap()
    }

    #[test]
    fn eps_prime_limits_and_midpoint() {
        let p = toy();
        assert_eq!(p.eps_prime(0.0), 100.0);
        assert!((p.eps_prime(1e15) - 10.0).abs() < 1e-9);
        assert!((p.eps_prime(1e6) - 55.0).abs() < 1e-12);
    }

    #[test]
    fn eps_double_prime_values() {
        let p = toy();
        assert_eq!(p.eps_double_prime(0.0), 0.0);
        assert!((p.eps_double_prime(1e6) - 45.0).abs() < 1e-12);
        // 90 * 2 / (1 + 4)
        assert!((p.eps_double_prime(2e6) - 36.0).abs() < 1e-12);
    }

    #[test]
    fn complex_permittivity_by_hand() {
        let p = DispersionParams::new(100.0, 10.0, 1e-6, 0.1).unwrap();
        let e = p.complex_permittivity(1e6).unwrap();
        assert!((e.re - 55.0).abs() < 1e-12);
        let expected_im = -(45.0 + 0.1 / (1e6 * EPS0));
        assert!((e.im - expected_im).abs() / expected_im.abs() < 1e-14);

        let lossless = toy().complex_permittivity(3e5).unwrap();
        assert_eq!(lossless.im, -toy().eps_double_prime(3e5));
    }

    #[test]
    fn complex_permittivity_rejects_dc() {
        assert!(matches!(
            toy().complex_permittivity(0.0),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn bundled_tables() {
        let human = TissueTable::human_forearm();
        assert_eq!(human.len(), 4);
        for t in [
            TissueName::Skin,
            TissueName::Fat,
            TissueName::Muscle,
            TissueName::CorticalBone,
        ] {
            assert!(human.contains(&t), "{t} missing");
        }
        let pig = TissueTable::porcine_loin();
        assert_eq!(pig.len(), 3);
        assert!(!pig.contains(&TissueName::CorticalBone));
    }

    #[test]
    fn table_conductivities_match_reference_values() {
        let human = TissueTable::human_forearm();
        let muscle = human.get(&TissueName::Muscle).unwrap().dispersion();
        assert_eq!(muscle.conductivity(2.0 * PI * 1e5), 0.36);
        let pig = TissueTable::porcine_loin();
        let fat = pig.get(&TissueName::Fat).unwrap().dispersion();
        assert_eq!(fat.conductivity(2.0 * PI * 1e5), 0.03);
        let custom = DispersionParams::new(50.0, 5.0, 1e-7, 0.0).unwrap();
        assert_eq!(custom.conductivity(1.0), 0.0);
    }

    #[test]
    fn reference_permittivities_at_band_edge() {
        // Reference dielectric constants at 100 kHz, spot-checked to 10 %.
        let omega = 2.0 * PI * 1e5;
        let cases = [
            ("human_forearm", TissueName::Skin, 1119.2),
            ("human_forearm", TissueName::Fat, 92.8),
            ("human_forearm", TissueName::Muscle, 8089.2),
            ("porcine_loin", TissueName::Skin, 965.0),
            ("porcine_loin", TissueName::Fat, 98.0),
            ("porcine_loin", TissueName::Muscle, 9900.0),
        ];
        for (table, tissue, expected) in cases {
            let t = TissueTable::bundled(table).unwrap();
            let re = t
                .get(&tissue)
                .unwrap()
                .dispersion()
                .complex_permittivity(omega)
                .unwrap()
                .re;
            assert!(
                (re - expected).abs() <= 0.1 * expected,
                "{table}/{tissue}: {re} vs {expected}"
            );
        }
    }

    #[test]
    fn invalid_file_is_rejected() {
        let text = r#"
name = "bad"
f_min_hz = 1e5
f_max_hz = 1e6
[[tissue]]
name = "skin"
eps_s = 10.0
eps_inf = 20.0
tau_s = 1e-6
sigma_s_per_m = 0.1
thickness_mm = 1.0
f_w = 0.7
kappa = 1.0
"#;
        let err = TissueTable::from_toml_str(text, "inline").unwrap_err();
        assert!(matches!(err, Error::Validation { .. }), "{err}");
    }

    #[test]
    fn unknown_keys_and_garbage_are_parse_errors() {
        let text = r#"
name = "bad"
f_min_hz = 1e5
f_max_hz = 1e6
colour = "red"
"#;
        assert!(matches!(
            TissueTable::from_toml_str(text, "inline"),
            Err(Error::Parse { .. })
        ));
        assert!(matches!(
            TissueTable::from_toml_str("[[[", "inline"),
            Err(Error::Parse { .. })
        ));
    }

    #[test]
    fn source_selector() {
        assert_eq!(
            TableSource::parse("porcine_loin"),
            TableSource::Bundled("porcine_loin".into())
        );
        assert_eq!(
            TableSource::parse("my/table.toml"),
            TableSource::File("my/table.toml".into())
        );
    }
}
