//! Exposure checks for a transmitter configuration.
//!
//! The lumped circuit cannot resolve the field inside tissue, so the
//! current density reported here is the contact current spread evenly over
//! the electrode area. That is a conservative upper bound on the mean
//! density under the electrode, not a field-solver result.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::impedance::{ChannelGeometry, ElectrodeConfig};
use crate::network::{branch_currents, build_network, solve_network, BranchKind, Position};
use crate::tissue::{DispersionParams, TissueLayer, TissueName, TissueTable, EPS0};

/// Highest frequency the conduction-dominance search will report, in Hz.
pub const CONDUCTION_CEILING_HZ: f64 = 2e6;
/// Frequencies at or below this value are flagged, in Hz.
pub const LOW_FREQUENCY_FLAG_HZ: f64 = 50e3;

/// Relative slack on limit comparisons, so a value equal to its limit up to
/// solver rounding is not reported as a violation.
pub const LIMIT_RELATIVE_SLACK: f64 = 1e-9;

fn within_limit(value: f64, limit: f64) -> bool {
    value <= limit * (1.0 + LIMIT_RELATIVE_SLACK)
}

/// Limits applied by [`evaluate`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SafetyLimits {
    /// Maximum current through either transmitter contact, in A.
    pub contact_current_a: f64,
    /// Maximum current density, in A/m².
    pub density_a_per_m2: f64,
    /// Highest operating frequency allowed, in Hz.
    pub max_operating_hz: f64,
}

impl Default for SafetyLimits {
    fn default() -> Self {
        Self {
            contact_current_a: 1e-3,
            density_a_per_m2: 25e-3,
            max_operating_hz: 1e6,
        }
    }
}

impl SafetyLimits {
    pub fn validate(&self) -> Result<()> {
        for (field, v) in [
            ("safety.contact_current_a", self.contact_current_a),
            ("safety.density_a_per_m2", self.density_a_per_m2),
            ("safety.max_operating_hz", self.max_operating_hz),
        ] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::validation(field, format!("must be > 0, got {v}")));
            }
        }
        Ok(())
    }
}

/// Current through the electrode contacts of the transmitter, and whether
/// it stays within `limit`.
///
/// Each transmitter terminal has one branch into tissue; the larger of the
/// two branch-current magnitudes is reported.
pub fn contact_check(currents: &[(crate::network::Branch, Complex64)], limit: f64) -> (f64, bool) {
    let contact = currents
        .iter()
        .filter(|(br, _)| {
            matches!(
                br.kind,
                BranchKind::Coupling(Position::TxP) | BranchKind::Coupling(Position::TxN)
            )
        })
        .map(|(_, i)| i.norm())
        .fold(0.0, f64::max);
    (contact, within_limit(contact, limit))
}

/// Current density under an electrode split into its conduction and
/// displacement parts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurrentDensity {
    /// Magnitude of the total density, A/m².
    pub total: f64,
    pub conduction: f64,
    pub displacement: f64,
}

impl CurrentDensity {
    pub fn displacement_fraction(&self) -> f64 {
        if self.total == 0.0 {
            0.0
        } else {
            self.displacement / self.total
        }
    }
}

/// Density of `contact_current` amperes over the contact area of `elec`.
///
/// The split follows the admittivity `σ + jωε₀ε″` of the tissue in contact:
/// both parts share the same field, so each carries the fraction of `|J|`
/// given by its share of the admittivity magnitude.
pub fn current_density(
    contact_current: f64,
    tissue: &TissueLayer,
    elec: &ElectrodeConfig,
    omega: f64,
) -> Result<CurrentDensity> {
    if !(elec.a_e > 0.0) {
        return Err(Error::Domain(format!(
            "contact area must be > 0, got {}",
            elec.a_e
        )));
    }
    if !(omega > 0.0) {
        return Err(Error::Domain(format!("omega must be > 0, got {omega}")));
    }
    let total = contact_current.abs() / elec.a_e;
    let sigma = tissue.dispersion.conductivity(omega);
    let displacement_admittivity = omega * EPS0 * tissue.dispersion.eps_double_prime(omega);
    let magnitude = sigma.hypot(displacement_admittivity);
    let (conduction, displacement) = if magnitude == 0.0 {
        (0.0, 0.0)
    } else {
        (
            total * sigma / magnitude,
            total * displacement_admittivity / magnitude,
        )
    };
    Ok(CurrentDensity {
        total,
        conduction,
        displacement,
    })
}

/// `σ/(ωε₀ε″)` for one set of dispersion parameters.
pub fn conduction_ratio(p: &DispersionParams, omega: f64) -> f64 {
    let sigma = p.conductivity(omega);
    if sigma == 0.0 {
        return 0.0;
    }
    sigma / (omega * EPS0 * p.eps_double_prime(omega))
}

/// Highest frequency at which conduction dominates in `p`, if it stops
/// dominating at all.
///
/// `ω·ε″(ω)` grows monotonically with ω, so the ratio falls monotonically
/// and crosses 1 at most once. Returns `Some(0.0)` for a lossless tissue
/// and `None` when the ratio stays above 1 at every frequency.
pub fn conduction_limit_hz(p: &DispersionParams) -> Option<f64> {
    let sigma = p.conductivity(0.0);
    if sigma == 0.0 {
        return Some(0.0);
    }
    // High-frequency limit of ω·ε″ is (ε_s − ε_∞)/τ.
    if sigma >= EPS0 * (p.eps_s - p.eps_inf) / p.tau_s {
        return None;
    }
    let ratio_at = |f: f64| conduction_ratio(p, 2.0 * PI * f);
    let (mut lo, mut hi) = (1e-3_f64, 1e3_f64);
    while ratio_at(lo) <= 1.0 {
        lo /= 1e3;
    }
    while ratio_at(hi) > 1.0 {
        hi *= 1e3;
    }
    for _ in 0..200 {
        let mid = (lo * hi).sqrt();
        if ratio_at(mid) > 1.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi / lo - 1.0 < 1e-12 {
            break;
        }
    }
    Some(lo)
}

/// Conduction-dominance summary of a tissue table at one frequency.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConductionDominance {
    pub frequency_hz: f64,
    /// `σ/(ωε₀ε″)` per tissue at `frequency_hz`.
    pub ratios: Vec<(TissueName, f64)>,
    /// Largest frequency, no higher than [`CONDUCTION_CEILING_HZ`], at which
    /// every tissue is conduction dominated. `None` if no such frequency
    /// exists (a lossless tissue is present).
    pub max_frequency_hz: Option<f64>,
}

pub fn conduction_dominance(table: &TissueTable, freq_hz: f64) -> Result<ConductionDominance> {
    if !(freq_hz > 0.0) {
        return Err(Error::Domain(format!(
            "frequency must be > 0, got {freq_hz}"
        )));
    }
    let omega = 2.0 * PI * freq_hz;
    let mut ratios = Vec::with_capacity(table.len());
    let mut cap = Some(CONDUCTION_CEILING_HZ);
    for t in table.iter() {
        let p = t.dispersion();
        ratios.push((t.name.clone(), conduction_ratio(&p, omega)));
        cap = match conduction_limit_hz(&p) {
            Some(0.0) => None,
            Some(l) => cap.map(|c| c.min(l)),
            None => cap,
        };
    }
    Ok(ConductionDominance {
        frequency_hz: freq_hz,
        ratios,
        max_frequency_hz: cap,
    })
}

/// Outcome of a safety evaluation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "verdict", content = "reasons", rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail(Vec<String>),
}

impl Verdict {
    pub fn passed(&self) -> bool {
        matches!(self, Verdict::Pass)
    }
}

/// Numbers and verdict for one transmitter configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SafetyReport {
    pub frequency_hz: f64,
    pub drive_current_a: f64,
    pub contact_current_a: f64,
    pub contact_density_a_per_m2: f64,
    pub displacement_fraction: f64,
    pub limits: SafetyLimits,
    pub conduction: ConductionDominance,
    pub low_frequency_flag: bool,
    pub verdict: Verdict,
}

impl SafetyReport {
    /// Verdict implied by the numeric fields.
    pub fn derive_verdict(&self) -> Verdict {
        let mut reasons = Vec::new();
        if !within_limit(self.contact_current_a, self.limits.contact_current_a) {
            reasons.push(format!(
                "contact current {:.4e} A exceeds {:.4e} A",
                self.contact_current_a, self.limits.contact_current_a
            ));
        }
        if !within_limit(self.contact_density_a_per_m2, self.limits.density_a_per_m2) {
            reasons.push(format!(
                "contact density {:.4e} A/m² exceeds {:.4e} A/m²",
                self.contact_density_a_per_m2, self.limits.density_a_per_m2
            ));
        }
        if self.low_frequency_flag {
            reasons.push(format!(
                "frequency {} Hz is at or below {LOW_FREQUENCY_FLAG_HZ} Hz",
                self.frequency_hz
            ));
        }
        if self.frequency_hz > self.limits.max_operating_hz {
            reasons.push(format!(
                "frequency {} Hz exceeds the operating cap {} Hz",
                self.frequency_hz, self.limits.max_operating_hz
            ));
        }
        if reasons.is_empty() {
            Verdict::Pass
        } else {
            Verdict::Fail(reasons)
        }
    }

    /// Operating cap: the configured maximum, lowered to the
    /// conduction-dominance limit when that is smaller.
    pub fn operating_cap_hz(&self) -> Option<f64> {
        self.conduction
            .max_frequency_hz
            .map(|c| c.min(self.limits.max_operating_hz))
    }
}

/// Solves the network driven with `drive_current_a` and checks it.
#[allow(clippy::too_many_arguments)]
pub fn evaluate(
    table: &TissueTable,
    stack: &[TissueLayer],
    geom: &ChannelGeometry,
    elec: &ElectrodeConfig,
    freq_hz: f64,
    drive_current_a: f64,
    limits: &SafetyLimits,
) -> Result<SafetyReport> {
    limits.validate()?;
    let omega = 2.0 * PI * freq_hz;
    let base = build_network(stack, geom, elec, omega)?;
    let network = base.with_source(
        base.source.inject,
        base.source.reference,
        Complex64::new(drive_current_a, 0.0),
    );
    let voltages = solve_network(&network)?;
    let currents = branch_currents(&network, &voltages);
    let (contact, _) = contact_check(&currents, limits.contact_current_a);
    let tx_tissue = stack
        .iter()
        .find(|l| l.name == geom.tx_layer)
        .ok_or_else(|| {
            Error::Config(format!(
                "transmitter layer `{}` is not in the stack",
                geom.tx_layer
            ))
        })?;
    let density = current_density(contact, tx_tissue, elec, omega)?;
    let mut report = SafetyReport {
        frequency_hz: freq_hz,
        drive_current_a,
        contact_current_a: contact,
        contact_density_a_per_m2: density.total,
        displacement_fraction: density.displacement_fraction(),
        limits: *limits,
        conduction: conduction_dominance(table, freq_hz)?,
        low_frequency_flag: freq_hz <= LOW_FREQUENCY_FLAG_HZ,
        verdict: Verdict::Pass,
    };
    report.verdict = report.derive_verdict();
    Ok(report)
}

/// Combined density of several transmitters active at once, assuming their
/// contributions add in magnitude.
pub fn aggregate_density(reports: &[SafetyReport]) -> f64 {
    reports.iter().map(|r| r.contact_density_a_per_m2).sum()
}

/// Whether the summed density of simultaneously active transmitters stays
/// within `limit` A/m².
pub fn aggregate_within_limit(reports: &[SafetyReport], limit: f64) -> bool {
    within_limit(aggregate_density(reports), limit)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tissue::TissueTable;

    fn setup() -> (TissueTable, Vec<TissueLayer>) {
        let t = TissueTable::human_forearm();
        let stack = t
            .iter()
            .map(|p| p.layer(p.thickness_mm * 1e-3).unwrap())
            .collect();
        (t, stack)
    }

    fn report(drive: f64, freq: f64) -> SafetyReport {
        let (t, stack) = setup();
        evaluate(
            &t,
            &stack,
            &ChannelGeometry::default(),
            &ElectrodeConfig::default(),
            freq,
            drive,
            &SafetyLimits::default(),
        )
        .unwrap()
    }

    #[test]
    fn all_drive_current_enters_tissue() {
        let r = report(1e-3, 1e5);
        assert!((r.contact_current_a - 1e-3).abs() < 1e-12);
        assert!(r.contact_current_a <= r.limits.contact_current_a * (1.0 + 1e-9));
    }

    #[test]
    fn double_drive_fails_contact_limit() {
        let r = report(2e-3, 1e5);
        assert!(!r.verdict.passed());
        match &r.verdict {
            Verdict::Fail(reasons) => {
                assert!(reasons.iter().any(|s| s.contains("contact current")))
            }
            Verdict::Pass => unreachable!(),
        }
    }

    #[test]
    fn zero_drive_gives_zero_density() {
        let (_, stack) = setup();
        let d =
            current_density(0.0, &stack[0], &ElectrodeConfig::default(), 2.0 * PI * 1e5).unwrap();
        assert_eq!(d.total, 0.0);
        assert_eq!(d.displacement_fraction(), 0.0);
    }

    #[test]
    fn zero_area_is_domain_error() {
        let (_, stack) = setup();
        let e = ElectrodeConfig {
            a_e: 0.0,
            ..ElectrodeConfig::default()
        };
        assert!(matches!(
            current_density(1e-3, &stack[0], &e, 1e6),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn conduction_dominated_tissue_has_small_displacement() {
        let layer = TissueLayer::new(
            TissueName::Custom("saline".into()),
            0.01,
            DispersionParams::new(80.0, 5.0, 1e-11, 1.5).unwrap(),
            0.7,
            1.0,
        )
        .unwrap();
        let d = current_density(1e-3, &layer, &ElectrodeConfig::default(), 2.0 * PI * 1e5).unwrap();
        assert!(d.displacement_fraction() < 0.01);
        assert!((d.conduction.hypot(d.displacement) - d.total).abs() < 1e-12 * d.total);
    }

    #[test]
    fn ratio_falls_with_frequency() {
        let t = TissueTable::human_forearm();
        let lo = conduction_dominance(&t, 1e5).unwrap();
        let hi = conduction_dominance(&t, 1e6).unwrap();
        for ((_, a), (_, b)) in lo.ratios.iter().zip(&hi.ratios) {
            assert!(a > b);
        }
        let cap = lo.max_frequency_hz.unwrap();
        assert!(cap <= CONDUCTION_CEILING_HZ);
    }

    #[test]
    fn lossless_tissue_never_dominates() {
        let p = DispersionParams::new(50.0, 5.0, 1e-7, 0.0).unwrap();
        assert_eq!(conduction_ratio(&p, 1e6), 0.0);
        assert_eq!(conduction_limit_hz(&p), Some(0.0));
    }

    #[test]
    fn conduction_limit_is_the_crossing() {
        let p = DispersionParams::new(8000.0, 4.0, 3e-7, 0.1).unwrap();
        let f = conduction_limit_hz(&p).unwrap();
        let r = conduction_ratio(&p, 2.0 * PI * f);
        assert!((r - 1.0).abs() < 1e-9, "{r}");
    }

    #[test]
    fn low_frequencies_are_flagged() {
        let r = report(1e-3, 50e3);
        assert!(r.low_frequency_flag);
        assert!(!r.verdict.passed());
        assert!(!report(1e-3, 1e5).low_frequency_flag);
    }

    #[test]
    fn verdict_follows_fields() {
        let mut r = report(1e-3, 1e5);
        assert_eq!(r.verdict, r.derive_verdict());
        r.limits.density_a_per_m2 = 1e3;
        assert!(r.derive_verdict().passed());
        r.contact_current_a = 5e-3;
        assert!(!r.derive_verdict().passed());
    }

    #[test]
    fn contact_check_on_custom_circuit() {
        let (_, stack) = setup();
        let net = build_network(
            &stack,
            &ChannelGeometry::default(),
            &ElectrodeConfig::default(),
            2.0 * PI * 1e5,
        )
        .unwrap();
        let net = net.with_source(
            net.source.inject,
            net.source.reference,
            Complex64::new(2e-3, 0.0),
        );
        let v = solve_network(&net).unwrap();
        let (i, ok) = contact_check(&branch_currents(&net, &v), 1e-3);
        assert!((i - 2e-3).abs() < 1e-12);
        assert!(!ok);
    }

    #[test]
    fn aggregate_adds_densities() {
        let a = report(1e-3, 1e5);
        let b = report(0.5e-3, 1e5);
        let sum = aggregate_density(&[a.clone(), b.clone()]);
        assert!((sum - a.contact_density_a_per_m2 - b.contact_density_a_per_m2).abs() < 1e-12);
        assert!(!aggregate_within_limit(&[a, b], 25e-3));
    }
}
