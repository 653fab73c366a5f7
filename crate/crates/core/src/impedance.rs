//! Complex impedance of the galvanic current paths through one tissue layer,
//! of the transverse paths between adjacent layers, and of the
//! electrode–tissue contact.
//!
//! Every tissue path uses the same cell admittance evaluated with two
//! geometry factors, `M1` (cross-section over length of the conduction path)
//! and `M2` (the capacitive factor). The paths differ only in how the
//! factors are formed:
//!
//! | path         | `M1`                          | `M2`      |
//! |--------------|-------------------------------|-----------|
//! | direct       | `E_L·T / E_S`                 | `T`       |
//! | longitudinal | `E_L·T / √(D² + Δℓ²)`         | `T`       |
//! | cross        | `√2·E_L·T / √(D² + E_ST²)`    | `T`       |
//! | transverse   | see [`transverse_impedance`]  |           |

use std::f64::consts::{PI, SQRT_2};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tissue::{TissueLayer, TissueName, EPS0};

/// Square electrode and its contact model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ElectrodeConfig {
    /// Side of the square electrode in metres.
    pub e_l: f64,
    /// Contact area in m².
    pub a_e: f64,
    /// Contact resistance constant (Ω·m² at 1 Hz scaled by `f^m`).
    pub k1: f64,
    /// Contact reactance constant, in (0, 1).
    pub k2: f64,
    /// Frequency exponent of the contact resistance.
    pub m: f64,
    /// Frequency exponent of the contact reactance.
    pub m_prime: f64,
}

impl ElectrodeConfig {
    pub const DEFAULT_K1: f64 = 5.623_413e4;
    pub const DEFAULT_K2: f64 = 0.5;
    pub const DEFAULT_M: f64 = -1.15;
    pub const DEFAULT_M_PRIME: f64 = -0.81;

    /// Electrode with side `e_l` metres, contact area `e_l²` and default
    /// contact constants.
    pub fn square(e_l: f64) -> Result<Self> {
        let cfg = Self {
            e_l,
            a_e: e_l * e_l,
            k1: Self::DEFAULT_K1,
            k2: Self::DEFAULT_K2,
            m: Self::DEFAULT_M,
            m_prime: Self::DEFAULT_M_PRIME,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.e_l > 0.0 && self.e_l.is_finite()) {
            return Err(Error::validation(
                "electrode.e_l",
                format!("must be > 0, got {}", self.e_l),
            ));
        }
        if !(self.a_e > 0.0 && self.a_e.is_finite()) {
            return Err(Error::validation(
                "electrode.a_e",
                format!("must be > 0, got {}", self.a_e),
            ));
        }
        if !(self.k1 > 0.0 && self.k1.is_finite()) {
            return Err(Error::validation(
                "electrode.k1",
                format!("must be > 0, got {}", self.k1),
            ));
        }
        if !(self.k2 > 0.0 && self.k2 < 1.0) {
            return Err(Error::validation(
                "electrode.k2",
                format!("must lie in (0, 1), got {}", self.k2),
            ));
        }
        if !self.m.is_finite() || !self.m_prime.is_finite() {
            return Err(Error::validation("electrode.m", "exponents must be finite"));
        }
        Ok(())
    }
}

impl Default for ElectrodeConfig {
    fn default() -> Self {
        Self::square(0.01).expect("default electrode is valid")
    }
}

/// Placement and spacing of the transmitter and receiver electrode pairs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelGeometry {
    /// Transmitter–receiver separation in metres.
    pub d: f64,
    /// Transmitter electrode separation in metres.
    pub e_st: f64,
    /// Receiver electrode separation in metres.
    pub e_sr: f64,
    /// Lateral misalignment of the receiver in metres.
    pub delta_l: f64,
    pub tx_layer: TissueName,
    pub rx_layer: TissueName,
}

impl ChannelGeometry {
    pub fn validate(&self) -> Result<()> {
        for (field, v) in [
            ("geometry.d", self.d),
            ("geometry.e_st", self.e_st),
            ("geometry.e_sr", self.e_sr),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::validation(field, format!("must be > 0, got {v}")));
            }
        }
        if !(self.delta_l >= 0.0 && self.delta_l.is_finite()) {
            return Err(Error::validation(
                "geometry.delta_l",
                format!("must be >= 0, got {}", self.delta_l),
            ));
        }
        Ok(())
    }

    /// Longitudinal path length including misalignment.
    pub fn effective_distance(&self) -> f64 {
        self.d.hypot(self.delta_l)
    }
}

impl Default for ChannelGeometry {
    fn default() -> Self {
        Self {
            d: 0.1,
            e_st: 0.05,
            e_sr: 0.05,
            delta_l: 0.0,
            tx_layer: TissueName::Skin,
            rx_layer: TissueName::Skin,
        }
    }
}

/// Which electrode pair a direct path belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Side {
    Tx,
    Rx,
}

fn check_omega(omega: f64) -> Result<()> {
    if omega > 0.0 && omega.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!(
            "angular frequency must be > 0, got {omega}"
        )))
    }
}

/// Admittance of a tissue block from its cell model.
///
/// The block is an extracellular conductance `F_W·σ·M1` in parallel with
/// the intracellular branch: resistance `κ/(F_W·σ·M1)` in series with the
/// membrane admittance `F_W·jωε·M2`, where `ε = ε₀·ε_r(ω)` carries both
/// Debye loss and conduction. Both terms are first-degree in `(M1, M2)`.
pub fn tissue_admittance(layer: &TissueLayer, m1: f64, m2: f64, omega: f64) -> Result<Complex64> {
    check_omega(omega)?;
    if !(m1 > 0.0 && m1.is_finite()) || !(m2 > 0.0 && m2.is_finite()) {
        return Err(Error::Domain(format!(
            "geometry factors must be > 0, got M1={m1}, M2={m2}"
        )));
    }
    let sigma = layer.dispersion.conductivity(omega);
    let eps = layer.dispersion.complex_permittivity(omega)? * EPS0;
    let j_omega_eps = Complex64::new(0.0, omega) * eps;
    let membrane = j_omega_eps * m2;
    let y = if sigma > 0.0 {
        let ext = sigma * m1;
        ext + 1.0 / (layer.kappa / ext + 1.0 / membrane)
    } else {
        // No conduction: only the membrane path remains.
        membrane
    };
    Ok(y * layer.f_w)
}

fn impedance_of(layer: &TissueLayer, m1: f64, m2: f64, omega: f64) -> Result<Complex64> {
    Ok(1.0 / tissue_admittance(layer, m1, m2, omega)?)
}

/// Return path between the two electrodes of one node.
pub fn direct_impedance(
    layer: &TissueLayer,
    geom: &ChannelGeometry,
    elec: &ElectrodeConfig,
    omega: f64,
    side: Side,
) -> Result<Complex64> {
    let sep = match side {
        Side::Tx => geom.e_st,
        Side::Rx => geom.e_sr,
    };
    let t = layer.thickness;
    impedance_of(layer, elec.e_l * t / sep, t, omega)
}

/// Path between aligned transmitter and receiver electrodes.
pub fn longitudinal_impedance(
    layer: &TissueLayer,
    geom: &ChannelGeometry,
    elec: &ElectrodeConfig,
    omega: f64,
) -> Result<Complex64> {
    let t = layer.thickness;
    impedance_of(layer, elec.e_l * t / geom.effective_distance(), t, omega)
}

/// Diagonal path from a transmitter electrode to the opposite receiver
/// electrode.
pub fn cross_impedance(
    layer: &TissueLayer,
    geom: &ChannelGeometry,
    elec: &ElectrodeConfig,
    omega: f64,
) -> Result<Complex64> {
    let t = layer.thickness;
    impedance_of(
        layer,
        SQRT_2 * elec.e_l * t / geom.d.hypot(geom.e_st),
        t,
        omega,
    )
}

/// Impedance of crossing half of `layer` under an electrode footprint.
fn half_crossing(layer: &TissueLayer, elec: &ElectrodeConfig, omega: f64) -> Result<Complex64> {
    let g = elec.a_e / (0.5 * layer.thickness);
    impedance_of(layer, g, g, omega)
}

/// Inter-layer path below one electrode position.
///
/// Current crosses from the mid-plane of `upper` to the mid-plane of
/// `lower` through the electrode footprint, so the branch is the series sum
/// of a half-thickness crossing of each layer with geometry factor
/// `A_e / (T/2)`. Swapping the layers gives the same value.
pub fn transverse_impedance(
    upper: &TissueLayer,
    lower: &TissueLayer,
    elec: &ElectrodeConfig,
    omega: f64,
) -> Result<Complex64> {
    Ok(half_crossing(upper, elec, omega)? + half_crossing(lower, elec, omega)?)
}

/// Electrode–tissue contact: `Re = K1·f^m/A_e` in parallel with a
/// capacitive reactance `Xe = K2·f^m'/A_e`.
pub fn coupling_impedance(elec: &ElectrodeConfig, omega: f64) -> Result<Complex64> {
    check_omega(omega)?;
    let f = omega / (2.0 * PI);
    let re = Complex64::new(elec.k1 * f.powf(elec.m) / elec.a_e, 0.0);
    let xe = Complex64::new(0.0, -elec.k2 * f.powf(elec.m_prime) / elec.a_e);
    Ok(re * xe / (re + xe))
}

/// Intra-layer path impedances of one layer.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathImpedanceSet {
    pub z_d_tx: Complex64,
    pub z_d_rx: Complex64,
    pub z_l: Complex64,
    pub z_c: Complex64,
}

impl PathImpedanceSet {
    pub fn evaluate(
        layer: &TissueLayer,
        geom: &ChannelGeometry,
        elec: &ElectrodeConfig,
        omega: f64,
    ) -> Result<Self> {
        Ok(Self {
            z_d_tx: direct_impedance(layer, geom, elec, omega, Side::Tx)?,
            z_d_rx: direct_impedance(layer, geom, elec, omega, Side::Rx)?,
            z_l: longitudinal_impedance(layer, geom, elec, omega)?,
            z_c: cross_impedance(layer, geom, elec, omega)?,
        })
    }
}

/// Resistivity-form expressions for single path impedances.
///
/// These are used to document the direction of parameter trends; the
/// network solver never calls them.
pub mod closed_form {
    use num_complex::Complex64;

    use crate::error::{Error, Result};

    /// Inputs shared by the closed-form expressions. Lengths in metres,
    /// `rho` in Ω·m, `eps` the absolute permittivity in F/m.
    #[derive(Debug, Clone, Copy, PartialEq)]
    pub struct ClosedFormParams {
        pub rho: f64,
        pub eps: f64,
        pub omega: f64,
        /// Layer thickness.
        pub t: f64,
        /// Thickness change from the nominal value.
        pub gamma: f64,
        pub d: f64,
        pub e_s: f64,
        pub e_l: f64,
        /// Cross-section used by the longitudinal form.
        pub area: f64,
        pub delta_l: f64,
    }

    #[derive(Debug, Clone, Copy, PartialEq, Eq)]
    pub enum ClosedFormKind {
        Transverse,
        Longitudinal,
        Cross,
        Direct,
    }

    fn nonzero(v: Complex64, what: &str) -> Result<Complex64> {
        if v.norm() == 0.0 || !v.is_finite() {
            Err(Error::Domain(format!("zero denominator in {what}")))
        } else {
            Ok(v)
        }
    }

    pub fn closed_form_impedance(kind: ClosedFormKind, p: &ClosedFormParams) -> Result<Complex64> {
        let j = Complex64::i();
        let we = j * p.omega * p.eps;
        let rho = Complex64::new(p.rho, 0.0);
        match kind {
            ClosedFormKind::Transverse => {
                let den = nonzero(rho * p.e_l * p.e_l * (rho + 2.0 * we), "Z_T")?;
                Ok((p.t + p.gamma) * (rho + we) / den)
            }
            ClosedFormKind::Longitudinal => {
                // Misalignment lengthens the path to √(D² + Δℓ²).
                let d = p.d.hypot(p.delta_l);
                let den = nonzero(p.area * rho * (p.t * rho + 2.0 * we * d), "Z_L")?;
                Ok(d * (p.t * rho + we * d) / den)
            }
            ClosedFormKind::Cross => {
                let s = p.d * p.d + p.e_s * p.e_s;
                let den = nonzero(
                    2.0 * rho * p.e_l * p.t * (p.t * p.t * rho + 2.0 * we * s),
                    "Z_C",
                )?;
                Ok((2.0 * s).sqrt() * (p.t * p.t * rho + we * s) / den)
            }
            ClosedFormKind::Direct => {
                let d2 = p.d * p.d;
                let es2 = p.e_s * p.e_s;
                let den = nonzero(rho * p.e_l * p.d * (d2 * rho + 2.0 * we * es2), "Z_D")?;
                Ok(p.e_s * (d2 * rho + we * es2) / den)
            }
        }
    }
}
