//! Layered tissue-equivalent circuit, nodal assembly and solution.
//!
//! Every tissue layer contributes four nodes, one under each electrode
//! position (`TxP`, `TxN`, `RxP`, `RxN`), joined by six intra-layer
//! branches: the transmitter and receiver direct paths, two longitudinal
//! paths (`TxP–RxP`, `TxN–RxN`) and two cross paths (`TxP–RxN`, `TxN–RxP`).
//! Adjacent layers are linked by four transverse branches, one per
//! position. Four terminal nodes model the electrodes; each is joined to
//! its tissue node in the placement layer through the contact impedance.
//!
//! The transmitter is an ideal current source between its terminals with
//! `TxN` as the reference node. Nodal analysis then solves `M_G·V = I` with
//! `M_G` the admittance matrix with the reference row and column removed.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use log::warn;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::impedance::{
    coupling_impedance, transverse_impedance, ChannelGeometry, ElectrodeConfig, PathImpedanceSet,
    Side,
};
use crate::linalg::{norm2, ComplexMatrix, LuFactors};
use crate::tissue::{TissueLayer, TissueName};

/// Refinement passes after the LU solve, each with a compensated residual.
const REFINEMENT_STEPS: usize = 2;

/// Relative residual accepted from the linear solve.
pub const RESIDUAL_TOLERANCE: f64 = 1e-9;
/// Condition number above which a warning is logged.
pub const CONDITION_WARNING: f64 = 1e12;
/// Source current of the transmitter, in amperes.
pub const DEFAULT_DRIVE_CURRENT: f64 = 1e-3;
/// Frequency range in which the model is considered valid, in Hz.
pub const VALIDITY_BAND_HZ: (f64, f64) = (50e3, 2e6);

/// Electrode position within a transmitter/receiver pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Position {
    TxP,
    TxN,
    RxP,
    RxN,
}

impl Position {
    pub const ALL: [Position; 4] = [Position::TxP, Position::TxN, Position::RxP, Position::RxN];

    fn offset(self) -> usize {
        self as usize
    }

    fn is_tx(self) -> bool {
        matches!(self, Position::TxP | Position::TxN)
    }
}

/// Role of a node in the circuit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum NodeRole {
    Tissue {
        layer: usize,
        position: Position,
    },
    Terminal(Position),
    /// Node of a hand-built circuit outside the layered layout.
    Free,
}

/// What a branch represents.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BranchKind {
    Direct {
        layer: usize,
        side: Side,
    },
    Longitudinal {
        layer: usize,
    },
    Cross {
        layer: usize,
    },
    /// Between `upper` and `upper + 1`.
    Transverse {
        upper: usize,
    },
    Coupling(Position),
    /// Element of a hand-built circuit.
    Free,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Branch {
    pub a: usize,
    pub b: usize,
    pub z: Complex64,
    pub kind: BranchKind,
}

/// Ideal current source driving `current` amperes from `reference` into
/// `inject` through the external circuit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Source {
    pub inject: usize,
    pub reference: usize,
    pub current: Complex64,
}

/// Transmitter/receiver placement on skin or in muscle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ChannelPath {
    #[serde(rename = "S-S")]
    SS,
    #[serde(rename = "S-M")]
    SM,
    #[serde(rename = "M-S")]
    MS,
    #[serde(rename = "M-M")]
    MM,
}

impl ChannelPath {
    pub const ALL: [ChannelPath; 4] = [
        ChannelPath::SS,
        ChannelPath::SM,
        ChannelPath::MS,
        ChannelPath::MM,
    ];

    pub fn tx_layer(self) -> TissueName {
        match self {
            ChannelPath::SS | ChannelPath::SM => TissueName::Skin,
            ChannelPath::MS | ChannelPath::MM => TissueName::Muscle,
        }
    }

    pub fn rx_layer(self) -> TissueName {
        match self {
            ChannelPath::SS | ChannelPath::MS => TissueName::Skin,
            ChannelPath::SM | ChannelPath::MM => TissueName::Muscle,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            ChannelPath::SS => "S-S",
            ChannelPath::SM => "S-M",
            ChannelPath::MS => "M-S",
            ChannelPath::MM => "M-M",
        }
    }

    /// Geometry with this path's placement layers.
    pub fn place(self, geom: &ChannelGeometry) -> ChannelGeometry {
        ChannelGeometry {
            tx_layer: self.tx_layer(),
            rx_layer: self.rx_layer(),
            ..geom.clone()
        }
    }
}

impl fmt::Display for ChannelPath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for ChannelPath {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().replace('-', "").as_str() {
            "ss" => Ok(ChannelPath::SS),
            "sm" => Ok(ChannelPath::SM),
            "ms" => Ok(ChannelPath::MS),
            "mm" => Ok(ChannelPath::MM),
            _ => Err(Error::validation("path", format!("unknown path `{s}`"))),
        }
    }
}

/// One gain/phase evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GainPoint {
    pub frequency_hz: f64,
    pub gain_db: f64,
    pub phase_deg: f64,
    pub path: Option<ChannelPath>,
}

/// Node/branch graph of the layered circuit at one frequency.
#[derive(Debug, Clone)]
pub struct TecNetwork {
    pub nodes: Vec<NodeRole>,
    pub branches: Vec<Branch>,
    pub source: Source,
    /// Receiver terminals `(positive, negative)`.
    pub probe: (usize, usize),
    n_layers: usize,
}

impl TecNetwork {
    /// Arbitrary circuit over `n_nodes` free nodes.
    pub fn custom(
        n_nodes: usize,
        branches: Vec<Branch>,
        source: Source,
        probe: (usize, usize),
    ) -> Result<Self> {
        for br in &branches {
            if br.a >= n_nodes || br.b >= n_nodes || br.a == br.b {
                return Err(Error::Config(format!(
                    "branch {}-{} is invalid for {n_nodes} nodes",
                    br.a, br.b
                )));
            }
        }
        if source.inject >= n_nodes || source.reference >= n_nodes {
            return Err(Error::Config("source node out of range".into()));
        }
        if probe.0 >= n_nodes || probe.1 >= n_nodes {
            return Err(Error::Config("probe node out of range".into()));
        }
        Ok(Self {
            nodes: vec![NodeRole::Free; n_nodes],
            branches,
            source,
            probe,
            n_layers: 0,
        })
    }

    pub fn n_layers(&self) -> usize {
        self.n_layers
    }

    pub fn tissue_node(&self, layer: usize, position: Position) -> usize {
        4 * layer + position.offset()
    }

    pub fn terminal_node(&self, position: Position) -> usize {
        4 * self.n_layers + position.offset()
    }

    /// Same network driven between a different node pair.
    pub fn with_source(&self, inject: usize, reference: usize, current: Complex64) -> Self {
        Self {
            source: Source {
                inject,
                reference,
                current,
            },
            ..self.clone()
        }
    }

    pub fn with_probe(&self, positive: usize, negative: usize) -> Self {
        Self {
            probe: (positive, negative),
            ..self.clone()
        }
    }

    /// Number of connected components; 1 for a valid network.
    pub fn components(&self) -> usize {
        let n = self.nodes.len();
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(p: &mut [usize], mut x: usize) -> usize {
            while p[x] != x {
                p[x] = p[p[x]];
                x = p[x];
            }
            x
        }
        for br in &self.branches {
            let (ra, rb) = (find(&mut parent, br.a), find(&mut parent, br.b));
            if ra != rb {
                parent[ra] = rb;
            }
        }
        (0..n).filter(|&i| find(&mut parent, i) == i).count()
    }
}

/// Builds the circuit for a layer stack (top to bottom) at angular
/// frequency `omega`.
pub fn build_network(
    stack: &[TissueLayer],
    geom: &ChannelGeometry,
    elec: &ElectrodeConfig,
    omega: f64,
) -> Result<TecNetwork> {
    if stack.len() < 2 {
        return Err(Error::Config(format!(
            "layer stack needs at least 2 layers, got {}",
            stack.len()
        )));
    }
    geom.validate()?;
    elec.validate()?;
    let find_layer = |name: &TissueName, role: &str| {
        stack
            .iter()
            .position(|l| &l.name == name)
            .ok_or_else(|| Error::Config(format!("{role} layer `{name}` is not in the stack")))
    };
    let tx = find_layer(&geom.tx_layer, "transmitter")?;
    let rx = find_layer(&geom.rx_layer, "receiver")?;

    let n = stack.len();
    let mut nodes = Vec::with_capacity(4 * n + 4);
    for layer in 0..n {
        for position in Position::ALL {
            nodes.push(NodeRole::Tissue { layer, position });
        }
    }
    for position in Position::ALL {
        nodes.push(NodeRole::Terminal(position));
    }
    let tissue = |layer: usize, p: Position| 4 * layer + p.offset();
    let terminal = |p: Position| 4 * n + p.offset();

    use Position::*;
    let mut branches = Vec::with_capacity(10 * n);
    for (i, layer) in stack.iter().enumerate() {
        let z = PathImpedanceSet::evaluate(layer, geom, elec, omega)?;
        let mut push = |a, b, z, kind| {
            branches.push(Branch {
                a: tissue(i, a),
                b: tissue(i, b),
                z,
                kind,
            })
        };
        push(
            TxP,
            TxN,
            z.z_d_tx,
            BranchKind::Direct {
                layer: i,
                side: Side::Tx,
            },
        );
        push(
            RxP,
            RxN,
            z.z_d_rx,
            BranchKind::Direct {
                layer: i,
                side: Side::Rx,
            },
        );
        push(TxP, RxP, z.z_l, BranchKind::Longitudinal { layer: i });
        push(TxN, RxN, z.z_l, BranchKind::Longitudinal { layer: i });
        push(TxP, RxN, z.z_c, BranchKind::Cross { layer: i });
        push(TxN, RxP, z.z_c, BranchKind::Cross { layer: i });
    }
    for (i, pair) in stack.windows(2).enumerate() {
        let z = transverse_impedance(&pair[0], &pair[1], elec, omega)?;
        for p in Position::ALL {
            branches.push(Branch {
                a: tissue(i, p),
                b: tissue(i + 1, p),
                z,
                kind: BranchKind::Transverse { upper: i },
            });
        }
    }
    let z_co = coupling_impedance(elec, omega)?;
    for p in Position::ALL {
        let layer = if p.is_tx() { tx } else { rx };
        branches.push(Branch {
            a: terminal(p),
            b: tissue(layer, p),
            z: z_co,
            kind: BranchKind::Coupling(p),
        });
    }

    Ok(TecNetwork {
        nodes,
        branches,
        source: Source {
            inject: terminal(TxP),
            reference: terminal(TxN),
            current: Complex64::new(DEFAULT_DRIVE_CURRENT, 0.0),
        },
        probe: (terminal(RxP), terminal(RxN)),
        n_layers: n,
    })
}

/// Grounded nodal equations of a network.
#[derive(Debug, Clone)]
pub struct NodalSystem {
    /// Full admittance matrix before the reference node is removed.
    pub full: ComplexMatrix,
    /// `M_G`: `full` without the reference row and column.
    pub m_g: ComplexMatrix,
    /// Injected current per unknown.
    pub i_vec: Vec<Complex64>,
    /// Node removed as the voltage reference.
    pub reference: usize,
    /// Node id of each unknown.
    pub unknowns: Vec<usize>,
}

/// Stamps every branch admittance into the nodal matrix and grounds the
/// source reference node.
pub fn assemble(network: &TecNetwork) -> Result<NodalSystem> {
    let n = network.nodes.len();
    let mut full = ComplexMatrix::zeros(n, n);
    for br in &network.branches {
        if br.z.norm() == 0.0 || !br.z.is_finite() {
            return Err(Error::Singular(format!(
                "branch {:?} between nodes {} and {} has impedance {}",
                br.kind, br.a, br.b, br.z
            )));
        }
        let y = 1.0 / br.z;
        full.add_at(br.a, br.a, y);
        full.add_at(br.b, br.b, y);
        full.add_at(br.a, br.b, -y);
        full.add_at(br.b, br.a, -y);
    }
    let reference = network.source.reference;
    let unknowns: Vec<usize> = (0..n).filter(|&i| i != reference).collect();
    let mut i_vec = vec![Complex64::new(0.0, 0.0); unknowns.len()];
    if network.source.inject != reference {
        let row = unknowns
            .iter()
            .position(|&u| u == network.source.inject)
            .expect("inject node is an unknown");
        i_vec[row] = network.source.current;
    }
    Ok(NodalSystem {
        m_g: full.without_row_col(reference),
        full,
        i_vec,
        reference,
        unknowns,
    })
}

/// Complex node voltages, indexed by node id; the reference node is 0 V.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeVoltages(pub Vec<Complex64>);

impl NodeVoltages {
    pub fn between(&self, a: usize, b: usize) -> Complex64 {
        self.0[a] - self.0[b]
    }
}

/// Solves the grounded system by LU with partial pivoting.
pub fn solve(system: &NodalSystem) -> Result<NodeVoltages> {
    let lu = LuFactors::factor(&system.m_g)?;
    let mut x = lu.solve(&system.i_vec);
    for _ in 0..REFINEMENT_STEPS {
        let r = system.m_g.residual_compensated(&x, &system.i_vec);
        for (xi, di) in x.iter_mut().zip(lu.solve(&r)) {
            *xi += di;
        }
    }

    let cond = lu.condition_one(&system.m_g);
    if cond > CONDITION_WARNING {
        warn!("nodal matrix is ill-conditioned (cond_1 = {cond:.3e})");
    }
    let rhs_norm = norm2(&system.i_vec);
    if rhs_norm > 0.0 {
        let r: Vec<Complex64> = system
            .m_g
            .mul_vec(&x)
            .iter()
            .zip(&system.i_vec)
            .map(|(a, b)| a - b)
            .collect();
        let rel = norm2(&r) / rhs_norm;
        if !(rel <= RESIDUAL_TOLERANCE) {
            return Err(Error::Singular(format!(
                "solve residual {rel:.3e} exceeds {RESIDUAL_TOLERANCE:e} (cond_1 = {cond:.3e})"
            )));
        }
    }

    let mut v = vec![Complex64::new(0.0, 0.0); system.full.rows()];
    for (value, &node) in x.iter().zip(&system.unknowns) {
        v[node] = *value;
    }
    Ok(NodeVoltages(v))
}

/// Current through each branch, positive from `a` to `b`.
pub fn branch_currents(network: &TecNetwork, voltages: &NodeVoltages) -> Vec<(Branch, Complex64)> {
    network
        .branches
        .iter()
        .map(|br| (*br, voltages.between(br.a, br.b) / br.z))
        .collect()
}

/// Net current leaving `node` through its branches.
pub fn net_branch_current(currents: &[(Branch, Complex64)], node: usize) -> Complex64 {
    currents
        .iter()
        .map(|(br, i)| {
            if br.a == node {
                *i
            } else if br.b == node {
                -*i
            } else {
                Complex64::new(0.0, 0.0)
            }
        })
        .sum()
}

/// Solves a network and returns its voltages.
pub fn solve_network(network: &TecNetwork) -> Result<NodeVoltages> {
    solve(&assemble(network)?)
}

/// Ratio of the probe voltage to the drive voltage of a solved network.
pub fn voltage_transfer(network: &TecNetwork, v: &NodeVoltages) -> Complex64 {
    let v_o = v.between(network.probe.0, network.probe.1);
    let v_i = v.between(network.source.inject, network.source.reference);
    v_o / v_i
}

/// Gain in dB and phase in degrees of a voltage transfer ratio.
///
/// The phase is the principal value of `arctan(Im/Re)`, which does not
/// depend on the polarity with which the receiver pair is connected; it
/// lies in (−90°, 90°].
pub fn gain_and_phase(h: Complex64) -> (f64, f64) {
    let gain_db = 20.0 * h.norm().log10();
    let phase = if h.re == 0.0 {
        90.0
    } else {
        (h.im / h.re).atan().to_degrees()
    };
    let phase = if phase <= -90.0 { phase + 180.0 } else { phase };
    (gain_db, phase)
}

/// Channel gain of the layered model at `freq_hz`.
pub fn channel_gain(
    stack: &[TissueLayer],
    geom: &ChannelGeometry,
    elec: &ElectrodeConfig,
    freq_hz: f64,
) -> Result<GainPoint> {
    if !(freq_hz > 0.0) || !freq_hz.is_finite() {
        return Err(Error::Domain(format!(
            "frequency must be > 0, got {freq_hz}"
        )));
    }
    if freq_hz < VALIDITY_BAND_HZ.0 || freq_hz > VALIDITY_BAND_HZ.1 {
        warn!(
            "{freq_hz} Hz is outside the model validity band [{}, {}] Hz",
            VALIDITY_BAND_HZ.0, VALIDITY_BAND_HZ.1
        );
    }
    let network = build_network(stack, geom, elec, 2.0 * PI * freq_hz)?;
    let v = solve_network(&network)?;
    let (gain_db, phase_deg) = gain_and_phase(voltage_transfer(&network, &v));
    Ok(GainPoint {
        frequency_hz: freq_hz,
        gain_db,
        phase_deg,
        path: path_of(geom),
    })
}

fn path_of(geom: &ChannelGeometry) -> Option<ChannelPath> {
    ChannelPath::ALL
        .into_iter()
        .find(|p| p.tx_layer() == geom.tx_layer && p.rx_layer() == geom.rx_layer)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tissue::TissueTable;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn branch(a: usize, b: usize, z: Complex64) -> Branch {
        Branch {
            a,
            b,
            z,
            kind: BranchKind::Free,
        }
    }

    fn human_stack() -> Vec<TissueLayer> {
        let t = TissueTable::human_forearm();
        t.iter()
            .map(|p| p.layer(p.thickness_mm * 1e-3).unwrap())
            .collect()
    }

    fn w(f: f64) -> f64 {
        2.0 * PI * f
    }

    #[test]
    fn human_network_shape() {
        let stack = human_stack();
        let net = build_network(
            &stack,
            &ChannelGeometry::default(),
            &ElectrodeConfig::default(),
            w(1e5),
        )
        .unwrap();
        assert_eq!(net.nodes.len(), 20);
        assert_eq!(net.branches.len(), 6 * 4 + 4 * 3 + 4);
        assert_eq!(net.components(), 1);
        let per_layer = |l: usize| {
            net.branches
                .iter()
                .filter(|b| match b.kind {
                    BranchKind::Direct { layer, .. }
                    | BranchKind::Longitudinal { layer }
                    | BranchKind::Cross { layer } => layer == l,
                    _ => false,
                })
                .count()
        };
        assert!((0..4).all(|l| per_layer(l) == 6));
        let transverse = net
            .branches
            .iter()
            .filter(|b| matches!(b.kind, BranchKind::Transverse { .. }))
            .count();
        assert_eq!(transverse, 12);
        // Bone is the last layer: nothing below it.
        assert!(net
            .branches
            .iter()
            .all(|b| !matches!(b.kind, BranchKind::Transverse { upper: 3 })));
        assert_eq!(net.source.reference, net.terminal_node(Position::TxN));
    }

    #[test]
    fn porcine_network_shape() {
        let t = TissueTable::porcine_loin();
        let stack: Vec<_> = t
            .iter()
            .map(|p| p.layer(p.thickness_mm * 1e-3).unwrap())
            .collect();
        let net = build_network(
            &stack,
            &ChannelGeometry::default(),
            &ElectrodeConfig::default(),
            w(1e5),
        )
        .unwrap();
        assert_eq!(net.nodes.len(), 16);
    }

    #[test]
    fn missing_placement_layer_is_config_error() {
        let stack: Vec<_> = human_stack().into_iter().take(2).collect();
        let geom = ChannelGeometry {
            rx_layer: TissueName::Muscle,
            ..ChannelGeometry::default()
        };
        let err = build_network(&stack, &geom, &ElectrodeConfig::default(), w(1e5)).unwrap_err();
        assert!(matches!(err, Error::Config(_)));
        let err = build_network(
            &stack[..1],
            &ChannelGeometry::default(),
            &ElectrodeConfig::default(),
            w(1e5),
        )
        .unwrap_err();
        assert!(matches!(err, Error::Config(_)));
    }

    #[test]
    fn single_branch_grounded_matrix() {
        let z = c(50.0, -20.0);
        let net = TecNetwork::custom(
            2,
            vec![branch(0, 1, z)],
            Source {
                inject: 0,
                reference: 1,
                current: c(1e-3, 0.0),
            },
            (0, 1),
        )
        .unwrap();
        let sys = assemble(&net).unwrap();
        assert_eq!(sys.m_g.rows(), 1);
        assert_eq!(sys.m_g.get(0, 0), 1.0 / z);
    }

    #[test]
    fn zero_impedance_is_singular() {
        let net = TecNetwork::custom(
            2,
            vec![branch(0, 1, c(0.0, 0.0))],
            Source {
                inject: 0,
                reference: 1,
                current: c(1.0, 0.0),
            },
            (0, 1),
        )
        .unwrap();
        assert!(matches!(assemble(&net), Err(Error::Singular(_))));
    }

    #[test]
    fn resistor_divider() {
        // 0 -R- 1 -R- 2(ground), 1 mA into node 0.
        let r = c(100.0, 0.0);
        let net = TecNetwork::custom(
            3,
            vec![branch(0, 1, r), branch(1, 2, r)],
            Source {
                inject: 0,
                reference: 2,
                current: c(1e-3, 0.0),
            },
            (1, 2),
        )
        .unwrap();
        let v = solve_network(&net).unwrap();
        assert!((v.0[1] - c(0.1, 0.0)).norm() < 1e-15);
        for (_, i) in branch_currents(&net, &v) {
            assert!((i - c(1e-3, 0.0)).norm() < 1e-15);
        }
    }

    #[test]
    fn symmetric_square_has_equal_cross_nodes() {
        let z = c(10.0, -3.0);
        let net = TecNetwork::custom(
            4,
            vec![
                branch(0, 1, z),
                branch(1, 2, z),
                branch(2, 3, z),
                branch(3, 0, z),
            ],
            Source {
                inject: 0,
                reference: 2,
                current: c(1.0, 0.0),
            },
            (1, 3),
        )
        .unwrap();
        let v = solve_network(&net).unwrap();
        assert!((v.0[1] - v.0[3]).norm() < 1e-12);
    }

    #[test]
    fn probing_the_drive_gives_zero_db() {
        let stack = human_stack();
        let net = build_network(
            &stack,
            &ChannelGeometry::default(),
            &ElectrodeConfig::default(),
            w(1e5),
        )
        .unwrap();
        let net = net.with_probe(net.source.inject, net.source.reference);
        let v = solve_network(&net).unwrap();
        let (g, p) = gain_and_phase(voltage_transfer(&net, &v));
        assert_eq!(g, 0.0);
        assert_eq!(p, 0.0);
    }

    #[test]
    fn return_path_carries_most_current() {
        let stack = human_stack();
        let net = build_network(
            &stack,
            &ChannelGeometry::default(),
            &ElectrodeConfig::default(),
            w(1e5),
        )
        .unwrap();
        let v = solve_network(&net).unwrap();
        let currents = branch_currents(&net, &v);
        let total = |pred: &dyn Fn(&BranchKind) -> bool| -> f64 {
            currents
                .iter()
                .filter(|(b, _)| pred(&b.kind))
                .map(|(_, i)| i.norm())
                .sum()
        };
        let direct = total(&|k| matches!(k, BranchKind::Direct { side: Side::Tx, .. }));
        let longitudinal = total(&|k| matches!(k, BranchKind::Longitudinal { .. }));
        assert!(direct > longitudinal, "{direct} vs {longitudinal}");
    }

    #[test]
    fn phase_is_polarity_invariant() {
        let h = c(-0.3, 0.1);
        let (g1, p1) = gain_and_phase(h);
        let (g2, p2) = gain_and_phase(-h);
        assert_eq!(g1, g2);
        assert!((p1 - p2).abs() < 1e-12);
        assert!(p1 > -90.0 && p1 <= 90.0);
        assert_eq!(gain_and_phase(c(0.0, 2.0)).1, 90.0);
    }

    #[test]
    fn path_labels_round_trip() {
        for p in ChannelPath::ALL {
            assert_eq!(p.label().parse::<ChannelPath>().unwrap(), p);
            assert_eq!(
                p.to_string()
                    .to_lowercase()
                    .replace('-', "")
                    .parse::<ChannelPath>()
                    .unwrap(),
                p
            );
        }
        assert!("xx".parse::<ChannelPath>().is_err());
    }

    #[test]
    fn channel_gain_rejects_non_positive_frequency() {
        let stack = human_stack();
        let r = channel_gain(
            &stack,
            &ChannelGeometry::default(),
            &ElectrodeConfig::default(),
            0.0,
        );
        assert!(matches!(r, Err(Error::Domain(_))));
    }
}
