#![allow(dead_code)]

use std::f64::consts::PI;

use num_complex::Complex64;
use tec_core::network::{Branch, BranchKind, Source, TecNetwork};
use tec_core::sweeps::Scenario;
use tec_core::{ChannelGeometry, ElectrodeConfig, TissueLayer, TissueTable};

pub fn omega(f: f64) -> f64 {
    2.0 * PI * f
}

pub fn stack_of(table: &TissueTable) -> Vec<TissueLayer> {
    table
        .iter()
        .map(|p| p.layer(p.thickness_mm * 1e-3).unwrap())
        .collect()
}

pub fn human_scenario(freq_hz: f64) -> Scenario {
    Scenario {
        stack: stack_of(&TissueTable::human_forearm()),
        geom: ChannelGeometry::default(),
        elec: ElectrodeConfig::default(),
        freq_hz,
    }
}

pub fn porcine_scenario(freq_hz: f64) -> Scenario {
    Scenario {
        stack: stack_of(&TissueTable::porcine_loin()),
        geom: ChannelGeometry::default(),
        elec: ElectrodeConfig::default(),
        freq_hz,
    }
}

/// Small deterministic generator so oracle networks do not depend on the
/// property-testing framework.
pub struct Lcg(u64);

impl Lcg {
    pub fn new(seed: u64) -> Self {
        Self(
            seed.wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407),
        )
    }

    pub fn next_f64(&mut self) -> f64 {
        self.0 = self
            .0
            .wrapping_mul(6364136223846793005)
            .wrapping_add(1442695040888963407);
        ((self.0 >> 11) as f64) / ((1u64 << 53) as f64)
    }

    pub fn range(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.next_f64()
    }
}

/// Connected random network on `n` nodes: a spanning chain plus random
/// chords. Impedances have positive real parts; `resistive` drops the
/// imaginary parts.
pub fn random_network(n: usize, rng: &mut Lcg, resistive: bool) -> TecNetwork {
    let mut branches = Vec::new();
    let z = |rng: &mut Lcg| {
        let re = rng.range(1.0, 1000.0);
        let im = if resistive {
            0.0
        } else {
            rng.range(-500.0, 500.0)
        };
        Complex64::new(re, im)
    };
    for i in 1..n {
        branches.push(Branch {
            a: i - 1,
            b: i,
            z: z(rng),
            kind: BranchKind::Free,
        });
    }
    for a in 0..n {
        for b in (a + 2)..n {
            if rng.next_f64() < 0.5 {
                branches.push(Branch {
                    a,
                    b,
                    z: z(rng),
                    kind: BranchKind::Free,
                });
            }
        }
    }
    // A parallel duplicate exercises accumulation of repeated pairs.
    if n >= 2 {
        branches.push(Branch {
            a: 0,
            b: 1,
            z: z(rng),
            kind: BranchKind::Free,
        });
    }
    let source = Source {
        inject: 0,
        reference: n - 1,
        current: Complex64::new(rng.range(0.1, 2.0), rng.range(-1.0, 1.0)),
    };
    TecNetwork::custom(n, branches, source, (0, n - 1)).unwrap()
}

/// Nodal matrix entry written from the definition: for each node pair,
/// enumerate every branch and add or subtract its admittance.
pub fn brute_force_entry(net: &TecNetwork, r: usize, c: usize) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for br in &net.branches {
        let y = Complex64::new(1.0, 0.0) / br.z;
        if r == c {
            if br.a == r || br.b == r {
                acc += y;
            }
        } else if (br.a == r && br.b == c) || (br.a == c && br.b == r) {
            acc -= y;
        }
    }
    acc
}

/// Determinant by permutation expansion.
pub fn leibniz_det(m: &[Vec<Complex64>]) -> Complex64 {
    let n = m.len();
    let mut perm: Vec<usize> = (0..n).collect();
    let mut total = Complex64::new(0.0, 0.0);
    permute(&mut perm, 0, m, &mut total);
    total
}

fn permute(perm: &mut Vec<usize>, k: usize, m: &[Vec<Complex64>], total: &mut Complex64) {
    let n = perm.len();
    if k == n {
        let mut inversions = 0;
        for i in 0..n {
            for j in (i + 1)..n {
                if perm[i] > perm[j] {
                    inversions += 1;
                }
            }
        }
        let mut prod = Complex64::new(if inversions % 2 == 0 { 1.0 } else { -1.0 }, 0.0);
        for (row, &col) in perm.iter().enumerate() {
            prod *= m[row][col];
        }
        *total += prod;
        return;
    }
    for i in k..n {
        perm.swap(k, i);
        permute(perm, k + 1, m, total);
        perm.swap(k, i);
    }
}

/// Solves `m·x = b` by Cramer's rule.
pub fn cramer(m: &[Vec<Complex64>], b: &[Complex64]) -> Vec<Complex64> {
    let d = leibniz_det(m);
    (0..m.len())
        .map(|col| {
            let replaced: Vec<Vec<Complex64>> = m
                .iter()
                .zip(b)
                .map(|(row, &bv)| {
                    let mut r = row.clone();
                    r[col] = bv;
                    r
                })
                .collect();
            leibniz_det(&replaced) / d
        })
        .collect()
}

pub fn rel_err(a: Complex64, b: Complex64) -> f64 {
    let scale = a.norm().max(b.norm());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).norm() / scale
    }
}
