mod common;

use common::{brute_force_entry, cramer, random_network, rel_err, Lcg};
use num_complex::Complex64;
use tec_core::network::{assemble, solve};

#[test]
fn assembly_matches_brute_force_enumeration() {
    let mut rng = Lcg::new(7);
    for _ in 0..20 {
        let net = random_network(6, &mut rng, true);
        let sys = assemble(&net).unwrap();
        for r in 0..6 {
            for c in 0..6 {
                let expected = brute_force_entry(&net, r, c);
                assert!(
                    rel_err(sys.full.get(r, c), expected) < 1e-12,
                    "entry ({r},{c})"
                );
            }
        }
        assert_eq!(sys.m_g.rows(), 5);
        assert_eq!(sys.unknowns, vec![0, 1, 2, 3, 4]);
    }
}

#[test]
fn solver_matches_cramer_rule() {
    let mut rng = Lcg::new(11);
    for n in 2..=6 {
        for _ in 0..25 {
            let net = random_network(n, &mut rng, false);
            let sys = assemble(&net).unwrap();
            let m: Vec<Vec<Complex64>> = (0..sys.m_g.rows())
                .map(|r| sys.m_g.row(r).to_vec())
                .collect();
            let expected = cramer(&m, &sys.i_vec);
            let v = solve(&sys).unwrap();
            for (k, &node) in sys.unknowns.iter().enumerate() {
                let err = rel_err(v.0[node], expected[k]);
                assert!(err < 1e-9, "n={n} node {node}: {err:e}");
            }
        }
    }
}

#[test]
fn cramer_oracle_on_hand_system() {
    // [[2, 1], [1, 3]] x = [3, 5] → x = [4/5, 7/5]
    let c = |v: f64| Complex64::new(v, 0.0);
    let x = cramer(
        &[vec![c(2.0), c(1.0)], vec![c(1.0), c(3.0)]],
        &[c(3.0), c(5.0)],
    );
    assert!((x[0] - c(0.8)).norm() < 1e-15);
    assert!((x[1] - c(1.4)).norm() < 1e-15);
}
