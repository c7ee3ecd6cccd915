use qpoly::generate::{self, haar_random_pure};
use qpoly::measures::Bound;
use qpoly::polygamy::*;
use qpoly::{DensityOperator, OptimizerConfig, StateVector, SystemLayout, Verdict};

fn h(p: f64) -> f64 {
    -p * p.log2() - (1.0 - p) * (1.0 - p).log2()
}

fn chains(psi: &StateVector) -> (PolygamyReport, PolygamyReport) {
    let cfg = OptimizerConfig::default();
    let opts = ChainOptions::default();
    (
        strong_polygamy_entanglement(psi, "A", &cfg, &opts).unwrap(),
        strong_polygamy_discord(psi, "A", &cfg, &opts).unwrap(),
    )
}

#[test]
fn ghz4_chain_values() {
    // every marginal rho_AX is an equal mixture of |0..0> and |1..1>, EoA = 1
    let (e, d) = chains(&generate::ghz(4).unwrap());
    assert!((e.lhs - 1.0).abs() < 2e-3);
    assert!((e.middle - 2.0).abs() < 2e-3);
    assert!((e.rhs.unwrap() - 3.0).abs() < 2e-3);
    assert_eq!(e.verdict(), Verdict::Pass);
    assert_eq!(e.per_subset.len(), 6);
    assert_eq!(e.per_single.len(), 3);
    assert!((d.lhs - 1.0).abs() < 2e-3 && (d.middle - 2.0).abs() < 2e-3);
    assert_eq!(d.rhs, None);
    assert_eq!(d.verdict(), Verdict::Pass);
}

#[test]
fn ghz3_middle_equals_rhs() {
    let (e, _) = chains(&generate::ghz(3).unwrap());
    assert_eq!(e.normalization, 1.0);
    assert!((e.middle - 2.0).abs() < 2e-3);
    assert_eq!(e.middle, e.rhs.unwrap());
}

#[test]
fn product_chain_is_zero() {
    let (e, d) = chains(&generate::product_zero(4).unwrap());
    for v in [e.lhs, e.middle, e.rhs.unwrap(), d.lhs, d.middle] {
        assert!(v.abs() < 1e-9);
    }
    assert_eq!(e.verdict(), Verdict::Pass);
    assert_eq!(d.verdict(), Verdict::Pass);
}

#[test]
fn w4_chain_passes() {
    let (e, d) = chains(&generate::w_state(4).unwrap());
    assert!((e.lhs - h(0.25)).abs() < 1e-12);
    assert_eq!(e.lhs_bound, Bound::Exact);
    assert_eq!(e.verdict(), Verdict::Pass);
    assert_eq!(d.verdict(), Verdict::Pass);
    assert!((e.middle - e.recomputed_middle()).abs() < 1e-15);
}

#[test]
fn larger_budget_never_lowers_the_chain() {
    let psi = haar_random_pure(SystemLayout::qubits(4).unwrap(), 42);
    let opts = ChainOptions {
        escalate: false,
        ..ChainOptions::default()
    };
    let base = OptimizerConfig {
        restarts: 2,
        max_evals_per_restart: 2_000,
        ..OptimizerConfig::default()
    };
    let lo = strong_polygamy_entanglement(&psi, "A", &base, &opts).unwrap();
    let hi = strong_polygamy_entanglement(&psi, "A", &base.escalated(4), &opts).unwrap();
    assert!(hi.middle >= lo.middle);
    assert!(hi.rhs.unwrap() >= lo.rhs.unwrap());
    for (a, b) in lo.per_subset.iter().zip(&hi.per_subset) {
        assert!(b.value.value >= a.value.value, "{:?}", a.subset);
    }
}

#[test]
fn other_focus_parties() {
    let psi = haar_random_pure(SystemLayout::with_dims(&[2, 3, 2]).unwrap(), 3);
    let cfg = OptimizerConfig::default();
    let r = strong_polygamy_entanglement(&psi, "B", &cfg, &ChainOptions::default()).unwrap();
    assert_eq!(r.focus, "B");
    assert_eq!(
        r.per_single
            .iter()
            .map(|s| s.subset.clone())
            .collect::<Vec<_>>(),
        vec![vec!["A"], vec!["C"]]
    );
    assert_eq!(r.verdict(), Verdict::Pass);
}

#[test]
fn bad_inputs() {
    let cfg = OptimizerConfig::default();
    let opts = ChainOptions::default();
    assert!(strong_polygamy_entanglement(&generate::bell(), "A", &cfg, &opts).is_err());
    assert!(strong_polygamy_entanglement(&generate::ghz(3).unwrap(), "Z", &cfg, &opts).is_err());
    assert!(strong_polygamy_discord(&generate::ghz(3).unwrap(), "Z", &cfg, &opts).is_err());
}

#[test]
fn mixed_chain_is_never_certified_as_failing() {
    let ghz = generate::ghz(3).unwrap().to_density();
    let noise = DensityOperator::maximally_mixed(SystemLayout::qubits(3).unwrap());
    let mut m = ghz.matrix().scale(0.8);
    m += noise.matrix().scale(0.2);
    let rho = DensityOperator::new(ghz.layout().clone(), m).unwrap();
    let r = strong_polygamy_entanglement_mixed(
        &rho,
        "A",
        &OptimizerConfig::default(),
        &ChainOptions::default(),
    )
    .unwrap();
    assert_eq!(r.lhs_bound, Bound::Lower);
    assert_ne!(r.verdict(), Verdict::Fail);
    assert!(r.lhs <= 1.0 + 1e-9);
}

#[test]
fn identities_hold_on_random_states() {
    let cfg = OptimizerConfig::default();
    for (dims, seed) in [
        (vec![2, 2, 2], 1u64),
        (vec![2, 2, 2], 2),
        (vec![2, 3, 2], 3),
        (vec![2, 2, 2, 2], 4),
    ] {
        let psi = haar_random_pure(SystemLayout::with_dims(&dims).unwrap(), seed);
        let checks = identity_suite(&psi, "A", &cfg).unwrap();
        let n = dims.len() - 1;
        // 6 global checks + 3 per subset + the subset sum
        assert_eq!(checks.len(), 6 + 3 * ((1 << n) - 2) + 1);
        for c in &checks {
            assert!(c.pass, "{dims:?} {}: residual {:e}", c.name, c.residual);
        }
    }
}
