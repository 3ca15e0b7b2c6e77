//! End-to-end runs through several modules of the public API.

use std::f64::consts::PI;

use qmomentum::com::{axis_points, com_kernel, macroscopic_wavefunction, psd_check_distribution, velocity_from_phase};
use qmomentum::lattice::irreducible_set;
use qmomentum::measure::{example_family, gamma_limit_report, sigma_l, AtomicMeasure, FamilyKind, FamilyParams};
use qmomentum::spectrum::{
    canonical_distribution, cutoff_for_tail, enumerate_spectrum, gamma_cdf, nu_distribution, partition_functions,
};
use qmomentum::theta::ratio_bounds;
use qmomentum::twofluid::{boost_set_equality_check, max_closed_window, two_fluid_weights};
use qmomentum::{BoxGeometry, DualVector, Statistics, ThermalParams, Units};

#[test]
fn enumeration_and_recursion_give_the_same_kernel() {
    let geom = BoxGeometry::new(1, 5.0, 3).unwrap();
    let th = ThermalParams::natural(0.6).unwrap();
    let e_max = cutoff_for_tail(&geom, &th.units, Statistics::Bose, th.beta, 1e-14).unwrap();
    let table = enumerate_spectrum(&geom, &th.units, Statistics::Bose, e_max).unwrap();
    let a = nu_distribution(&table, &th).unwrap();
    let b = canonical_distribution(&geom, Statistics::Bose, &th, 1e-14).unwrap();
    let xs = axis_points(1, 0.3, 20);
    let fa = com_kernel(&a, &xs).unwrap();
    let fb = com_kernel(&b, &xs).unwrap();
    for (u, v) in fa.values.iter().zip(&fb.values) {
        assert!((u - v).norm() < 1e-11);
    }
    let samples: Vec<DualVector> = (-3..=3).map(|i| DualVector::new(&[i])).collect();
    assert!(psd_check_distribution(&a, &samples, 1e-10).unwrap().pass);
}

#[test]
fn partition_ratio_sits_inside_its_bounds() {
    for stats in Statistics::ALL {
        let geom = BoxGeometry::new(2, 3.0, 2).unwrap();
        let th = ThermalParams::natural(0.7).unwrap();
        let e_max = cutoff_for_tail(&geom, &th.units, stats, th.beta, 1e-13).unwrap();
        let table = enumerate_spectrum(&geom, &th.units, stats, e_max).unwrap();
        let ratio = partition_functions(&table, &th).unwrap().ratio();
        let (lo, hi) = ratio_bounds(&geom, &th);
        assert!(lo <= ratio && ratio <= hi, "{stats:?}: {lo} {ratio} {hi}");
        let dist = nu_distribution(&table, &th).unwrap();
        let irred: f64 = irreducible_set(&geom).iter().map(|q| dist.get(q)).sum();
        assert!((irred * ratio - 1.0).abs() < 1e-10);
    }
}

#[test]
fn boosted_wavefunction_returns_its_velocity() {
    let geom = BoxGeometry::new(1, 8.0, 2).unwrap();
    let units = Units::natural();
    let th = ThermalParams::new(1.0, units).unwrap();
    let dist = canonical_distribution(&geom, Statistics::Boltzmann, &th, 1e-13).unwrap();
    let v = [2.0 * PI / 8.0];
    let xs = axis_points(1, 0.05, 30);
    let psi = macroscopic_wavefunction(&dist, &v, &units, 0.25, &xs, 1e-12).unwrap();
    let got = velocity_from_phase(&psi, &xs, 2, &units).unwrap();
    assert!((got[0] - v[0]).abs() < 1e-9, "{got:?}");
}

#[test]
fn gamma_curve_of_a_gas_reaches_the_captured_mass() {
    let geom = BoxGeometry::new(1, 4.0, 4).unwrap();
    let th = ThermalParams::natural(0.5).unwrap();
    let dist = canonical_distribution(&geom, Statistics::Fermi, &th, 1e-13).unwrap();
    let top = dist.weights.iter().map(|(q, _)| q.max_abs()).max().unwrap();
    let full = gamma_cdf(&dist, top as f64 * geom.dual_spacing());
    assert!((full - dist.weights.total()).abs() < 1e-15);
    assert!(full + dist.deficit >= 1.0 - 1e-12);
}

#[test]
fn superfluid_family_splits_into_its_three_weights() {
    let params = FamilyParams { zero_weight: 0.4, infinity_weight: 0.3, ..Default::default() };
    let fam = example_family(FamilyKind::Superfluid, params).unwrap();
    let kappas: Vec<f64> = std::iter::once(1e-3).chain((1..=32).map(|i| 0.25 * i as f64)).collect();
    let rep = gamma_limit_report(&fam, &[60.0, 120.0, 240.0, 480.0], &kappas).unwrap();
    let w = two_fluid_weights(&rep);
    assert!((w.nu0 - 0.4).abs() < 0.02 && (w.continuous_mass - 0.3).abs() < 0.02 && (w.infinity_mass - 0.3).abs() < 0.02);
    assert!((w.nu0 + w.continuous_mass + w.infinity_mass - 1.0).abs() < 1e-12);

    let mu: AtomicMeasure = fam.measure(120.0).unwrap();
    for n in [1, 4, 16] {
        let sigma = sigma_l(&mu, n);
        let gamma = qmomentum::measure::gamma_l(&mu, 2.0 * PI * n as f64 / 120.0);
        assert!(sigma <= gamma);
    }
}

#[test]
fn boost_identity_on_a_two_dimensional_fermi_gas() {
    let geom = BoxGeometry::new(2, 2.0 * PI, 2).unwrap();
    let table = enumerate_spectrum(&geom, &Units::natural(), Statistics::Fermi, 16.0).unwrap();
    let ks: Vec<DualVector> = [[0, 0], [1, 0], [0, -1], [1, 1]].iter().map(|k| DualVector::new(k)).collect();
    let window = max_closed_window(&table, &ks).unwrap();
    for k in &ks {
        let rep = boost_set_equality_check(&table, k, window).unwrap();
        assert!(rep.pass(), "{k}");
        assert_eq!(rep.identity, k.is_zero());
    }
}
