use super::*;
use crate::theta::{average_ratio, ratio_bounds};
use proptest::prelude::*;

fn toy(stats: Statistics, n: usize, e_max: f64) -> SpectralTable {
    let geom = BoxGeometry::new(1, 2.0 * PI, n).unwrap();
    enumerate_spectrum(&geom, &Units::natural(), stats, e_max).unwrap()
}

fn levels(t: &SpectralTable, q: i64) -> Vec<(f64, u64)> {
    t.entries[&DualVector::new(&[q])].iter().map(|l| (l.energy, l.degeneracy)).collect()
}

fn total_variation(a: &MomentumDistribution, b: &MomentumDistribution) -> f64 {
    let mut keys: Vec<DualVector> = a.weights.iter().map(|e| e.0).collect();
    keys.extend(b.weights.iter().map(|e| e.0));
    keys.sort();
    keys.dedup();
    0.5 * keys.iter().map(|k| (a.get(k) - b.get(k)).abs()).collect::<ExactSum>().value()
}

#[test]
fn two_boson_toy_table() {
    let t = toy(Statistics::Bose, 2, 1.0);
    assert_eq!(t.entries.len(), 5);
    assert_eq!(levels(&t, 0), vec![(0.0, 1), (1.0, 1)]);
    assert_eq!(levels(&t, 1), vec![(0.5, 1)]);
    assert_eq!(levels(&t, -1), vec![(0.5, 1)]);
    assert_eq!(levels(&t, 2), vec![(1.0, 1)]);
    assert_eq!(levels(&t, -2), vec![(1.0, 1)]);
}

#[test]
fn two_fermion_and_boltzmann_toy_tables() {
    let f = toy(Statistics::Fermi, 2, 1.0);
    assert_eq!(f.entries.len(), 3);
    assert_eq!(levels(&f, 1), vec![(0.5, 1)]);
    assert_eq!(levels(&f, -1), vec![(0.5, 1)]);
    assert_eq!(levels(&f, 0), vec![(1.0, 1)]);
    let b = toy(Statistics::Boltzmann, 2, 1.0);
    assert_eq!(levels(&b, 0), vec![(0.0, 1), (1.0, 2)]);
    assert_eq!(levels(&b, 1), vec![(0.5, 2)]);
    assert_eq!(levels(&b, 2), vec![(1.0, 1)]);
}

#[test]
fn states_are_ordered_by_energy_then_occupancy() {
    let geom = BoxGeometry::new(1, 2.0 * PI, 2).unwrap();
    let states = enumerate_states(&geom, &Units::natural(), Statistics::Bose, 1.0).unwrap();
    let e: Vec<f64> = states.iter().map(|s| s.energy).collect();
    assert_eq!(e, vec![0.0, 0.5, 0.5, 1.0, 1.0, 1.0]);
    // modes are ordered (|n|², n): 0, -1, 1 ; ties follow that order
    assert_eq!(states[1].momentum, DualVector::new(&[-1]));
    assert_eq!(states[2].momentum, DualVector::new(&[1]));
    assert_eq!(states[3].occupancy, vec![(DualVector::new(&[-1]), 2)]);
}

#[test]
fn guards_and_errors() {
    let geom = BoxGeometry::new(1, 2.0 * PI, 2).unwrap();
    assert!(matches!(
        enumerate_spectrum(&geom, &Units::natural(), Statistics::Fermi, 0.2),
        Err(Error::CutoffTooSmall(_))
    ));
    let big = BoxGeometry::new(3, 2.0 * PI, 12).unwrap();
    assert!(matches!(
        enumerate_spectrum(&big, &Units::natural(), Statistics::Boltzmann, 200.0),
        Err(Error::BlowupGuard { .. })
    ));
    let f = toy(Statistics::Fermi, 2, 1.0);
    let mut no_zero = f.clone();
    no_zero.entries.remove(&DualVector::new(&[0]));
    assert_eq!(epsilon_dispersion(&no_zero), Err(Error::MissingZero));
}

#[test]
fn single_particle_law_is_gibbs() {
    let geom = BoxGeometry::new(1, 3.0, 1).unwrap();
    let th = ThermalParams::natural(0.8).unwrap();
    let e_max = cutoff_for_tail(&geom, &th.units, Statistics::Boltzmann, th.beta, 1e-14).unwrap();
    let t = enumerate_spectrum(&geom, &th.units, Statistics::Boltzmann, e_max).unwrap();
    let nu = nu_distribution(&t, &th).unwrap();
    let eq = energy_quantum(&geom, &th.units);
    let z = crate::theta::theta3(th.beta * eq).unwrap();
    for (q, w) in nu.weights.iter() {
        let expect = (-th.beta * eq * q.norm2() as f64).exp() / z;
        assert!((w - expect).abs() < 1e-13, "{q}: {w} vs {expect}");
    }
    assert!(nu.deficit < 1e-13);
}

#[test]
fn cycle_recursion_matches_enumeration() {
    for stats in Statistics::ALL {
        for (d, n, side, beta) in [(1, 3, 2.0 * PI, 0.7), (1, 4, 5.0, 1.3), (2, 2, 2.0 * PI, 0.9), (2, 3, 4.0, 2.0)] {
            let geom = BoxGeometry::new(d, side, n).unwrap();
            let th = ThermalParams::natural(beta).unwrap();
            let e_max = cutoff_for_tail(&geom, &th.units, stats, beta, 1e-13).unwrap();
            let t = enumerate_spectrum(&geom, &th.units, stats, e_max).unwrap();
            let enumerated = nu_distribution(&t, &th).unwrap();
            let recursive = canonical_distribution(&geom, stats, &th, 1e-14).unwrap();
            let tv = total_variation(&enumerated, &recursive);
            assert!(tv < 1e-10, "{stats:?} d={d} N={n}: TV {tv:e}");
        }
    }
}

#[test]
fn convolution_oracle_matches_recursion() {
    let geom = BoxGeometry::new(2, 3.5, 3).unwrap();
    let th = ThermalParams::natural(0.4).unwrap();
    let a = boltzmann_convolution_oracle(&geom, &th, 1e-14).unwrap();
    let b = canonical_distribution(&geom, Statistics::Boltzmann, &th, 1e-14).unwrap();
    assert!(total_variation(&a, &b) < 1e-12);
    assert!(a.deficit < 1e-13);
}

#[test]
fn fermi_ground_state_occupations() {
    // two fermions at very low temperature occupy 0 and one of ±1
    let geom = BoxGeometry::new(1, 2.0 * PI, 2).unwrap();
    let th = ThermalParams::natural(200.0).unwrap();
    let occ = occupation_expectation(&geom, Statistics::Fermi, &th, 3.0).unwrap();
    let n0 = occ.get(&DualVector::new(&[0]));
    let n1 = occ.get(&DualVector::new(&[1]));
    let nm1 = occ.get(&DualVector::new(&[-1]));
    assert!((n0 - 0.5).abs() < 1e-12 && (n1 - 0.25).abs() < 1e-12 && (nm1 - 0.25).abs() < 1e-12);
}

#[test]
fn occupations_sum_to_one_and_peak_at_zero() {
    let geom = BoxGeometry::new(1, 4.0, 3).unwrap();
    let th = ThermalParams::natural(0.6).unwrap();
    for stats in [Statistics::Bose, Statistics::Boltzmann] {
        let e_max = cutoff_for_tail(&geom, &th.units, stats, th.beta, 1e-12).unwrap();
        let occ = occupation_expectation(&geom, stats, &th, e_max).unwrap();
        assert!((occ.weights.total() + occ.deficit - 1.0).abs() < 1e-11);
        let n0 = occ.get(&DualVector::zero(1));
        assert!(occ.weights.iter().all(|(_, w)| *w <= n0 * (1.0 + 1e-12)));
    }
}

#[test]
fn argmax_of_log_weight_is_origin_for_bosons() {
    for stats in [Statistics::Bose, Statistics::Boltzmann] {
        let geom = BoxGeometry::new(1, 3.0, 3).unwrap();
        let th = ThermalParams::natural(0.5).unwrap();
        let e_max = cutoff_for_tail(&geom, &th.units, stats, th.beta, 1e-10).unwrap();
        let t = enumerate_spectrum(&geom, &th.units, stats, e_max).unwrap();
        let rep = omega_and_argmax(&t, &th).unwrap();
        assert!(rep.q_max.is_zero());
        assert!(rep.omega.values().all(|&o| o >= 1.0));
    }
}

#[test]
fn boost_relabelling_preserves_partition_sum() {
    let t = toy(Statistics::Bose, 3, 6.0);
    let th = ThermalParams::natural(0.9).unwrap();
    let z0 = partition_functions(&t, &th).unwrap().z;
    let b = boost_table(&t, &DualVector::new(&[2]));
    assert_eq!(partition_functions(&b, &th).unwrap().z.to_bits(), z0.to_bits());
}

#[test]
fn json_round_trip() {
    let t = toy(Statistics::Boltzmann, 3, 4.0);
    let back = SpectralTable::from_json(&t.to_json()).unwrap();
    assert_eq!(back, t);
    assert!(SpectralTable::from_json("{\"format\": 3}").is_err());
}

#[test]
fn average_ratio_agrees_with_partition_ratio() {
    let geom = BoxGeometry::new(1, 5.0, 3).unwrap();
    let th = ThermalParams::natural(0.3).unwrap();
    for stats in Statistics::ALL {
        let e_max = cutoff_for_tail(&geom, &th.units, stats, th.beta, 1e-14).unwrap();
        let t = enumerate_spectrum(&geom, &th.units, stats, e_max).unwrap();
        let pf = partition_functions(&t, &th).unwrap();
        let avg = average_ratio(&t, &th, 1e-15).unwrap();
        let nu = nu_distribution(&t, &th).unwrap();
        let irred_mass: f64 = crate::lattice::irreducible_set(&geom).iter().map(|q| nu.get(q)).sum();
        assert!(((avg - pf.ratio()) / avg).abs() < 1e-11, "{stats:?}");
        assert!(((avg - 1.0 / irred_mass) / avg).abs() < 1e-11, "{stats:?}");
        let (lo, hi) = ratio_bounds(&geom, &th);
        assert!(lo <= avg && avg <= hi);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn table_invariants(d in 1usize..=2, n in 1usize..=3, side in 2.0f64..7.0, beta in 0.3f64..3.0, s in 0usize..3) {
        let stats = Statistics::ALL[s];
        let geom = BoxGeometry::new(d, side, n).unwrap();
        let th = ThermalParams::natural(beta).unwrap();
        let e_max = cutoff_for_tail(&geom, &th.units, stats, beta, 1e-9).unwrap();
        let t = enumerate_spectrum(&geom, &th.units, stats, e_max).unwrap();
        let pf = partition_functions(&t, &th).unwrap();
        prop_assert!(pf.z >= pf.z_irred && pf.z_irred > 0.0);

        let nu = nu_distribution(&t, &th).unwrap();
        prop_assert!(nu.weights.total() <= 1.0 + 1e-15);
        prop_assert!((nu.weights.total() + nu.deficit - 1.0).abs() < 1e-12);
        for (q, w) in nu.weights.iter() {
            prop_assert!((w - nu.get(&-*q)).abs() <= 1e-15 * w.max(1e-300) + 1e-18);
        }
        if stats != Statistics::Fermi {
            let nu0 = nu.get(&DualVector::zero(d));
            prop_assert!(nu.weights.iter().all(|(_, w)| *w <= nu0 * (1.0 + 1e-12)));
        }

        let g = galilean_check(&t);
        prop_assert_eq!(g.mismatched_pairs, 0);
        prop_assert!(g.max_residual < 1e-12);

        let mut prev = 0.0;
        for i in 0..8 {
            let kappa = i as f64 * 0.7;
            let v = gamma_cdf(&nu, kappa);
            prop_assert!(v >= prev);
            prev = v;
        }
    }
}
