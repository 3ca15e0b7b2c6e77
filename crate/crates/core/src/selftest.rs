//! A fixed battery touching every module. The text it returns is the
//! determinism fingerprint: it must be byte-identical across runs, thread
//! counts and builds with or without the `parallel` feature.

use std::f64::consts::PI;
use std::fmt::Write;

use crate::asymptotics::{clt_convergence_report, f_estimator_2d_from_distribution, tail_bounds_2d, tail_probability};
use crate::com::{axis_points, com_kernel, macroscopic_wavefunction, psd_check_distribution, velocity_from_phase};
use crate::error::Result;
use crate::export::num;
use crate::fejer::{fejer_central_mass, fejer_l0};
use crate::lattice::{BoxGeometry, DualVector};
use crate::measure::{example_family, gamma_l, gamma_limit_report, sigma_l, AtomicMeasure, FamilyKind, FamilyParams};
use crate::spectrum::{
    boltzmann_convolution_oracle, canonical_distribution, enumerate_spectrum, galilean_check_shifts, nu_distribution,
    partition_functions, Statistics,
};
use crate::theta::{average_ratio, gauss_sum, heat_kernel_fourier, heat_kernel_images, ratio_bounds, ThermalParams};
use crate::twofluid::{boost_set_equality_check, critical_velocity, landau_excitability, max_closed_window, FlowParams, ModelDispersion};
use crate::units::{Units, HELIUM4_LAMBDA_POINT_K};

struct Out(String);

impl Out {
    fn put(&mut self, key: &str, value: f64) {
        writeln!(self.0, "{key} = {}", num(value)).expect("writing to a String");
    }
}

/// Runs the battery and returns its report.
pub fn run() -> Result<String> {
    let mut o = Out(String::new());
    let nat = Units::natural();

    for (d, side, n) in [(1, 3.0, 4), (2, 2.5, 3), (3, 2.0, 2)] {
        let g = BoxGeometry::new(d, side, n)?;
        let th = ThermalParams::natural(0.8)?;
        let q = DualVector::new(&vec![1; d]);
        o.put(&format!("theta.gauss_sum.d{d}"), gauss_sum(&q, &g, &th, 1e-15)?);
        let (lo, hi) = ratio_bounds(&g, &th);
        o.put(&format!("theta.bounds.d{d}.lower"), lo);
        o.put(&format!("theta.bounds.d{d}.upper"), hi);
    }
    let g1 = BoxGeometry::new(1, 5.0, 1)?;
    for alpha in [0.01, 1.0, 100.0] {
        o.put(&format!("theta.heat.fourier.{alpha}"), heat_kernel_fourier(&[0.3], &[1.9], alpha, &g1)?);
        o.put(&format!("theta.heat.images.{alpha}"), heat_kernel_images(&[0.3], &[1.9], alpha, &g1)?);
    }

    let toy = BoxGeometry::new(1, 2.0 * PI, 3)?;
    let th = ThermalParams::natural(0.5)?;
    for stats in Statistics::ALL {
        let table = enumerate_spectrum(&toy, &nat, stats, 30.0)?;
        let pf = partition_functions(&table, &th)?;
        let dist = nu_distribution(&table, &th)?;
        let name = stats.name();
        o.put(&format!("spectrum.{name}.states"), table.state_count() as f64);
        o.put(&format!("spectrum.{name}.ratio"), pf.ratio());
        o.put(&format!("spectrum.{name}.average_ratio"), average_ratio(&table, &th, 1e-15)?);
        o.put(&format!("spectrum.{name}.nu0"), dist.get(&DualVector::zero(1)));
        o.put(&format!("spectrum.{name}.deficit"), dist.deficit);
        o.put(&format!("spectrum.{name}.tail_j1"), tail_probability(&dist, 1, 0)?);
        let ks: Vec<DualVector> = (-2..=2).map(|k| DualVector::new(&[k])).collect();
        o.put(&format!("spectrum.{name}.galilean_residual"), galilean_check_shifts(&table, &ks).max_residual);
        let samples: Vec<DualVector> = [0, 1, -2, 4, 3].iter().map(|&k| DualVector::new(&[k])).collect();
        o.put(&format!("com.{name}.psd_min"), psd_check_distribution(&dist, &samples, 1e-10)?.min_eigenvalue);
        let f = com_kernel(&dist, &axis_points(1, 0.25, 9))?;
        o.put(&format!("com.{name}.f_re_sum"), crate::sum::fsum(f.values.iter().map(|z| z.re)));
        if let Some(w) = max_closed_window(&table, &ks) {
            let r = boost_set_equality_check(&table, &DualVector::new(&[1]), w)?;
            o.put(&format!("landau.{name}.boost_window"), w);
            o.put(&format!("landau.{name}.boost_residual"), r.max_residual);
        }
    }

    let b = BoxGeometry::new(1, 2.0 * PI, 3)?;
    let bz = canonical_distribution(&b, Statistics::Boltzmann, &th, 1e-13)?;
    let oracle = boltzmann_convolution_oracle(&b, &th, 1e-13)?;
    let tv: f64 = crate::sum::fsum(oracle.weights.iter().map(|(q, w)| (w - bz.get(q)).abs()));
    o.put("oracle.tv", tv);
    let psi = macroscopic_wavefunction(&bz, &[2.0], &nat, 1.0, &axis_points(1, 0.02, 11), 1e-12)?;
    o.put("com.velocity", velocity_from_phase(&psi, &axis_points(1, 0.02, 11), 3, &nat)?[0]);

    let clt_th = ThermalParams::from_wavelength(1.0, nat)?;
    let geoms: Vec<BoxGeometry> = [2, 8].iter().map(|&n| BoxGeometry::from_density(1, 1.0, n)).collect::<Result<_>>()?;
    for stats in [Statistics::Boltzmann, Statistics::Bose] {
        let r = clt_convergence_report(&geoms, stats, &clt_th, 1e-12)?;
        for row in &r.rows {
            o.put(&format!("clt.{}.n{}", stats.name(), row.particles), row.sup_distance);
        }
    }
    let g2 = BoxGeometry::new(2, 3f64.sqrt(), 3)?;
    let th2 = ThermalParams::natural(0.4)?;
    let d2 = canonical_distribution(&g2, Statistics::Boltzmann, &th2, 1e-12)?;
    let f_est = f_estimator_2d_from_distribution(&d2, &th2)?;
    let (lo, hi) = tail_bounds_2d(&th2, g2.density(), 1, f_est)?;
    o.put("tails2d.measured", tail_probability(&d2, 1, 0)?);
    o.put("tails2d.lower", lo);
    o.put("tails2d.upper", hi);

    for (n, alpha) in [(2, 12f64.sqrt()), (16, PI), (64, 0.5)] {
        o.put(&format!("fejer.central.n{n}"), fejer_central_mass(n, alpha)?);
    }
    for eps in [0.5, 0.1, 0.02] {
        o.put(&format!("fejer.l0.{eps}"), fejer_l0(eps)? as f64);
    }
    let side = 7.0;
    let pairs = (-9i64..=9).map(|m| (DualVector::new(&[m]), (1.0 + (m as f64).cos()) / 19.0 * 0.9));
    let mu = AtomicMeasure::new(BoxGeometry::new(1, side, 1)?, pairs)?;
    for n in [1u32, 4, 9] {
        o.put(&format!("measure.sigma.n{n}"), sigma_l(&mu, n));
        o.put(&format!("measure.gamma.n{n}"), gamma_l(&mu, 2.0 * PI * n as f64 / side));
    }
    let sides = [60.0, 120.0, 240.0, 480.0];
    let kappas: Vec<f64> = std::iter::once(1e-3).chain((1..=32).map(|i| 0.25 * i as f64)).collect();
    for kind in FamilyKind::ALL {
        let params = match kind {
            FamilyKind::Superfluid => FamilyParams { zero_weight: 0.4, infinity_weight: 0.3, ..Default::default() },
            FamilyKind::NormalFluid => FamilyParams { infinity_weight: 0.3, ..Default::default() },
            FamilyKind::BecGas => FamilyParams { zero_weight: 0.5, ..Default::default() },
            _ => FamilyParams::default(),
        };
        let r = gamma_limit_report(&example_family(kind, params)?, &sides, &kappas)?;
        o.put(&format!("measure.{}.gamma_infinity", kind.name()), r.gamma_infinity);
        o.put(&format!("measure.{}.far_field", kind.name()), r.far_field);
    }

    let fp = FlowParams::new(0.0, HELIUM4_LAMBDA_POINT_K, 1.0, 0.0, Units::helium4_si())?;
    o.put("twofluid.v_cr", critical_velocity(&fp)?);
    let qs: Vec<Vec<f64>> = (1..=1000).map(|i| vec![0.004 * i as f64]).collect();
    let roton = ModelDispersion::Roton { delta: 0.7, mu: 0.16, q_r: 1.9 };
    o.put("landau.roton.grid", landau_excitability(&roton, &[0.0], &qs, 1.0)?.grid_velocity);
    Ok(o.0)
}
