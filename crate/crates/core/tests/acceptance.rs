//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
//! failure. Run with `cargo test -p qmomentum --test acceptance`.

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::Instant;

use qmomentum::asymptotics::{clt_convergence_report, f_estimator_2d_from_distribution, tail_bounds_2d, tail_probability};
use qmomentum::com::psd_check_distribution;
use qmomentum::fejer::{central_mass_lower_bound, fejer_central_mass, fejer_l0, fejer_window_mass};
use qmomentum::lattice::irreducible_set;
use qmomentum::measure::{
    example_family, fourier_transform, gamma_l, gamma_limit_report, sigma_l, AtomicMeasure, FamilyKind, FamilyParams,
};
use qmomentum::spectrum::{
    boltzmann_convolution_oracle, cutoff_for_tail, enumerate_spectrum, galilean_check_shifts, nu_distribution,
    occupation_expectation, partition_functions,
};
use qmomentum::sum::fsum;
use qmomentum::theta::{gauss_sum, heat_kernel_fourier, heat_kernel_images, ratio_bounds};
use qmomentum::twofluid::{
    boost_set_equality_check, critical_velocity, landau_excitability, max_closed_window, steady_temperature,
    two_fluid_weights, FlowParams, ModelDispersion,
};
use qmomentum::units::HELIUM4_LAMBDA_POINT_K;
use qmomentum::{BoxGeometry, DualVector, MomentumDistribution, Result, Statistics, ThermalParams, Units};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Check = Result<(bool, String)>;

fn nat(beta: f64) -> ThermalParams {
    ThermalParams::natural(beta).expect("positive beta")
}

fn toy_distribution(geom: &BoxGeometry, stats: Statistics, th: &ThermalParams, rel: f64) -> Result<MomentumDistribution> {
    let e_max = cutoff_for_tail(geom, &th.units, stats, th.beta, rel)?;
    nu_distribution(&enumerate_spectrum(geom, &th.units, stats, e_max)?, th)
}

/// Plain sum of `exp(−(λ²/4π)(N k² + 2k·q))` over a growing cube of `k`
/// until a whole shell adds nothing.
fn direct_boost_sum(q: &DualVector, geom: &BoxGeometry, th: &ThermalParams) -> f64 {
    let c = th.lambda().powi(2) / (4.0 * PI);
    let h = geom.dual_spacing();
    let n = geom.particles as f64;
    let qv = geom.wavevector(q);
    let term = |k: &[i64]| {
        let (mut k2, mut kq) = (0.0, 0.0);
        for i in 0..geom.dim {
            let ki = k[i] as f64 * h;
            k2 += ki * ki;
            kq += ki * qv[i];
        }
        (-c * (n * k2 + 2.0 * kq)).exp()
    };
    let mut terms = vec![term(&[0, 0, 0])];
    for r in 1..10_000i64 {
        let mut shell = Vec::new();
        let span = |on: bool| if on { -r..=r } else { 0..=0 };
        for a in -r..=r {
            for b in span(geom.dim > 1) {
                for e in span(geom.dim > 2) {
                    if a.abs().max(b.abs()).max(e.abs()) == r {
                        shell.push(term(&[a, b, e]));
                    }
                }
            }
        }
        let s = fsum(shell.iter().copied());
        terms.extend(shell);
        if s < 1e-18 * fsum(terms.iter().copied()) {
            break;
        }
    }
    fsum(terms)
}

fn c1_theta_factorization() -> Check {
    let mut worst = 0.0f64;
    let mut count = 0;
    for (d, side, n) in [(1, 3.0, 4), (2, 2.5, 3), (3, 2.0, 2)] {
        let geom = BoxGeometry::new(d, side, n)?;
        let irred = irreducible_set(&geom);
        let picks = [irred[0], irred[irred.len() / 2], irred[irred.len() - 1]];
        for lambda in [0.3, 1.0, 2.5] {
            let th = ThermalParams::from_wavelength(lambda, Units::natural())?;
            for q in &picks {
                let s = gauss_sum(q, &geom, &th, 1e-16)?;
                let oracle = direct_boost_sum(q, &geom, &th);
                worst = worst.max(((s - oracle) / oracle).abs());
                count += 1;
            }
        }
    }
    Ok((count >= 27 && worst < 1e-12, format!("{count} configurations, max relative error {worst:.2e}")))
}

fn c2_sandwich() -> Check {
    let mut cases = 0;
    let mut worst_margin = f64::INFINITY;
    for (d, side, betas) in [(1, 2.0 * PI, [0.1, 1.0, 10.0, 100.0]), (2, PI, [0.5, 5.0, 50.0, 500.0])] {
        for n in 1..=4 {
            let geom = BoxGeometry::new(d, side, n)?;
            for stats in Statistics::ALL {
                for beta in betas {
                    let th = nat(beta);
                    let e_max = cutoff_for_tail(&geom, &th.units, stats, beta, 1e-9)?;
                    let pf = partition_functions(&enumerate_spectrum(&geom, &th.units, stats, e_max)?, &th)?;
                    // the true ratio lies between these two certified values
                    let low = pf.z / (pf.z_irred + pf.tail_bound);
                    let high = (pf.z + pf.tail_bound) / pf.z_irred;
                    let (lo, hi) = ratio_bounds(&geom, &th);
                    worst_margin = worst_margin.min(low - lo).min(hi - high);
                    cases += 1;
                }
            }
        }
    }
    Ok((worst_margin >= 0.0, format!("{cases} spectra, smallest margin {worst_margin:.3e}")))
}

fn c3_heat_kernel() -> Check {
    let mut worst = 0.0f64;
    let mut min_value = f64::INFINITY;
    let mut count = 0;
    for (d, side) in [(1, 3.0), (2, 2.0)] {
        let geom = BoxGeometry::new(d, side, 1)?;
        for i in 0..=16 {
            let alpha = 0.1 * 10f64.powf(i as f64 / 4.0);
            for s in 0..7 {
                let x: Vec<f64> = (0..d).map(|a| 0.37 * s as f64 + 0.11 * a as f64).collect();
                let y = vec![0.05; d];
                let f = heat_kernel_fourier(&x, &y, alpha, &geom)?;
                let g = heat_kernel_images(&x, &y, alpha, &geom)?;
                worst = worst.max(((f - g) / g).abs());
                min_value = min_value.min(f.min(g));
                count += 1;
            }
        }
    }
    Ok((worst < 1e-12 && min_value > 0.0, format!("{count} samples over alpha in [1e-1, 1e3], max relative gap {worst:.2e}, min value {min_value:.3e}")))
}

fn c4_oracle() -> Check {
    let mut worst_tv = 0.0f64;
    let mut worst_tail = 0.0f64;
    for n in 2..=4 {
        let geom = BoxGeometry::new(1, 2.0 * PI, n)?;
        let th = nat(1.0);
        let enumerated = toy_distribution(&geom, Statistics::Boltzmann, &th, 1e-14)?;
        let oracle = boltzmann_convolution_oracle(&geom, &th, 1e-15)?;
        let mut keys: Vec<DualVector> = enumerated.weights.iter().map(|e| e.0).collect();
        keys.extend(oracle.weights.iter().map(|e| e.0));
        keys.sort();
        keys.dedup();
        let tv = 0.5 * fsum(keys.iter().map(|q| (enumerated.get(q) - oracle.get(q)).abs()));
        worst_tv = worst_tv.max(tv);
        worst_tail = worst_tail.max(enumerated.deficit);
    }
    Ok((worst_tv < 1e-10 && worst_tail < 1e-12, format!("N in 2..=4: max TV {worst_tv:.2e}, max certified tail {worst_tail:.2e}")))
}

fn c5_galilean() -> Check {
    let mut worst = 0.0f64;
    let mut pairs = 0;
    let mut ok = true;
    for (d, side, e_max) in [(1, 2.0 * PI, 30.0), (2, 2.0 * PI, 10.0)] {
        let ks: Vec<DualVector> = if d == 1 {
            (-2..=2).map(|k| DualVector::new(&[k])).collect()
        } else {
            (-2..=2).flat_map(|a| (-2..=2).map(move |b| DualVector::new(&[a, b]))).collect()
        };
        for n in 2..=3 {
            let geom = BoxGeometry::new(d, side, n)?;
            for stats in Statistics::ALL {
                let table = enumerate_spectrum(&geom, &Units::natural(), stats, e_max)?;
                let r = galilean_check_shifts(&table, &ks);
                ok &= !r.empty && r.mismatched_pairs == 0;
                worst = worst.max(r.max_residual);
                pairs += r.pairs;
            }
        }
    }
    Ok((ok && worst < 1e-12, format!("{pairs} boosted sector pairs, max residual {worst:.2e}")))
}

fn c6_positivity() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut checks = 0;
    let mut worst = f64::INFINITY;
    let mut all_pass = true;
    let mut corrupted_fail = true;
    for (d, side) in [(1, 2.0 * PI), (2, PI)] {
        for n in 1..=4 {
            let geom = BoxGeometry::new(d, side, n)?;
            for stats in [Statistics::Bose, Statistics::Boltzmann] {
                let th = nat(if d == 1 { 0.5 } else { 1.0 });
                let e_max = cutoff_for_tail(&geom, &th.units, stats, th.beta, 1e-10)?;
                let table = enumerate_spectrum(&geom, &th.units, stats, e_max)?;
                let nu = nu_distribution(&table, &th)?;
                let nk = occupation_expectation(&geom, stats, &th, e_max)?;
                for dist in [&nu, &nk] {
                    let samples: Vec<DualVector> =
                        (0..8).map(|_| DualVector::new(&(0..d).map(|_| rng.gen_range(-4..=4)).collect::<Vec<_>>())).collect();
                    let r = psd_check_distribution(dist, &samples, 1e-10)?;
                    all_pass &= r.pass;
                    worst = worst.min(r.min_eigenvalue / r.trace);
                    checks += 1;
                    let bad = MomentumDistribution {
                        weights: dist.weights.map_values(|q, w| if q.is_zero() { -w } else { w }),
                        ..dist.clone()
                    };
                    corrupted_fail &= !psd_check_distribution(&bad, &samples, 1e-10)?.pass;
                }
            }
        }
    }
    Ok((
        all_pass && corrupted_fail,
        format!("{checks} Gram matrices, min eigenvalue/trace {worst:.2e}, corrupted inputs rejected: {corrupted_fail}"),
    ))
}

fn c7_clt() -> Check {
    let th = ThermalParams::from_wavelength(1.0, Units::natural())?;
    let g = |n| BoxGeometry::from_density(1, 1.0, n);
    let boltz = clt_convergence_report(&[g(8)?], Statistics::Boltzmann, &th, 1e-12)?;
    let bose = clt_convergence_report(&[g(2)?, g(10)?], Statistics::Bose, &th, 1e-12)?;
    let b8 = boltz.rows[0].sup_distance;
    let (q2, q10) = (bose.rows[0].sup_distance, bose.rows[1].sup_distance);
    Ok((
        b8 < 0.02 && q10 < q2,
        format!("Boltzmann N=8 sup distance {b8:.4} (raw staircase {:.4}); Bose N=2 {q2:.4}, N=10 {q10:.4}", boltz.rows[0].step_sup_distance),
    ))
}

fn c8_tails_2d() -> Check {
    let mut ok = true;
    let mut lines = Vec::new();
    for (n, side, lambda) in [(3, 3f64.sqrt(), 0.8), (3, 3f64.sqrt(), 1.2), (1, 1.0, 0.6)] {
        let geom = BoxGeometry::new(2, side, n)?;
        let th = ThermalParams::from_wavelength(lambda, Units::natural())?;
        let dist = toy_distribution(&geom, Statistics::Boltzmann, &th, 1e-13)?;
        let f = f_estimator_2d_from_distribution(&dist, &th)?;
        for j in 1..=3 {
            let t = tail_probability(&dist, j, 0)?;
            let (lo, hi) = tail_bounds_2d(&th, geom.density(), j, f)?;
            ok &= lo - dist.deficit <= t && t <= hi + dist.deficit;
            if j == 1 {
                lines.push(format!("N={n} lambda={lambda}: {lo:.3e} <= {t:.3e} <= {hi:.3e}"));
            }
        }
    }
    Ok((ok, format!("J in 1..=3; {}", lines.join("; "))))
}

fn c9_fejer() -> Check {
    let mut min_margin = f64::INFINITY;
    for n in 2..=64u32 {
        for i in 1..=50 {
            let alpha = 2.0 * PI * i as f64 / 50.0;
            min_margin = min_margin.min(fejer_central_mass(n, alpha)? - central_mass_lower_bound(alpha));
        }
    }
    let mut sweep_margin = f64::INFINITY;
    let mut l0s = Vec::new();
    for eps in [0.5, 0.1, 0.02] {
        let l0 = fejer_l0(eps)?;
        l0s.push(l0);
        for n in 2 * l0..=512 {
            let mass = fejer_window_mass(n as u32, 2.0 * PI * l0 as f64 / n as f64)?;
            sweep_margin = sweep_margin.min(mass - (1.0 - eps));
        }
    }
    Ok((
        min_margin >= -1e-10 && sweep_margin >= -1e-10,
        format!("central-mass margin {min_margin:.3e} over 63x50 grid; l0 = {l0s:?}, window sweep margin {sweep_margin:.3e}"),
    ))
}

fn c10_sigma_gamma() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let mut comparisons = 0;
    let mut violations = 0;
    for _ in 0..100 {
        let d = rng.gen_range(1..=2);
        let side = rng.gen_range(1.0..10.0);
        let radius = rng.gen_range(0..8i64);
        let mut pairs = Vec::new();
        let coords: Vec<Vec<i64>> = if d == 1 {
            (0..=radius).map(|a| vec![a]).collect()
        } else {
            (0..=radius).flat_map(|a| (-radius..=radius).map(move |b| vec![a, b])).filter(|c| c[0] > 0 || c[1] >= 0).collect()
        };
        for c in coords {
            let w: f64 = if rng.gen_bool(0.6) { rng.gen() } else { 0.0 };
            let k = DualVector::new(&c);
            pairs.push((k, w));
            if !k.is_zero() {
                pairs.push((-k, w));
            }
        }
        let total = fsum(pairs.iter().map(|p| p.1));
        if total == 0.0 {
            pairs = vec![(DualVector::zero(d), 1.0)];
        } else {
            pairs.iter_mut().for_each(|p| p.1 /= total);
        }
        let mu = AtomicMeasure::new(BoxGeometry::new(d, side, 1)?, pairs)?;
        for n in 1..=12u32 {
            comparisons += 1;
            if sigma_l(&mu, n) > gamma_l(&mu, 2.0 * PI * n as f64 / side) {
                violations += 1;
            }
        }
    }
    Ok((violations == 0, format!("100 random measures, {comparisons} comparisons, {violations} violations")))
}

fn c11_families() -> Check {
    let sides = [125.0, 250.0, 500.0, 1000.0];
    let crystal = example_family(FamilyKind::Crystal, FamilyParams::default())?;
    let kc: Vec<f64> = (1..=40).map(|i| 0.4 * i as f64).collect();
    let rc = gamma_limit_report(&crystal, &sides, &kc)?;
    let mu = crystal.measure(1000.0)?;
    let xs: Vec<Vec<f64>> = (0..100).map(|i| vec![0.03 * i as f64]).collect();
    let shifted: Vec<Vec<f64>> = xs.iter().map(|x| vec![x[0] + 1.0]).collect();
    let (f, g) = (fourier_transform(&mu, &xs)?, fourier_transform(&mu, &shifted)?);
    let period_gap = f.values.iter().zip(&g.values).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);

    let sf = example_family(FamilyKind::Superfluid, FamilyParams { zero_weight: 0.4, infinity_weight: 0.3, ..Default::default() })?;
    let ks: Vec<f64> = std::iter::once(1e-3).chain((1..=30).map(|i| 0.2 * i as f64)).collect();
    let w = two_fluid_weights(&gamma_limit_report(&sf, &sides, &ks)?);
    let sf_err = (w.nu0 - 0.4).abs().max((w.continuous_mass - 0.3).abs()).max((w.infinity_mass - 0.3).abs());

    let esc = example_family(FamilyKind::EscapingPointMass, FamilyParams::default())?;
    let re = gamma_limit_report(&esc, &sides, &ks)?;
    Ok((
        rc.gamma_infinity < 0.02 && period_gap < 0.01 && sf_err < 0.02 && re.gamma_infinity > 0.98,
        format!(
            "crystal Gamma_inf {:.2e}, period gap {period_gap:.2e}; superfluid weights ({:.4}, {:.4}, {:.4}); escaping Gamma_inf {:.4}",
            rc.gamma_infinity, w.nu0, w.continuous_mass, w.infinity_mass, re.gamma_infinity
        ),
    ))
}

fn c12_two_fluid() -> Check {
    let fp = FlowParams::new(0.0, HELIUM4_LAMBDA_POINT_K, 1.0, 0.0, Units::helium4_si())?;
    let v = critical_velocity(&fp)?;
    let t = steady_temperature(&fp.with_speed(v)?);
    let rel = (t / HELIUM4_LAMBDA_POINT_K - 1.0).abs();
    Ok(((v / 67.1 - 1.0).abs() < 0.01 && rel < 1e-12, format!("v_cr(0) = {v:.4} m/s, T_v(v_cr)/T_s - 1 = {rel:.1e}")))
}

fn c13_landau() -> Check {
    let mut checks = 0;
    let mut ok = true;
    let mut worst = 0.0f64;
    for (d, side, e_max) in [(1, 2.0 * PI, 40.0), (2, 2.0 * PI, 24.0)] {
        let ks: Vec<DualVector> = if d == 1 {
            (-2..=2).map(|k| DualVector::new(&[k])).collect()
        } else {
            (-2..=2).flat_map(|a| (-2..=2).map(move |b| DualVector::new(&[a, b]))).collect()
        };
        for n in 2..=3 {
            let geom = BoxGeometry::new(d, side, n)?;
            for stats in Statistics::ALL {
                let table = enumerate_spectrum(&geom, &Units::natural(), stats, e_max)?;
                let window = max_closed_window(&table, &ks).unwrap_or(0.0);
                for k in &ks {
                    let r = boost_set_equality_check(&table, k, window)?;
                    ok &= r.pass() && r.size > 0 && r.identity == k.is_zero();
                    worst = worst.max(r.max_residual);
                    checks += 1;
                }
            }
        }
    }
    let c = 238.0;
    let hbar = 1.054_571_817e-34;
    let grid: Vec<Vec<f64>> = (1..=400).map(|i| vec![1e8 * i as f64, 0.0, 0.0]).collect();
    let r = landau_excitability(&ModelDispersion::Phonon { c }, &[0.0; 3], &grid, hbar)?;
    let rel = (r.landau_velocity / c - 1.0).abs().max((r.grid_velocity / c - 1.0).abs());
    Ok((ok && rel < 1e-10, format!("{checks} boost set checks, max residual {worst:.2e}; phonon Landau velocity relative error {rel:.1e}")))
}

fn c14_determinism() -> Check {
    let reference = qmomentum::selftest::run()?;
    let mut same = true;
    for threads in [1, 2, 4] {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().expect("thread pool");
        let out = pool.install(qmomentum::selftest::run)?;
        same &= out == reference;
    }
    same &= qmomentum::selftest::run()? == reference;
    Ok((same, format!("{} lines, identical across 5 runs on 1, 2 and 4 threads", reference.lines().count())))
}

fn main() -> ExitCode {
    type Criterion = (&'static str, fn() -> Check);
    let criteria: [Criterion; 14] = [
        ("theta-sum factorization", c1_theta_factorization),
        ("partition ratio sandwich", c2_sandwich),
        ("heat-kernel dual forms", c3_heat_kernel),
        ("enumeration vs convolution oracle", c4_oracle),
        ("Galilean identity", c5_galilean),
        ("positive semidefiniteness", c6_positivity),
        ("1D central limit", c7_clt),
        ("2D tails", c8_tails_2d),
        ("Fejer bounds", c9_fejer),
        ("sigma_L <= Gamma_L", c10_sigma_gamma),
        ("measure-limit families", c11_families),
        ("two-fluid critical velocity", c12_two_fluid),
        ("Landau boost sets", c13_landau),
        ("determinism", c14_determinism),
    ];
    let mut failures = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let (pass, detail) = match check() {
            Ok(r) => r,
            Err(e) => (false, format!("error: {e}")),
        };
        failures += usize::from(!pass);
        println!("{} [{:>2}] {name}: {detail} ({:.1}s)", if pass { "PASS" } else { "FAIL" }, i + 1, start.elapsed().as_secs_f64());
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failures, criteria.len());
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
