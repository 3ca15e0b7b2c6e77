//! One function per subcommand, each turning a validated configuration into
//! a [`Report`].

use qmomentum::asymptotics::clt_convergence_report;
use qmomentum::com::{axis_points, boosted_kernel, com_kernel, psd_check_distribution};
use qmomentum::export::Table;
use qmomentum::lattice::{irreducible_set, BoxGeometry, DualVector};
use qmomentum::measure::{example_family, gamma_limit_report};
use qmomentum::spectrum::{
    canonical_distribution, cutoff_for_tail, enumerate_spectrum, gamma_cdf, nu_distribution, partition_functions,
};
use qmomentum::sum::ExactSum;
use qmomentum::theta::ratio_bounds;
use qmomentum::twofluid::{
    boost_set_equality_check, critical_velocity, critical_velocity_curve, excitability_scan, landau_excitability,
    max_closed_window, relaxation_series, steady_temperature, two_fluid_weights, FlowParams,
};
use qmomentum::{selftest, Error, MomentumDistribution};

use crate::config::{ConfigError, DistMethod, RunConfig};
use crate::report::{Report, Scalar};

#[derive(Debug)]
pub enum CommandError {
    Config(ConfigError),
    Runtime(String),
}

impl From<ConfigError> for CommandError {
    fn from(e: ConfigError) -> Self {
        CommandError::Config(e)
    }
}

impl From<Error> for CommandError {
    fn from(e: Error) -> Self {
        CommandError::Runtime(e.to_string())
    }
}

type Result<T> = std::result::Result<T, CommandError>;

fn coordinate_header(dim: usize, name: &str) -> Vec<String> {
    if dim == 1 {
        vec![name.to_string()]
    } else {
        (1..=dim).map(|i| format!("{name}{i}")).collect()
    }
}

fn table_with(header: Vec<String>) -> Table {
    Table { header, rows: Vec::new() }
}

fn nu_table(dist: &MomentumDistribution) -> Table {
    let mut header = coordinate_header(dist.geometry.dim, "Q");
    header.push("nu".into());
    let mut t = table_with(header);
    for (q, w) in dist.weights.iter() {
        let mut row: Vec<f64> = q.coords().iter().map(|&c| c as f64).collect();
        row.push(*w);
        t.push(row);
    }
    t
}

fn put_geometry(r: &mut Report, g: &BoxGeometry) {
    r.put("d", g.dim);
    r.put("L", g.side);
    r.put("N", g.particles);
}

/// `(Q, ν_Q)` and `Γ^N_L(κ)` for one box.
pub fn dist(cfg: &RunConfig) -> Result<Report> {
    let geom = cfg.box_at(cfg.single_side()?)?;
    let th = cfg.thermal()?;
    let stats = cfg.statistics()?;
    let opts = cfg.dist.clone().unwrap_or_default();
    if let Some(k) = &opts.kappa {
        RunConfig::kappa_grid("dist.kappa", k)?;
    }
    let mut r = Report::default();
    r.put("statistics", stats.name());
    put_geometry(&mut r, &geom);
    r.put("beta", th.beta);
    let dist = match opts.method {
        DistMethod::Enumerate => {
            let e_max = match cfg.e_max {
                Some(e) => e,
                None => cutoff_for_tail(&geom, &th.units, stats, th.beta, cfg.tolerances.tail)?,
            };
            let table = enumerate_spectrum(&geom, &th.units, stats, e_max)?;
            let pf = partition_functions(&table, &th)?;
            r.put("e_max", e_max);
            r.put("states", table.state_count() as usize);
            r.put("z_over_z_irred", pf.ratio());
            nu_distribution(&table, &th)?
        }
        DistMethod::Cycles => canonical_distribution(&geom, stats, &th, cfg.tolerances.rel)?,
    };
    r.put("sectors", dist.weights.len());
    r.put("total", dist.weights.total());
    r.put("deficit", dist.deficit);

    let kappas = opts.kappa.unwrap_or_else(|| {
        let m = dist.weights.iter().map(|(q, _)| q.max_abs()).max().unwrap_or(0);
        (0..=m).map(|j| j as f64 * geom.dual_spacing()).collect()
    });
    let mut curve = Table::new(&["kappa", "gamma"]);
    for &k in &kappas {
        curve.push(vec![k, gamma_cdf(&dist, k)]);
    }
    r.table("nu", nu_table(&dist));
    r.table("gamma", curve);
    Ok(r)
}

/// `Z/Z_irred` against its two-sided bounds over the side grid.
pub fn bounds(cfg: &RunConfig) -> Result<Report> {
    let th = cfg.thermal()?;
    let stats = cfg.statistics()?;
    let mut t = Table::new(&["L", "N", "lower", "ratio", "upper", "deficit"]);
    let mut contained = true;
    for side in cfg.sides()? {
        let geom = cfg.box_at(side)?;
        let dist = canonical_distribution(&geom, stats, &th, cfg.tolerances.rel)?;
        let irred: ExactSum = irreducible_set(&geom).iter().map(|q| dist.get(q)).collect();
        let ratio = 1.0 / irred.value();
        let (lower, upper) = ratio_bounds(&geom, &th);
        contained &= lower <= ratio * (1.0 + dist.deficit) && ratio <= upper;
        t.push(vec![side, geom.particles as f64, lower, ratio, upper, dist.deficit]);
    }
    let mut r = Report::default();
    r.put("statistics", stats.name());
    r.put("beta", th.beta);
    r.put("lambda", th.lambda());
    r.put("contained", contained);
    r.table("bounds", t);
    Ok(r)
}

/// Distance of the scaled one-dimensional momentum CDF from its Gaussian limit.
pub fn clt(cfg: &RunConfig) -> Result<Report> {
    let g = cfg.geometry()?;
    if g.d != 1 {
        return Err(ConfigError::field("geometry.d", "clt is one-dimensional").into());
    }
    let rho = g.rho.ok_or_else(|| ConfigError::field("geometry.rho", "clt fixes the density and varies N"))?;
    if g.side.is_some() || g.side_grid.is_some() {
        return Err(ConfigError::field("geometry.L", "clt derives L from `rho` and `clt.particles`").into());
    }
    let th = cfg.thermal()?;
    let stats = cfg.statistics()?;
    let opts = cfg.clt.clone().unwrap_or_default();
    if opts.particles.is_empty() || opts.particles.contains(&0) {
        return Err(ConfigError::field("clt.particles", "must be a nonempty list of positive counts").into());
    }
    let geoms = opts
        .particles
        .iter()
        .map(|&n| BoxGeometry::from_density(1, rho, n))
        .collect::<std::result::Result<Vec<_>, _>>()?;
    let rep = clt_convergence_report(&geoms, stats, &th, cfg.tolerances.rel)?;
    let mut t = Table::new(&["N", "L", "sup_distance", "step_sup_distance", "deficit"]);
    for row in &rep.rows {
        t.push(vec![row.particles as f64, row.side, row.sup_distance, row.step_sup_distance, row.deficit]);
    }
    let mut r = Report::default();
    r.put("statistics", stats.name());
    r.put("lambda", rep.lambda);
    r.put("rho", rep.rho);
    r.put("grid_points", rep.grid.len());
    r.table("clt", t);
    Ok(r)
}

/// The center-of-mass kernel along the first axis, with a positivity check
/// of `ν` on a small block of wave vectors.
pub fn com(cfg: &RunConfig) -> Result<Report> {
    let geom = cfg.box_at(cfg.single_side()?)?;
    let th = cfg.thermal()?;
    let stats = cfg.statistics()?;
    let opts = cfg.com.clone().unwrap_or_default();
    if opts.points < 2 {
        return Err(ConfigError::field("com.points", "need at least 2 points").into());
    }
    let step = match opts.step {
        Some(s) => RunConfig::require_positive("com.step", s)?,
        None => geom.side / (opts.points - 1) as f64,
    };
    let dist = canonical_distribution(&geom, stats, &th, cfg.tolerances.rel)?;
    let xs = axis_points(geom.dim, step, opts.points);
    let kernel = match &opts.velocity {
        Some(v) if v.len() != geom.dim => {
            return Err(ConfigError::field("com.velocity", format!("needs {} components", geom.dim)).into())
        }
        Some(v) => boosted_kernel(&dist, v, &th.units, &xs)?,
        None => com_kernel(&dist, &xs)?,
    };
    let samples: Vec<DualVector> = lattice_block(geom.dim, 2);
    let psd = psd_check_distribution(&dist, &samples, cfg.tolerances.psd)?;

    let mut r = Report::default();
    r.put("statistics", stats.name());
    put_geometry(&mut r, &geom);
    r.put("beta", th.beta);
    r.put("deficit", dist.deficit);
    r.put("max_imaginary", kernel.max_imaginary());
    r.put("psd_samples", samples.len());
    r.put("psd_min_eigenvalue", psd.min_eigenvalue);
    r.put("psd_tolerance", psd.tolerance);
    r.put("psd_pass", psd.pass);
    r.table("kernel", kernel.table());
    Ok(r)
}

fn lattice_block(dim: usize, half: i64) -> Vec<DualVector> {
    let mut out = vec![DualVector::zero(dim)];
    for axis in 0..dim {
        out = out
            .iter()
            .flat_map(|v| {
                (-half..=half).map(move |c| {
                    let mut coords = v.coords().to_vec();
                    coords[axis] = c;
                    DualVector::new(&coords)
                })
            })
            .collect();
    }
    out
}

/// Limit report of an example measure family and its two-fluid weights.
pub fn measure(cfg: &RunConfig) -> Result<Report> {
    let opts = cfg.measure.clone().unwrap_or_default();
    RunConfig::require_increasing("measure.sides", &opts.sides)?;
    RunConfig::kappa_grid("measure.kappa", &opts.kappa)?;
    let fam = example_family(opts.family, opts.params.clone()).map_err(|e| ConfigError::field("measure.params", e.to_string()))?;
    let rep = gamma_limit_report(&fam, &opts.sides, &opts.kappa)?;
    let w = two_fluid_weights(&rep);
    let mut r = Report::default();
    r.put("family", opts.family.name());
    r.put("gamma_infinity", rep.gamma_infinity);
    r.put("gamma_finite", rep.gamma_finite);
    r.put("zero_weight", rep.zero_weight);
    r.put("far_field", rep.far_field);
    r.put("nu0", w.nu0);
    r.put("continuous_mass", w.continuous_mass);
    r.put("infinity_mass", w.infinity_mass);
    r.put("monotonicity_violations", rep.monotonicity_violations);
    r.put("plateau_warning", rep.plateau_warning.clone().map_or(Scalar::Bool(false), Scalar::Text));
    let mut header = vec!["kappa".to_string(), "gamma".to_string()];
    header.extend(rep.side_grid.iter().map(|l| format!("gamma_L{}", qmomentum::export::num(*l))));
    let mut t = table_with(header);
    for (i, &k) in rep.kappa_grid.iter().enumerate() {
        let mut row = vec![k, rep.gamma[i]];
        row.extend(rep.gamma_l.iter().map(|g| g[i]));
        t.push(row);
    }
    r.table("gamma", t);
    Ok(r)
}

/// Critical velocity of the dissipative heating model and its temperature curve.
pub fn twofluid(cfg: &RunConfig) -> Result<Report> {
    let opts = cfg.twofluid.clone().unwrap_or_default();
    let units = cfg.units()?;
    let ts = cfg.transition_temperature(&opts)?;
    let bad = |field: &str, e: Error| CommandError::Config(ConfigError::field(field, e.to_string()));
    let fp = FlowParams::new(opts.temperature, ts, opts.eta, opts.speed, units).map_err(|e| bad("twofluid", e))?;
    let temps = match &opts.temperatures {
        Some(t) => {
            RunConfig::require_increasing("twofluid.temperatures", t)?;
            t.clone()
        }
        None => (0..=10).map(|i| ts * i as f64 / 10.0).collect(),
    };
    let v_cr = critical_velocity(&fp)?;
    let at_critical = fp.with_speed(v_cr)?;
    let mut r = Report::default();
    r.put("T", fp.temperature);
    r.put("T_s", ts);
    r.put("eta", fp.eta);
    r.put("v_cr", v_cr);
    r.put("steady_temperature_at_v_cr", steady_temperature(&at_critical));
    r.put("steady_temperature", steady_temperature(&fp));
    r.table("critical_velocity", critical_velocity_curve(&fp, &temps)?);
    if let Some(schedule) = &opts.schedule {
        let rel = relaxation_series(&fp, schedule).map_err(|e| bad("twofluid.schedule", e))?;
        r.put("collapse_index", rel.collapse_index.map_or(Scalar::Bool(false), |i| Scalar::Int(i as i64)));
        r.table("relaxation", rel.table());
    }
    Ok(r)
}

fn boost_grid(dim: usize) -> Vec<DualVector> {
    lattice_block(dim, 2)
}

/// Boost set equality over a spectral table plus the Landau analysis of a
/// model dispersion.
pub fn landau(cfg: &RunConfig) -> Result<Report> {
    let geom = cfg.box_at(cfg.single_side()?)?;
    let units = cfg.units()?;
    let stats = cfg.statistics()?;
    let e_max = cfg.e_max.ok_or_else(|| ConfigError::field("e_max", "required by landau"))?;
    let opts = cfg.landau.clone().unwrap_or_default();
    let ks = match &opts.k {
        Some(list) => {
            if list.is_empty() {
                return Err(ConfigError::field("landau.k", "must not be empty").into());
            }
            list.iter()
                .map(|k| {
                    if k.len() == geom.dim {
                        Ok(DualVector::new(k))
                    } else {
                        Err(ConfigError::field("landau.k", format!("every boost needs {} coordinates", geom.dim)))
                    }
                })
                .collect::<std::result::Result<Vec<_>, _>>()?
        }
        None => boost_grid(geom.dim),
    };
    opts.dispersion.validate().map_err(|e| ConfigError::field("landau.dispersion", e.to_string()))?;
    if !(opts.speed >= 0.0 && opts.speed.is_finite()) {
        return Err(ConfigError::field("landau.speed", "must be nonnegative and finite").into());
    }
    let q_max = RunConfig::require_positive("landau.q_max", opts.q_max)?;
    if opts.q_points < 2 {
        return Err(ConfigError::field("landau.q_points", "need at least 2 points").into());
    }

    let table = enumerate_spectrum(&geom, &units, stats, e_max)?;
    let window = match opts.window {
        Some(w) => RunConfig::require_positive("landau.window", w)?,
        None => max_closed_window(&table, &ks)
            .ok_or_else(|| CommandError::Runtime(format!("window-not-closed: no window below e_max = {e_max} is closed under the boosts")))?,
    };
    let mut header = coordinate_header(geom.dim, "k");
    header.extend(["size", "max_residual", "multiset_equal", "identity"].map(String::from));
    let mut boosts = table_with(header);
    let mut all_pass = true;
    let mut identity_at_zero = None;
    for k in &ks {
        let rep = boost_set_equality_check(&table, k, window)?;
        all_pass &= rep.pass();
        if k.is_zero() {
            identity_at_zero = Some(rep.identity);
        }
        let mut row: Vec<f64> = k.coords().iter().map(|&c| c as f64).collect();
        row.extend([rep.size as f64, rep.max_residual, f64::from(u8::from(rep.multiset_equal)), f64::from(u8::from(rep.identity))]);
        boosts.push(row);
    }

    let qs: Vec<f64> = (0..opts.q_points).map(|i| q_max * i as f64 / (opts.q_points - 1) as f64).collect();
    let line: Vec<Vec<f64>> = qs.iter().flat_map(|&q| [vec![-q], vec![q]]).collect();
    let landau = landau_excitability(&opts.dispersion, &[opts.speed], &line, units.hbar)?;
    let scan = excitability_scan(&opts.dispersion, opts.speed, &qs, units.hbar)?;

    let mut r = Report::default();
    r.put("statistics", stats.name());
    put_geometry(&mut r, &geom);
    r.put("e_max", e_max);
    r.put("window", window);
    r.put("boost_checks", ks.len());
    r.put("all_pass", all_pass);
    r.put("identity_at_zero", identity_at_zero.map_or(Scalar::Text("not checked".into()), Scalar::Bool));
    r.put("landau_velocity", landau.landau_velocity);
    r.put("grid_velocity", landau.grid_velocity);
    r.put("analytic_velocity", landau.analytic_velocity.map_or(Scalar::Text("none".into()), Scalar::Num));
    r.put("excitable_points", landau.excitable.len());
    r.table("boosts", boosts);
    r.table("scan", scan);
    Ok(r)
}

/// The fixed self-test as a two-column key/value table.
pub fn selftest() -> Result<Report> {
    let text = selftest::run()?;
    let mut r = Report::default();
    for line in text.lines() {
        if let Some((k, v)) = line.split_once(" = ") {
            r.put(k.trim(), v.trim());
        }
    }
    Ok(r)
}
