//! Kind-specific experiment runners. Each one turns a parsed config plus
//! the command-line seed into result tables; all randomness flows through
//! per-realization counter streams so any thread schedule writes the same
//! bytes.

use crate::config::{
    AverageRateConfig, DensityProfileConfig, DisplacementDistConfig, FileConfig, ModelName,
    OrderingCheckConfig, SessionRateConfig, ValidateAllConfig,
};
use crate::error::CliError;
use crate::output::{col, write_table, Cell, Column, ResultTable, RunMeta};
use dronecell::density::{
    empirical_density_oracle, intensity_measure, rs_density, sl_density, udm_density_general,
    InterfererDensity,
};
use dronecell::displacement::{
    rs_displacement, rw_displacement, rwp_displacement, sl_displacement,
    NetDisplacementDistribution,
};
use dronecell::dist::{ParameterError, ScalarDistribution};
use dronecell::mobility::{sample_displacement_vector, MobilityModelSpec};
use dronecell::rate::{average_rate, session_rate, RateQuery, RateResult};
use dronecell::rng::{pack_stream, stream_rng};
use dronecell::validate::run_all_checks;
use dronecell::walk::{FlightWalkLaw, WaitLaw};
use rayon::prelude::*;
use std::path::{Path, PathBuf};

/// Radii beyond this contribute only Monte Carlo noise to profile tables;
/// the analytic curve is within per-mil of ambient there.
const PROFILE_RANGE_CAP: f64 = 2000.0;

pub struct RunOutcome {
    pub tables: Vec<PathBuf>,
    /// Failed checks of a validate-all run; zero for every other kind.
    pub failed_checks: usize,
}

/// Same generator-key spacing as the library's validation module: check
/// families land on unrelated streams even for adjacent seeds.
fn salted(seed: u64, family: u64, combo: u64) -> u64 {
    seed.wrapping_add(family.wrapping_mul(0x9e37_79b9_7f4a_7c15)).wrapping_add(combo)
}

fn fmt_t(t: f64) -> String {
    if (t - t.round()).abs() < 1e-9 && t.abs() < 1e6 {
        format!("{t:.0}")
    } else {
        format!("{t}").replace('.', "p")
    }
}

fn non_finite(what: String) -> CliError {
    CliError::Numerical(format!("{what} is not finite"))
}

/// Walk-sum and hover-wait tables shared by every analytic law of one run,
/// calibrated once for the longest travel distance any table needs.
struct WalkLaws {
    walk: Option<FlightWalkLaw>,
    waits: Option<WaitLaw>,
}

impl WalkLaws {
    fn build(
        models: &[(ModelName, MobilityModelSpec)],
        flight: &ScalarDistribution,
        hover: Option<&ScalarDistribution>,
        vt_max: f64,
        seed: u64,
    ) -> Result<Self, CliError> {
        let needs_walk =
            models.iter().any(|(n, _)| matches!(n, ModelName::Rw | ModelName::Rwp));
        let needs_waits = models.iter().any(|(n, _)| matches!(n, ModelName::Rwp));
        let walk = if needs_walk {
            let mut rng = stream_rng(seed, pack_stream(0, 0));
            Some(FlightWalkLaw::for_horizon(flight.clone(), vt_max, &mut rng)?)
        } else {
            None
        };
        let waits = match (needs_waits, &walk) {
            (true, Some(walk)) => {
                let hover = hover.expect("validated: rwp models carry a hover law");
                Some(WaitLaw::new(hover.clone(), walk.n_max())?)
            }
            _ => None,
        };
        Ok(Self { walk, waits })
    }

    fn displacement(
        &self,
        spec: &MobilityModelSpec,
        t: f64,
    ) -> Result<NetDisplacementDistribution, ParameterError> {
        match spec {
            MobilityModelSpec::StraightLine { v } => sl_displacement(*v, t),
            MobilityModelSpec::RandomStop { v, flight } => rs_displacement(flight, *v, t),
            MobilityModelSpec::RandomWalk { v, .. } => {
                rw_displacement(self.walk.as_ref().expect("walk law built"), *v, t)
            }
            MobilityModelSpec::RandomWaypoint { v, .. } => rwp_displacement(
                self.walk.as_ref().expect("walk law built"),
                self.waits.as_ref().expect("wait law built"),
                *v,
                t,
            ),
        }
    }

    /// Interferer intensity with the serving drone pinned at association.
    fn density(
        &self,
        spec: &MobilityModelSpec,
        lambda0: f64,
        u0: f64,
        t: f64,
    ) -> Result<InterfererDensity, ParameterError> {
        match spec {
            MobilityModelSpec::StraightLine { v } => sl_density(lambda0, u0, *v, t),
            MobilityModelSpec::RandomStop { v, flight } => {
                rs_density(lambda0, u0, *v, t, flight.clone())
            }
            _ => udm_density_general(lambda0, u0, t, self.displacement(spec, t)?),
        }
    }
}

pub fn run_experiment(
    cfg: &FileConfig,
    seed: u64,
    out_dir: &Path,
    raw_config: &[u8],
) -> Result<RunOutcome, CliError> {
    let mut meta = RunMeta::new(cfg.kind().token(), seed, raw_config);
    let mut failed_checks = 0;
    let tables = match cfg {
        FileConfig::DisplacementDist(c) => displacement_dist(c, seed)?,
        FileConfig::DensityProfile(c) => density_profile(c, seed)?,
        FileConfig::OrderingCheck(c) => ordering_check(c, seed)?,
        FileConfig::AverageRate(c) => average_rate_tables(c, seed, &mut meta)?,
        FileConfig::SessionRate(c) => session_rate_tables(c, seed, &mut meta)?,
        FileConfig::ValidateAll(c) => validate_all(c, seed, &mut meta, &mut failed_checks)?,
    };
    let mut written = Vec::with_capacity(tables.len());
    for table in &tables {
        let path = write_table(out_dir, table, &meta)?;
        println!("wrote {}", path.display());
        written.push(path);
    }
    Ok(RunOutcome { tables: written, failed_checks })
}

fn displacement_dist(
    c: &DisplacementDistConfig,
    seed: u64,
) -> Result<Vec<ResultTable>, CliError> {
    let models = c.mobility.build_models()?;
    let flight = c.mobility.flight_law()?;
    let hover = c.mobility.hover_law()?;
    let vt_max = c.mobility.speed * c.times.last().copied().unwrap_or(0.0);
    let laws = WalkLaws::build(&models, &flight, Some(&hover), vt_max, salted(seed, 0, 0))?;

    let columns: Vec<Column> = vec![
        col("distance_m", "m"),
        col("analytic_pdf_per_m", "1/m"),
        col("empirical_pdf_per_m", "1/m"),
    ];
    let n = c.trajectories as usize;
    let bins = c.bins;
    let mut tables = Vec::new();
    for (mi, (name, spec)) in models.iter().enumerate() {
        for (ti, &t) in c.times.iter().enumerate() {
            let law = laws.displacement(spec, t)?;
            let vt = c.mobility.speed * t;
            let width = vt / bins as f64;
            let stream = salted(seed, 1, (mi * 64 + ti) as u64);
            let counts = (0..n)
                .into_par_iter()
                .fold(
                    || vec![0u64; bins],
                    |mut acc, i| {
                        let mut rng = stream_rng(stream, pack_stream(i as u64, 0));
                        let [dx, dy] = sample_displacement_vector(spec, t, &mut rng);
                        let l = dx.hypot(dy);
                        let bin = ((l / width) as usize).min(bins - 1);
                        acc[bin] += 1;
                        acc
                    },
                )
                .reduce(
                    || vec![0u64; bins],
                    |mut a, b| {
                        for (x, y) in a.iter_mut().zip(b) {
                            *x += y;
                        }
                        a
                    },
                );

            let mut table = ResultTable::new(
                format!("displacement_dist_{}_t{}", name.token(), fmt_t(t)),
                columns.clone(),
            );
            for (b, &count) in counts.iter().enumerate() {
                let center = (b as f64 + 0.5) * width;
                // Point masses are spread over their bin so the column is
                // directly comparable with the histogram.
                let mut analytic = law.pdf(center);
                for &(loc, mass) in law.atoms() {
                    if ((loc / width) as usize).min(bins - 1) == b {
                        analytic += mass / width;
                    }
                }
                let empirical = count as f64 / (n as f64 * width);
                table.push(vec![
                    Cell::Num(center),
                    Cell::Num(analytic),
                    Cell::Num(empirical),
                ]);
            }
            tables.push(table);
        }
    }
    Ok(tables)
}

fn density_profile(c: &DensityProfileConfig, seed: u64) -> Result<Vec<ResultTable>, CliError> {
    let models = c.mobility.build_models()?;
    let flight = c.mobility.flight_law()?;
    let hover = c.mobility.hover_law()?;
    let t_max = c.times.last().copied().unwrap_or(0.0);
    let laws = WalkLaws::build(
        &models,
        &flight,
        Some(&hover),
        c.mobility.speed * t_max,
        salted(seed, 0, 0),
    )?;

    let columns: Vec<Column> = vec![
        col("radius_m", "m"),
        col("analytic_rel", "lambda0"),
        col("empirical_rel", "lambda0"),
    ];
    let mut tables = Vec::new();
    for (mi, (name, spec)) in models.iter().enumerate() {
        for (ti, &t) in c.times.iter().enumerate() {
            let r_max = (c.initial_distance + c.mobility.speed * t).min(PROFILE_RANGE_CAP);
            let hist = empirical_density_oracle(
                spec,
                c.lambda0,
                c.initial_distance,
                t,
                r_max,
                c.bins,
                c.realizations as usize,
                salted(seed, 3, (mi * 64 + ti) as u64),
            )?;
            let reference = laws.density(spec, c.lambda0, c.initial_distance, t)?;

            let mut table = ResultTable::new(
                format!("density_profile_{}_t{}", name.token(), fmt_t(t)),
                columns.clone(),
            );
            for (i, &est) in hist.density().iter().enumerate() {
                let lo = hist.edges()[i];
                let hi = hist.edges()[i + 1];
                let want = reference.annulus_mean(lo, hi)?;
                table.push(vec![
                    Cell::Num((lo + hi) / 2.0),
                    Cell::Num(want / c.lambda0),
                    Cell::Num(est / c.lambda0),
                ]);
            }
            tables.push(table);
        }
    }
    Ok(tables)
}

fn ordering_check(c: &OrderingCheckConfig, seed: u64) -> Result<Vec<ResultTable>, CliError> {
    let models = c.mobility.build_models()?;
    let flight = c.mobility.flight_law()?;
    let hover = c.mobility.hover_law()?;
    let t_max = c.times.last().copied().unwrap_or(0.0);
    let laws = WalkLaws::build(
        &models,
        &flight,
        Some(&hover),
        c.mobility.speed * t_max,
        salted(seed, 0, 0),
    )?;

    let mut columns = vec![col("initial_distance_m", "m"), col("time_s", "s")];
    for (name, _) in &models {
        columns.push(match name {
            ModelName::Sl => col("measure_sl", "drones"),
            ModelName::Rs => col("measure_rs", "drones"),
            ModelName::Rw => col("measure_rw", "drones"),
            ModelName::Rwp => col("measure_rwp", "drones"),
        });
    }
    columns.push(col("min_margin_rel", "1"));

    let mut table = ResultTable::new("theorem1_check", columns);
    for &t in &c.times {
        // Displacement laws depend on t only; share them across distances.
        let displacements = models
            .iter()
            .map(|(_, spec)| laws.displacement(spec, t))
            .collect::<Result<Vec<_>, _>>()?;
        for &u0 in &c.initial_distances {
            let reach = u0 + c.mobility.speed * t;
            let mut row = vec![Cell::Num(u0), Cell::Num(t)];
            let mut sl_measure = f64::NAN;
            let mut min_margin = f64::INFINITY;
            for ((name, spec), disp) in models.iter().zip(&displacements) {
                let density = match spec {
                    MobilityModelSpec::StraightLine { v } => sl_density(c.lambda0, u0, *v, t)?,
                    MobilityModelSpec::RandomStop { v, flight } => {
                        rs_density(c.lambda0, u0, *v, t, flight.clone())?
                    }
                    _ => udm_density_general(c.lambda0, u0, t, disp.clone())?,
                };
                let measure = intensity_measure(&density, reach)?;
                if *name == ModelName::Sl {
                    sl_measure = measure;
                } else if measure > 0.0 {
                    min_margin = min_margin.min((sl_measure - measure) / measure);
                }
                row.push(Cell::Num(measure));
            }
            row.push(Cell::Num(min_margin));
            table.push(row);
        }
    }
    Ok(vec![table])
}

fn rate_columns(models: &[(ModelName, MobilityModelSpec)], first: Column) -> Vec<Column> {
    let mut columns = vec![first];
    for (name, _) in models {
        columns.push(match name {
            ModelName::Sl => col("rate_sl_nats", "nats"),
            ModelName::Rs => col("rate_rs_nats", "nats"),
            ModelName::Rw => col("rate_rw_nats", "nats"),
            ModelName::Rwp => col("rate_rwp_nats", "nats"),
        });
    }
    columns
}

fn record_rate(
    meta: &mut RunMeta,
    result: &RateResult,
    what: impl FnOnce() -> String,
) -> Result<f64, CliError> {
    if !result.value.is_finite() {
        return Err(non_finite(what()));
    }
    let worst = meta
        .tolerances
        .entry("quadrature_abs_error_max".to_string())
        .or_insert(0.0);
    *worst = worst.max(result.abs_error);
    Ok(result.value)
}

fn average_rate_tables(
    c: &AverageRateConfig,
    seed: u64,
    meta: &mut RunMeta,
) -> Result<Vec<ResultTable>, CliError> {
    let models = c.mobility.build_models()?;
    let channel = c.channel.build()?;
    let mut table = ResultTable::new("average_rate", rate_columns(&models, col("time_s", "s")));
    for (ti, &t) in c.times.iter().enumerate() {
        let mut row = vec![Cell::Num(t)];
        for (mi, (name, spec)) in models.iter().enumerate() {
            let q = RateQuery {
                service: c.service.to_model(),
                model: spec.clone(),
                lambda0: c.lambda0,
                channel: channel.clone(),
                t,
            };
            let mut rng = stream_rng(salted(seed, 5, (mi * 256 + ti) as u64), pack_stream(0, 0));
            let r = average_rate(&q, &mut rng)?;
            let value =
                record_rate(meta, &r, || format!("rate of {} at t = {t}", name.token()))?;
            row.push(Cell::Num(value));
        }
        table.push(row);
    }
    Ok(vec![table])
}

fn session_rate_tables(
    c: &SessionRateConfig,
    seed: u64,
    meta: &mut RunMeta,
) -> Result<Vec<ResultTable>, CliError> {
    let models = c.mobility.build_models()?;
    let channel = c.channel.build()?;
    let mut table =
        ResultTable::new("session_rate", rate_columns(&models, col("session_s", "s")));
    for (ti, &total) in c.session_lengths.iter().enumerate() {
        let mut row = vec![Cell::Num(total)];
        for (mi, (name, spec)) in models.iter().enumerate() {
            let q = RateQuery {
                service: c.service.to_model(),
                model: spec.clone(),
                lambda0: c.lambda0,
                channel: channel.clone(),
                t: 0.0,
            };
            let mut rng = stream_rng(salted(seed, 6, (mi * 256 + ti) as u64), pack_stream(0, 0));
            let r = session_rate(&q, total, &mut rng)?;
            let value = record_rate(meta, &r, || {
                format!("session rate of {} over T = {total}", name.token())
            })?;
            row.push(Cell::Num(value));
        }
        table.push(row);
    }
    Ok(vec![table])
}

fn validate_all(
    c: &ValidateAllConfig,
    seed: u64,
    meta: &mut RunMeta,
    failed_checks: &mut usize,
) -> Result<Vec<ResultTable>, CliError> {
    let outcomes = run_all_checks(&c.scale.to_validation(seed))?;
    let mut table = ResultTable::new(
        "validate_all",
        vec![
            col("check", "name"),
            col("measured", "1"),
            col("tolerance", "1"),
            col("passed", "bool"),
            col("detail", "text"),
        ],
    );
    for outcome in &outcomes {
        let verdict = if outcome.passed { "PASS" } else { "FAIL" };
        println!(
            "{verdict} {} (measured {:.6}, tolerance {:.6})",
            outcome.name, outcome.measured, outcome.tolerance
        );
        if !outcome.passed {
            *failed_checks += 1;
        }
        meta.tolerances.insert(outcome.name.clone(), outcome.tolerance);
        table.push(vec![
            Cell::Text(outcome.name.clone()),
            Cell::Num(outcome.measured),
            Cell::Num(outcome.tolerance),
            Cell::Flag(outcome.passed),
            Cell::Text(outcome.detail.clone()),
        ]);
    }
    Ok(vec![table])
}
