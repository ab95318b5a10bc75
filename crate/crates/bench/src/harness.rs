//! Grid execution: one work unit per sweep time, parallel workers, ordered
//! crash-safe CSV streaming.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::mpsc;
use std::time::Instant;

use aev_core::adiabatic::{evolve_forward, AdiabaticProblem, Schedule};
use aev_core::dephasing::{fourier_matrix, sampled_fourier_matrix, FourierMatrix, RandomTimeDistribution};
use aev_core::echo::{aev_from_sweeps, prepare_sweeps, qaa_from_state, shots_from_sweeps, EigenObservable, EstimatorResult};
use aev_core::linalg::PureState;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::config::{build_observable, DephasingMode, Mode, RunConfig};
use crate::error::{BenchError, Result};
use crate::fit::{fit_curves, CurveFit, Window};
use crate::record::{self, BenchRecord, RecordWriter};

pub const RECORDS_CSV: &str = "records.csv";
pub const RECORDS_JSON: &str = "records.json";
pub const SUMMARY_JSON: &str = "summary.json";

/// Everything shared by the work units, computed once per run.
struct Prepared {
    base: AdiabaticProblem,
    observables: Vec<(String, EigenObservable)>,
    dephasing: Vec<(RandomTimeDistribution, FourierMatrix)>,
    sweep_times: Vec<f64>,
    needs_echo: bool,
}

fn numerical(point: impl Into<String>) -> impl FnOnce(aev_core::Error) -> BenchError {
    let point = point.into();
    move |source| BenchError::Numerical { point, source }
}

fn prepare(config: &RunConfig) -> Result<Prepared> {
    let model = config.model_spec()?;
    let (h0, ht, psi0) = model.build().map_err(numerical("model construction"))?;
    let schedule = Schedule::linear(1.0).map_err(numerical("schedule"))?;
    let base = match psi0 {
        Some(psi0) => AdiabaticProblem::with_initial_state(h0, ht, schedule, config.dt, psi0),
        None => AdiabaticProblem::new(h0, ht, schedule, config.dt),
    }
    .map_err(numerical("problem setup"))?;
    let spectrum = base.target_spectrum();
    let observables = config
        .observables
        .iter()
        .map(|name| {
            let op = build_observable(name, model.qubits(), spectrum)?;
            let eig = EigenObservable::new(&op, spectrum).map_err(numerical(format!("observable={name}")))?;
            Ok((name.clone(), eig))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut dephasing = Vec::new();
    if config.modes.contains(&Mode::Aev) {
        for (i, spec) in config.dephasing.iter().enumerate() {
            let dist = spec.distribution()?;
            let point = format!("dephasing={} T_d={}", spec.kind, spec.t_d);
            let f = match config.dephasing_mode {
                DephasingMode::Exact => fourier_matrix(&dist, spectrum),
                DephasingMode::Sampled => {
                    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(config.seed, 0xF0, i as u64));
                    sampled_fourier_matrix(&dist, spectrum, config.samples, &mut rng)
                }
            }
            .map_err(numerical(point))?;
            dephasing.push((dist, f));
        }
    }
    Ok(Prepared {
        base,
        observables,
        dephasing,
        sweep_times: config.sweep_times.values()?,
        needs_echo: config.modes.contains(&Mode::Aev),
    })
}

/// SplitMix-style mixing so neighbouring grid points get unrelated streams.
fn derive_seed(seed: u64, stream: u64, index: u64) -> u64 {
    let mut z = seed ^ stream.wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ index.wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

struct Context<'a> {
    config: &'a RunConfig,
    prepared: &'a Prepared,
    hash: &'a str,
}

impl Context<'_> {
    fn blank(&self, mode: Mode, t_ad: f64, observable: &str, dist: Option<&RandomTimeDistribution>) -> BenchRecord {
        BenchRecord {
            mode,
            t_ad,
            t: mode.total_time(t_ad),
            t_d: dist.map(|d| d.t_d()),
            observable: observable.to_string(),
            value: None,
            exact: None,
            abs_error: None,
            eps_fwd: None,
            eps_bwd: None,
            delta: None,
            bound: None,
            runtime_ms: 0.0,
            dephasing: dist.map(|d| d.kind().as_str().to_string()).unwrap_or_default(),
            status: "ok".into(),
            config_hash: self.hash.to_string(),
            seed: self.config.seed,
            dt: self.config.dt,
        }
    }

    fn fill(mut rec: BenchRecord, result: aev_core::Result<EstimatorResult>, started: Instant) -> BenchRecord {
        match result {
            Ok(r) => {
                let finite = |x: f64| (!x.is_nan()).then_some(x);
                rec.value = Some(r.value);
                rec.exact = r.exact_reference;
                rec.abs_error = r.error().map(f64::abs);
                rec.eps_fwd = finite(r.epsilon_forward);
                if rec.mode == Mode::Aev {
                    rec.eps_bwd = finite(r.epsilon_backward);
                    rec.delta = finite(r.delta);
                    rec.bound = r.bound;
                }
            }
            Err(e) => rec.status = format!("error: {e}"),
        }
        rec.runtime_ms = started.elapsed().as_secs_f64() * 1e3;
        rec
    }

    /// All records for one sweep time, in grid order: QAA per observable,
    /// then AEV per dephasing and observable.
    fn unit(&self, index: usize) -> Vec<BenchRecord> {
        let p = self.prepared;
        let t_ad = p.sweep_times[index];
        let started = Instant::now();
        let sweeps = p.base.with_duration(t_ad).and_then(|problem| {
            if p.needs_echo {
                prepare_sweeps(&problem).map(|pair| (pair.forward.clone(), pair.epsilon_forward, Some(pair)))
            } else {
                evolve_forward(&problem).map(|r| (r.final_state, r.infidelity, None))
            }
        });
        let spectrum = p.base.target_spectrum();
        let mut out = Vec::new();
        for &mode in &self.config.modes {
            match mode {
                Mode::Qaa => {
                    for (name, obs) in &p.observables {
                        let rec = self.blank(Mode::Qaa, t_ad, name, None);
                        let r = match &sweeps {
                            Ok((state, eps, _)) => qaa_from_state(state as &PureState, *eps, spectrum, obs),
                            Err(e) => Err(e.clone()),
                        };
                        out.push(Self::fill(rec, r, started));
                    }
                }
                Mode::Aev => {
                    for (d, (dist, f)) in p.dephasing.iter().enumerate() {
                        for (o, (name, obs)) in p.observables.iter().enumerate() {
                            let rec = self.blank(Mode::Aev, t_ad, name, Some(dist));
                            let r = match &sweeps {
                                Ok((_, _, Some(pair))) => match self.config.shots {
                                    None => aev_from_sweeps(pair, f, spectrum, obs),
                                    Some(shots) => {
                                        let stream = ((d * p.observables.len() + o) as u64) << 32 | index as u64;
                                        let seed = derive_seed(self.config.seed, 0x5407, stream);
                                        shots_from_sweeps(pair, f, spectrum, obs, shots, seed).map(|s| EstimatorResult {
                                            value: s.value,
                                            ..s.expected
                                        })
                                    }
                                },
                                Ok(_) => unreachable!("echo sweeps are prepared whenever aev is requested"),
                                Err(e) => Err(e.clone()),
                            };
                            out.push(Self::fill(rec, r, started));
                        }
                    }
                }
            }
        }
        out
    }
}

/// Evaluates the grid with `workers` threads and hands each unit's records
/// to `sink` in grid order as soon as all earlier units are done.
pub fn run_grid<F>(config: &RunConfig, workers: usize, mut sink: F) -> Result<Vec<BenchRecord>>
where
    F: FnMut(&[BenchRecord]) -> Result<()>,
{
    config.validate()?;
    let prepared = prepare(config)?;
    let hash = config.config_hash();
    let ctx = Context {
        config,
        prepared: &prepared,
        hash: &hash,
    };
    let units = prepared.sweep_times.len();
    let workers = workers.clamp(1, units);
    let next = AtomicUsize::new(0);
    let mut records = Vec::new();
    let mut sink_result = Ok(());
    std::thread::scope(|scope| {
        let (tx, rx) = mpsc::channel::<(usize, Vec<BenchRecord>)>();
        for _ in 0..workers {
            let tx = tx.clone();
            let (ctx, next) = (&ctx, &next);
            scope.spawn(move || loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= units || tx.send((i, ctx.unit(i))).is_err() {
                    break;
                }
            });
        }
        drop(tx);
        let mut pending = BTreeMap::new();
        let mut emitted = 0;
        for (i, recs) in rx {
            pending.insert(i, recs);
            while let Some(recs) = pending.remove(&emitted) {
                if sink_result.is_ok() {
                    sink_result = sink(&recs);
                    if sink_result.is_err() {
                        // Stop handing out work; running units finish and are dropped.
                        next.store(units, Ordering::Relaxed);
                    }
                }
                records.extend(recs);
                emitted += 1;
            }
        }
    });
    sink_result?;
    Ok(records)
}

/// In-memory run without touching the filesystem.
pub fn run_sweep(config: &RunConfig, workers: usize) -> Result<Vec<BenchRecord>> {
    run_grid(config, workers, |_| Ok(()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Failure {
    pub point: String,
    pub status: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub config_hash: String,
    pub seed: u64,
    pub dt: f64,
    pub records: usize,
    pub failures: Vec<Failure>,
    /// Omitted when the grid has fewer than three sweep times.
    pub window: Option<Window>,
    pub fits: Vec<CurveFit>,
    pub note: String,
}

#[derive(Debug)]
pub struct RunOutcome {
    pub out_dir: PathBuf,
    pub records: Vec<BenchRecord>,
    pub summary: RunSummary,
}

pub fn summarize(config: &RunConfig, records: &[BenchRecord]) -> RunSummary {
    let failures = records
        .iter()
        .filter(|r| !r.is_ok())
        .map(|r| Failure {
            point: r.point(),
            status: r.status.clone(),
        })
        .collect();
    let distinct_t = {
        let mut t: Vec<u64> = records.iter().map(|r| r.t_ad.to_bits()).collect();
        t.sort_unstable();
        t.dedup();
        t.len()
    };
    let window = if distinct_t >= 3 {
        match config.slope_window {
            Some([t_min, t_max]) => Some(Window { t_min, t_max }),
            None => Window::default_for(records),
        }
    } else {
        None
    };
    let fits = window.map(|w| fit_curves(records, w)).unwrap_or_default();
    RunSummary {
        config_hash: config.config_hash(),
        seed: config.seed,
        dt: config.dt,
        records: records.len(),
        failures,
        window,
        fits,
        note: "T is the total sweep time (QAA: T_ad, AEV: 2 T_ad) and excludes dephasing time".into(),
    }
}

/// Runs the grid, streaming `records.csv` and then writing `records.json`
/// and `summary.json` into `out_dir`.
pub fn run_to_dir(config: &RunConfig, out_dir: &Path, workers: usize, overwrite: bool) -> Result<RunOutcome> {
    config.validate()?;
    let csv_path = out_dir.join(RECORDS_CSV);
    if csv_path.exists() && !overwrite {
        return Err(BenchError::Config(format!(
            "{} already exists; pass --overwrite or choose another --out",
            csv_path.display()
        )));
    }
    std::fs::create_dir_all(out_dir).map_err(|e| BenchError::io(out_dir, e))?;
    let file = std::fs::File::create(&csv_path).map_err(|e| BenchError::io(&csv_path, e))?;
    let mut writer = RecordWriter::new(file);
    let records = run_grid(config, workers, |recs| recs.iter().try_for_each(|r| writer.write(r)))?;
    writer.finish()?;
    record::write_json(&out_dir.join(RECORDS_JSON), &records)?;
    let summary = summarize(config, &records);
    let summary_path = out_dir.join(SUMMARY_JSON);
    std::fs::write(&summary_path, serde_json::to_string_pretty(&summary)?)
        .map_err(|e| BenchError::io(&summary_path, e))?;
    Ok(RunOutcome {
        out_dir: out_dir.to_path_buf(),
        records,
        summary,
    })
}

/// Default worker count: available parallelism.
pub fn default_workers() -> usize {
    std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)
}
