//! Experiment orchestration: engine calls, tables and the run manifest.

use std::path::{Path, PathBuf};
use std::time::Instant;

use qwalk_core::ensemble::{self, fit_localization_length, normalized_ipr, run_ensemble, variance};
use qwalk_core::exact::{ExactState, ExactStepper};
use qwalk_core::exec::{ordered_map, Join};
use qwalk_core::mps::{self, MpsState, OnsiteGate};
use qwalk_core::observe::{Observables, Snapshot};
use qwalk_core::spectrum::{band_gaps, spectrum_sweep, SectorSource, SweepOptions};
use qwalk_core::{lattice, Boundary, ProbabilityDistribution, WalkParams};

use crate::config::{Engine, Experiment, ExperimentConfig};
use crate::error::{Result, RunError};
use crate::export::{column_label, distribution_table, spectrum_table, Table, Value};
use crate::manifest::RunManifest;

/// Fork-join on the current rayon pool.
#[derive(Clone, Copy, Debug, Default)]
pub struct Rayon;

impl Join for Rayon {
    fn join<A, B, RA, RB>(&self, a: A, b: B) -> (RA, RB)
    where
        A: FnOnce() -> RA + Send,
        B: FnOnce() -> RB + Send,
        RA: Send,
        RB: Send,
    {
        rayon::join(a, b)
    }
}

/// Files produced by [`run_experiment`].
#[derive(Clone, Debug)]
pub struct RunOutput {
    pub files: Vec<PathBuf>,
    pub manifest_path: PathBuf,
    pub manifest: RunManifest,
}

/// Tables computed by an experiment, keyed by file stem.
pub type Tables = Vec<(String, Table)>;

/// Runs `cfg` on a pool of `workers` threads and writes CSVs plus
/// `manifest.json` into `out_dir`. Nothing is left behind on failure.
pub fn run_experiment(cfg: &ExperimentConfig, out_dir: &Path, workers: usize) -> Result<RunOutput> {
    cfg.validate()?;
    let pool = rayon::ThreadPoolBuilder::new().num_threads(workers.max(1)).build()?;
    let start = Instant::now();
    let mut manifest = RunManifest::new(cfg, workers.max(1));
    let tables = pool.install(|| compute(cfg, &Rayon, &mut manifest))?;
    manifest.wall_time_s = start.elapsed().as_secs_f64();

    std::fs::create_dir_all(out_dir).map_err(|source| RunError::Io { path: out_dir.into(), source })?;
    let mut written = Vec::new();
    let result = (|| {
        for (stem, table) in &tables {
            let path = out_dir.join(format!("{stem}.csv"));
            table.write(&path)?;
            written.push(path);
        }
        manifest.files =
            written.iter().map(|p| p.file_name().unwrap_or_default().to_string_lossy().into_owned()).collect();
        let manifest_path = out_dir.join("manifest.json");
        manifest.write(&manifest_path)?;
        Ok(manifest_path)
    })();
    match result {
        Ok(manifest_path) => Ok(RunOutput { files: written, manifest_path, manifest }),
        Err(e) => {
            for p in &written {
                let _ = std::fs::remove_file(p);
            }
            Err(e)
        }
    }
}

/// Computes every table of an experiment without touching the filesystem.
pub fn compute<E: Join>(cfg: &ExperimentConfig, exec: &E, manifest: &mut RunManifest) -> Result<Tables> {
    let name = cfg.experiment.name().to_string();
    match (cfg.experiment, cfg.engine) {
        (Experiment::Spectrum, _) => spectrum(cfg, exec),
        (Experiment::IprScan, _) => Ok(vec![(name, ipr_scan(cfg, exec)?)]),
        (Experiment::Distribution | Experiment::VarianceSeries, Engine::Sector) => sector_walk(cfg, exec),
        (Experiment::VolumeLaw, _) => volume_law(cfg, exec),
        _ => trajectories(cfg, exec, manifest),
    }
}

fn float_col(prefix: &str, phis: &[f64]) -> Vec<String> {
    phis.iter().map(|&p| column_label(prefix, "phi", p)).collect()
}

/// Central cut: between the origin and its right neighbour on an open chain,
/// between the two halves on a ring.
pub fn central_bond(n_sites: usize, boundary: Boundary) -> usize {
    match boundary {
        Boundary::Open => lattice::origin(n_sites),
        Boundary::Periodic => n_sites / 2 - 1,
    }
}

fn distribution_columns(header0: &str, phis: &[f64], dists: &[&ProbabilityDistribution]) -> Table {
    if dists.len() == 1 {
        let mut t = distribution_table(dists[0]);
        t.header[0] = header0.into();
        return t;
    }
    let mut t = Table::new(std::iter::once(header0.to_string()).chain(float_col("P", phis)));
    for (i, (n, _)) in dists[0].iter().enumerate() {
        let mut row = vec![Value::Int(n)];
        row.extend(dists.iter().map(|d| Value::Float(d.as_slice()[i])));
        t.push(row);
    }
    t
}

fn series_table(times: &[usize], prefix: &str, phis: &[f64], cols: &[Vec<f64>]) -> Table {
    let mut t = Table::new(std::iter::once("t".to_string()).chain(float_col(prefix, phis)));
    for (i, &time) in times.iter().enumerate() {
        let mut row = vec![Value::from(time)];
        row.extend(cols.iter().map(|c| Value::Float(c[i])));
        t.push(row);
    }
    t
}

fn sector_walk<E: Join>(cfg: &ExperimentConfig, exec: &E) -> Result<Tables> {
    let mut times = cfg.snapshot_times.clone();
    times.push(cfg.steps);
    times.sort_unstable();
    times.dedup();
    let runs = cfg
        .phi
        .iter()
        .map(|&phi| run_ensemble(exec, &cfg.walk_params(phi), &cfg.ensemble(), &times))
        .collect::<Result<Vec<_>, _>>()?;
    let mut out = Vec::new();
    if cfg.experiment == Experiment::Distribution {
        for (k, &t) in times.iter().enumerate() {
            let dists: Vec<_> = runs.iter().map(|r| &r.snapshots[k].1).collect();
            let stem = if t == cfg.steps { "distribution".to_string() } else { format!("distribution_t{t}") };
            out.push((stem, distribution_columns("n", &cfg.phi, &dists)));
        }
    } else {
        let ts: Vec<usize> = (0..=cfg.steps).collect();
        let cols: Vec<Vec<f64>> = runs.iter().map(|r| r.variance.values().to_vec()).collect();
        out.push(("variance_series".into(), series_table(&ts, "var", &cfg.phi, &cols)));
    }
    Ok(out)
}

/// `phi, variance, ipr, lambda, fit_residual` at the final step; the fit
/// columns are `NaN` where the profile cannot be fitted (e.g. ballistic).
fn ipr_scan<E: Join>(cfg: &ExperimentConfig, exec: &E) -> Result<Table> {
    let mut t = Table::new(["phi", "variance", "ipr", "lambda", "fit_residual"]);
    for &phi in &cfg.phi {
        let p = ensemble::ensemble_distribution_with(exec, &cfg.walk_params(phi), cfg.steps, &cfg.ensemble())?;
        let (lambda, res) = match fit_localization_length(&p, cfg.fit_window()) {
            Ok(f) => (f.lambda, f.residual),
            Err(_) => (f64::NAN, f64::NAN),
        };
        t.push(vec![
            phi.into(),
            variance(&p).into(),
            normalized_ipr(&p, cfg.ipr_norm).into(),
            lambda.into(),
            res.into(),
        ]);
    }
    Ok(t)
}

fn spectrum<E: Join>(cfg: &ExperimentConfig, exec: &E) -> Result<Tables> {
    let source = if cfg.exhaustive {
        SectorSource::Exhaustive
    } else {
        SectorSource::Sampled { count: cfg.samples, seed: cfg.seed }
    };
    let opts = SweepOptions { degeneracy_tol: cfg.degeneracy_tol, n_norm: None, allow_large: false };
    let records = spectrum_sweep(exec, &cfg.phi, &source, &cfg.walk_params(0.0), &opts)?;
    let mut gaps = Table::new(["phi", "max_gap", "open_gaps"]);
    for &phi in &cfg.phi {
        let at: Vec<_> = records.iter().filter(|r| r.phi == phi).cloned().collect();
        let g = band_gaps(&at, cfg.gap_threshold);
        gaps.push(vec![phi.into(), g.first().copied().unwrap_or(0.0).into(), g.len().into()]);
    }
    Ok(vec![("spectrum".into(), spectrum_table(&records)), ("gaps".into(), gaps)])
}

/// A single full-state trajectory on the MPS or exact engine.
pub enum Trajectory {
    Mps(Box<MpsState>, Box<OnsiteGate>),
    Exact(ExactState, Box<ExactStepper>),
}

impl Trajectory {
    pub fn new(cfg: &ExperimentConfig, params: &WalkParams, phi_prime: f64) -> Result<Self> {
        Ok(match cfg.engine {
            Engine::Exact => Self::Exact(ExactState::initial(params)?, Box::new(ExactStepper::new(params, phi_prime)?)),
            _ => Self::Mps(Box::new(MpsState::new(params, cfg.mps())?), Box::new(mps::step_gate(params, phi_prime))),
        })
    }

    pub fn step(&mut self) -> Result<()> {
        match self {
            Self::Mps(s, g) => s.step(g)?,
            Self::Exact(s, st) => st.step(s)?,
        }
        Ok(())
    }

    pub fn snapshot(&mut self, t: usize, obs: Observables) -> Result<Snapshot> {
        Ok(match self {
            Self::Mps(s, _) => s.observe(t, obs)?,
            Self::Exact(s, _) => qwalk_core::exact::snapshot(s, t, obs)?,
        })
    }

    pub fn walker(&mut self) -> Result<ProbabilityDistribution> {
        Ok(match self {
            Self::Mps(s, _) => s.walker_distribution()?,
            Self::Exact(s, _) => s.walker_distribution(),
        })
    }

    /// Entropy in bits across the cut between sites `k` and `k + 1`.
    pub fn entropy(&mut self, k: usize) -> Result<f64> {
        Ok(match self {
            Self::Mps(s, _) => s.bond_entropy(k)?,
            Self::Exact(s, _) => s.bond_entropy(k)?,
        })
    }

    /// `(discarded weight, max bond dimension, capped updates)` for MPS runs.
    pub fn truncation(&self) -> Option<(f64, usize, usize)> {
        match self {
            Self::Mps(s, _) => Some((s.discarded_weight(), s.max_bond_dim(), s.capped_updates())),
            Self::Exact(..) => None,
        }
    }
}

/// What one trajectory records at every time it is sampled.
#[derive(Default)]
struct Record {
    times: Vec<usize>,
    variance: Vec<f64>,
    entropy: Vec<f64>,
    snapshots: Vec<Snapshot>,
    final_walker: Option<ProbabilityDistribution>,
    truncation: Option<(f64, usize, usize)>,
}

fn trajectories<E: Join>(cfg: &ExperimentConfig, exec: &E, manifest: &mut RunManifest) -> Result<Tables> {
    let field = cfg.experiment == Experiment::FieldPerturbation;
    let mut primes = vec![0.0];
    if field {
        primes.extend(cfg.phi_prime.iter().copied().filter(|&p| p != 0.0));
    }
    let jobs: Vec<(f64, f64)> = cfg.phi.iter().flat_map(|&phi| primes.iter().map(move |&pp| (phi, pp))).collect();
    let records = ordered_map(exec, jobs.len(), &|j| {
        let (phi, pp) = jobs[j];
        run_trajectory(cfg, phi, pp)
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    for r in &records {
        if let Some((d, b, c)) = r.truncation {
            manifest.record_mps(d, b, c);
        }
    }

    let name = cfg.experiment.name().to_string();
    let mut out = Vec::new();
    match cfg.experiment {
        Experiment::Distribution => {
            let d: Vec<_> = records.iter().map(|r| r.final_walker.as_ref().expect("recorded")).collect();
            out.push((name, distribution_columns("n", &cfg.phi, &d)));
        }
        Experiment::VarianceSeries => {
            let cols: Vec<_> = records.iter().map(|r| r.variance.clone()).collect();
            out.push((name, series_table(&records[0].times, "var", &cfg.phi, &cols)));
        }
        Experiment::EntropySeries => {
            let cols: Vec<_> = records.iter().map(|r| r.entropy.clone()).collect();
            out.push((name, series_table(&records[0].times, "S", &cfg.phi, &cols)));
        }
        Experiment::FieldPerturbation => {
            let mut t = Table::new(["phi", "phi_prime", "t", "variance", "S"]);
            for (&(phi, pp), r) in jobs.iter().zip(&records) {
                for i in 0..r.times.len() {
                    t.push(vec![phi.into(), pp.into(), r.times[i].into(), r.variance[i].into(), r.entropy[i].into()]);
                }
            }
            out.push((name, t));
        }
        Experiment::SpinTextures => {
            let mut t = Table::new(["phi", "t", "n", "X", "Y", "Z"]);
            for (&phi, r) in cfg.phi.iter().zip(&records) {
                for s in &r.snapshots {
                    let n_sites = s.spin_x.len();
                    for i in 0..n_sites {
                        t.push(vec![
                            phi.into(),
                            s.t.into(),
                            lattice::coord(n_sites, i).into(),
                            s.spin_x[i].into(),
                            s.spin_y[i].into(),
                            s.spin_z[i].into(),
                        ]);
                    }
                }
            }
            out.push((name, t));
        }
        Experiment::EntropyProfile => {
            let mut t = Table::new(["phi", "n", "S"]);
            for (&phi, r) in cfg.phi.iter().zip(&records) {
                let s = &r.snapshots[0];
                let n_sites = s.entropies.len() + 1;
                for (k, &e) in s.entropies.iter().enumerate() {
                    t.push(vec![phi.into(), lattice::coord(n_sites, k).into(), e.into()]);
                }
            }
            out.push((name, t));
        }
        _ => unreachable!("routed elsewhere"),
    }
    Ok(out)
}

fn run_trajectory(cfg: &ExperimentConfig, phi: f64, phi_prime: f64) -> Result<Record> {
    let params = cfg.walk_params(phi);
    let mut traj = Trajectory::new(cfg, &params, phi_prime)?;
    let bond = central_bond(params.n_sites, params.boundary);
    let mut rec = Record::default();
    let texture_times: Vec<usize> =
        if cfg.snapshot_times.is_empty() { (0..=cfg.steps).collect() } else { cfg.snapshot_times.clone() };
    for t in 0..=cfg.steps {
        if t > 0 {
            traj.step()?;
        }
        match cfg.experiment {
            Experiment::VarianceSeries | Experiment::FieldPerturbation => {
                rec.times.push(t);
                rec.variance.push(variance(&traj.walker()?));
                if cfg.experiment == Experiment::FieldPerturbation {
                    rec.entropy.push(traj.entropy(bond)?);
                }
            }
            Experiment::EntropySeries => {
                rec.times.push(t);
                rec.entropy.push(traj.entropy(bond)?);
            }
            Experiment::SpinTextures if texture_times.contains(&t) => {
                let obs = Observables { walker: false, spins: true, entropies: false };
                rec.snapshots.push(traj.snapshot(t, obs)?);
            }
            _ => {}
        }
    }
    match cfg.experiment {
        Experiment::Distribution => rec.final_walker = Some(traj.walker()?),
        Experiment::EntropyProfile => {
            let obs = Observables { walker: false, spins: false, entropies: true };
            rec.snapshots.push(traj.snapshot(cfg.steps, obs)?);
        }
        _ => {}
    }
    rec.truncation = traj.truncation();
    Ok(rec)
}

/// Sorted, de-duplicated times `0, 1, …` up to `points_per_decade`, then
/// `round(10^(k/points_per_decade))`, always ending at `steps`.
pub fn log_grid(steps: usize, points_per_decade: usize) -> Vec<usize> {
    let mut v: Vec<usize> = (0..=points_per_decade.min(steps)).collect();
    let mut k = 0usize;
    loop {
        let t = 10f64.powf(k as f64 / points_per_decade as f64).round() as usize;
        if t > steps {
            break;
        }
        v.push(t);
        k += 1;
    }
    v.push(steps);
    v.sort_unstable();
    v.dedup();
    v
}

/// Half-ring entropy per grid time for one ring size.
#[derive(Clone, Debug, PartialEq)]
pub struct VolumeLawSeries {
    pub n_sites: usize,
    pub times: Vec<usize>,
    pub entropy: Vec<f64>,
}

impl VolumeLawSeries {
    /// Mean entropy over grid times in the last decade (`t ≥ steps / 10`).
    pub fn long_time_entropy(&self) -> f64 {
        let last = *self.times.last().unwrap_or(&0);
        let tail: Vec<f64> =
            self.times.iter().zip(&self.entropy).filter(|(&t, _)| 10 * t >= last).map(|(_, &s)| s).collect();
        qwalk_core::stats::mean(&tail)
    }

    /// First grid time at which the entropy reaches `fraction` of the
    /// long-time value.
    pub fn saturation_time(&self, fraction: f64) -> Option<usize> {
        let target = fraction * self.long_time_entropy();
        self.times.iter().zip(&self.entropy).find(|(_, &s)| s >= target).map(|(&t, _)| t)
    }
}

/// Exact half-ring entropy on a log time grid.
pub fn volume_law_series(params: &WalkParams, points_per_decade: usize) -> Result<VolumeLawSeries> {
    let times = log_grid(params.steps, points_per_decade);
    let stepper = ExactStepper::new(params, 0.0)?;
    let mut state = ExactState::initial(params)?;
    let bond = central_bond(params.n_sites, Boundary::Periodic);
    let mut entropy = Vec::with_capacity(times.len());
    let mut t = 0;
    for &target in &times {
        while t < target {
            stepper.step(&mut state)?;
            t += 1;
        }
        entropy.push(state.bond_entropy(bond)?);
    }
    Ok(VolumeLawSeries { n_sites: params.n_sites, times, entropy })
}

fn volume_law<E: Join>(cfg: &ExperimentConfig, exec: &E) -> Result<Tables> {
    let jobs: Vec<(f64, usize)> = cfg.phi.iter().flat_map(|&phi| cfg.sizes.iter().map(move |&n| (phi, n))).collect();
    let series = ordered_map(exec, jobs.len(), &|j| {
        let (phi, n) = jobs[j];
        volume_law_series(&cfg.walk_params(phi).with_sites(n), cfg.points_per_decade)
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    let mut full = Table::new(["phi", "N", "t", "S", "S_per_site"]);
    let mut summary = Table::new(["phi", "N", "S_long", "S_per_site", "t_sat"]);
    for (&(phi, n), s) in jobs.iter().zip(&series) {
        for (&t, &e) in s.times.iter().zip(&s.entropy) {
            full.push(vec![phi.into(), n.into(), t.into(), e.into(), (e / n as f64).into()]);
        }
        let long = s.long_time_entropy();
        let t_sat = s.saturation_time(0.9).map_or(Value::Text(String::new()), Value::from);
        summary.push(vec![phi.into(), n.into(), long.into(), (long / n as f64).into(), t_sat]);
    }
    Ok(vec![("volume_law".into(), full), ("volume_law_summary".into(), summary)])
}
