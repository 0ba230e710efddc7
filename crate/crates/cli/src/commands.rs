//! `run`, `cusp-sweep` and `compare`.

use std::fmt;
use std::io;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use tphase::config::{Config, ConfigError, InitialShape};
use tphase::dynamics::{DiagnosticsRecord, ModelError, RunStatus, Simulation, StepError};
use tphase::experiments::{
    comparison_experiment, cusp_experiment, cusp_initial_state, disk_on_interface, labels_to_concentrations,
    random_label_state, ComparisonResult, CuspResult, CuspSetup, ExperimentError,
};
use tphase::params::ModelKind;

use crate::output::{config_hash, unix_now, OutputDir, RunManifest};

/// Why a command failed, with its exit code.
#[derive(Debug)]
pub enum Failure {
    Config(String),
    BlowUp(String),
    NotConverged(String),
    CheckFailed(String),
    Io(String),
}

impl Failure {
    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Config(_) => 1,
            Failure::BlowUp(_) => 2,
            Failure::NotConverged(_) => 3,
            Failure::CheckFailed(_) => 4,
            Failure::Io(_) => 5,
        }
    }

    fn outcome(&self) -> &'static str {
        match self {
            Failure::Config(_) => "config error",
            Failure::BlowUp(_) => "blow-up",
            Failure::NotConverged(_) => "not converged",
            Failure::CheckFailed(_) => "check failed",
            Failure::Io(_) => "io error",
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Config(m) => write!(f, "config error: {m}"),
            Failure::BlowUp(m) => write!(f, "simulation blew up: {m}"),
            Failure::NotConverged(m) => write!(f, "not converged: {m}"),
            Failure::CheckFailed(m) => write!(f, "check failed: {m}"),
            Failure::Io(m) => write!(f, "i/o error: {m}"),
        }
    }
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Failure::Config(e.to_string())
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Io(e.to_string())
    }
}

impl From<tphase::grid::GridError> for Failure {
    fn from(e: tphase::grid::GridError) -> Self {
        Failure::Config(e.to_string())
    }
}

impl From<StepError> for Failure {
    fn from(e: StepError) -> Self {
        Failure::BlowUp(e.to_string())
    }
}

impl From<ModelError> for Failure {
    fn from(e: ModelError) -> Self {
        Failure::Config(e.to_string())
    }
}

impl From<ExperimentError> for Failure {
    fn from(e: ExperimentError) -> Self {
        match e {
            ExperimentError::Model(m) => m.into(),
            ExperimentError::Step(s) => s.into(),
            ExperimentError::NotConverged { .. } => Failure::NotConverged(e.to_string()),
            ExperimentError::MismatchedPair => Failure::Config(e.to_string()),
            ExperimentError::OutsideSimplex { .. } => Failure::BlowUp(e.to_string()),
        }
    }
}

/// Flags shared by every subcommand.
#[derive(Clone, Debug)]
pub struct Options {
    pub out: PathBuf,
    pub jobs: usize,
    pub snapshot_every: usize,
}

/// A loaded config with its output directory and manifest in place.
pub struct Session {
    pub config: Config,
    pub dir: OutputDir,
    pub manifest: RunManifest,
    pub opts: Options,
}

impl Session {
    /// Parses the config, creates the output directory and writes the
    /// manifest. `validate` runs before anything touches the disk.
    pub fn open(
        command: &str,
        config_path: &Path,
        opts: &Options,
        validate: impl FnOnce(&Config) -> Result<(), Failure>,
    ) -> Result<Self, Failure> {
        let config = Config::load(config_path)?;
        validate(&config)?;
        let hash = config_hash(&config);
        let dir = OutputDir::create(&opts.out, command, &hash)?;
        let manifest = RunManifest {
            tool: "tphase".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            command: command.into(),
            config_path: config_path.display().to_string(),
            config_hash: hash,
            output_dir: dir.path().display().to_string(),
            jobs: opts.jobs,
            snapshot_every: opts.snapshot_every,
            started_unix: unix_now(),
            finished_unix: None,
            outcome: None,
            config: config.clone(),
        };
        manifest.write(&dir)?;
        dir.write("config.toml", config.resolved_toml().as_bytes())?;
        Ok(Self {
            config,
            dir,
            manifest,
            opts: opts.clone(),
        })
    }

    /// Records the outcome in the manifest and passes `result` through.
    pub fn close(mut self, result: Result<(), Failure>) -> Result<(), Failure> {
        let outcome = match &result {
            Ok(()) => "ok",
            Err(f) => f.outcome(),
        };
        self.manifest.finish(&self.dir, outcome)?;
        result
    }

    fn pool(&self) -> Result<rayon::ThreadPool, Failure> {
        rayon::ThreadPoolBuilder::new()
            .num_threads(self.opts.jobs.max(1))
            .build()
            .map_err(|e| Failure::Io(e.to_string()))
    }
}

fn field_names(kind: &ModelKind<f64>) -> [&'static str; 2] {
    if kind.is_degenerate() {
        ["phi", "psi"]
    } else {
        ["c", "d"]
    }
}

fn diagnostics_rows(history: &[DiagnosticsRecord<f64>]) -> Vec<String> {
    history.iter().map(DiagnosticsRecord::csv_row).collect()
}

pub fn run(config_path: &Path, opts: &Options) -> Result<(), Failure> {
    let session = Session::open("run", config_path, opts, |c| c.model_spec().map(|_| ()).map_err(Into::into))?;
    let result = run_inner(&session);
    session.close(result)
}

fn run_inner(s: &Session) -> Result<(), Failure> {
    let cfg = &s.config;
    let spec = cfg.model_spec()?;
    let sim = Simulation::new(spec)?;
    let grid = *sim.grid();
    let eps = spec.numerics.epsilon;
    let init = &cfg.initial;
    let (phi, psi) = match init.shape {
        InitialShape::Disk => {
            // Equilibrium profile width of the chosen model.
            let w = if matches!(spec.kind, ModelKind::Degenerate(_)) {
                std::f64::consts::SQRT_2 * eps
            } else {
                0.5 * eps
            };
            let c = (init.disk_center[0], init.disk_center[1]);
            disk_on_interface(grid, w, init.interface_y, c, init.disk_radius)
        }
        InitialShape::Strip => {
            let mut setup = CuspSetup::strip(eps);
            setup.numerics = spec.numerics;
            setup.perturbation = init.perturbation;
            setup.seed = init.seed;
            cusp_initial_state(&setup, grid)
        }
        InitialShape::Random => random_label_state(grid, init.seed),
    };
    let (first, second) = if spec.kind.is_degenerate() {
        (phi, psi)
    } else {
        labels_to_concentrations(&phi, &psi)
    };
    let state = sim.initial_state(first, second)?;

    let names = field_names(&spec.kind);
    let every = s.opts.snapshot_every;
    let mut io_error: Option<io::Error> = None;
    let outcome = sim.run_to_equilibrium(state, |rec, st| {
        if every == 0 || rec.step % every != 0 || io_error.is_some() {
            return;
        }
        for (name, f) in names.iter().zip([&st.first, &st.second]) {
            if let Err(e) = s.dir.write_snapshot(&format!("{name}-{:08}.snap", rec.step), name, st.time, f) {
                io_error = Some(e);
            }
        }
    })?;
    if let Some(e) = io_error {
        return Err(e.into());
    }
    s.dir
        .write_csv("diagnostics.csv", DiagnosticsRecord::<f64>::CSV_HEADER, &diagnostics_rows(&outcome.history))?;
    let st = &outcome.state;
    for (name, f) in names.iter().zip([&st.first, &st.second]) {
        s.dir.write_snapshot(&format!("{name}-final.snap"), name, st.time, f)?;
    }
    println!(
        "{}: {} after {} steps, t = {:e}, energy {:.10e}",
        spec.kind.name(),
        outcome.status,
        st.step,
        st.time,
        outcome.history.last().map_or(f64::NAN, |r| r.energy.total)
    );
    if cfg.numerics.require_equilibrium && outcome.status != RunStatus::Converged {
        return Err(Failure::NotConverged(format!(
            "t_end = {:e} reached before the change rate fell below {:e}",
            spec.numerics.t_end, spec.numerics.equilibrium_tol
        )));
    }
    Ok(())
}

pub fn cusp_sweep(config_path: &Path, opts: &Options) -> Result<(), Failure> {
    let session = Session::open("cusp-sweep", config_path, opts, |c| {
        c.cusp_setup().map(|_| ()).map_err(Into::into)
    })?;
    let result = cusp_inner(&session);
    session.close(result)
}

/// Grid cells along `x` for a run at `eps`, keeping cells per interface
/// width fixed relative to the configured run.
fn scaled_nx(nx: usize, eps0: f64, eps: f64) -> usize {
    let want = nx as f64 * eps0 / eps;
    (want.round().max(8.0) as usize).next_power_of_two()
}

fn cusp_inner(s: &Session) -> Result<(), Failure> {
    let cfg = &s.config;
    let setup = cfg.cusp_setup()?;
    let sweep = &cfg.cusp_sweep;
    let consistency = sweep.coefficients.into();
    let pool = s.pool()?;

    let mut points: Vec<(String, CuspSetup<f64>, f64)> = sweep
        .ratios
        .iter()
        .enumerate()
        .map(|(k, &r)| (format!("ratio-{k:02}"), setup, r))
        .collect();
    let eps0 = setup.numerics.epsilon;
    for (k, &eps) in sweep.epsilons.iter().enumerate() {
        let mut e = setup.with_epsilon(eps);
        e.numerics.nx = scaled_nx(setup.numerics.nx, eps0, eps);
        points.push((format!("eps-{k:02}"), e, sweep.robustness_ratio));
    }
    let results: Vec<Result<CuspResult<f64>, ExperimentError>> = pool.install(|| {
        points
            .par_iter()
            .map(|(_, setup, ratio)| cusp_experiment(*ratio, consistency, setup))
            .collect()
    });

    let mut summary = Vec::new();
    let mut robustness = Vec::new();
    let mut first_failure = None;
    for ((tag, _, _), res) in points.iter().zip(results) {
        let r = match res {
            Ok(r) => r,
            Err(e) => {
                let f = Failure::from(e);
                eprintln!("{tag}: {f}");
                first_failure.get_or_insert(f);
                continue;
            }
        };
        s.dir
            .write_csv(&format!("diagnostics-{tag}.csv"), DiagnosticsRecord::<f64>::CSV_HEADER, &diagnostics_rows(&r.history))?;
        let st = &r.final_state;
        s.dir.write_snapshot(&format!("psi-{tag}.snap"), "psi", st.time, &st.second)?;
        s.dir.write_snapshot(&format!("phi-{tag}.snap"), "phi", st.time, &st.first)?;
        println!(
            "{tag}: ratio {} eps {} height {:.6e} loss {:.6e} width {:.6e} ({})",
            r.ratio, r.epsilon, r.cusp_height, r.relative_energy_loss, r.cusp_width, r.status
        );
        if tag.starts_with("ratio") {
            summary.push(r.csv_row());
        } else {
            robustness.push(r.csv_row());
        }
    }
    s.dir.write_csv("summary.csv", CuspResult::<f64>::CSV_HEADER, &summary)?;
    if !sweep.epsilons.is_empty() {
        s.dir.write_csv("robustness.csv", CuspResult::<f64>::CSV_HEADER, &robustness)?;
    }
    first_failure.map_or(Ok(()), Err)
}

pub fn compare(config_path: &Path, opts: &Options) -> Result<(), Failure> {
    let session = Session::open("compare", config_path, opts, |c| {
        c.compare_setup().map(|_| ()).map_err(Into::into)
    })?;
    let result = compare_inner(&session);
    session.close(result)
}

fn compare_inner(s: &Session) -> Result<(), Failure> {
    let (setup, first, second) = s.config.compare_setup()?;
    let r = comparison_experiment((first, second), &setup)?;
    s.dir.write_csv("compare.csv", ComparisonResult::<f64>::CSV_HEADER, &r.csv_rows())?;
    for (side, spec, st) in [("a", &first, &r.final_states[0]), ("b", &second, &r.final_states[1])] {
        for (name, f) in field_names(&spec.kind).iter().zip([&st.first, &st.second]) {
            s.dir.write_snapshot(&format!("{side}-{name}-final.snap"), name, st.time, f)?;
        }
    }
    println!(
        "{} vs {}: max L2 {:.6e}, max relative energy difference {:.6e}",
        first.kind.name(),
        second.kind.name(),
        r.max_l2(),
        r.max_energy_difference()
    );
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scaled_grid_doubles_when_epsilon_halves() {
        assert_eq!(scaled_nx(256, 0.02, 0.01), 512);
        assert_eq!(scaled_nx(256, 0.02, 0.02), 256);
        assert_eq!(scaled_nx(256, 0.02, 0.015), 512);
    }

    #[test]
    fn exit_codes() {
        assert_eq!(Failure::Config(String::new()).exit_code(), 1);
        assert_eq!(Failure::BlowUp(String::new()).exit_code(), 2);
        assert_eq!(Failure::NotConverged(String::new()).exit_code(), 3);
    }
}
