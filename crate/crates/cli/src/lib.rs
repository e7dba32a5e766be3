//! `dimer` command-line driver: scenario runs to CSV, the preset catalog,
//! Zeno survival curves, the published-vs-derived audit, derived constants
//! and plot scripts.

pub mod config;
pub mod error;
pub mod plot;
pub mod units;

use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use dimer::liouvillian::consistency_report;
use dimer::physics::{dipole_coupling, dipole_energy, einstein_a, rabi_frequency, MolecularConstants, DEBYE};
use dimer::qcore::{pure_density, PureState, SystemParams};
use dimer::scenarios::{catalog, run_scenario, scenario, FieldOff, ObservableTable, Preset, Scenario, Sweep};
use dimer::zeno::{analytic_survival, run_zeno, ZenoProtocol};
use dimer::{NamedState, SweepParam};
use rayon::prelude::*;

use crate::config::{Job, Rhs, RunConfig, SweepSpec, Zoom};
use crate::error::CliError;
use crate::units::Quantity;

#[derive(Debug, Parser)]
#[command(name = "dimer", version, about = "Entanglement dynamics of two dipole-coupled inversion-doublet molecules")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Integrate a scenario and write its observables as CSV.
    Run(RunArgs),
    /// List the preset scenarios with their parameters.
    Catalog,
    /// Survival of a state under repeated projective measurement.
    Zeno(ZenoArgs),
    /// Compare the published and derived equations of motion.
    Audit(AuditArgs),
    /// Exchange coupling, Einstein A and Rabi frequency from molecular inputs.
    Constants(ConstantsArgs),
    /// Write a gnuplot script laying out one figure panel.
    Plot(PlotArgs),
}

fn rate(s: &str) -> Result<f64, String> {
    units::parse(s, Quantity::Rate).map_err(|e| e.to_string())
}

fn time(s: &str) -> Result<f64, String> {
    units::parse(s, Quantity::Time).map_err(|e| e.to_string())
}

fn length(s: &str) -> Result<f64, String> {
    units::parse(s, Quantity::Length).map_err(|e| e.to_string())
}

fn dipole(s: &str) -> Result<f64, String> {
    units::parse(s, Quantity::Dipole).map_err(|e| e.to_string())
}

fn field(s: &str) -> Result<f64, String> {
    units::parse(s, Quantity::Field).map_err(|e| e.to_string())
}

fn sweep(s: &str) -> Result<SweepSpec, String> {
    SweepSpec::parse(s).map_err(|e| e.to_string())
}

/// Parameter overrides shared by `run` and `audit`.
#[derive(Debug, Clone, Default, Args)]
pub struct ParamArgs {
    #[arg(long, value_parser = rate)]
    pub omega0: Option<f64>,
    #[arg(long = "delta-l", value_parser = rate, allow_negative_numbers = true)]
    pub delta_l: Option<f64>,
    #[arg(long = "J", value_parser = rate)]
    pub j: Option<f64>,
    #[arg(long = "Omega", value_parser = rate)]
    pub omega: Option<f64>,
    #[arg(long, value_parser = rate)]
    pub gamma: Option<f64>,
    #[arg(long, value_parser = time)]
    pub horizon: Option<f64>,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[arg(long)]
    pub scenario: Option<String>,
    /// JSON run configuration; flags given alongside override its fields.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Write the effective configuration as JSON before running.
    #[arg(long = "save-config")]
    pub save_config: Option<PathBuf>,
    /// CSV path. With several runs this is the index file and each run goes
    /// next to it as `<stem>_<k>.csv`.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub rhs: Option<RhsArg>,
    #[arg(long = "rel-tol")]
    pub rel_tol: Option<f64>,
    #[arg(long = "abs-tol")]
    pub abs_tol: Option<f64>,
    /// Comma-separated observable names.
    #[arg(long, value_delimiter = ',')]
    pub observables: Option<Vec<String>>,
    /// `<param>=<v1,v2,...>` with param one of omega0, delta_l, J, Omega, gamma, horizon.
    #[arg(long, value_parser = sweep)]
    pub sweep: Option<SweepSpec>,
    /// Start of a finely sampled window (needs --zoom-length).
    #[arg(long = "zoom-start", value_parser = time, requires = "zoom_length")]
    pub zoom_start: Option<f64>,
    #[arg(long = "zoom-length", value_parser = time, requires = "zoom_start")]
    pub zoom_length: Option<f64>,
    #[arg(long)]
    pub jobs: Option<usize>,
    #[command(flatten)]
    pub params: ParamArgs,
}

#[derive(Debug, Clone, Copy, clap::ValueEnum)]
pub enum RhsArg {
    Derived,
    Published,
}

impl From<RhsArg> for Rhs {
    fn from(r: RhsArg) -> Self {
        match r {
            RhsArg::Derived => Rhs::Derived,
            RhsArg::Published => Rhs::Published,
        }
    }
}

#[derive(Debug, Args)]
pub struct ZenoArgs {
    /// Interval between measurements.
    #[arg(long, value_parser = time)]
    pub tau: f64,
    /// Total time; the number of measurements is round(T/tau).
    #[arg(long = "T", value_parser = time)]
    pub total: f64,
    #[arg(long = "J", value_parser = rate, default_value = "4e9")]
    pub j: f64,
    #[arg(long, value_parser = rate, default_value = "0")]
    pub gamma: f64,
    #[arg(long, value_parser = rate, default_value = "1.5e11")]
    pub omega0: f64,
    /// State measured after every interval.
    #[arg(long, default_value = "f")]
    pub target: String,
    /// Optional CSV of the whole curve.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct AuditArgs {
    #[arg(long, default_value = "free_eg")]
    pub scenario: String,
    #[arg(long, default_value_t = 2001)]
    pub samples: usize,
    #[command(flatten)]
    pub params: ParamArgs,
}

#[derive(Debug, Args)]
pub struct ConstantsArgs {
    /// Permanent dipole of one conformation.
    #[arg(long, value_parser = dipole, default_value = "1.46D")]
    pub d0: f64,
    /// Intermolecular separation.
    #[arg(long, value_parser = length)]
    pub r: f64,
    /// Driving-field amplitude.
    #[arg(long, value_parser = field, default_value = "0")]
    pub field: f64,
    /// Inversion frequency, for the spontaneous emission rate.
    #[arg(long, value_parser = rate, default_value = "1.5e11")]
    pub omega0: f64,
}

#[derive(Debug, Args)]
pub struct PlotArgs {
    /// Figure id, e.g. fig3a.
    pub figure: String,
    /// CSV files, or a sweep index file.
    #[arg(long, required = true, num_args = 1..)]
    pub data: Vec<PathBuf>,
    /// Script path; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Parses `args` and runs the command, writing to `stdout`. Returns the
/// process exit code; errors go to `stderr` as one machine-readable line.
pub fn main_with<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = write!(stdout, "{}", e.render());
                return 0;
            }
            let _ = write!(stderr, "{}", e.render());
            let first = e.to_string().lines().next().unwrap_or("").trim_start_matches("error: ").to_string();
            let _ = writeln!(stderr, "{}", CliError::Usage(first).machine_line());
            return 2;
        }
    };
    match execute(cli.command, stdout) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(stderr, "{}", e.machine_line());
            e.exit_code()
        }
    }
}

pub fn execute(command: Command, out: &mut dyn Write) -> Result<(), CliError> {
    let text = match command {
        Command::Run(a) => cmd_run(a)?,
        Command::Catalog => catalog_text(),
        Command::Zeno(a) => cmd_zeno(a)?,
        Command::Audit(a) => cmd_audit(a)?,
        Command::Constants(a) => cmd_constants(a)?,
        Command::Plot(a) => cmd_plot(a)?,
    };
    out.write_all(text.as_bytes()).map_err(|e| CliError::io("<stdout>", e))
}

fn run_config(a: &RunArgs) -> Result<RunConfig, CliError> {
    let mut cfg = match (&a.config, &a.scenario) {
        (Some(path), _) => RunConfig::load(path)?,
        (None, Some(name)) => {
            let out = a.out.clone().ok_or_else(|| CliError::Usage("run needs --out".into()))?;
            RunConfig::for_scenario(name, out)
        }
        (None, None) => return Err(CliError::Usage("run needs --scenario or --config".into())),
    };
    if a.config.is_some() {
        if let Some(name) = &a.scenario {
            cfg.scenario = Some(name.clone());
            cfg.custom = None;
        }
        if let Some(out) = &a.out {
            cfg.out = out.clone();
        }
    }
    if let Some(r) = a.rhs {
        cfg.rhs = r.into();
    }
    cfg.rel_tol = a.rel_tol.unwrap_or(cfg.rel_tol);
    cfg.abs_tol = a.abs_tol.unwrap_or(cfg.abs_tol);
    if a.observables.is_some() {
        cfg.observables = a.observables.clone();
    }
    if a.sweep.is_some() {
        cfg.sweep = a.sweep.clone();
    }
    if let (Some(start), Some(duration)) = (a.zoom_start, a.zoom_length) {
        cfg.zoom = Some(Zoom { start, duration });
    }
    if a.jobs.is_some() {
        cfg.jobs = a.jobs;
    }
    let p = &a.params;
    let o = &mut cfg.overrides;
    o.omega0 = p.omega0.or(o.omega0);
    o.delta_l = p.delta_l.or(o.delta_l);
    o.j = p.j.or(o.j);
    o.omega = p.omega.or(o.omega);
    o.gamma = p.gamma.or(o.gamma);
    o.horizon = p.horizon.or(o.horizon);
    cfg.validate()?;
    Ok(cfg)
}

fn write_table(table: &ObservableTable<f64>, path: &Path) -> Result<(), CliError> {
    let file = File::create(path).map_err(|e| CliError::io(path, e))?;
    table.write_csv(BufWriter::new(file)).map_err(|e| CliError::io(path, e))
}

/// `dir/stem.csv` → `dir/stem_<k>.csv`.
fn point_path(index: &Path, k: usize) -> PathBuf {
    let stem = index.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "run".into());
    index.with_file_name(format!("{stem}_{k}.csv"))
}

fn write_index(index: &Path, param: &str, points: &[(PathBuf, f64)]) -> Result<(), CliError> {
    let mut text = String::from("file,param,value\n");
    for (path, value) in points {
        let name = path.file_name().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
        let _ = writeln!(text, "{name},{param},{value:e}");
    }
    fs::write(index, text).map_err(|e| CliError::io(index, e))
}

fn pool(jobs: Option<usize>) -> Result<rayon::ThreadPool, CliError> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Some(n) = jobs {
        b = b.num_threads(n);
    }
    b.build().map_err(|e| CliError::Other(e.to_string()))
}

fn sweep_value(s: &Scenario<f64>, param: SweepParam) -> f64 {
    match param {
        SweepParam::Omega0 => s.params.omega0,
        SweepParam::DeltaL => s.params.delta_l,
        SweepParam::J => s.params.j,
        SweepParam::Omega => s.params.omega,
        SweepParam::Gamma => s.params.gamma,
        SweepParam::Horizon => s.horizon,
    }
}

fn cmd_run(a: RunArgs) -> Result<String, CliError> {
    let cfg = run_config(&a)?;
    if let Some(path) = &a.save_config {
        cfg.save(path)?;
    }
    let opts = cfg.options();
    let pool = pool(cfg.jobs)?;
    let mut report = String::new();
    match cfg.resolve()? {
        Job::Trajectories { runs, sweep } => {
            if runs.len() == 1 && sweep.is_none() {
                let table = run_scenario(&runs[0], &opts)?;
                write_table(&table, &cfg.out)?;
                let _ = writeln!(report, "wrote {} ({} rows)", cfg.out.display(), table.len());
                if let Some(t) = table.field_off_time {
                    let _ = writeln!(report, "field_off_s={t:e}");
                }
                return Ok(report);
            }
            let Sweep { param, .. } = sweep.expect("several runs come from a sweep");
            let outcomes: Vec<Result<(PathBuf, f64, Option<f64>), CliError>> = pool.install(|| {
                runs.par_iter()
                    .enumerate()
                    .map(|(k, s)| {
                        let path = point_path(&cfg.out, k);
                        let table = run_scenario(s, &opts)?;
                        write_table(&table, &path)?;
                        Ok((path, sweep_value(s, param), table.field_off_time))
                    })
                    .collect()
            });
            let points = outcomes.into_iter().collect::<Result<Vec<_>, _>>()?;
            let index: Vec<(PathBuf, f64)> = points.iter().map(|(p, v, _)| (p.clone(), *v)).collect();
            write_index(&cfg.out, param.name(), &index)?;
            for (path, value, off) in &points {
                let _ = write!(report, "wrote {} ({}={value:e})", path.display(), param.name());
                if let Some(t) = off {
                    let _ = write!(report, " field_off_s={t:e}");
                }
                report.push('\n');
            }
            let _ = writeln!(report, "wrote {} (index)", cfg.out.display());
        }
        Job::Zeno(z) => {
            let series = z.run()?;
            let points: Vec<(PathBuf, f64)> = (0..series.len()).map(|k| (point_path(&cfg.out, k), z.taus[k])).collect();
            pool.install(|| {
                series.par_iter().zip(&points).map(|(s, (path, _))| write_table(&s.table(), path)).collect::<Result<Vec<_>, _>>()
            })?;
            write_index(&cfg.out, "tau", &points)?;
            for (s, (path, tau)) in series.iter().zip(&points) {
                let last = s.dephased.last().map_or(1.0, |p| p.survival);
                let _ = writeln!(report, "wrote {} (tau={tau:e}, final survival {last:.6})", path.display());
            }
            let _ = writeln!(report, "wrote {} (index)", cfg.out.display());
        }
    }
    Ok(report)
}

fn fmt_values(v: &[f64]) -> String {
    v.iter().map(|x| format!("{x:e}")).collect::<Vec<_>>().join(",")
}

/// One line per preset, `name key=value ...`, values in SI.
pub fn catalog_text() -> String {
    let mut out = String::new();
    for p in catalog::<f64>() {
        match p {
            Preset::Trajectory(s) => {
                let q = &s.params;
                let _ = write!(
                    out,
                    "{} kind=trajectory initial={} omega0={:e} delta_l={:e} J={:e} Omega={:e} gamma={:e} driven={} horizon={:e} samples={} observables={}",
                    s.name,
                    s.initial.name(),
                    q.omega0,
                    q.delta_l,
                    q.j,
                    q.omega,
                    q.gamma,
                    q.driven,
                    s.horizon,
                    s.samples,
                    s.observables.iter().map(|o| o.name()).collect::<Vec<_>>().join(","),
                );
                match s.field_off {
                    Some(FieldOff::At(t)) => {
                        let _ = write!(out, " field_off={t:e}");
                    }
                    Some(FieldOff::FirstMaximum { observable, .. }) => {
                        let _ = write!(out, " field_off=first_max:{}", observable.name());
                    }
                    None => {}
                }
                if let Some(sw) = &s.sweep {
                    let _ = write!(out, " sweep={}:{}", sw.param.name(), fmt_values(&sw.values));
                }
            }
            Preset::Zeno(z) => {
                let _ = write!(
                    out,
                    "{} kind=zeno target={} omega0={:e} J={:e} gamma={:e} total={:e} taus={}",
                    z.name,
                    z.target.name(),
                    z.params.omega0,
                    z.params.j,
                    z.params.gamma,
                    z.total,
                    fmt_values(&z.taus),
                );
            }
        }
        out.push('\n');
    }
    out
}

fn cmd_zeno(a: ZenoArgs) -> Result<String, CliError> {
    if !(a.tau > 0.0) || !(a.total >= a.tau) {
        return Err(CliError::Usage("zeno needs 0 < tau <= T".into()));
    }
    let n = (a.total / a.tau).round() as usize;
    let target: NamedState = a.target.parse()?;
    let params = SystemParams::free(a.omega0, a.j, a.gamma);
    let proto = ZenoProtocol::with_target(a.tau, n, PureState::named(target), params)?;
    let curve = run_zeno(&proto)?;
    let last = curve.last().expect("n >= 1");
    let ana = analytic_survival(a.j, a.tau, n);
    if let Some(path) = &a.out {
        let mut table = ObservableTable::new(vec!["survival".into(), "exact".into(), "gaussian".into()]);
        for p in &curve {
            let an = analytic_survival(a.j, a.tau, p.k);
            table.push(p.t, vec![p.survival, an.exact, an.gaussian]);
        }
        write_table(&table, path)?;
    }
    Ok(format!(
        "measurements={n}\nsurvival={:.10}\nexact_coherent={:.10}\ngaussian={:.10}\n",
        last.survival, ana.exact, ana.gaussian
    ))
}

fn cmd_audit(a: AuditArgs) -> Result<String, CliError> {
    let mut s = scenario::<f64>(&a.scenario)?;
    let p = &a.params;
    for (param, v) in [
        (SweepParam::Omega0, p.omega0),
        (SweepParam::DeltaL, p.delta_l),
        (SweepParam::J, p.j),
        (SweepParam::Omega, p.omega),
        (SweepParam::Gamma, p.gamma),
        (SweepParam::Horizon, p.horizon),
    ] {
        if let Some(v) = v {
            s = s.with_param(param, v)?;
        }
    }
    let rho0 = pure_density(&s.initial_state())?;
    let report = consistency_report(&s.params, &rho0, s.horizon, a.samples)?;
    Ok(format!("scenario={}\n{report}\n", s.name))
}

fn cmd_constants(a: ConstantsArgs) -> Result<String, CliError> {
    let mc = MolecularConstants::new(a.d0, a.r, a.field)?;
    let j = dipole_coupling(&mc)?;
    let v = dipole_energy(&mc)?;
    let mut out = String::new();
    let _ = writeln!(out, "d0_Cm={:e}", mc.d0);
    let _ = writeln!(out, "d0_D={}", mc.d0 / DEBYE);
    let _ = writeln!(out, "r_m={:e}", mc.r);
    let _ = writeln!(out, "V_J={v:e}");
    let _ = writeln!(out, "J_s^-1={j:e}");
    let _ = writeln!(out, "A_s^-1={:e}", einstein_a(mc.mu_eg, a.omega0));
    let _ = writeln!(out, "field_V/m={:e}", mc.field);
    let _ = writeln!(out, "Omega_s^-1={:e}", rabi_frequency(mc.mu_eg, mc.field));
    Ok(out)
}

fn cmd_plot(a: PlotArgs) -> Result<String, CliError> {
    let script = plot::emit_plot_script(&a.figure, &a.data)?;
    match &a.out {
        Some(path) => {
            fs::write(path, &script).map_err(|e| CliError::io(path, e))?;
            Ok(format!("wrote {}\n", path.display()))
        }
        None => Ok(script),
    }
}
