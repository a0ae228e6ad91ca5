//! `gkdv` subcommands.

use std::ffi::OsString;
use std::fs;
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use gkdv_core::ansatz::ParamState;
use gkdv_core::modulation::{IntegratorOptions, ModulationSystem, ShootInput, ShootOptions};
use gkdv_core::pde::{evolve, fit_bubbles, physical_ansatz, Field, SolverOptions};
use gkdv_core::profiles::{check_identities, eval_q, ProfileTable};

use crate::config::ScenarioConfig;
use crate::error::{CliError, Result, EXIT_CHECK, EXIT_OK};
use crate::formats::{load_or_build_profiles, read_field, write_field, CacheStatus};
use crate::suite::{parse_skip, Suite};
use crate::tables;

#[derive(Debug, Parser)]
#[command(name = "gkdv", version, about = "Multi-bubble blow-up laboratory for the mass-critical gKdV equation")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build (or load) the profile table and print its identity report.
    Profiles(ProfilesArgs),
    /// Run the acceptance suite and write a report.
    Verify(VerifyArgs),
    /// Shoot for unstable coordinates whose trajectory reaches S_0.
    Shoot(ScenarioArgs),
    /// Integrate one modulation trajectory.
    Modulate(ModulateArgs),
    /// Evolve a field with the pseudo-spectral solver.
    Evolve(EvolveArgs),
}

#[derive(Debug, Args)]
pub struct Common {
    /// Scenario file (JSON); the built-in two-bubble scenario otherwise.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
    /// Profile cache directory; GKDV_CACHE takes precedence.
    #[arg(long)]
    pub cache: Option<PathBuf>,
    /// Worker threads for independent runs.
    #[arg(long)]
    pub threads: Option<usize>,
    /// Seed for sampled configurations; overrides the scenario file.
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Args)]
pub struct ProfilesArgs {
    /// Half width of the symmetric grid.
    #[arg(long, default_value_t = 30.0)]
    pub xmax: f64,
    /// Number of grid nodes.
    #[arg(long, default_value_t = 6001)]
    pub n: usize,
    /// Directory receiving the cache file.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Same as `--out`; GKDV_CACHE takes precedence over both.
    #[arg(long)]
    pub cache: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub common: Common,
    /// Comma separated groups (profiles, ansatz, modulation, pde) or criterion numbers.
    #[arg(long, default_value = "")]
    pub skip: String,
}

#[derive(Debug, Args)]
pub struct ScenarioArgs {
    #[command(flatten)]
    pub common: Common,
    /// Initial rescaled time S_n.
    #[arg(long, allow_hyphen_values = true)]
    pub sn: Option<f64>,
    /// Exit time S_0.
    #[arg(long, allow_hyphen_values = true)]
    pub s0: Option<f64>,
}

#[derive(Debug, Args)]
pub struct ModulateArgs {
    #[command(flatten)]
    pub scenario: ScenarioArgs,
    /// Unstable coordinates, one per unstable bubble.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub xi: Vec<f64>,
    /// Time coordinates, one per bubble.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub zeta: Vec<f64>,
}

#[derive(Debug, Args)]
pub struct EvolveArgs {
    #[command(flatten)]
    pub common: Common,
    /// `ansatz`, `soliton` or a field checkpoint path.
    #[arg(long, default_value = "ansatz")]
    pub init: String,
    /// Rescaled time of the initial ansatz.
    #[arg(long, allow_hyphen_values = true)]
    pub s: Option<f64>,
    /// Final time, absolute or as a multiple of the initial time (`2x`).
    #[arg(long, default_value = "2x")]
    pub tend: String,
    /// Number of nodes, a power of two.
    #[arg(long)]
    pub n: Option<usize>,
    /// Periodic domain length.
    #[arg(long)]
    pub length: Option<f64>,
    /// Number of output times after the initial one.
    #[arg(long, default_value_t = 20)]
    pub samples: usize,
}

/// Parse `args` and run; returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { crate::error::EXIT_SETUP } else { EXIT_OK };
        }
    };
    match dispatch(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error[{}]: {e}", e.exit_code());
            e.exit_code()
        }
    }
}

fn dispatch(command: Command) -> Result<i32> {
    match command {
        Command::Profiles(a) => cmd_profiles(&a),
        Command::Verify(a) => cmd_verify(&a),
        Command::Shoot(a) => cmd_shoot(&a),
        Command::Modulate(a) => cmd_modulate(&a),
        Command::Evolve(a) => cmd_evolve(&a),
    }
}

fn cache_dir(flag: Option<&Path>, fallback: Option<&Path>) -> PathBuf {
    std::env::var_os("GKDV_CACHE")
        .map(PathBuf::from)
        .or_else(|| flag.map(Path::to_path_buf))
        .or_else(|| fallback.map(Path::to_path_buf))
        .unwrap_or_else(|| PathBuf::from("cache"))
}

fn init_threads(threads: Option<usize>) -> Result<()> {
    if let Some(n) = threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Config(format!("thread pool: {e}")))?;
    }
    Ok(())
}

fn load_config(common: &Common) -> Result<ScenarioConfig> {
    let mut cfg = match &common.config {
        Some(p) => ScenarioConfig::load(p)?,
        None => ScenarioConfig::default(),
    };
    if let Some(seed) = common.seed {
        cfg.seed = seed;
    }
    Ok(cfg)
}

fn load_profiles(cfg: &ScenarioConfig, common: &Common) -> Result<ProfileTable> {
    let dir = cache_dir(common.cache.as_deref(), None);
    let (table, status) = load_or_build_profiles(&dir, cfg.grid.x_max, cfg.grid.n)?;
    if status == CacheStatus::Hit {
        println!("cache hit: {}", dir.display());
    }
    Ok(table)
}

fn create(path: &Path) -> Result<BufWriter<fs::File>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(CliError::io(dir))?;
    }
    Ok(BufWriter::new(fs::File::create(path).map_err(CliError::io(path))?))
}

fn cmd_profiles(a: &ProfilesArgs) -> Result<i32> {
    let dir = cache_dir(a.cache.as_deref(), a.out.as_deref());
    let start = Instant::now();
    let (table, status) = load_or_build_profiles(&dir, a.xmax, a.n)?;
    match status {
        CacheStatus::Hit => println!("cache hit: {}", dir.display()),
        CacheStatus::Built => println!("built profiles in {:.2} s, cached in {}", start.elapsed().as_secs_f64(), dir.display()),
    }
    println!("|Q|_2^2 = {:.17e}", table.norms.l2sq_q);
    println!("|Q|_1   = {:.17e}", table.norms.l1_q);
    let report = check_identities(&table);
    for c in &report.checks {
        println!(
            "[{}] {:<9} measured {:+.12e} target {:+.6e} error {:.3e} (tol {:.0e})",
            if c.pass { "PASS" } else { "FAIL" },
            c.name,
            c.measured,
            c.target,
            c.error,
            c.tolerance
        );
    }
    Ok(if report.all_pass() { EXIT_OK } else { EXIT_CHECK })
}

fn cmd_verify(a: &VerifyArgs) -> Result<i32> {
    init_threads(a.common.threads)?;
    let skip = parse_skip(&a.skip).map_err(CliError::Config)?;
    let cfg = load_config(&a.common)?;
    let profiles = load_profiles(&cfg, &a.common)?;
    let suite = Suite::new(&cfg, &profiles);
    let report = suite.run(&skip, |c| println!("{c}"));
    let out = &a.common.out;
    tables::write_report(create(&out.join("report.csv"))?, &report)?;
    serde_json::to_writer_pretty(create(&out.join("report.json"))?, &report)?;
    fs::write(out.join("timings.log"), report.timings()).map_err(CliError::io(out.join("timings.log")))?;
    let failed = report.failures().count();
    println!("{} of {} criteria passed; report in {}", report.checks.len() - failed, report.checks.len(), out.display());
    Ok(if failed == 0 { EXIT_OK } else { EXIT_CHECK })
}

fn scenario(a: &ScenarioArgs) -> Result<(ScenarioConfig, ModulationSystem)> {
    init_threads(a.common.threads)?;
    let mut cfg = load_config(&a.common)?;
    cfg.s_n = a.sn.unwrap_or(cfg.s_n);
    cfg.s_0 = a.s0.unwrap_or(cfg.s_0);
    cfg.validate()?;
    let profiles = load_profiles(&cfg, &a.common)?;
    let m = ModulationSystem::new(cfg.bubbles()?, profiles.norms.l1_q).map_err(CliError::Setup)?;
    Ok((cfg, m))
}

fn cmd_shoot(a: &ScenarioArgs) -> Result<i32> {
    let (cfg, m) = scenario(a)?;
    let opts = ShootOptions::default();
    let out = &a.common.out;
    let start = Instant::now();
    let r = m.shoot(cfg.s_n, cfg.s_0, &opts).map_err(CliError::Numerics)?;
    tables::write_shooting(create(&out.join("shooting.csv"))?, r.xi.len(), cfg.k, &r.history)?;
    tables::write_trajectory(create(&out.join("trajectory.csv"))?, m.config(), &r.trajectory)?;
    println!(
        "shot in {} iterations ({:.2} s): xi = {:?}, zeta = {:?}, N(S_0) = {:.6e}",
        r.iterations,
        start.elapsed().as_secs_f64(),
        r.xi,
        r.zeta,
        r.final_norm
    );
    Ok(if r.final_norm <= 1.0 { EXIT_OK } else { EXIT_CHECK })
}

fn cmd_modulate(a: &ModulateArgs) -> Result<i32> {
    let (cfg, m) = scenario(&a.scenario)?;
    let np = m.classification().kplus.len();
    let xi = if a.xi.is_empty() { vec![0.0; np] } else { a.xi.clone() };
    let zeta = if a.zeta.is_empty() { vec![0.0; cfg.k] } else { a.zeta.clone() };
    if xi.len() != np || zeta.len() != cfg.k {
        return Err(CliError::Config(format!("need {np} xi and {} zeta values", cfg.k)));
    }
    let input = ShootInput { s_n: cfg.s_n, s_0: cfg.s_0, xi, zeta };
    let tr = m.run(&input, &IntegratorOptions::default()).map_err(CliError::Numerics)?;
    let path = a.scenario.common.out.join("trajectory.csv");
    tables::write_trajectory(create(&path)?, m.config(), &tr)?;
    println!("{} samples, {:?} at s = {:.6e}; written to {}", tr.points.len(), tr.exit, tr.exit_s(), path.display());
    Ok(EXIT_OK)
}

fn parse_tend(text: &str, t0: f64) -> Result<f64> {
    let bad = || CliError::Config(format!("--tend {text:?}: expected a time or a multiple like 2x"));
    let t = match text.strip_suffix('x') {
        Some(m) => t0 * m.parse::<f64>().map_err(|_| bad())?,
        None => text.parse::<f64>().map_err(|_| bad())?,
    };
    if t > t0 {
        Ok(t)
    } else {
        Err(CliError::Config(format!("--tend must exceed the initial time {t0}")))
    }
}

fn cmd_evolve(a: &EvolveArgs) -> Result<i32> {
    let cfg = load_config(&a.common)?;
    let length = a.length.unwrap_or(cfg.pde.length);
    let n = a.n.unwrap_or(cfg.pde.n);
    let (u0, k) = match a.init.as_str() {
        "ansatz" => {
            let c = cfg.dynamics_bubbles()?;
            let profiles = load_profiles(&cfg, &a.common)?;
            let st = ParamState::self_similar(&c, a.s.unwrap_or(cfg.pde.s_start));
            let u = physical_ansatz(&c, &st, &profiles, length, n, &cfg.field_options()).map_err(CliError::Setup)?;
            (u, c.k())
        }
        "soliton" => (Field::from_fn(0.0, length, n, eval_q).map_err(CliError::Setup)?, 1),
        path => {
            let f = read_field(Path::new(path))?;
            (f, cfg.k)
        }
    };
    let t_end = parse_tend(&a.tend, u0.t)?;
    let samples = a.samples.max(1);
    let times: Vec<f64> =
        (1..=samples).map(|i| if i == samples { t_end } else { u0.t + (t_end - u0.t) * i as f64 / samples as f64 }).collect();
    let opts = SolverOptions::stable_for(&u0, cfg.pde.dt_fraction);
    let start = Instant::now();
    let mut fields = vec![u0.clone()];
    fields.extend(evolve(&u0, &times, &opts).map_err(CliError::Numerics)?);
    let peaks = fields.iter().map(|f| fit_bubbles(f, k)).collect::<std::result::Result<Vec<_>, _>>();
    let peaks = peaks.map_err(CliError::Numerics)?;
    let out = &a.common.out;
    tables::write_diagnostics(create(&out.join("diagnostics.csv"))?, &fields, &peaks)?;
    write_field(&out.join("final.gkdvfld"), fields.last().unwrap())?;
    println!(
        "evolved t = {:.6e} -> {:.6e} with dt {:.3e} in {:.2} s; output in {}",
        u0.t,
        t_end,
        opts.dt,
        start.elapsed().as_secs_f64(),
        out.display()
    );
    Ok(EXIT_OK)
}
