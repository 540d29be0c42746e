use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use eerpms::experiment_cli::runner::{prepare_out_dir, round_csv_name, SweepPoint};
use eerpms::experiment_cli::{
    round_csv_string, run_experiment, verify, ConfigFile, OUT_DIR_ENV,
};
use eerpms::optimal_config::{plan, theorem1_max_radius};
use eerpms::sim_engine::{run_simulation, ProtocolKind};
use eerpms::Error;

#[derive(Parser)]
#[command(version, about = "Clustering routing simulator for circular sensor fields")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Config file (TOML sections, key = value).
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// eerpms, rleach or crpfcm.
    #[arg(long)]
    protocol: Option<ProtocolKind>,
    /// Output directory; also read from the environment.
    #[arg(long, env = OUT_DIR_ENV)]
    out: Option<PathBuf>,
    #[arg(long)]
    max_rounds: Option<u32>,
}

#[derive(Subcommand)]
enum Command {
    /// Run one simulation and write its per-round CSV.
    Simulate(Common),
    /// Run the experiment described by the config's [experiment] section.
    Sweep(Common),
    /// Print the closed-form optimum and feasibility band.
    Theory(Common),
    /// Run the oracle suites and print one PASS/FAIL line each.
    Verify(Common),
}

enum Failure {
    Config(String),
    Runtime(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        if e.is_config() {
            Failure::Config(e.to_string())
        } else {
            Failure::Runtime(e.to_string())
        }
    }
}

fn load(common: &Common) -> Result<ConfigFile, Failure> {
    let mut file = match &common.config {
        Some(path) => ConfigFile::load(path)?,
        None => ConfigFile::default(),
    };
    if let Some(seed) = common.seed {
        file.network.seed = seed;
        file.experiment.seeds = vec![seed];
    }
    if let Some(p) = common.protocol {
        file.network.protocol = p;
        file.experiment.protocols = vec![p];
    }
    if let Some(m) = common.max_rounds {
        file.network.max_rounds = m;
    }
    if let Some(out) = &common.out {
        file.experiment.out_dir = out.clone();
    }
    Ok(file)
}

fn simulate(common: &Common) -> Result<(), Failure> {
    let file = load(common)?;
    let cfg = file.network_config()?;
    let out_dir = file.experiment.out_dir.clone();
    prepare_out_dir(&out_dir)?;
    let outcome = run_simulation(&cfg)?;
    let path = out_dir.join(round_csv_name(cfg.protocol, &SweepPoint::Base, cfg.seed));
    std::fs::write(&path, round_csv_string(&outcome.rounds)).map_err(|e| Error::io(&path, e))?;
    let l = outcome.lifetime;
    let show = |v: Option<u32>| v.map_or_else(|| "none".to_string(), |r| r.to_string());
    println!("protocol = {}", cfg.protocol);
    println!("seed = {}", cfg.seed);
    println!("rounds = {}", l.rounds_run);
    println!("fdn = {}", show(l.fdn));
    println!("hdn = {}", show(l.hdn));
    println!("ldn = {}", show(l.ldn));
    println!("csv = {}", path.display());
    Ok(())
}

fn sweep(common: &Common) -> Result<(), Failure> {
    let spec = load(common)?.experiment_spec()?;
    let out = run_experiment(&spec)?;
    for f in &out.files {
        println!("{}", f.display());
    }
    Ok(())
}

fn theory(common: &Common) -> Result<(), Failure> {
    let cfg = load(common)?.network_config()?;
    let p = plan(&cfg.area, &cfg.radio);
    let d_th = cfg.radio.distance_threshold();
    println!("node_count = {}", cfg.area.node_count);
    println!("radius_m = {}", cfg.area.radius_m);
    println!("d_th_m = {d_th:.4}");
    println!("k_star = {}", p.k_star);
    println!("d_star_m = {:.2}", p.d_star_m);
    match theorem1_max_radius(d_th, p.k_star) {
        Ok(r) => println!("max_radius_m = {r:.4}"),
        Err(_) => println!("max_radius_m = none"),
    }
    println!("feasible = {}", p.feasible);
    match p.band {
        Some((lo, hi)) => println!("ch_band_m = {lo:.4} .. {hi:.4}"),
        None => println!("ch_band_m = none"),
    }
    println!("d_star_in_band = {}", p.d_star_in_band);
    Ok(())
}

fn verify_all(common: &Common) -> Result<bool, Failure> {
    let cfg = load(common)?.network_config()?;
    let lines = verify::run_all(&cfg.area, &cfg.radio, cfg.initial_energy_j, cfg.bat)?;
    for l in &lines {
        println!("{l}");
    }
    Ok(lines.iter().all(|l| l.passed))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let result = match &cli.command {
        Command::Simulate(c) => simulate(c),
        Command::Sweep(c) => sweep(c),
        Command::Theory(c) => theory(c),
        Command::Verify(c) => verify_all(c).and_then(|ok| {
            if ok {
                Ok(())
            } else {
                Err(Failure::Runtime("one or more verification suites failed".into()))
            }
        }),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(msg)) => {
            eprintln!("config error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
