//! Experiment orchestration: per-cell simulations, per-round CSVs and the
//! lifetime summary table.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::sim_engine::{
    run_simulation, simulated_energy_grid, GridCell, LifetimeSummary, NetworkConfig, ProtocolKind,
    RoundMetrics,
};
use crate::stats::{mean, sample_sd};

use super::config::{ExperimentSpec, SweepAxis};

pub const ROUND_CSV_HEADER: &str =
    "round,alive,total_residual_j,ch_count,ch_energy_mean_j,ch_energy_var,deaths";

pub const SUMMARY_CSV_HEADER: &str = "protocol,sweep_axis,sweep_value,runs,\
fdn_mean,fdn_sd,hdn_mean,hdn_sd,ldn_mean,ldn_sd,censored_runs,\
eerpms_fdn_gain_pct,eerpms_hdn_gain_pct,eerpms_ldn_gain_pct";

pub const SURFACE_CSV_HEADER: &str = "k,d_m,predicted_j,simulated_mean_j";

/// Per-round CSV, LF line endings. `deaths` lists node ids joined by `;`.
pub fn round_csv_string(rounds: &[RoundMetrics]) -> String {
    let mut out = String::with_capacity(64 * (rounds.len() + 1));
    out.push_str(ROUND_CSV_HEADER);
    out.push('\n');
    for m in rounds {
        let deaths: Vec<String> = m.dead_this_round.iter().map(|d| d.to_string()).collect();
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            m.round,
            m.alive_count,
            m.total_residual_j,
            m.ch_count,
            m.ch_energy_mean_j(),
            m.ch_energy_variance,
            deaths.join(";")
        );
    }
    out
}

/// `(round, alive, deaths)` rows read back from a per-round CSV.
pub fn parse_round_csv(text: &str) -> Result<Vec<(u32, usize, Vec<usize>)>> {
    let mut lines = text.lines();
    if lines.next() != Some(ROUND_CSV_HEADER) {
        return Err(Error::Config("per-round CSV header mismatch".into()));
    }
    let bad = |line: &str| Error::Config(format!("malformed per-round CSV line: {line:?}"));
    lines
        .map(|line| {
            let f: Vec<&str> = line.split(',').collect();
            if f.len() != 7 {
                return Err(bad(line));
            }
            let round = f[0].parse().map_err(|_| bad(line))?;
            let alive = f[1].parse().map_err(|_| bad(line))?;
            let deaths = if f[6].is_empty() {
                Vec::new()
            } else {
                f[6].split(';')
                    .map(|d| d.parse().map_err(|_| bad(line)))
                    .collect::<Result<_>>()?
            };
            Ok((round, alive, deaths))
        })
        .collect()
}

/// Lifetime recomputed from a per-round CSV alone.
pub fn lifetime_from_csv(text: &str) -> Result<LifetimeSummary> {
    let rows = parse_round_csv(text)?;
    let n = rows.first().map_or(0, |(_, alive, deaths)| alive + deaths.len());
    Ok(LifetimeSummary::from_death_counts(
        n,
        rows.iter().map(|(r, _, d)| (*r, d.len())),
    ))
}

pub fn surface_csv_string(cells: &[GridCell]) -> String {
    let mut out = String::from(SURFACE_CSV_HEADER);
    out.push('\n');
    for c in cells {
        let _ = writeln!(out, "{},{},{},{}", c.k, c.d_m, c.predicted_j, c.simulated_mean_j);
    }
    out
}

/// One value of the swept parameter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SweepPoint {
    Base,
    NodeCount(usize),
    Omega1(f64),
}

impl SweepPoint {
    pub fn axis(&self) -> &'static str {
        match self {
            Self::Base => "none",
            Self::NodeCount(_) => "node_count",
            Self::Omega1(_) => "omega1",
        }
    }

    pub fn value(&self) -> String {
        match self {
            Self::Base => String::new(),
            Self::NodeCount(n) => n.to_string(),
            Self::Omega1(w) => w.to_string(),
        }
    }

    fn file_tag(&self) -> String {
        match self {
            Self::Base => String::new(),
            Self::NodeCount(n) => format!("_n{n}"),
            Self::Omega1(w) => format!("_omega1-{w}"),
        }
    }

    pub fn apply(&self, base: &NetworkConfig) -> NetworkConfig {
        let mut c = base.clone();
        match *self {
            Self::Base => {}
            Self::NodeCount(n) => c.area.node_count = n,
            Self::Omega1(w) => {
                c.selection.omega1 = w;
                c.selection.omega2 = 1.0 - w;
            }
        }
        c
    }
}

fn sweep_points(axis: &SweepAxis) -> Vec<SweepPoint> {
    match axis {
        SweepAxis::None | SweepAxis::KAndDchGrid { .. } => vec![SweepPoint::Base],
        SweepAxis::NodeCount(v) => v.iter().map(|&n| SweepPoint::NodeCount(n)).collect(),
        SweepAxis::Omega1(v) => v.iter().map(|&w| SweepPoint::Omega1(w)).collect(),
    }
}

pub fn round_csv_name(protocol: ProtocolKind, point: &SweepPoint, seed: u64) -> String {
    format!("{protocol}{}_seed{seed}.csv", point.file_tag())
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub protocol: ProtocolKind,
    pub point: SweepPoint,
    pub seed: u64,
    pub lifetime: LifetimeSummary,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeanSd {
    pub mean: f64,
    pub sd: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub protocol: ProtocolKind,
    pub point: SweepPoint,
    pub runs: usize,
    pub fdn: MeanSd,
    pub hdn: MeanSd,
    pub ldn: MeanSd,
    /// Runs that hit `max_rounds` before the last death.
    pub censored_runs: usize,
    /// `(EERPMS − this)/this · 100` for FDN, HDN, LDN at the same sweep point.
    pub eerpms_gain_pct: Option<[f64; 3]>,
}

fn mean_sd(xs: &[f64]) -> MeanSd {
    MeanSd {
        mean: mean(xs).unwrap_or(0.0),
        sd: sample_sd(xs).unwrap_or(0.0),
    }
}

/// Mean and sample sd of FDN/HDN/LDN per (sweep point, protocol), in
/// first-appearance order. Metrics a run never reached are censored at its
/// last simulated round.
pub fn summarize_lifetime(records: &[RunRecord]) -> Vec<SummaryRow> {
    let mut keys: Vec<(SweepPoint, ProtocolKind)> = Vec::new();
    for r in records {
        if !keys.contains(&(r.point, r.protocol)) {
            keys.push((r.point, r.protocol));
        }
    }
    let mut rows: Vec<SummaryRow> = keys
        .iter()
        .map(|&(point, protocol)| {
            let runs: Vec<&LifetimeSummary> = records
                .iter()
                .filter(|r| r.point == point && r.protocol == protocol)
                .map(|r| &r.lifetime)
                .collect();
            let pick = |f: fn(&LifetimeSummary) -> Option<u32>| -> Vec<f64> {
                runs.iter()
                    .map(|l| f64::from(f(l).unwrap_or(l.rounds_run)))
                    .collect()
            };
            SummaryRow {
                protocol,
                point,
                runs: runs.len(),
                fdn: mean_sd(&pick(|l| l.fdn)),
                hdn: mean_sd(&pick(|l| l.hdn)),
                ldn: mean_sd(&pick(|l| l.ldn)),
                censored_runs: runs.iter().filter(|l| l.ldn.is_none()).count(),
                eerpms_gain_pct: None,
            }
        })
        .collect();
    let snapshot = rows.clone();
    for row in rows.iter_mut().filter(|r| r.protocol != ProtocolKind::Eerpms) {
        let Some(e) = snapshot
            .iter()
            .find(|s| s.protocol == ProtocolKind::Eerpms && s.point == row.point)
        else {
            continue;
        };
        let gain = |ours: f64, base: f64| {
            if base > 0.0 {
                (ours - base) / base * 100.0
            } else {
                0.0
            }
        };
        row.eerpms_gain_pct = Some([
            gain(e.fdn.mean, row.fdn.mean),
            gain(e.hdn.mean, row.hdn.mean),
            gain(e.ldn.mean, row.ldn.mean),
        ]);
    }
    rows
}

pub fn summary_csv_string(rows: &[SummaryRow]) -> String {
    let mut out = String::from(SUMMARY_CSV_HEADER);
    out.push('\n');
    for r in rows {
        let gains = r.eerpms_gain_pct.map_or_else(
            || ",,".to_string(),
            |g| format!("{},{},{}", g[0], g[1], g[2]),
        );
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{}",
            r.protocol,
            r.point.axis(),
            r.point.value(),
            r.runs,
            r.fdn.mean,
            r.fdn.sd,
            r.hdn.mean,
            r.hdn.sd,
            r.ldn.mean,
            r.ldn.sd,
            r.censored_runs,
            gains
        );
    }
    out
}

/// Creates `dir` and proves it is writable.
pub fn prepare_out_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let probe = dir.join(".eerpms-write-probe");
    fs::write(&probe, b"").map_err(|e| Error::io(&probe, e))?;
    fs::remove_file(&probe).map_err(|e| Error::io(&probe, e))
}

fn write_file(path: PathBuf, contents: &str) -> Result<PathBuf> {
    fs::write(&path, contents).map_err(|e| Error::io(&path, e))?;
    Ok(path)
}

/// Outcome of [`run_experiment`].
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentOutput {
    pub files: Vec<PathBuf>,
    pub records: Vec<RunRecord>,
    pub summary: Vec<SummaryRow>,
}

/// Runs every (protocol, sweep point, seed) cell in parallel, writes one
/// per-round CSV per cell and then `summary.csv`. In grid mode writes
/// `energy_surface.csv` instead. Everything is validated before the first
/// simulation starts.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<ExperimentOutput> {
    spec.validate()?;
    if let SweepAxis::KAndDchGrid { ks, ds } = &spec.sweep {
        prepare_out_dir(&spec.out_dir)?;
        let cells = simulated_energy_grid(
            &spec.base.area,
            &spec.base.radio,
            spec.base.initial_energy_j,
            &spec.seeds,
            ks,
            ds,
        )?;
        let path = write_file(spec.out_dir.join("energy_surface.csv"), &surface_csv_string(&cells))?;
        return Ok(ExperimentOutput {
            files: vec![path],
            records: Vec::new(),
            summary: Vec::new(),
        });
    }

    let mut jobs = Vec::new();
    for point in sweep_points(&spec.sweep) {
        for &protocol in &spec.protocols {
            for &seed in &spec.seeds {
                let cfg = NetworkConfig {
                    protocol,
                    seed,
                    ..point.apply(&spec.base)
                };
                cfg.validate()?;
                jobs.push((protocol, point, seed, cfg));
            }
        }
    }
    prepare_out_dir(&spec.out_dir)?;

    let results: Vec<(RunRecord, PathBuf)> = jobs
        .par_iter()
        .map(|(protocol, point, seed, cfg)| {
            let outcome = run_simulation(cfg)?;
            let path = write_file(
                spec.out_dir.join(round_csv_name(*protocol, point, *seed)),
                &round_csv_string(&outcome.rounds),
            )?;
            let record = RunRecord {
                protocol: *protocol,
                point: *point,
                seed: *seed,
                lifetime: outcome.lifetime,
            };
            Ok((record, path))
        })
        .collect::<Result<_>>()?;

    let (records, mut files): (Vec<_>, Vec<_>) = results.into_iter().unzip();
    let summary = summarize_lifetime(&records);
    files.push(write_file(spec.out_dir.join("summary.csv"), &summary_csv_string(&summary))?);
    Ok(ExperimentOutput {
        files,
        records,
        summary,
    })
}
