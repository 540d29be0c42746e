//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

use std::process::{Command, ExitCode};

use rayon::prelude::*;

use eerpms::bat_optimizer::BatParams;
use eerpms::experiment_cli::verify::{
    geometry_check, otsu_check, predicted_grid_check, simulated_grid_check, wedge_check,
    CheckLine,
};
use eerpms::optimal_config::AreaSpec;
use eerpms::radio_energy::RadioParams;
use eerpms::sim_engine::{run_simulation, NetworkConfig, ProtocolKind, SimulationOutcome};
use eerpms::stats::{mean, median, spearman};

const BIN: &str = env!("CARGO_BIN_EXE_eerpms");

fn line(name: &str, passed: bool, detail: String) -> CheckLine {
    CheckLine {
        name: name.into(),
        passed,
        detail,
    }
}

fn reference_area() -> AreaSpec {
    AreaSpec::new(150.0, 100).unwrap()
}

fn theory_cli() -> CheckLine {
    let out = Command::new(BIN).arg("theory").output().expect("run theory");
    let text = String::from_utf8_lossy(&out.stdout);
    let field = |key: &str| {
        text.lines()
            .find_map(|l| l.strip_prefix(&format!("{key} = ")))
            .map(str::to_owned)
    };
    let k: Option<usize> = field("k_star").and_then(|v| v.parse().ok());
    let d: Option<f64> = field("d_star_m").and_then(|v| v.parse().ok());
    let ok = out.status.success() && k == Some(9) && d.is_some_and(|d| (d - 91.74).abs() <= 0.01);
    line(
        "C1 closed-form optimum from `theory`",
        ok,
        format!("k_star = {k:?}, d_star_m = {d:?} (want 9 and 91.74 ± 0.01)"),
    )
}

fn energy_landscape() -> Vec<CheckLine> {
    let area = reference_area();
    let radio = RadioParams::default();
    let mut a = predicted_grid_check(&area, &radio).unwrap();
    a.name = format!("C2a {}", a.name);
    let (mut b, _) = simulated_grid_check(&area, &radio, 0.5, 10).unwrap();
    b.name = format!("C2b {}", b.name);
    vec![a, b]
}

fn wedge() -> CheckLine {
    let (mut l, _) = wedge_check(&reference_area(), 1_000_000, 19).unwrap();
    l.name = format!("C3 {}", l.name);
    l
}

fn otsu() -> Vec<CheckLine> {
    let (lines, _) = otsu_check(50, BatParams::default()).unwrap();
    lines
        .into_iter()
        .zip(["C4a", "C4b"])
        .map(|(mut l, tag)| {
            l.name = format!("{tag} {}", l.name);
            l
        })
        .collect()
}

fn geometry() -> CheckLine {
    let (mut l, _) = geometry_check(&RadioParams::default(), 100_000, 5).unwrap();
    l.name = format!("C5 {}", l.name);
    l
}

struct Runs {
    seeds: Vec<u64>,
    /// Indexed `[protocol][seed]` in `ProtocolKind::ALL` order.
    outcomes: Vec<Vec<SimulationOutcome>>,
}

fn comparison_runs() -> Runs {
    let seeds: Vec<u64> = (1..=20).collect();
    let jobs: Vec<(usize, u64)> = (0..3).flat_map(|p| seeds.iter().map(move |&s| (p, s))).collect();
    let mut flat: Vec<(usize, SimulationOutcome)> = jobs
        .par_iter()
        .map(|&(p, seed)| {
            let cfg = NetworkConfig {
                protocol: ProtocolKind::ALL[p],
                seed,
                ..NetworkConfig::default()
            };
            (p, run_simulation(&cfg).unwrap())
        })
        .collect();
    let mut outcomes = vec![Vec::new(), Vec::new(), Vec::new()];
    for (p, o) in flat.drain(..) {
        outcomes[p].push(o);
    }
    Runs { seeds, outcomes }
}

fn conservation_and_determinism(runs: &Runs) -> CheckLine {
    let mut worst: f64 = 0.0;
    let mut rounds = 0usize;
    for o in runs.outcomes.iter().flatten() {
        for m in &o.rounds {
            worst = worst.max(m.conservation_error_rel);
            rounds += 1;
        }
    }
    let dir_a = tempfile::tempdir().unwrap();
    let dir_b = tempfile::tempdir().unwrap();
    let mut identical = true;
    for p in ProtocolKind::ALL {
        for dir in [&dir_a, &dir_b] {
            let st = Command::new(BIN)
                .args(["simulate", "--seed", "7", "--protocol", p.name(), "--out"])
                .arg(dir.path())
                .output()
                .unwrap();
            identical &= st.status.success();
        }
        let name = format!("{p}_seed7.csv");
        let a = std::fs::read(dir_a.path().join(&name)).unwrap_or_default();
        let b = std::fs::read(dir_b.path().join(&name)).unwrap_or_default();
        identical &= !a.is_empty() && a == b;
    }
    line(
        "C6 energy conservation and byte-identical CSVs",
        worst <= 1e-12 && identical,
        format!(
            "{rounds} rounds over {} runs, worst relative gap {worst:.2e} (limit 1e-12); CSV re-runs identical: {identical}",
            runs.outcomes.iter().map(Vec::len).sum::<usize>()
        ),
    )
}

fn residual_at(o: &SimulationOutcome, round: u32) -> f64 {
    o.rounds
        .iter()
        .find(|m| m.round == round)
        .map_or(0.0, |m| m.total_residual_j)
}

fn comparative_lifetime(runs: &Runs) -> Vec<CheckLine> {
    let [e, r, c] = [0, 1, 2].map(|p| &runs.outcomes[p]);
    let fdn = |os: &Vec<SimulationOutcome>| {
        let v: Vec<f64> = os
            .iter()
            .map(|o| f64::from(o.lifetime.fdn.unwrap_or(o.lifetime.rounds_run)))
            .collect();
        median(&v).unwrap()
    };
    let (fe, fr, fc) = (fdn(e), fdn(r), fdn(c));
    let a = line(
        "C7a median FDN, EERPMS above both baselines",
        fe > fr && fe > fc,
        format!("EERPMS {fe}, RLEACH {fr}, CRPFCM {fc}"),
    );

    let wins = (0..runs.seeds.len())
        .filter(|&i| {
            let x = residual_at(&e[i], 800);
            x > residual_at(&r[i], 800) && x > residual_at(&c[i], 800)
        })
        .count();
    let mean_res = |os: &Vec<SimulationOutcome>| {
        mean(&os.iter().map(|o| residual_at(o, 800)).collect::<Vec<_>>()).unwrap()
    };
    let b = line(
        "C7b residual energy at round 800, EERPMS above both baselines",
        wins >= 15,
        format!(
            "{wins}/20 seeds (need 15); mean residual J: EERPMS {:.3}, RLEACH {:.3}, CRPFCM {:.3}",
            mean_res(e),
            mean_res(r),
            mean_res(c)
        ),
    );

    let load_var = |os: &Vec<SimulationOutcome>| {
        let per_run: Vec<f64> = os
            .iter()
            .filter_map(|o| {
                let v: Vec<f64> = o
                    .rounds
                    .iter()
                    .take_while(|m| m.round <= 100)
                    .filter_map(|m| m.member_count_variance())
                    .collect();
                mean(&v)
            })
            .collect();
        mean(&per_run).unwrap()
    };
    let (ve, vr) = (load_var(e), load_var(r));
    let c7c = line(
        "C7c CH member-count variance over rounds 1-100, EERPMS below RLEACH",
        ve < vr,
        format!("EERPMS {ve:.3}, RLEACH {vr:.3}"),
    );
    vec![a, b, c7c]
}

fn omega_sweep() -> CheckLine {
    let ws = [0.0, 0.25, 0.5, 0.75, 1.0];
    let cells: Vec<(usize, u64)> = (0..ws.len()).flat_map(|i| (1..=10).map(move |s| (i, s))).collect();
    let results: Vec<(usize, u32, u32)> = cells
        .par_iter()
        .map(|&(i, seed)| {
            let mut cfg = NetworkConfig {
                seed,
                ..NetworkConfig::default()
            };
            cfg.selection.omega1 = ws[i];
            cfg.selection.omega2 = 1.0 - ws[i];
            let l = run_simulation(&cfg).unwrap().lifetime;
            (i, l.fdn.unwrap_or(l.rounds_run), l.ldn.unwrap_or(l.rounds_run))
        })
        .collect();
    let avg = |i: usize, pick: fn(&(usize, u32, u32)) -> u32| {
        let v: Vec<f64> = results
            .iter()
            .filter(|r| r.0 == i)
            .map(|r| f64::from(pick(r)))
            .collect();
        mean(&v).unwrap()
    };
    let fdn: Vec<f64> = (0..ws.len()).map(|i| avg(i, |r| r.1)).collect();
    let ldn: Vec<f64> = (0..ws.len()).map(|i| avg(i, |r| r.2)).collect();
    let rf = spearman(&ws, &fdn);
    let rl = spearman(&ws, &ldn);
    line(
        "C8 omega1 sweep trends",
        rf.is_some_and(|r| r > 0.0) && rl.is_some_and(|r| r < 0.0),
        format!("Spearman(omega1, FDN) = {rf:?}, Spearman(omega1, LDN) = {rl:?}; mean FDN {fdn:?}, mean LDN {ldn:?}"),
    )
}

fn cluster_stability(runs: &Runs) -> CheckLine {
    let k = NetworkConfig::default().k_override.unwrap();
    let mut off_target = 0;
    let mut checked = 0;
    for p in [0, 2] {
        for o in &runs.outcomes[p] {
            for m in o.rounds.iter().take_while(|m| m.alive_count == 100) {
                checked += 1;
                if m.ch_count != k {
                    off_target += 1;
                }
            }
        }
    }
    let counts: Vec<f64> = runs.outcomes[1]
        .iter()
        .flat_map(|o| o.rounds.iter().take_while(|m| m.alive_count == 100))
        .map(|m| m.ch_count as f64)
        .collect();
    let var = eerpms::stats::population_variance(&counts).unwrap_or(0.0);
    line(
        "C9 cluster count before the first death",
        off_target == 0 && checked > 0 && var > 0.0,
        format!(
            "EERPMS/CRPFCM: {off_target}/{checked} rounds with a CH count other than {k}; RLEACH CH-count variance {var:.3}"
        ),
    )
}

fn main() -> ExitCode {
    let mut lines = vec![theory_cli()];
    lines.extend(energy_landscape());
    lines.push(wedge());
    lines.extend(otsu());
    lines.push(geometry());
    let runs = comparison_runs();
    lines.push(conservation_and_determinism(&runs));
    lines.extend(comparative_lifetime(&runs));
    lines.push(omega_sweep());
    lines.push(cluster_stability(&runs));

    for l in &lines {
        println!("{l}");
    }
    let failed = lines.iter().filter(|l| !l.passed).count();
    println!("acceptance: {} passed, {failed} failed", lines.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
