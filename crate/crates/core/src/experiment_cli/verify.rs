//! Oracle suites behind the `verify` subcommand. Each suite returns the
//! measured numbers plus a pass flag at its stated tolerance.

use std::f64::consts::{PI, TAU};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::angular_otsu::{
    build_histogram, exhaustive_best_threshold, AngleHistogram, ObjectiveWeights, ThresholdSet,
};
use crate::bat_optimizer::{optimize_thresholds, BatParams};
use crate::error::Result;
use crate::optimal_config::{
    expected_sq_distance_cm_to_ch, feasible_ch_band, optimal_ch_distance, predicted_energy_argmin,
    theorem1_max_radius, AreaSpec,
};
use crate::radio_energy::RadioParams;
use crate::sim_engine::{grid_argmin, simulated_energy_grid, GridCell};

#[derive(Debug, Clone, PartialEq)]
pub struct CheckLine {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl std::fmt::Display for CheckLine {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let tag = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "{tag} {}: {}", self.name, self.detail)
    }
}

/// Argmin of the analytical energy over `K ∈ [1,30]`, `d ∈ [0,R]` step 0.1 m.
/// Passes at `K = 9`, `|d − 91.7| ≤ 0.1`.
pub fn predicted_grid_check(area: &AreaSpec, radio: &RadioParams) -> Result<CheckLine> {
    let (k, d, e) = predicted_energy_argmin(area, radio, 1..=30, 0.1)?;
    Ok(CheckLine {
        name: "predicted energy grid argmin".into(),
        passed: k == 9 && (d - 91.7).abs() <= 0.1 + 1e-9,
        detail: format!("argmin K = {k}, d = {d:.1} m, E = {e:.6} J (target K = 9, d = 91.7 ± 0.1)"),
    })
}

/// Forced-placement grid `K ∈ [1,30]`, `d ∈ {0, 10, …, R}` averaged over
/// seeds `0..seeds`. Passes when the argmin has `K ∈ [8,11]`, `d ∈ [80,100]`.
pub fn simulated_grid_check(
    area: &AreaSpec,
    radio: &RadioParams,
    initial_energy_j: f64,
    seeds: u64,
) -> Result<(CheckLine, Vec<GridCell>)> {
    let seeds: Vec<u64> = (0..seeds).collect();
    let ks: Vec<usize> = (1..=30).collect();
    let steps = (area.radius_m / 10.0).floor() as usize;
    let ds: Vec<f64> = (0..=steps).map(|i| i as f64 * 10.0).collect();
    let cells = simulated_energy_grid(area, radio, initial_energy_j, &seeds, &ks, &ds)?;
    let best = grid_argmin(&cells).expect("grid is non-empty");
    let line = CheckLine {
        name: "simulated energy grid argmin".into(),
        passed: (8..=11).contains(&best.k) && (80.0..=100.0).contains(&best.d_m),
        detail: format!(
            "argmin K = {}, d = {} m, E = {:.6} J over {} seeds (target K in [8,11], d in [80,100])",
            best.k,
            best.d_m,
            best.simulated_mean_j,
            seeds.len()
        ),
    };
    Ok((line, cells))
}

/// Mean squared distance from a uniform point of the triangular wedge
/// `{0 ≤ x ≤ R, |y| ≤ x·tan(π/k)}` to `(d, 0)`.
pub fn wedge_monte_carlo(radius: f64, k: usize, d: f64, samples: usize, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let t = (PI / k as f64).tan();
    let mut acc = 0.0;
    for _ in 0..samples {
        // x has density ∝ x on [0, R]; y is uniform across the wedge at x
        let x = radius * rng.gen::<f64>().sqrt();
        let y = (2.0 * rng.gen::<f64>() - 1.0) * x * t;
        acc += (x - d).powi(2) + y * y;
    }
    acc / samples as f64
}

#[derive(Debug, Clone, PartialEq)]
pub struct WedgeRow {
    pub k: usize,
    pub d_m: f64,
    pub closed_form: f64,
    pub monte_carlo: f64,
    pub rel_error: f64,
}

/// Closed-form CM–CH squared distance against the wedge Monte Carlo for
/// `k ∈ {9, 10, 12}` at three CH distances, 5% tolerance.
pub fn wedge_check(area: &AreaSpec, samples: usize, seed: u64) -> Result<(CheckLine, Vec<WedgeRow>)> {
    let mut rows = Vec::new();
    for k in [9, 10, 12] {
        for d in [45.0, optimal_ch_distance(area, k), 135.0] {
            let closed = expected_sq_distance_cm_to_ch(area, k, d)?;
            let mc = wedge_monte_carlo(area.radius_m, k, d, samples, seed ^ ((k as u64) << 8));
            rows.push(WedgeRow {
                k,
                d_m: d,
                closed_form: closed,
                monte_carlo: mc,
                rel_error: (mc - closed).abs() / closed,
            });
        }
    }
    let worst = rows.iter().map(|r| r.rel_error).fold(0.0, f64::max);
    let line = CheckLine {
        name: "expected CM-CH squared distance vs wedge Monte Carlo".into(),
        passed: worst < 0.05,
        detail: format!("{} cases, {samples} samples each, worst relative error {:.3}% (limit 5%)", rows.len(), worst * 100.0),
    };
    Ok((line, rows))
}

/// Classical multi-level Otsu by direct enumeration: maximises
/// `Σ ω_k (μ_k − μ_T)²` using bin probabilities, first maximiser wins.
pub fn classical_multi_otsu(h: &AngleHistogram, k: usize) -> Vec<usize> {
    let p = h.probabilities();
    let l = p.len();
    let mu_t: f64 = p.iter().enumerate().map(|(i, &pi)| i as f64 * pi).sum();
    let sigma_b = |cuts: &[usize]| -> f64 {
        let mut bounds = vec![0];
        bounds.extend_from_slice(cuts);
        bounds.push(l);
        bounds
            .windows(2)
            .map(|w| {
                let omega: f64 = p[w[0]..w[1]].iter().sum();
                if omega == 0.0 {
                    return 0.0;
                }
                let mu = (w[0]..w[1]).map(|i| i as f64 * p[i]).sum::<f64>() / omega;
                omega * (mu - mu_t).powi(2)
            })
            .sum()
    };
    fn walk(
        start: usize,
        l: usize,
        left: usize,
        cur: &mut Vec<usize>,
        best: &mut (f64, Vec<usize>),
        f: &dyn Fn(&[usize]) -> f64,
    ) {
        if left == 0 {
            let s = f(cur);
            if s > best.0 {
                *best = (s, cur.clone());
            }
            return;
        }
        for t in start..=(l - left) {
            cur.push(t);
            walk(t + 1, l, left - 1, cur, best, f);
            cur.pop();
        }
    }
    let mut best = (f64::NEG_INFINITY, Vec::new());
    walk(1, l, k - 1, &mut Vec::new(), &mut best, &sigma_b);
    best.1
}

#[derive(Debug, Clone, PartialEq)]
pub struct OtsuCase {
    pub k: usize,
    pub bat_objective: f64,
    pub exhaustive_objective: f64,
    /// Exhaustive maximiser under `α = (1, 0)` equals the classical one.
    pub classical_match: bool,
}

/// `cases` random 100-node histograms at `L = 36`, `k` cycling through 2, 3, 4.
pub fn otsu_check(cases: usize, bat: BatParams) -> Result<(Vec<CheckLine>, Vec<OtsuCase>)> {
    const BINS: usize = 36;
    let w = ObjectiveWeights::default();
    let pure = ObjectiveWeights::new(1.0, 0.0)?;
    let mut out = Vec::with_capacity(cases);
    for i in 0..cases {
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0000 + i as u64);
        let angles: Vec<f64> = (0..100).map(|_| rng.gen::<f64>() * TAU).collect();
        let h = build_histogram(&angles, BINS)?;
        let k = 2 + i % 3;
        let (_, ex) = exhaustive_best_threshold(&h, k, w)?;
        let (_, ba) = optimize_thresholds(&h, k, w, BatParams { seed: i as u64, ..bat })?;
        let (ex_pure, _) = exhaustive_best_threshold(&h, k, pure)?;
        let classical = ThresholdSet::new(classical_multi_otsu(&h, k), BINS)?;
        out.push(OtsuCase {
            k,
            bat_objective: ba,
            exhaustive_objective: ex,
            classical_match: ex_pure == classical,
        });
    }
    let good = out
        .iter()
        .filter(|c| c.bat_objective >= 0.99 * c.exhaustive_objective)
        .count();
    let need = (cases * 48).div_ceil(50);
    let matches = out.iter().filter(|c| c.classical_match).count();
    let lines = vec![
        CheckLine {
            name: "bat optimizer vs exhaustive search".into(),
            passed: good >= need,
            detail: format!("{good}/{cases} cases reach 0.99 x the exhaustive optimum (need {need})"),
        },
        CheckLine {
            name: "exhaustive search vs classical multi-Otsu".into(),
            passed: matches == cases,
            detail: format!("{matches}/{cases} maximisers identical under alpha = (1, 0)"),
        },
    ];
    Ok((lines, out))
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeometryCase {
    pub radius_m: f64,
    pub k: usize,
    pub d_ch_m: f64,
    pub violations: usize,
    pub max_distance_m: f64,
}

/// Samples sector points uniformly and checks every one is within `d_th`
/// of a CH placed at either end of the feasible band.
pub fn geometry_check(radio: &RadioParams, samples: usize, seed: u64) -> Result<(CheckLine, Vec<GeometryCase>)> {
    let d_th = radio.distance_threshold();
    let mut cases = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for (r, k) in [(150.0, 9), (150.0, 10), (150.0, 12), (120.0, 6), (80.0, 4)] {
        debug_assert!(r <= theorem1_max_radius(d_th, k)?);
        let area = AreaSpec::new(r, 100)?;
        let (lo, hi) = feasible_ch_band(&area, d_th, k)?;
        for d in [lo, hi] {
            let half = PI / k as f64;
            let mut violations = usize::from(d > d_th + 1e-9);
            let mut max_distance: f64 = 0.0;
            for _ in 0..samples {
                let rho = r * rng.gen::<f64>().sqrt();
                let phi = (2.0 * rng.gen::<f64>() - 1.0) * half;
                let dist = (rho * phi.cos() - d).hypot(rho * phi.sin());
                max_distance = max_distance.max(dist);
                if dist > d_th + 1e-9 {
                    violations += 1;
                }
            }
            cases.push(GeometryCase {
                radius_m: r,
                k,
                d_ch_m: d,
                violations,
                max_distance_m: max_distance,
            });
        }
    }
    let total: usize = cases.iter().map(|c| c.violations).sum();
    let line = CheckLine {
        name: "feasible band geometry".into(),
        passed: total == 0,
        detail: format!(
            "{} placements x {samples} sector samples, {total} points beyond d_th = {d_th:.4} m",
            cases.len()
        ),
    };
    Ok((line, cases))
}

/// Every suite at its acceptance settings.
pub fn run_all(area: &AreaSpec, radio: &RadioParams, initial_energy_j: f64, bat: BatParams) -> Result<Vec<CheckLine>> {
    let mut lines = vec![predicted_grid_check(area, radio)?];
    lines.push(simulated_grid_check(area, radio, initial_energy_j, 10)?.0);
    lines.push(wedge_check(area, 1_000_000, 19)?.0);
    lines.extend(otsu_check(50, bat)?.0);
    lines.push(geometry_check(radio, 100_000, 5)?.0);
    Ok(lines)
}
