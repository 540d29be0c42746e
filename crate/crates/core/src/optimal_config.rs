//! Closed-form cluster-head geometry for a circular field with the BS at
//! its center: the free-space feasibility band, the energy-optimal CH count
//! and CH-to-BS distance, and the analytical per-round energy they minimize.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::radio_energy::RadioParams;

/// Circular monitoring area of radius `radius_m` holding `node_count` nodes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AreaSpec {
    pub radius_m: f64,
    pub node_count: usize,
}

impl AreaSpec {
    pub fn new(radius_m: f64, node_count: usize) -> Result<Self> {
        let area = Self {
            radius_m,
            node_count,
        };
        area.validate()?;
        Ok(area)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.radius_m.is_finite() && self.radius_m > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "area radius must be > 0, got {}",
                self.radius_m
            )));
        }
        if self.node_count == 0 {
            return Err(Error::InvalidParameter("node_count must be >= 1".into()));
        }
        Ok(())
    }
}

/// Theory-level cluster plan for an area.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OptimalPlan {
    pub k_star: usize,
    pub d_star_m: f64,
    /// Radius of the minimum-energy circle; equal to `d_star_m`.
    pub r_o1_m: f64,
    /// `R ≤ 2·d_th·cos(π/K*)`.
    pub feasible: bool,
    /// Free-space CH band for `k_star`, when the geometry admits one.
    pub band: Option<(f64, f64)>,
    /// Whether `d_star_m` falls inside `band`. The unconstrained optimum can
    /// sit above `d_th`; this is reported, never projected.
    pub d_star_in_band: bool,
}

/// Energy-optimal cluster count, `round((3/4·π²·N)^(1/3))`, at least 1.
pub fn optimal_k(area: &AreaSpec) -> usize {
    let raw = (0.75 * PI * PI * area.node_count as f64).cbrt();
    (raw.round() as usize).max(1)
}

/// Energy-optimal CH-to-BS distance `2NR / (3(N + k))`.
pub fn optimal_ch_distance(area: &AreaSpec, k: usize) -> f64 {
    let n = area.node_count as f64;
    2.0 * n * area.radius_m / (3.0 * (n + k as f64))
}

/// Largest field radius for which `k` sector CHs keep every link in free
/// space: `2·d_th·cos(π/k)`.
pub fn theorem1_max_radius(d_th: f64, k: usize) -> Result<f64> {
    if k < 2 {
        return Err(Error::InvalidParameter(format!(
            "feasibility radius needs k >= 2 sectors, got {k}"
        )));
    }
    Ok(2.0 * d_th * (PI / k as f64).cos())
}

/// CH-to-BS distances on the sector bisector that keep every sector point
/// and the BS within `d_th` of the CH.
///
/// The lower edge is clamped at zero.
pub fn feasible_ch_band(area: &AreaSpec, d_th: f64, k: usize) -> Result<(f64, f64)> {
    if k < 2 {
        return Err(Error::InvalidParameter(format!(
            "feasible band needs k >= 2 sectors, got {k}"
        )));
    }
    let r = area.radius_m;
    let half = PI / k as f64;
    let radicand = d_th * d_th - (r * half.sin()).powi(2);
    if radicand < 0.0 {
        return Err(Error::Infeasible(format!(
            "R·sin(π/k) = {:.4} m exceeds d_th = {d_th:.4} m",
            r * half.sin()
        )));
    }
    let lo = (r * half.cos() - radicand.sqrt()).max(0.0);
    let hi = d_th;
    if lo > hi {
        return Err(Error::Infeasible(format!(
            "band lower edge {lo:.4} m exceeds d_th = {d_th:.4} m (R = {r} m, k = {k})"
        )));
    }
    Ok((lo, hi))
}

/// Expected squared CM-to-CH distance for a CH on the bisector at `d_ch`,
/// small-angle closed form over the triangular wedge:
/// `d² − (4R/3)·d + R²/2 + π²R²/(6k²)`.
pub fn expected_sq_distance_cm_to_ch(area: &AreaSpec, k: usize, d_ch: f64) -> Result<f64> {
    let r = area.radius_m;
    if k < 2 {
        return Err(Error::InvalidParameter(format!("need k >= 2, got {k}")));
    }
    if !(0.0..=r).contains(&d_ch) {
        return Err(Error::InvalidParameter(format!(
            "d_ch must lie in [0, {r}], got {d_ch}"
        )));
    }
    let k = k as f64;
    Ok(d_ch * d_ch - 4.0 * r / 3.0 * d_ch + r * r / 2.0 + PI * PI * r * r / (6.0 * k * k))
}

/// Analytical network energy per round for `k` clusters with CHs at `d_ch`.
pub fn predicted_total_energy(area: &AreaSpec, params: &RadioParams, k: usize, d_ch: f64) -> f64 {
    let n = area.node_count as f64;
    let r = area.radius_m;
    let k = k as f64;
    let l = params.packet_bits as f64;
    let eps = params.e_fs;
    l * (eps * ((k + n) * d_ch * d_ch - 4.0 * n * r / 3.0 * d_ch)
        + n * (2.0 * params.e_elec
            + params.e_da
            + eps * (3.0 * k * k + PI * PI) * r * r / (6.0 * k * k)))
}

/// Minimizer of [`predicted_total_energy`] over `k ∈ k_range` and
/// `d ∈ {0, step, 2·step, …} ∩ [0, R]`. Ties keep the first (smallest k, then d).
pub fn predicted_energy_argmin(
    area: &AreaSpec,
    params: &RadioParams,
    k_range: std::ops::RangeInclusive<usize>,
    d_step: f64,
) -> Result<(usize, f64, f64)> {
    if !(d_step > 0.0) {
        return Err(Error::InvalidParameter("grid step must be > 0".into()));
    }
    let steps = (area.radius_m / d_step).floor() as usize;
    let mut best: Option<(usize, f64, f64)> = None;
    for k in k_range.filter(|&k| k >= 1) {
        for i in 0..=steps {
            let d = i as f64 * d_step;
            let e = predicted_total_energy(area, params, k, d);
            if best.map_or(true, |(_, _, be)| e < be) {
                best = Some((k, d, e));
            }
        }
    }
    best.ok_or_else(|| Error::InvalidParameter("empty k range".into()))
}

pub fn plan(area: &AreaSpec, params: &RadioParams) -> OptimalPlan {
    let k_star = optimal_k(area);
    let d_star_m = optimal_ch_distance(area, k_star);
    let d_th = params.distance_threshold();
    let feasible = theorem1_max_radius(d_th, k_star)
        .map(|rmax| area.radius_m <= rmax)
        .unwrap_or(false);
    let band = feasible_ch_band(area, d_th, k_star).ok();
    let d_star_in_band = band.map_or(false, |(lo, hi)| (lo..=hi).contains(&d_star_m));
    OptimalPlan {
        k_star,
        d_star_m,
        r_o1_m: d_star_m,
        feasible,
        band,
        d_star_in_band,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    const DTH: f64 = 87.705_801_930_702_92;

    fn area(r: f64, n: usize) -> AreaSpec {
        AreaSpec::new(r, n).unwrap()
    }

    #[test]
    fn optimal_k_examples() {
        assert_eq!(optimal_k(&area(150.0, 100)), 9);
        assert_eq!(optimal_k(&area(150.0, 1)), 2);
        assert_eq!(optimal_k(&area(150.0, 250)), 12);
    }

    #[test]
    fn optimal_distance_examples() {
        let a = area(150.0, 100);
        assert!((optimal_ch_distance(&a, 9) - 91.743).abs() < 0.01);
        assert!((optimal_ch_distance(&a, 10) - 30000.0 / 330.0).abs() < 1e-12);
        let big = area(150.0, 1_000_000);
        assert!((optimal_ch_distance(&big, 9) - 100.0).abs() < 1e-3);
    }

    #[test]
    fn max_radius_examples() {
        assert!((theorem1_max_radius(DTH, 10).unwrap() - 166.826_348_886).abs() < 1e-6);
        assert!((theorem1_max_radius(DTH, 9).unwrap() - 164.832_989_749).abs() < 1e-6);
        assert!(theorem1_max_radius(DTH, 2).unwrap().abs() < 1e-12);
        assert!(theorem1_max_radius(DTH, 1).is_err());
    }

    #[test]
    fn band_examples() {
        let (lo, hi) = feasible_ch_band(&area(150.0, 100), DTH, 10).unwrap();
        assert!((lo - 68.202_121_913).abs() < 1e-6, "lo = {lo}");
        assert!((hi - DTH).abs() < 1e-12);
        let (lo, _) = feasible_ch_band(&area(150.0, 100), DTH, 9).unwrap();
        assert!((lo - 69.818_053_505).abs() < 1e-6, "lo = {lo}");
        let (lo, hi) = feasible_ch_band(&area(DTH, 100), DTH, 360).unwrap();
        assert!(lo.abs() < 1e-9);
        assert_eq!(hi, DTH);
    }

    #[test]
    fn band_errors() {
        // R·sin(π/k) > d_th
        assert!(matches!(
            feasible_ch_band(&area(400.0, 100), DTH, 3),
            Err(Error::Infeasible(_))
        ));
        // radicand fine, but R > 2·d_th·cos(π/k) puts lo above d_th
        assert!(matches!(
            feasible_ch_band(&area(170.0, 100), DTH, 10),
            Err(Error::Infeasible(_))
        ));
    }

    #[test]
    fn expected_sq_distance_examples() {
        let a = area(150.0, 100);
        let at0 = expected_sq_distance_cm_to_ch(&a, 9, 0.0).unwrap();
        assert!((at0 - (11250.0 + PI * PI * 22500.0 / 486.0)).abs() < 1e-9);
        let v = expected_sq_distance_cm_to_ch(&a, 9, 91.74).unwrap();
        assert!((v - 1775.153_729_68).abs() < 1e-6, "v = {v}");
        assert!(expected_sq_distance_cm_to_ch(&a, 1, 10.0).is_err());
        assert!(expected_sq_distance_cm_to_ch(&a, 9, 151.0).is_err());
    }

    /// Uniform samples on the wedge {0 ≤ x ≤ R, |y| ≤ x·tan(π/k)}.
    fn wedge_mc(r: f64, k: usize, d: f64, n: usize, seed: u64) -> f64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let t = (PI / k as f64).tan();
        let mut acc = 0.0;
        for _ in 0..n {
            let x = r * rng.gen::<f64>().sqrt();
            let y = (2.0 * rng.gen::<f64>() - 1.0) * x * t;
            acc += (x - d).powi(2) + y * y;
        }
        acc / n as f64
    }

    #[test]
    fn expected_sq_distance_matches_wedge_monte_carlo() {
        let a = area(150.0, 100);
        for (k, tol) in [(9, 0.05), (10, 0.05), (12, 0.05), (6, 0.15), (7, 0.15)] {
            for d in [0.0, 60.0, 91.74, 150.0] {
                let closed = expected_sq_distance_cm_to_ch(&a, k, d).unwrap();
                let mc = wedge_mc(150.0, k, d, 200_000, 7 + k as u64);
                assert!(
                    (mc - closed).abs() / closed < tol,
                    "k={k} d={d}: closed {closed} mc {mc}"
                );
            }
        }
    }

    #[test]
    fn energy_vertex_is_optimal_distance() {
        let a = area(150.0, 100);
        let p = RadioParams::reference();
        for k in 1..=30 {
            let d = optimal_ch_distance(&a, k);
            // coefficient form: E = A d² + B d + C
            let n = 100.0;
            let l = 4000.0;
            let qa = l * p.e_fs * (k as f64 + n);
            let qb = -l * p.e_fs * 4.0 * n * 150.0 / 3.0;
            let vertex = -qb / (2.0 * qa);
            assert!((vertex - d).abs() / d < 1e-12);
            // central difference in d vanishes at the vertex
            let h = 1e-3;
            let g = (predicted_total_energy(&a, &p, k, d + h)
                - predicted_total_energy(&a, &p, k, d - h))
                / (2.0 * h);
            let scale = predicted_total_energy(&a, &p, k, d);
            assert!(g.abs() / scale < 1e-9, "k={k} grad={g}");
        }
    }

    #[test]
    fn k_stationarity_is_coupled_to_n_plus_k() {
        // d/dK of the energy at d*(K) vanishes where K³ = ¾π²(N+K)²/N,
        // not at the decoupled K* = (¾π²N)^(1/3).
        let a = area(150.0, 100);
        let p = RadioParams::reference();
        let profile = |k: f64| {
            let n = 100.0;
            let d = 2.0 * n * 150.0 / (3.0 * (n + k));
            let l = 4000.0;
            l * (p.e_fs * ((k + n) * d * d - 4.0 * n * 150.0 / 3.0 * d)
                + n * (2.0 * p.e_elec
                    + p.e_da
                    + p.e_fs * (3.0 * k * k + PI * PI) * 22500.0 / (6.0 * k * k)))
        };
        // fixed point of the exact relation
        let mut k = 9.0f64;
        for _ in 0..100 {
            k = (0.75 * PI * PI * (100.0 + k).powi(2) / 100.0).cbrt();
        }
        let h = 1e-4;
        let g = (profile(k + h) - profile(k - h)) / (2.0 * h);
        assert!(g.abs() / profile(k) < 1e-7, "grad {g} at k={k}");
        let k_dec = (0.75 * PI * PI * 100.0f64).cbrt();
        let g_dec = (profile(k_dec + h) - profile(k_dec - h)) / (2.0 * h);
        assert!(g_dec < 0.0);
        // integer profile consistent with the continuous one
        assert!(predicted_total_energy(&a, &p, 10, optimal_ch_distance(&a, 10))
            < predicted_total_energy(&a, &p, 9, optimal_ch_distance(&a, 9)));
    }

    #[test]
    fn k_equal_one_matches_cluster_energy() {
        let a = area(150.0, 100);
        let p = RadioParams::reference();
        let d = 40.0;
        // E_Cluster with K = 1: l[2·E_elec·N + E_DA·N + ε·d² + N·ε·E[d²]]
        let l = 4000.0;
        let n = 100.0;
        let ed2 = d * d - 200.0 * d + 11250.0 + PI * PI * 22500.0 / 6.0;
        let cluster = l * (2.0 * p.e_elec * n + p.e_da * n + p.e_fs * d * d + n * p.e_fs * ed2);
        let total = predicted_total_energy(&a, &p, 1, d);
        assert!((cluster - total).abs() / total < 1e-12);
    }

    #[test]
    fn plan_for_reference_area() {
        let plan = plan(&area(150.0, 100), &RadioParams::reference());
        assert_eq!(plan.k_star, 9);
        assert!((plan.d_star_m - 91.743).abs() < 0.01);
        assert_eq!(plan.r_o1_m, plan.d_star_m);
        assert!(plan.feasible);
        // d* = 91.74 sits above d_th = 87.71
        assert!(!plan.d_star_in_band);
    }

    proptest! {
        #[test]
        fn optimal_distance_inside_area(n in 1usize..100_000, r in 1.0f64..1000.0, k in 2usize..200) {
            let a = AreaSpec::new(r, n).unwrap();
            let d = optimal_ch_distance(&a, k);
            prop_assert!(d > 0.0 && d < r);
        }
    }
}
