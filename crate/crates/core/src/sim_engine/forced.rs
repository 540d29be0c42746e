//! One-round energy with synthetic equal sectors and CHs forced onto the
//! sector bisectors. Used to map the energy surface over `(K, d_CH)`.

use std::f64::consts::TAU;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::network::Node;
use crate::optimal_config::{predicted_total_energy, AreaSpec};
use crate::radio_energy::RadioParams;
use crate::stats::accurate_sum;

use super::deploy;

/// Energy of one data-gathering round when the disk is cut into `k` equal
/// sectors and every CH sits on its bisector at `d_ch` from the BS.
///
/// The member nearest that point plays the CH and is treated as standing on
/// it: it sends nothing over the air, receives the other members' packets,
/// aggregates all of them and forwards one packet to the BS. Empty sectors
/// cost nothing.
pub fn forced_round_energy(nodes: &[Node], radio: &RadioParams, k: usize, d_ch: f64) -> Result<f64> {
    if k == 0 {
        return Err(Error::InvalidParameter("k must be >= 1".into()));
    }
    if !(d_ch >= 0.0 && d_ch.is_finite()) {
        return Err(Error::InvalidParameter(format!("d_ch must be >= 0, got {d_ch}")));
    }
    let width = TAU / k as f64;
    let mut sectors: Vec<Vec<&Node>> = vec![Vec::new(); k];
    for n in nodes.iter().filter(|n| n.alive) {
        let s = ((n.angle / width) as usize).min(k - 1);
        sectors[s].push(n);
    }
    let bits = radio.packet_bits;
    let mut costs = Vec::with_capacity(nodes.len() + k);
    for (s, members) in sectors.iter().enumerate() {
        if members.is_empty() {
            continue;
        }
        let phi = (s as f64 + 0.5) * width;
        let (px, py) = (d_ch * phi.cos(), d_ch * phi.sin());
        let ch = members
            .iter()
            .min_by(|a, b| {
                a.distance_to_point(px, py)
                    .total_cmp(&b.distance_to_point(px, py))
                    .then(a.id.cmp(&b.id))
            })
            .map(|n| n.id)
            .expect("sector is non-empty");
        for m in members.iter().filter(|m| m.id != ch) {
            costs.push(radio.tx_energy(bits, m.distance_to_point(px, py))?);
        }
        let n = members.len() as u64;
        costs.push(radio.rx_energy(bits) * (n - 1) as f64);
        costs.push(radio.aggregation_energy(bits, n));
        costs.push(radio.tx_energy(bits, d_ch)?);
    }
    Ok(accurate_sum(costs))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridCell {
    pub k: usize,
    pub d_m: f64,
    pub predicted_j: f64,
    /// Mean of [`forced_round_energy`] over the seeds' deployments.
    pub simulated_mean_j: f64,
}

/// Evaluates every `(k, d)` pair on deployments drawn from `seeds`.
/// Cells come out in `k`-major order.
pub fn simulated_energy_grid(
    area: &AreaSpec,
    radio: &RadioParams,
    initial_energy_j: f64,
    seeds: &[u64],
    ks: &[usize],
    ds: &[f64],
) -> Result<Vec<GridCell>> {
    if seeds.is_empty() || ks.is_empty() || ds.is_empty() {
        return Err(Error::InvalidParameter("grid axes and seeds must be non-empty".into()));
    }
    let deployments = seeds
        .iter()
        .map(|&s| deploy(area, s, initial_energy_j))
        .collect::<Result<Vec<_>>>()?;
    let pairs: Vec<(usize, f64)> = ks.iter().flat_map(|&k| ds.iter().map(move |&d| (k, d))).collect();
    pairs
        .par_iter()
        .map(|&(k, d)| {
            let sims = deployments
                .iter()
                .map(|nodes| forced_round_energy(nodes, radio, k, d))
                .collect::<Result<Vec<_>>>()?;
            Ok(GridCell {
                k,
                d_m: d,
                predicted_j: predicted_total_energy(area, radio, k, d),
                simulated_mean_j: accurate_sum(sims.iter().copied()) / sims.len() as f64,
            })
        })
        .collect()
}

/// Cell with the lowest simulated energy; ties keep the earliest cell.
pub fn grid_argmin(cells: &[GridCell]) -> Option<GridCell> {
    cells
        .iter()
        .copied()
        .reduce(|best, c| if c.simulated_mean_j < best.simulated_mean_j { c } else { best })
}
