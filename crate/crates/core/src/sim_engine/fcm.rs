//! Fuzzy C-means over planar points, hard-assigned by maximum membership.

use rand::seq::index;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FcmParams {
    /// Fuzziness exponent `m > 1`.
    pub fuzziness: f64,
    /// Stop once no membership moves by more than this.
    pub tolerance: f64,
    pub max_iterations: usize,
}

impl Default for FcmParams {
    fn default() -> Self {
        Self {
            fuzziness: 2.0,
            tolerance: 1e-5,
            max_iterations: 100,
        }
    }
}

impl FcmParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.fuzziness > 1.0) {
            return Err(Error::InvalidParameter(format!(
                "fcm fuzziness must be > 1, got {}",
                self.fuzziness
            )));
        }
        if !(self.tolerance > 0.0) || self.max_iterations == 0 {
            return Err(Error::InvalidParameter(
                "fcm tolerance must be > 0 and max_iterations >= 1".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FcmResult {
    pub centers: Vec<(f64, f64)>,
    /// Row per point, column per center.
    pub memberships: Vec<Vec<f64>>,
    /// Index of the maximum-membership center per point (lowest on ties).
    pub labels: Vec<usize>,
    pub iterations: usize,
}

fn memberships_for(points: &[(f64, f64)], centers: &[(f64, f64)], m: f64) -> Vec<Vec<f64>> {
    let exp = 2.0 / (m - 1.0);
    points
        .iter()
        .map(|&(px, py)| {
            let d: Vec<f64> = centers
                .iter()
                .map(|&(cx, cy)| (px - cx).hypot(py - cy))
                .collect();
            let mut row = vec![0.0; centers.len()];
            if let Some(hit) = d.iter().position(|&x| x == 0.0) {
                row[hit] = 1.0;
                return row;
            }
            for c in 0..centers.len() {
                let s: f64 = d.iter().map(|&dj| (d[c] / dj).powf(exp)).sum();
                row[c] = 1.0 / s;
            }
            row
        })
        .collect()
}

fn centers_for(points: &[(f64, f64)], u: &[Vec<f64>], old: &[(f64, f64)], m: f64) -> Vec<(f64, f64)> {
    (0..old.len())
        .map(|c| {
            let (mut sx, mut sy, mut sw) = (0.0, 0.0, 0.0);
            for (p, row) in points.iter().zip(u) {
                let w = row[c].powf(m);
                sx += w * p.0;
                sy += w * p.1;
                sw += w;
            }
            if sw > 0.0 {
                (sx / sw, sy / sw)
            } else {
                old[c]
            }
        })
        .collect()
}

fn argmax(row: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in row.iter().enumerate() {
        if v > row[best] {
            best = i;
        }
    }
    best
}

/// Centers start at `k` distinct points drawn from `rng`.
pub fn fuzzy_c_means<R: Rng>(
    points: &[(f64, f64)],
    k: usize,
    params: &FcmParams,
    rng: &mut R,
) -> Result<FcmResult> {
    params.validate()?;
    if points.is_empty() {
        return Err(Error::EmptyNetwork);
    }
    if k == 0 || k > points.len() {
        return Err(Error::InvalidParameter(format!(
            "fcm needs 1 <= k <= {} points, got {k}",
            points.len()
        )));
    }
    let m = params.fuzziness;
    let mut centers: Vec<(f64, f64)> = index::sample(rng, points.len(), k)
        .into_iter()
        .map(|i| points[i])
        .collect();
    let mut u = memberships_for(points, &centers, m);
    let mut iterations = 0;
    while iterations < params.max_iterations {
        iterations += 1;
        centers = centers_for(points, &u, &centers, m);
        let next = memberships_for(points, &centers, m);
        let delta = u
            .iter()
            .zip(&next)
            .flat_map(|(a, b)| a.iter().zip(b).map(|(x, y)| (x - y).abs()))
            .fold(0.0, f64::max);
        u = next;
        if delta < params.tolerance {
            break;
        }
    }
    let labels = u.iter().map(|row| argmax(row)).collect();
    Ok(FcmResult {
        centers,
        memberships: u,
        labels,
        iterations,
    })
}
