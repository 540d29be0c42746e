//! Bat Algorithm search over angular threshold sets.
//!
//! Each bat's position is a candidate cut vector `(T₁, …, T_{K−1})`.
//! Per iteration every bat draws a frequency, accumulates velocity
//! `v ← v + (x − x*)·S`, and proposes `⌈x + v⌉`. With probability
//! `1 − rᵢ` the proposal is replaced by a local walk `⌈x* + u·Ā·w⌉` around
//! the global best, where `u ~ U(−1, 1)` per dimension, `Ā` is the mean
//! loudness and `w = L/(4K)` is a quarter of the mean segment width in bins
//! (at least one bin). Proposals are repaired into valid threshold sets
//! before scoring.
//!
//! A proposal is accepted into the bat when `rand < Aᵢ` and it improves on
//! the global best; acceptance decays loudness (`Aᵢ ← ϵ·Aᵢ`) and raises the
//! pulse rate (`rᵢ = r⁰·(1 − e^{−γt})`). The global best is elitist: any
//! scored proposal that beats it replaces it.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::angular_otsu::{AngleHistogram, Evaluator, ObjectiveWeights, ThresholdSet};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BatParams {
    pub population: usize,
    pub max_iterations: usize,
    pub s_min: f64,
    pub s_max: f64,
    /// Initial loudness `A⁰`.
    pub loudness0: f64,
    /// Asymptotic pulse rate `r⁰`.
    pub pulse0: f64,
    /// Loudness decay `ϵ`.
    pub epsilon_decay: f64,
    /// Pulse growth rate `γ`.
    pub gamma_rate: f64,
    pub seed: u64,
}

impl Default for BatParams {
    fn default() -> Self {
        Self {
            population: 30,
            max_iterations: 100,
            s_min: 0.0,
            s_max: 2.0,
            loudness0: 1.0,
            pulse0: 0.5,
            epsilon_decay: 0.9,
            gamma_rate: 0.9,
            seed: 0,
        }
    }
}

impl BatParams {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        if self.population < 2 {
            return bad(format!("bat population must be >= 2, got {}", self.population));
        }
        if self.max_iterations == 0 {
            return bad("bat max_iterations must be >= 1".into());
        }
        if !(self.s_min <= self.s_max) {
            return bad(format!(
                "frequency bounds inverted: s_min {} > s_max {}",
                self.s_min, self.s_max
            ));
        }
        if !(self.loudness0 > 0.0) {
            return bad(format!("loudness0 must be > 0, got {}", self.loudness0));
        }
        if !(0.0..=1.0).contains(&self.pulse0) {
            return bad(format!("pulse0 must lie in [0, 1], got {}", self.pulse0));
        }
        if !(self.epsilon_decay > 0.0 && self.epsilon_decay < 1.0) {
            return bad(format!(
                "epsilon_decay must lie in (0, 1), got {}",
                self.epsilon_decay
            ));
        }
        if !(self.gamma_rate > 0.0) {
            return bad(format!("gamma_rate must be > 0, got {}", self.gamma_rate));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BatState {
    pub positions: Vec<Vec<usize>>,
    pub velocities: Vec<Vec<f64>>,
    pub loudness: Vec<f64>,
    pub pulse_rate: Vec<f64>,
    pub best_position: Vec<usize>,
    pub best_objective: f64,
    pub iteration: usize,
}

/// Clamps into `[1, L−1]`, sorts, and moves collisions to the nearest free
/// level above (or below, when the top is full).
pub fn repair_position(raw: &[i64], bin_count: usize) -> Result<ThresholdSet> {
    let top = bin_count as i64 - 1;
    if raw.len() as i64 > top.max(0) {
        return Err(Error::InvalidParameter(format!(
            "{} thresholds do not fit in {bin_count} bins",
            raw.len()
        )));
    }
    let mut vals: Vec<usize> = raw.iter().map(|&v| v.clamp(1, top) as usize).collect();
    vals.sort_unstable();
    let mut used = vec![false; bin_count];
    let mut out = Vec::with_capacity(vals.len());
    for v in vals {
        let slot = if !used[v] {
            v
        } else {
            (v + 1..bin_count)
                .find(|&u| !used[u])
                .or_else(|| (1..v).rev().find(|&u| !used[u]))
                .expect("capacity checked above")
        };
        used[slot] = true;
        out.push(slot);
    }
    out.sort_unstable();
    Ok(ThresholdSet::from_sorted_unchecked(out))
}

/// Step-wise Bat Algorithm run over one histogram.
pub struct BatOptimizer<'a> {
    eval: Evaluator<'a>,
    params: BatParams,
    rng: ChaCha8Rng,
    state: BatState,
    dims: usize,
    bins: usize,
    walk_width: f64,
    scratch: Vec<i64>,
}

impl<'a> BatOptimizer<'a> {
    pub fn new(
        h: &'a AngleHistogram,
        k: usize,
        w: ObjectiveWeights,
        params: BatParams,
    ) -> Result<Self> {
        params.validate()?;
        w.validate()?;
        let bins = h.bin_count();
        if k < 2 || k > bins {
            return Err(Error::InvalidParameter(format!(
                "bat search needs 2 <= k <= {bins}, got {k}"
            )));
        }
        let dims = k - 1;
        let eval = Evaluator::new(h, w);
        let mut rng = ChaCha8Rng::seed_from_u64(params.seed);

        let mut positions = Vec::with_capacity(params.population);
        let mut fitness = Vec::with_capacity(params.population);
        for _ in 0..params.population {
            let raw: Vec<i64> = (0..dims).map(|_| rng.gen_range(1..bins as i64)).collect();
            let t = repair_position(&raw, bins)?;
            fitness.push(eval.score(t.thresholds()));
            positions.push(t.thresholds().to_vec());
        }
        let mut best_idx = 0;
        for i in 1..positions.len() {
            if fitness[i] > fitness[best_idx]
                || (fitness[i] == fitness[best_idx] && positions[i] < positions[best_idx])
            {
                best_idx = i;
            }
        }
        let state = BatState {
            best_position: positions[best_idx].clone(),
            best_objective: fitness[best_idx],
            velocities: vec![vec![0.0; dims]; params.population],
            loudness: vec![params.loudness0; params.population],
            // r at t = 0 per the growth law
            pulse_rate: vec![0.0; params.population],
            positions,
            iteration: 0,
        };
        Ok(Self {
            eval,
            params,
            rng,
            state,
            dims,
            bins,
            walk_width: (bins as f64 / (4.0 * k as f64)).max(1.0),
            scratch: vec![0; dims],
        })
    }

    pub fn state(&self) -> &BatState {
        &self.state
    }

    pub fn best(&self) -> (ThresholdSet, f64) {
        (
            ThresholdSet::from_sorted_unchecked(self.state.best_position.clone()),
            self.state.best_objective,
        )
    }

    pub fn is_done(&self) -> bool {
        self.state.iteration >= self.params.max_iterations
    }

    /// Runs one iteration over the whole population.
    pub fn step(&mut self) -> Result<()> {
        self.state.iteration += 1;
        let t = self.state.iteration as f64;
        let p = self.params;
        let mean_loudness =
            self.state.loudness.iter().sum::<f64>() / self.state.loudness.len() as f64;
        let vmax = self.bins as f64;

        for i in 0..p.population {
            let freq = p.s_min + (p.s_max - p.s_min) * self.rng.gen::<f64>();
            for j in 0..self.dims {
                let x = self.state.positions[i][j] as f64;
                let v = &mut self.state.velocities[i][j];
                *v = (*v + (x - self.state.best_position[j] as f64) * freq).clamp(-vmax, vmax);
                self.scratch[j] = (x + *v).ceil() as i64;
            }
            if self.rng.gen::<f64>() > self.state.pulse_rate[i] {
                for j in 0..self.dims {
                    let u: f64 = self.rng.gen_range(-1.0..1.0);
                    let base = self.state.best_position[j] as f64;
                    self.scratch[j] = (base + u * mean_loudness * self.walk_width).ceil() as i64;
                }
            }
            let cand = repair_position(&self.scratch, self.bins)?;
            let score = self.eval.score(cand.thresholds());
            let improves = score > self.state.best_objective;

            if self.rng.gen::<f64>() < self.state.loudness[i] && improves {
                self.state.positions[i] = cand.thresholds().to_vec();
                self.state.loudness[i] *= p.epsilon_decay;
                self.state.pulse_rate[i] = p.pulse0 * (1.0 - (-p.gamma_rate * t).exp());
            }
            if improves
                || (score == self.state.best_objective
                    && cand.thresholds() < self.state.best_position.as_slice())
            {
                self.state.best_position = cand.thresholds().to_vec();
                self.state.best_objective = score;
            }
        }
        Ok(())
    }
}

/// Best threshold set found by the Bat Algorithm, with its objective.
/// `k = 1` needs no search and returns the empty set.
pub fn optimize_thresholds(
    h: &AngleHistogram,
    k: usize,
    w: ObjectiveWeights,
    bp: BatParams,
) -> Result<(ThresholdSet, f64)> {
    if k == 0 {
        return Err(Error::InvalidParameter("k must be >= 1".into()));
    }
    if k == 1 {
        let t = ThresholdSet::empty();
        let s = Evaluator::new(h, w).score(&[]);
        return Ok((t, s));
    }
    let mut opt = BatOptimizer::new(h, k, w, bp)?;
    while !opt.is_done() {
        opt.step()?;
    }
    Ok(opt.best())
}
