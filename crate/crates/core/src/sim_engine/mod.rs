//! Round-based network simulation with pluggable clustering protocols.
//!
//! Every round runs (re-)clustering when triggered, CH selection, then one
//! data-gathering pass in which each alive node sends one `l`-bit packet.

pub mod fcm;
pub mod forced;

use std::f64::consts::TAU;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::angular_otsu::{
    build_histogram, materialize_clusters, ObjectiveWeights, DEFAULT_BIN_COUNT,
};
use crate::bat_optimizer::{optimize_thresholds, BatParams};
use crate::ch_selection::{select_cluster_heads, SelectionWeights};
use crate::error::{Error, Result};
use crate::network::{Cluster, ClusterAssignment, Node, Role};
use crate::optimal_config::{optimal_k, AreaSpec};
use crate::radio_energy::RadioParams;
use crate::stats::{accurate_sum, population_variance, CompensatedSum};

pub use fcm::{fuzzy_c_means, FcmParams, FcmResult};
pub use forced::{forced_round_energy, grid_argmin, simulated_energy_grid, GridCell};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProtocolKind {
    Eerpms,
    Rleach,
    Crpfcm,
}

impl ProtocolKind {
    pub const ALL: [ProtocolKind; 3] = [Self::Eerpms, Self::Rleach, Self::Crpfcm];

    pub fn name(self) -> &'static str {
        match self {
            Self::Eerpms => "eerpms",
            Self::Rleach => "rleach",
            Self::Crpfcm => "crpfcm",
        }
    }
}

impl fmt::Display for ProtocolKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ProtocolKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "eerpms" => Ok(Self::Eerpms),
            "rleach" => Ok(Self::Rleach),
            "crpfcm" => Ok(Self::Crpfcm),
            other => Err(Error::Config(format!(
                "unknown protocol {other:?} (expected eerpms, rleach or crpfcm)"
            ))),
        }
    }
}

/// Everything one simulation run needs.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkConfig {
    pub area: AreaSpec,
    pub initial_energy_j: f64,
    pub radio: RadioParams,
    pub objective: ObjectiveWeights,
    pub selection: SelectionWeights,
    /// Pins the cluster count; `None` recomputes K* from the alive count.
    pub k_override: Option<usize>,
    pub bin_count: usize,
    /// `seed` is ignored here; each clustering draws a fresh one from the run RNG.
    pub bat: BatParams,
    pub fcm: FcmParams,
    pub protocol: ProtocolKind,
    pub seed: u64,
    pub max_rounds: u32,
}

impl Default for NetworkConfig {
    /// 100 nodes in a 150 m disk, 0.5 J each, K pinned at 10, O₁ at 90 m.
    fn default() -> Self {
        Self {
            area: AreaSpec {
                radius_m: 150.0,
                node_count: 100,
            },
            initial_energy_j: 0.5,
            radio: RadioParams::default(),
            objective: ObjectiveWeights::default(),
            selection: SelectionWeights::default(),
            k_override: Some(10),
            bin_count: DEFAULT_BIN_COUNT,
            bat: BatParams::default(),
            fcm: FcmParams::default(),
            protocol: ProtocolKind::Eerpms,
            seed: 1,
            max_rounds: 5000,
        }
    }
}

impl NetworkConfig {
    pub fn validate(&self) -> Result<()> {
        self.area.validate()?;
        self.radio.validate()?;
        self.objective.validate()?;
        self.selection.validate()?;
        self.bat.validate()?;
        self.fcm.validate()?;
        if !(self.initial_energy_j.is_finite() && self.initial_energy_j > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "initial energy must be > 0, got {}",
                self.initial_energy_j
            )));
        }
        if self.k_override == Some(0) {
            return Err(Error::InvalidParameter("k override must be >= 1".into()));
        }
        if self.bin_count < 2 {
            return Err(Error::InvalidParameter("bin_count must be >= 2".into()));
        }
        if self.max_rounds == 0 {
            return Err(Error::InvalidParameter("max_rounds must be >= 1".into()));
        }
        Ok(())
    }

    /// Cluster count for `alive` nodes: the pinned K or K*(alive), never
    /// more than `alive`.
    pub fn cluster_target(&self, alive: usize) -> usize {
        let k = self.k_override.unwrap_or_else(|| {
            optimal_k(&AreaSpec {
                radius_m: self.area.radius_m,
                node_count: alive.max(1),
            })
        });
        k.clamp(1, alive.max(1))
    }
}

/// Area-uniform deployment: `r = R·√u`, `θ = 2π·v`.
pub fn deploy(area: &AreaSpec, seed: u64, initial_energy_j: f64) -> Result<Vec<Node>> {
    area.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok((0..area.node_count)
        .map(|id| {
            let u: f64 = rng.gen();
            let v: f64 = rng.gen();
            Node::from_polar(id, area.radius_m * u.sqrt(), TAU * v, initial_energy_j)
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RoundMetrics {
    /// 1-based.
    pub round: u32,
    pub total_residual_j: f64,
    pub alive_count: usize,
    pub ch_count: usize,
    /// Energy spent by each CH this round, in cluster order.
    pub per_ch_energy_j: Vec<f64>,
    /// Population variance of `per_ch_energy_j`.
    pub ch_energy_variance: f64,
    /// Cluster sizes (CH included), aligned with `per_ch_energy_j`.
    pub ch_member_counts: Vec<usize>,
    pub dead_this_round: Vec<usize>,
    pub energy_spent_j: f64,
    pub reclustered: bool,
    /// Worst of the per-round and cumulative bookkeeping gaps, relative to
    /// the initial total energy.
    pub conservation_error_rel: f64,
}

impl RoundMetrics {
    pub fn ch_energy_mean_j(&self) -> f64 {
        crate::stats::mean(&self.per_ch_energy_j).unwrap_or(0.0)
    }

    /// Population variance of the CH cluster sizes; `None` without CHs.
    pub fn member_count_variance(&self) -> Option<f64> {
        let v: Vec<f64> = self.ch_member_counts.iter().map(|&c| c as f64).collect();
        population_variance(&v)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct LifetimeSummary {
    pub node_count: usize,
    /// First round with a death.
    pub fdn: Option<u32>,
    /// First round at which at least ⌈N/2⌉ nodes are dead.
    pub hdn: Option<u32>,
    /// Round at which the last node died.
    pub ldn: Option<u32>,
    pub rounds_run: u32,
}

impl LifetimeSummary {
    pub fn from_rounds(node_count: usize, rounds: &[RoundMetrics]) -> Self {
        Self::from_death_counts(
            node_count,
            rounds.iter().map(|m| (m.round, m.dead_this_round.len())),
        )
    }

    pub fn from_death_counts(
        node_count: usize,
        deaths: impl IntoIterator<Item = (u32, usize)>,
    ) -> Self {
        let half = node_count.div_ceil(2);
        let mut s = Self {
            node_count,
            fdn: None,
            hdn: None,
            ldn: None,
            rounds_run: 0,
        };
        let mut dead = 0;
        for (round, d) in deaths {
            s.rounds_run = round;
            dead += d;
            if dead >= 1 && s.fdn.is_none() {
                s.fdn = Some(round);
            }
            if dead >= half && s.hdn.is_none() {
                s.hdn = Some(round);
            }
            if dead >= node_count && s.ldn.is_none() {
                s.ldn = Some(round);
            }
        }
        s
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationOutcome {
    pub rounds: Vec<RoundMetrics>,
    pub lifetime: LifetimeSummary,
    pub initial_total_j: f64,
}

/// Mutable state of one run.
#[derive(Debug, Clone)]
pub struct Simulation {
    config: NetworkConfig,
    nodes: Vec<Node>,
    rng: ChaCha8Rng,
    round: u32,
    assignment: Option<ClusterAssignment>,
    clustered_alive: usize,
    elected_this_epoch: Vec<bool>,
    rleach_p: f64,
    initial_total_j: f64,
    spent: CompensatedSum,
}

impl Simulation {
    /// Deploys nodes from `config.seed` and prepares the protocol state.
    pub fn new(config: NetworkConfig) -> Result<Self> {
        config.validate()?;
        let nodes = deploy(&config.area, config.seed, config.initial_energy_j)?;
        Self::with_nodes(config, nodes)
    }

    /// Runs on a caller-supplied deployment. Node ids must equal their index.
    pub fn with_nodes(config: NetworkConfig, nodes: Vec<Node>) -> Result<Self> {
        config.validate()?;
        if nodes.is_empty() {
            return Err(Error::EmptyNetwork);
        }
        if nodes.iter().enumerate().any(|(i, n)| n.id != i) {
            return Err(Error::InvalidParameter("node ids must equal their index".into()));
        }
        let n0 = nodes.len();
        let k0 = config.k_override.unwrap_or_else(|| {
            optimal_k(&AreaSpec {
                radius_m: config.area.radius_m,
                node_count: n0,
            })
        });
        // Protocol randomness lives on its own stream so the deployment for a
        // seed is shared by every protocol.
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        rng.set_stream(1);
        let initial_total_j = accurate_sum(nodes.iter().map(|n| n.energy_residual));
        Ok(Self {
            rleach_p: (k0 as f64 / n0 as f64).min(1.0),
            elected_this_epoch: vec![false; n0],
            config,
            nodes,
            rng,
            round: 0,
            assignment: None,
            clustered_alive: 0,
            initial_total_j,
            spent: CompensatedSum::new(),
        })
    }

    pub fn config(&self) -> &NetworkConfig {
        &self.config
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn round(&self) -> u32 {
        self.round
    }

    pub fn alive_count(&self) -> usize {
        self.nodes.iter().filter(|n| n.alive).count()
    }

    /// Cluster layout used in the last round, heads included.
    pub fn assignment(&self) -> Option<&ClusterAssignment> {
        self.assignment.as_ref()
    }

    pub fn initial_total_j(&self) -> f64 {
        self.initial_total_j
    }

    pub fn cumulative_spent_j(&self) -> f64 {
        self.spent.value()
    }

    pub fn total_residual_j(&self) -> f64 {
        accurate_sum(self.nodes.iter().map(|n| n.energy_residual))
    }

    /// Advances one round. Fails with [`Error::EmptyNetwork`] once every node is dead.
    pub fn step(&mut self) -> Result<RoundMetrics> {
        match self.config.protocol {
            ProtocolKind::Eerpms => run_round_eerpms(self),
            ProtocolKind::Rleach => run_round_rleach(self),
            ProtocolKind::Crpfcm => run_round_crpfcm(self),
        }
    }

    fn begin_round(&mut self) -> Result<usize> {
        let alive = self.alive_count();
        if alive == 0 {
            return Err(Error::EmptyNetwork);
        }
        self.round += 1;
        Ok(alive)
    }

    fn needs_reclustering(&self, alive: usize) -> bool {
        self.assignment.is_none() || self.clustered_alive != alive
    }

    fn form_angular(&mut self, alive: usize) -> Result<ClusterAssignment> {
        let bins = self.config.bin_count;
        let k = self.config.cluster_target(alive).min(bins);
        let angles: Vec<f64> = self.nodes.iter().filter(|n| n.alive).map(|n| n.angle).collect();
        let h = build_histogram(&angles, bins)?;
        let bp = BatParams {
            seed: self.rng.gen(),
            ..self.config.bat
        };
        let (t, _) = optimize_thresholds(&h, k, self.config.objective, bp)?;
        materialize_clusters(&self.nodes, &t, bins)
    }

    fn form_fcm(&mut self, alive: usize) -> Result<ClusterAssignment> {
        let k = self.config.cluster_target(alive);
        let ids: Vec<usize> = self.nodes.iter().filter(|n| n.alive).map(|n| n.id).collect();
        let points: Vec<(f64, f64)> = ids.iter().map(|&i| (self.nodes[i].x, self.nodes[i].y)).collect();
        let res = fuzzy_c_means(&points, k, &self.config.fcm, &mut self.rng)?;
        let mut members = vec![Vec::new(); k];
        for (&id, &label) in ids.iter().zip(&res.labels) {
            members[label].push(id);
        }
        Ok(ClusterAssignment {
            clusters: members.into_iter().map(Cluster::new).collect(),
            round_created: 0,
        })
    }

    /// Shared round body for the two protocols with persistent clusters.
    fn clustered_round(
        &mut self,
        form: fn(&mut Self, usize) -> Result<ClusterAssignment>,
    ) -> Result<RoundMetrics> {
        let alive = self.begin_round()?;
        let reclustered = self.needs_reclustering(alive);
        let base = if reclustered {
            let mut a = form(self, alive)?;
            a.round_created = self.round;
            self.clustered_alive = alive;
            a
        } else {
            self.assignment.take().expect("clusters exist when not reclustering")
        };
        let assignment = select_cluster_heads(&base, &self.nodes, &self.config.selection)?;
        self.transmit(assignment, Vec::new(), reclustered)
    }

    fn elect_rleach(&mut self) -> (ClusterAssignment, Vec<usize>) {
        let p = self.rleach_p;
        let epoch = ((1.0 / p).floor() as u64).max(1);
        let r = u64::from(self.round - 1) % epoch;
        if r == 0 {
            self.elected_this_epoch.fill(false);
        }
        let threshold = p / (1.0 - p * r as f64);
        let mut heads = Vec::new();
        for n in self.nodes.iter().filter(|n| n.alive) {
            // one draw per alive node keeps the stream independent of outcomes
            let u: f64 = self.rng.gen();
            let t = if self.elected_this_epoch[n.id] {
                0.0
            } else {
                threshold * n.energy_fraction()
            };
            if u < t {
                heads.push(n.id);
            }
        }
        for &h in &heads {
            self.elected_this_epoch[h] = true;
        }
        let alive_ids = self.nodes.iter().filter(|n| n.alive).map(|n| n.id);
        if heads.is_empty() {
            return (
                ClusterAssignment {
                    clusters: Vec::new(),
                    round_created: self.round,
                },
                alive_ids.collect(),
            );
        }
        let mut members: Vec<Vec<usize>> = vec![Vec::new(); heads.len()];
        for id in alive_ids {
            let node = &self.nodes[id];
            let mut best = 0;
            let mut best_d = f64::INFINITY;
            for (j, &h) in heads.iter().enumerate() {
                let d = node.distance_to(&self.nodes[h]);
                if d < best_d {
                    best = j;
                    best_d = d;
                }
            }
            members[best].push(id);
        }
        let clusters = members
            .into_iter()
            .zip(&heads)
            .map(|(m, &h)| Cluster {
                head: Some(h),
                ..Cluster::new(m)
            })
            .collect();
        (
            ClusterAssignment {
                clusters,
                round_created: self.round,
            },
            Vec::new(),
        )
    }

    /// Data-gathering pass: charges every link, deducts with a clamp at
    /// zero and records deaths.
    fn transmit(
        &mut self,
        assignment: ClusterAssignment,
        direct: Vec<usize>,
        reclustered: bool,
    ) -> Result<RoundMetrics> {
        let radio = self.config.radio;
        let bits = radio.packet_bits;
        let mut cost = vec![0.0; self.nodes.len()];
        let mut heads = Vec::new();
        for n in &mut self.nodes {
            n.role = Role::Member;
        }
        for c in &assignment.clusters {
            let Some(h) = c.head else { continue };
            let ch = &self.nodes[h];
            for &m in c.members.iter().filter(|&&m| m != h) {
                cost[m] += radio.tx_energy(bits, self.nodes[m].distance_to(ch))?;
            }
            let n_members = c.members.len() as u64;
            cost[h] += radio.rx_energy(bits) * (n_members - 1) as f64
                + radio.aggregation_energy(bits, n_members)
                + radio.tx_energy(bits, ch.distance_to_bs)?;
            heads.push((h, c.members.len()));
        }
        for &d in &direct {
            cost[d] += radio.tx_energy(bits, self.nodes[d].distance_to_bs)?;
        }

        let before = self.total_residual_j();
        let mut spent_now = CompensatedSum::new();
        let mut spent_by = vec![0.0; self.nodes.len()];
        let mut dead = Vec::new();
        for n in self.nodes.iter_mut().filter(|n| n.alive) {
            let c = cost[n.id];
            if c <= 0.0 {
                continue;
            }
            let s = c.min(n.energy_residual);
            n.energy_residual -= s;
            if n.energy_residual <= 0.0 {
                n.energy_residual = 0.0;
                n.alive = false;
                dead.push(n.id);
            }
            spent_by[n.id] = s;
            spent_now.add(s);
            self.spent.add(s);
        }
        for &(h, _) in &heads {
            self.nodes[h].role = Role::Head;
        }
        let after = self.total_residual_j();
        let per_round_gap = (before - after - spent_now.value()).abs();
        let cumulative_gap = (self.initial_total_j - self.spent.value() - after).abs();

        let per_ch_energy_j: Vec<f64> = heads.iter().map(|&(h, _)| spent_by[h]).collect();
        let metrics = RoundMetrics {
            round: self.round,
            total_residual_j: after,
            alive_count: self.alive_count(),
            ch_count: heads.len(),
            ch_energy_variance: population_variance(&per_ch_energy_j).unwrap_or(0.0),
            per_ch_energy_j,
            ch_member_counts: heads.iter().map(|&(_, m)| m).collect(),
            dead_this_round: dead,
            energy_spent_j: spent_now.value(),
            reclustered,
            conservation_error_rel: per_round_gap.max(cumulative_gap) / self.initial_total_j,
        };
        self.assignment = Some(assignment);
        Ok(metrics)
    }
}

/// One EERPMS round: angular multi-threshold clustering (re-run whenever the
/// alive count changed), attribute-based CH selection, transmission.
pub fn run_round_eerpms(sim: &mut Simulation) -> Result<RoundMetrics> {
    sim.clustered_round(Simulation::form_angular)
}

/// One RLEACH round: residual-energy-weighted LEACH self-election, members
/// join the nearest CH; without any CH every node sends straight to the BS.
pub fn run_round_rleach(sim: &mut Simulation) -> Result<RoundMetrics> {
    sim.begin_round()?;
    let (assignment, direct) = sim.elect_rleach();
    sim.transmit(assignment, direct, true)
}

/// One CRPFCM round: fuzzy C-means clustering (same trigger as EERPMS),
/// attribute-based CH selection, transmission.
pub fn run_round_crpfcm(sim: &mut Simulation) -> Result<RoundMetrics> {
    sim.clustered_round(Simulation::form_fcm)
}

/// Runs until every node is dead or `max_rounds` is reached.
pub fn run_simulation(config: &NetworkConfig) -> Result<SimulationOutcome> {
    let mut sim = Simulation::new(config.clone())?;
    let mut rounds = Vec::new();
    while sim.round() < config.max_rounds && sim.alive_count() > 0 {
        rounds.push(sim.step()?);
    }
    Ok(SimulationOutcome {
        lifetime: LifetimeSummary::from_rounds(config.area.node_count, &rounds),
        initial_total_j: sim.initial_total_j(),
        rounds,
    })
}
