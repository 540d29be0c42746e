//! Config file loading. The file is TOML: `key = value` pairs grouped in
//! sections, every key optional. Radio coefficients are written in nJ/pJ and
//! converted to joules here, once.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::angular_otsu::{ObjectiveWeights, DEFAULT_BIN_COUNT};
use crate::bat_optimizer::BatParams;
use crate::ch_selection::SelectionWeights;
use crate::error::{Error, Result};
use crate::optimal_config::AreaSpec;
use crate::radio_energy::{RadioParams, NANO, PICO};
use crate::sim_engine::{FcmParams, NetworkConfig, ProtocolKind};

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConfigFile {
    pub network: NetworkSection,
    pub radio: RadioSection,
    pub objective: ObjectiveSection,
    pub selection: SelectionSection,
    pub bat: BatParams,
    pub fcm: FcmParams,
    pub experiment: ExperimentSection,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NetworkSection {
    pub radius_m: f64,
    pub node_count: usize,
    pub initial_energy_j: f64,
    /// Fixed cluster count, or `"auto"` to derive K* from the alive count.
    pub cluster_count: ClusterCount,
    pub bin_count: usize,
    pub max_rounds: u32,
    pub seed: u64,
    pub protocol: ProtocolKind,
}

impl Default for NetworkSection {
    fn default() -> Self {
        let d = NetworkConfig::default();
        Self {
            radius_m: d.area.radius_m,
            node_count: d.area.node_count,
            initial_energy_j: d.initial_energy_j,
            cluster_count: d.k_override.map_or(ClusterCount::Auto(Auto::Auto), ClusterCount::Fixed),
            bin_count: DEFAULT_BIN_COUNT,
            max_rounds: d.max_rounds,
            seed: d.seed,
            protocol: d.protocol,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(untagged)]
pub enum ClusterCount {
    Fixed(usize),
    Auto(Auto),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Auto {
    Auto,
}

impl ClusterCount {
    pub fn fixed(self) -> Option<usize> {
        match self {
            ClusterCount::Fixed(k) => Some(k),
            ClusterCount::Auto(_) => None,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RadioSection {
    pub e_elec_nj: f64,
    pub e_fs_pj: f64,
    pub e_mp_pj: f64,
    pub e_da_nj: f64,
    pub packet_bits: u64,
}

impl Default for RadioSection {
    fn default() -> Self {
        let r = RadioParams::default();
        Self {
            e_elec_nj: 50.0,
            e_fs_pj: 10.0,
            e_mp_pj: 0.0013,
            e_da_nj: 5.0,
            packet_bits: r.packet_bits,
        }
    }
}

impl RadioSection {
    pub fn to_params(&self) -> RadioParams {
        RadioParams {
            e_elec: self.e_elec_nj / NANO,
            e_fs: self.e_fs_pj / PICO,
            e_mp: self.e_mp_pj / PICO,
            e_da: self.e_da_nj / NANO,
            packet_bits: self.packet_bits,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ObjectiveSection {
    pub alpha1: f64,
    pub alpha2: f64,
}

impl Default for ObjectiveSection {
    fn default() -> Self {
        let w = ObjectiveWeights::default();
        Self {
            alpha1: w.alpha1,
            alpha2: w.alpha2,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SelectionSection {
    pub omega1: f64,
    /// Defaults to `1 − omega1`.
    pub omega2: Option<f64>,
    pub r_o1_m: f64,
}

impl Default for SelectionSection {
    fn default() -> Self {
        let w = SelectionWeights::default();
        Self {
            omega1: w.omega1,
            omega2: None,
            r_o1_m: w.r_o1_m,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepKind {
    #[default]
    None,
    NodeCount,
    Omega1,
    KAndDchGrid,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentSection {
    pub seeds: Vec<u64>,
    pub protocols: Vec<ProtocolKind>,
    pub sweep: SweepKind,
    pub node_counts: Vec<usize>,
    pub omega1_values: Vec<f64>,
    pub grid_k: Vec<usize>,
    pub grid_d_m: Vec<f64>,
    pub out_dir: PathBuf,
}

impl Default for ExperimentSection {
    fn default() -> Self {
        Self {
            seeds: vec![1],
            protocols: ProtocolKind::ALL.to_vec(),
            sweep: SweepKind::None,
            node_counts: Vec::new(),
            omega1_values: Vec::new(),
            grid_k: (1..=30).collect(),
            grid_d_m: (0..=15).map(|i| f64::from(i) * 10.0).collect(),
            out_dir: PathBuf::from("results"),
        }
    }
}

/// What a sweep varies across cells.
#[derive(Debug, Clone, PartialEq)]
pub enum SweepAxis {
    None,
    NodeCount(Vec<usize>),
    Omega1(Vec<f64>),
    KAndDchGrid { ks: Vec<usize>, ds: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub base: NetworkConfig,
    pub sweep: SweepAxis,
    pub seeds: Vec<u64>,
    pub out_dir: PathBuf,
    pub protocols: Vec<ProtocolKind>,
}

impl ExperimentSpec {
    pub fn validate(&self) -> Result<()> {
        self.base.validate()?;
        if self.seeds.is_empty() {
            return Err(Error::Config("experiment needs at least one seed".into()));
        }
        if self.protocols.is_empty() {
            return Err(Error::Config("experiment needs at least one protocol".into()));
        }
        let empty = match &self.sweep {
            SweepAxis::None => false,
            SweepAxis::NodeCount(v) => v.is_empty(),
            SweepAxis::Omega1(v) => v.is_empty(),
            SweepAxis::KAndDchGrid { ks, ds } => ks.is_empty() || ds.is_empty(),
        };
        if empty {
            return Err(Error::Config("sweep lists must be non-empty".into()));
        }
        Ok(())
    }
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn network_config(&self) -> Result<NetworkConfig> {
        let n = &self.network;
        let s = &self.selection;
        let cfg = NetworkConfig {
            area: AreaSpec {
                radius_m: n.radius_m,
                node_count: n.node_count,
            },
            initial_energy_j: n.initial_energy_j,
            radio: self.radio.to_params(),
            objective: ObjectiveWeights {
                alpha1: self.objective.alpha1,
                alpha2: self.objective.alpha2,
            },
            selection: SelectionWeights {
                omega1: s.omega1,
                omega2: s.omega2.unwrap_or(1.0 - s.omega1),
                r_o1_m: s.r_o1_m,
            },
            k_override: n.cluster_count.fixed(),
            bin_count: n.bin_count,
            bat: self.bat,
            fcm: self.fcm,
            protocol: n.protocol,
            seed: n.seed,
            max_rounds: n.max_rounds,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn experiment_spec(&self) -> Result<ExperimentSpec> {
        let e = &self.experiment;
        let sweep = match e.sweep {
            SweepKind::None => SweepAxis::None,
            SweepKind::NodeCount => SweepAxis::NodeCount(e.node_counts.clone()),
            SweepKind::Omega1 => SweepAxis::Omega1(e.omega1_values.clone()),
            SweepKind::KAndDchGrid => SweepAxis::KAndDchGrid {
                ks: e.grid_k.clone(),
                ds: e.grid_d_m.clone(),
            },
        };
        let spec = ExperimentSpec {
            base: self.network_config()?,
            sweep,
            seeds: e.seeds.clone(),
            out_dir: e.out_dir.clone(),
            protocols: e.protocols.clone(),
        };
        spec.validate()?;
        Ok(spec)
    }
}
