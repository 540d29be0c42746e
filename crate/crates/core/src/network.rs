//! Sensor nodes and cluster partitions shared by every protocol.

use std::f64::consts::TAU;

use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Member,
    Head,
}

/// One sensor. The BS sits at the origin.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Node {
    pub id: usize,
    pub distance_to_bs: f64,
    /// Polar angle in `[0, 2π)`.
    pub angle: f64,
    pub x: f64,
    pub y: f64,
    pub energy_initial: f64,
    pub energy_residual: f64,
    pub alive: bool,
    pub role: Role,
}

impl Node {
    /// Builds a node from polar coordinates, normalising the angle into `[0, 2π)`.
    pub fn from_polar(id: usize, distance_to_bs: f64, angle: f64, energy_initial: f64) -> Self {
        let mut angle = angle.rem_euclid(TAU);
        if angle >= TAU {
            angle = 0.0;
        }
        Self {
            id,
            distance_to_bs,
            angle,
            x: distance_to_bs * angle.cos(),
            y: distance_to_bs * angle.sin(),
            energy_initial,
            energy_residual: energy_initial,
            alive: energy_initial > 0.0,
            role: Role::Member,
        }
    }

    pub fn distance_to(&self, other: &Node) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    pub fn distance_to_point(&self, x: f64, y: f64) -> f64 {
        (self.x - x).hypot(self.y - y)
    }

    pub fn energy_fraction(&self) -> f64 {
        if self.energy_initial > 0.0 {
            self.energy_residual / self.energy_initial
        } else {
            0.0
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct Cluster {
    /// Node ids, ascending.
    pub members: Vec<usize>,
    pub head: Option<usize>,
}

impl Cluster {
    pub fn new(mut members: Vec<usize>) -> Self {
        members.sort_unstable();
        Self {
            members,
            head: None,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct ClusterAssignment {
    pub clusters: Vec<Cluster>,
    pub round_created: u32,
}

impl ClusterAssignment {
    pub fn heads(&self) -> impl Iterator<Item = usize> + '_ {
        self.clusters.iter().filter_map(|c| c.head)
    }

    pub fn head_count(&self) -> usize {
        self.heads().count()
    }

    /// Checks that the alive nodes of `nodes` are covered exactly once, that
    /// dead nodes appear nowhere and that every head is a member of its own
    /// cluster.
    pub fn is_valid_partition(&self, nodes: &[Node]) -> bool {
        let mut seen = vec![0u32; nodes.len()];
        for c in &self.clusters {
            for &m in &c.members {
                match seen.get_mut(m) {
                    Some(s) => *s += 1,
                    None => return false,
                }
            }
            if let Some(h) = c.head {
                if !c.members.contains(&h) || !nodes[h].alive {
                    return false;
                }
            }
        }
        nodes
            .iter()
            .zip(&seen)
            .all(|(n, &s)| if n.alive { s == 1 } else { s == 0 })
    }
}
