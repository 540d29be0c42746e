//! Cluster-head election by residual energy and radial proximity to the
//! minimum-energy circle O₁.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::network::{ClusterAssignment, Node};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SelectionWeights {
    /// Residual energy weight ω₁.
    pub omega1: f64,
    /// O₁ proximity weight ω₂.
    pub omega2: f64,
    pub r_o1_m: f64,
}

impl Default for SelectionWeights {
    fn default() -> Self {
        Self {
            omega1: 0.7,
            // written as 1 − ω₁ so a config that only sets ω₁ reproduces it bit for bit
            omega2: 1.0 - 0.7,
            r_o1_m: 90.0,
        }
    }
}

impl SelectionWeights {
    pub fn new(omega1: f64, omega2: f64, r_o1_m: f64) -> Result<Self> {
        let w = Self {
            omega1,
            omega2,
            r_o1_m,
        };
        w.validate()?;
        Ok(w)
    }

    pub fn validate(&self) -> Result<()> {
        let unit = |v: f64| (0.0..=1.0).contains(&v);
        if !unit(self.omega1) || !unit(self.omega2) || (self.omega1 + self.omega2 - 1.0).abs() > 1e-9
        {
            return Err(Error::InvalidParameter(format!(
                "selection weights must lie in [0,1] and sum to 1, got ({}, {})",
                self.omega1, self.omega2
            )));
        }
        if !(self.r_o1_m >= 0.0 && self.r_o1_m.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "r_o1_m must be >= 0, got {}",
                self.r_o1_m
            )));
        }
        Ok(())
    }
}

/// Radial distance from a node to the circle of radius `r_o1` around the BS.
pub fn distance_to_o1(node_bs_distance: f64, r_o1: f64) -> f64 {
    (node_bs_distance - r_o1).abs()
}

/// `ω₁·E_re/E_o + ω₂·(d_max − d)/(d_max − d_min)`, with distances measured
/// to O₁. The distance term is 1 when `d_max = d_min`.
pub fn attribute_score(
    node: &Node,
    cluster_min_d: f64,
    cluster_max_d: f64,
    w: &SelectionWeights,
) -> Result<f64> {
    if !node.alive {
        return Err(Error::DeadNode(node.id));
    }
    if cluster_min_d > cluster_max_d {
        return Err(Error::InvalidParameter(format!(
            "cluster distance bounds inverted: {cluster_min_d} > {cluster_max_d}"
        )));
    }
    let d = distance_to_o1(node.distance_to_bs, w.r_o1_m);
    let span = cluster_max_d - cluster_min_d;
    let position = if span > 0.0 {
        ((cluster_max_d - d) / span).clamp(0.0, 1.0)
    } else {
        1.0
    };
    Ok(w.omega1 * node.energy_fraction() + w.omega2 * position)
}

/// Elects one head per non-empty cluster: the member with the highest
/// attribute score, lowest id on ties.
pub fn select_cluster_heads(
    assignment: &ClusterAssignment,
    nodes: &[Node],
    w: &SelectionWeights,
) -> Result<ClusterAssignment> {
    let mut out = assignment.clone();
    for cluster in &mut out.clusters {
        cluster.head = None;
        if cluster.members.is_empty() {
            continue;
        }
        let dists: Vec<f64> = cluster
            .members
            .iter()
            .map(|&id| distance_to_o1(nodes[id].distance_to_bs, w.r_o1_m))
            .collect();
        let dmin = dists.iter().cloned().fold(f64::INFINITY, f64::min);
        let dmax = dists.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let mut best: Option<(usize, f64)> = None;
        for &id in &cluster.members {
            let s = attribute_score(&nodes[id], dmin, dmax, w)?;
            let better = match best {
                None => true,
                Some((bid, bs)) => s > bs || (s == bs && id < bid),
            };
            if better {
                best = Some((id, s));
            }
        }
        cluster.head = best.map(|(id, _)| id);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::Cluster;
    use proptest::prelude::*;

    fn node(id: usize, r: f64, frac: f64) -> Node {
        let mut n = Node::from_polar(id, r, 0.3, 0.5);
        n.energy_residual = 0.5 * frac;
        n
    }

    #[test]
    fn distance_examples() {
        assert_eq!(distance_to_o1(90.0, 90.0), 0.0);
        assert_eq!(distance_to_o1(0.0, 90.0), 90.0);
        assert_eq!(distance_to_o1(150.0, 90.0), 60.0);
    }

    #[test]
    fn score_examples() {
        let w = SelectionWeights::default();
        let s = attribute_score(&node(0, 90.0, 1.0), 0.0, 60.0, &w).unwrap();
        assert!((s - 1.0).abs() < 1e-12);
        let s = attribute_score(&node(1, 150.0, 0.0), 0.0, 60.0, &w).unwrap();
        assert!(s.abs() < 1e-12);
        // (d_max − d)/(d_max − d_min) = 0.5 with energy fraction 0.5
        let s = attribute_score(&node(2, 120.0, 0.5), 0.0, 60.0, &w).unwrap();
        assert!((s - 0.5).abs() < 1e-12);
    }

    #[test]
    fn score_rejects_dead_and_inverted() {
        let w = SelectionWeights::default();
        let mut n = node(0, 90.0, 1.0);
        assert!(attribute_score(&n, 5.0, 1.0, &w).is_err());
        n.alive = false;
        assert!(matches!(attribute_score(&n, 0.0, 1.0, &w), Err(Error::DeadNode(0))));
    }

    #[test]
    fn degenerate_span_counts_as_best_position() {
        let w = SelectionWeights::default();
        let s = attribute_score(&node(0, 30.0, 0.5), 60.0, 60.0, &w).unwrap();
        assert!((s - (0.35 + 0.3)).abs() < 1e-12);
    }

    fn assign(members: Vec<usize>) -> ClusterAssignment {
        ClusterAssignment {
            clusters: vec![Cluster::new(members), Cluster::new(vec![])],
            round_created: 1,
        }
    }

    #[test]
    fn singleton_and_empty_clusters() {
        let nodes = vec![node(0, 10.0, 0.2)];
        let a = select_cluster_heads(&assign(vec![0]), &nodes, &SelectionWeights::default()).unwrap();
        assert_eq!(a.clusters[0].head, Some(0));
        assert_eq!(a.clusters[1].head, None);
    }

    #[test]
    fn energy_dominates_with_equal_distance() {
        let nodes = vec![node(0, 100.0, 0.5), node(1, 80.0, 1.0)];
        for omega1 in [0.01, 0.3, 0.7, 1.0] {
            let w = SelectionWeights::new(omega1, 1.0 - omega1, 90.0).unwrap();
            let a = select_cluster_heads(&assign(vec![0, 1]), &nodes, &w).unwrap();
            assert_eq!(a.clusters[0].head, Some(1));
        }
    }

    #[test]
    fn ties_go_to_lowest_id() {
        let nodes = vec![node(0, 100.0, 1.0), node(1, 80.0, 1.0)];
        let a = select_cluster_heads(&assign(vec![1, 0]), &nodes, &SelectionWeights::default())
            .unwrap();
        assert_eq!(a.clusters[0].head, Some(0));
    }

    fn arb_cluster() -> impl Strategy<Value = Vec<(f64, f64)>> {
        proptest::collection::vec((0.0f64..150.0, 0.01f64..=1.0), 1..12)
    }

    proptest! {
        #[test]
        fn head_matches_brute_force(members in arb_cluster(), omega1 in 0.0f64..=1.0) {
            let nodes: Vec<Node> = members.iter().enumerate().map(|(i, &(r, f))| node(i, r, f)).collect();
            let w = SelectionWeights::new(omega1, 1.0 - omega1, 90.0).unwrap();
            let ids: Vec<usize> = (0..nodes.len()).collect();
            let a = select_cluster_heads(&assign(ids.clone()), &nodes, &w).unwrap();
            // brute force straight from the formula
            let d: Vec<f64> = nodes.iter().map(|n| (n.distance_to_bs - 90.0).abs()).collect();
            let (lo, hi) = d.iter().fold((f64::MAX, f64::MIN), |(a, b), &x| (a.min(x), b.max(x)));
            let score = |i: usize| {
                let pos = if hi > lo { (hi - d[i]) / (hi - lo) } else { 1.0 };
                omega1 * nodes[i].energy_residual / 0.5 + (1.0 - omega1) * pos
            };
            let mut expect = 0;
            for &i in &ids {
                if score(i) > score(expect) {
                    expect = i;
                }
            }
            prop_assert_eq!(a.clusters[0].head, Some(expect));
        }

        #[test]
        fn score_in_unit_interval(r in 0.0f64..200.0, f in 0.0f64..=1.0, lo in 0.0f64..100.0, span in 0.0f64..100.0, omega1 in 0.0f64..=1.0) {
            let w = SelectionWeights::new(omega1, 1.0 - omega1, 90.0).unwrap();
            let d = distance_to_o1(r, 90.0);
            let lo = lo.min(d);
            let hi = (lo + span).max(d);
            let s = attribute_score(&node(0, r, f), lo, hi, &w).unwrap();
            prop_assert!((0.0..=1.0 + 1e-12).contains(&s));
        }

        #[test]
        fn argmax_invariant_when_positions_tie(fracs in proptest::collection::vec(0.01f64..=1.0, 1..12), c in 0.05f64..=1.0) {
            let nodes: Vec<Node> = fracs.iter().enumerate().map(|(i, &f)| node(i, 120.0, f)).collect();
            let scaled: Vec<Node> = nodes.iter().map(|n| {
                let mut m = n.clone();
                m.energy_residual *= c;
                m
            }).collect();
            let w = SelectionWeights::default();
            let ids: Vec<usize> = (0..nodes.len()).collect();
            let a = select_cluster_heads(&assign(ids.clone()), &nodes, &w).unwrap();
            let b = select_cluster_heads(&assign(ids), &scaled, &w).unwrap();
            prop_assert_eq!(a.clusters[0].head, b.clusters[0].head);
        }

        #[test]
        fn argmax_invariant_under_energy_scaling(members in arb_cluster(), c in 0.05f64..=1.0) {
            let nodes: Vec<Node> = members.iter().enumerate().map(|(i, &(r, f))| node(i, r, f)).collect();
            let scaled: Vec<Node> = nodes.iter().map(|n| {
                let mut m = n.clone();
                m.energy_residual *= c;
                m
            }).collect();
            let w = SelectionWeights::default();
            let ids: Vec<usize> = (0..nodes.len()).collect();
            let a = select_cluster_heads(&assign(ids.clone()), &nodes, &w).unwrap();
            let b = select_cluster_heads(&assign(ids), &scaled, &w).unwrap();
            let ha = a.clusters[0].head.unwrap();
            let hb = b.clusters[0].head.unwrap();
            // Scaling shrinks energy gaps, so the argmax is only preserved
            // when the chosen head also leads on position.
            let pos = |n: &Node| (n.distance_to_bs - 90.0).abs();
            if nodes.iter().all(|n| pos(&nodes[ha]) <= pos(n)) {
                prop_assert_eq!(ha, hb);
            }
        }
    }
}
