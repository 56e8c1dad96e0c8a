//! Lower-bound instance generator: a hierarchically well-separated perfect
//! binary tree with a phase-structured random demand walk and predictions
//! that reveal the target leaf only down to a chosen scale.
//!
//! The tree has edge lengths shrinking by a factor `m` per level. Phase
//! `i + 1` issues `m^i` demands at the depth-`i` vertex of a random
//! root-to-leaf path; the path's leaf is the distinguished facility around
//! which a single-facility solution stays cheap while online algorithms keep
//! paying at every scale.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::instance::{OnlineInstance, PredictionStream};
use crate::metric::{FacilityId, FacilityUniverse, MetricSpace, PointId};

/// Demands above this count are refused at generation time.
pub const MAX_HST_DEMANDS: usize = 2_000_000;

/// Parameters of a tree instance. Every tree vertex is both a potential
/// demand location and a unit-cost facility.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HstInstanceSpec {
    /// Distance shrink factor per level (and demand multiplicity base);
    /// at least 2 so edge lengths strictly decrease.
    pub m: u32,
    /// Tree height `h`; the tree is a perfect binary tree with `2^(h+1) - 1`
    /// vertices.
    pub height: u32,
    /// Distance from the root to its children (`D`).
    pub root_distance: f64,
    /// Scale below which predictions stop revealing the target leaf,
    /// in `(0, 1]`.
    pub eta_inf: f64,
    pub seed: u64,
}

impl HstInstanceSpec {
    pub fn validate(&self) -> Result<()> {
        if self.m < 2 {
            return Err(Error::Config(format!(
                "distance ratio m must be at least 2, got {}",
                self.m
            )));
        }
        if self.height == 0 || self.height > 30 {
            return Err(Error::Config(format!(
                "tree height must be in 1..=30, got {}",
                self.height
            )));
        }
        if self.root_distance.is_nan() || self.root_distance <= 0.0 || self.root_distance.is_infinite() {
            return Err(Error::Config(format!(
                "root distance must be positive, got {}",
                self.root_distance
            )));
        }
        if self.eta_inf.is_nan() || self.eta_inf <= 0.0 || self.eta_inf > 1.0 {
            return Err(Error::Config(format!(
                "eta must lie in (0, 1], got {}",
                self.eta_inf
            )));
        }
        if self.demand_count_u128() > MAX_HST_DEMANDS as u128 {
            return Err(Error::Config(format!(
                "spec yields {} demands, cap is {}",
                self.demand_count_u128(),
                MAX_HST_DEMANDS
            )));
        }
        Ok(())
    }

    fn demand_count_u128(&self) -> u128 {
        (0..=self.height)
            .map(|i| (self.m as u128).pow(i))
            .sum()
    }

    /// Total number of demands, summed over all phases.
    pub fn demand_count(&self) -> usize {
        self.demand_count_u128() as usize
    }

    /// Number of tree vertices.
    pub fn vertex_count(&self) -> usize {
        (1usize << (self.height + 1)) - 1
    }

    /// Length of an edge from a depth-`d` vertex to its children.
    pub fn edge_length(&self, depth: u32) -> f64 {
        self.root_distance / (self.m as f64).powi(depth as i32)
    }

    /// Distance from the depth-`d` path vertex down to the path leaf.
    pub fn path_distance_to_leaf(&self, depth: u32) -> f64 {
        (depth..self.height).map(|t| self.edge_length(t)).sum()
    }

    /// Diameter of the subtree rooted at a depth-`d` vertex.
    pub fn subtree_diameter(&self, depth: u32) -> f64 {
        2.0 * self.path_distance_to_leaf(depth)
    }

    /// The first phase whose subtree diameter drops below the prediction
    /// scale; from this phase on, predictions equal the demand vertex.
    pub fn h_prime(&self) -> u32 {
        (0..=self.height)
            .find(|&i| self.subtree_diameter(i) < self.eta_inf)
            .unwrap_or(self.height)
    }

    /// Upper bound on the optimal cost via the solution that opens a single
    /// facility at the target leaf: `1 + h D m / (m - 1)`.
    pub fn opt_upper_bound(&self) -> f64 {
        let m = self.m as f64;
        1.0 + self.height as f64 * self.root_distance * m / (m - 1.0)
    }
}

/// Derives tree parameters from a demand budget: the shrink factor follows
/// `ln n / ln ln n`, the height is the largest that keeps the demand count
/// within `n_target`, and the root edge is `1 / m`.
pub fn paper_parameters(n_target: usize, eta_inf: f64) -> Result<HstInstanceSpec> {
    if n_target < 16 {
        return Err(Error::Config(format!(
            "need a demand budget of at least 16, got {}",
            n_target
        )));
    }
    let n = n_target as f64;
    let m = (n.ln() / n.ln().ln()).round().max(2.0) as u32;
    let mut height = 1u32;
    let mut total = 1u128 + m as u128;
    loop {
        let next = total + (m as u128).pow(height + 1);
        if next > n_target as u128 {
            break;
        }
        total = next;
        height += 1;
    }
    let spec = HstInstanceSpec {
        m,
        height,
        root_distance: 1.0 / m as f64,
        eta_inf,
        seed: 0,
    };
    spec.validate()?;
    Ok(spec)
}

fn depth_of(vertex: PointId) -> u32 {
    (vertex + 1).ilog2()
}

/// Generates the instance: the tree metric, the phase-structured demand
/// sequence along a random root-to-leaf path, the prediction stream, and the
/// target leaf (as a facility id; facilities are the tree vertices in index
/// order with uniform cost 1).
///
/// Predictions follow the hiding rule: a demand closer than `eta_inf` to the
/// leaf predicts itself; any other demand predicts the path vertex nearest to
/// the leaf among those still at distance at least `eta_inf` from it.
pub fn generate_hst_instance(
    spec: &HstInstanceSpec,
) -> Result<(OnlineInstance, PredictionStream, FacilityId)> {
    spec.validate()?;
    let h = spec.height;

    // Heap-ordered perfect binary tree: children of v are 2v+1 and 2v+2.
    let mut edges = Vec::with_capacity(spec.vertex_count() - 1);
    for v in 0..(1usize << h) - 1 {
        let len = spec.edge_length(depth_of(v));
        edges.push((v, 2 * v + 1, len));
        edges.push((v, 2 * v + 2, len));
    }
    let space = Arc::new(MetricSpace::graph(edges)?);
    let universe = Arc::new(FacilityUniverse::with_uniform_costs(
        (0..spec.vertex_count()).collect(),
        &space,
    )?);

    // Random root-to-leaf path.
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut path = Vec::with_capacity(h as usize + 1);
    let mut v: PointId = 0;
    path.push(v);
    for _ in 0..h {
        v = if rng.gen::<bool>() { 2 * v + 1 } else { 2 * v + 2 };
        path.push(v);
    }
    let leaf = path[h as usize];

    // The prediction target for far demands: the path vertex nearest to the
    // leaf that is still at distance >= eta from it. Distances to the leaf
    // strictly decrease along the path, so one scan suffices; whenever a
    // demand at depth i is itself at distance >= eta, the target lies at
    // depth >= i and therefore on the demand's own path to the leaf.
    let far_target: Option<u32> = (0..=h)
        .filter(|&j| spec.path_distance_to_leaf(j) >= spec.eta_inf)
        .max();

    let mut demands: Vec<PointId> = Vec::with_capacity(spec.demand_count());
    let mut preds: Vec<FacilityId> = Vec::with_capacity(spec.demand_count());
    for i in 0..=h {
        let vertex = path[i as usize];
        let dist_to_leaf = spec.path_distance_to_leaf(i);
        let pred_vertex = if dist_to_leaf < spec.eta_inf {
            vertex
        } else {
            let j = far_target.expect("some path vertex is at distance >= eta");
            path[j as usize]
        };
        let copies = (spec.m as usize).pow(i);
        for _ in 0..copies {
            demands.push(vertex);
            preds.push(pred_vertex);
        }
    }

    let inst = OnlineInstance::new(space, Arc::clone(&universe), demands)?;
    let stream = PredictionStream::new(preds, &universe)?;
    Ok((inst, stream, leaf))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::compute_errors;
    use crate::offline::brute_force;

    #[test]
    fn demand_counts_follow_the_geometric_sum() {
        let spec = HstInstanceSpec {
            m: 2,
            height: 2,
            root_distance: 0.5,
            eta_inf: 0.5,
            seed: 1,
        };
        assert_eq!(spec.demand_count(), 7); // 1 + 2 + 4
        assert_eq!(spec.vertex_count(), 7);
        let (inst, preds, _) = generate_hst_instance(&spec).unwrap();
        assert_eq!(inst.len(), 7);
        assert_eq!(preds.len(), 7);
    }

    #[test]
    fn paper_parameters_worked_example() {
        // n = 1000: m = round(6.91 / 1.93) = 4; heights 0..=4 give
        // 1 + 4 + 16 + 64 + 256 = 341 <= 1000 < 1365, so h = 4, D = 0.25.
        let spec = paper_parameters(1000, 0.5).unwrap();
        assert_eq!(spec.m, 4);
        assert_eq!(spec.height, 4);
        assert_eq!(spec.root_distance, 0.25);
        assert_eq!(spec.demand_count(), 341);
    }

    #[test]
    fn paper_parameters_clamps_the_ratio() {
        // Small budgets would push ln n / ln ln n below 2; the ratio must
        // stay at least 2 to keep edge lengths strictly decreasing.
        let spec = paper_parameters(16, 1.0).unwrap();
        assert!(spec.m >= 2);
        assert!(spec.demand_count() <= 16);
    }

    #[test]
    fn eta_one_pins_h_prime_at_the_root_scale() {
        let spec = paper_parameters(1000, 1.0).unwrap();
        // Root subtree diameter is 2 * sum D/m^t < 1 already for m=4, D=1/4,
        // so predictions are informative only at the coarsest scale.
        assert_eq!(spec.h_prime(), 0);
    }

    #[test]
    fn tree_distances_match_explicit_path_walks() {
        let spec = HstInstanceSpec {
            m: 3,
            height: 4,
            root_distance: 1.0 / 3.0,
            eta_inf: 0.5,
            seed: 0,
        };
        let (inst, _, _) = generate_hst_instance(&spec).unwrap();
        let space = inst.space();
        let n = spec.vertex_count();
        // Oracle: climb both vertices to their lowest common ancestor,
        // summing explicit edge lengths.
        let walk = |mut a: usize, mut b: usize| -> f64 {
            let mut total = 0.0;
            while a != b {
                if depth_of(a) >= depth_of(b) {
                    total += spec.edge_length(depth_of(a) - 1);
                    a = (a - 1) / 2;
                } else {
                    total += spec.edge_length(depth_of(b) - 1);
                    b = (b - 1) / 2;
                }
            }
            total
        };
        for a in 0..n {
            for b in 0..n {
                let expected = walk(a, b);
                let got = space.distance(a, b);
                assert!(
                    (expected - got).abs() < 1e-12,
                    "d({}, {}) = {} expected {}",
                    a,
                    b,
                    got,
                    expected
                );
            }
        }
    }

    #[test]
    fn predictions_hide_the_leaf_below_scale() {
        let spec = HstInstanceSpec {
            m: 4,
            height: 4,
            root_distance: 0.25,
            eta_inf: 0.05,
            seed: 9,
        };
        let (inst, preds, leaf) = generate_hst_instance(&spec).unwrap();
        let space = inst.space();
        // Path-vertex distances to the leaf: 0.332, 0.082, 0.0195, 0.0039, 0.
        // The deepest one at distance >= 0.05 is depth 1.
        let expected_far = spec.path_distance_to_leaf(1);
        for (i, (&x, &p)) in inst.demands().iter().zip(preds.as_slice()).enumerate() {
            let d_demand = space.distance(x, inst.universe().site(leaf));
            let d_pred = space.distance(inst.universe().site(p), inst.universe().site(leaf));
            if d_demand < spec.eta_inf {
                assert_eq!(p, x, "demand {} below scale predicts itself", i);
            } else {
                assert!(
                    (d_pred - expected_far).abs() < 1e-12,
                    "far demand {} predicts the boundary vertex",
                    i
                );
                assert!(d_pred >= spec.eta_inf);
            }
        }
    }

    #[test]
    fn single_leaf_solution_bounds_the_optimum_on_tiny_trees() {
        for seed in 0..5 {
            let spec = HstInstanceSpec {
                m: 2,
                height: 2,
                root_distance: 0.5,
                eta_inf: 0.5,
                seed,
            };
            let (inst, _, leaf) = generate_hst_instance(&spec).unwrap();
            let exact = brute_force(&inst).unwrap();
            // The one-facility-at-the-leaf solution costs at most the bound,
            // so the optimum does too.
            assert!(exact.cost() <= spec.opt_upper_bound() + 1e-12);
            // And the bound really is achievable by that solution.
            let site = inst.universe().site(leaf);
            let one_leaf: f64 = 1.0
                + inst
                    .demands()
                    .iter()
                    .map(|&x| inst.space().distance(x, site))
                    .sum::<f64>();
            assert!(one_leaf <= spec.opt_upper_bound() + 1e-12);
        }
    }

    #[test]
    fn measured_error_is_the_smallest_scale_above_eta() {
        let spec = HstInstanceSpec {
            m: 4,
            height: 4,
            root_distance: 0.25,
            eta_inf: 0.05,
            seed: 3,
        };
        let (inst, preds, leaf) = generate_hst_instance(&spec).unwrap();
        // Reference solution fixed to the single target leaf.
        let leaf_only = crate::offline::solution_for_open_set(&inst, &[leaf]).unwrap();
        let report = compute_errors(&inst, &preds, &leaf_only).unwrap();
        // The far prediction sits at the smallest path distance >= eta; the
        // measured maximum error can exceed eta itself but never the next
        // coarser scale (a factor m away), provided some demand is far.
        let smallest_above: f64 = (0..=spec.height)
            .map(|j| spec.path_distance_to_leaf(j))
            .filter(|&d| d >= spec.eta_inf)
            .fold(f64::INFINITY, f64::min);
        assert!(report.eta_inf() <= smallest_above + 1e-12);
    }

    #[test]
    fn oversized_specs_are_refused() {
        let spec = HstInstanceSpec {
            m: 10,
            height: 10,
            root_distance: 0.1,
            eta_inf: 0.5,
            seed: 0,
        };
        assert!(matches!(
            generate_hst_instance(&spec),
            Err(Error::Config(_))
        ));
    }
}
