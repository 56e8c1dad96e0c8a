//! The randomized class-wise opening step used by the online algorithms.
//!
//! For a demand `x`, class `k` proposes the nearest facility among the open
//! set and everything of cost at most `2^(k-1)`; the marginal distance saving
//! of class `k` over class `k-1`, divided by `2^k`, is the probability of
//! opening that class's proposal. The tail sums of those probabilities carve
//! `[0, 1)` into half-open intervals, and a single uniform draw picks at most
//! one facility to open.

use rand::Rng;

use crate::algorithms::RunState;
use crate::error::{Error, Result};
use crate::metric::{facility_distances, FacilityId, FacilityUniverse, MetricSpace, PointId};

/// Lexicographic candidate order: smaller distance, then cheaper cost class,
/// then smaller facility index. Used for every nearest-facility argmin so that
/// runs are reproducible.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Cand {
    pub dist: f64,
    pub class: u32,
    pub id: FacilityId,
}

impl Cand {
    pub(crate) fn better_than(&self, other: &Cand) -> bool {
        if self.dist != other.dist {
            return self.dist < other.dist;
        }
        if self.class != other.class {
            return self.class < other.class;
        }
        self.id < other.id
    }
}

/// Trace of a single opening step on one demand.
#[derive(Debug, Clone)]
pub struct MeyStepTrace {
    /// `delta[k]` for `k in 0..=L`: distance to the open set (`k = 0`) and to
    /// the open set united with each cost-class prefix. Nonincreasing.
    pub deltas: Vec<f64>,
    /// Opening probabilities `p_1..p_L` (not normalized; the sampler
    /// truncates implicitly when they sum past 1).
    pub probs: Vec<f64>,
    /// Each class's proposal: the nearest facility among the open set and
    /// that class's cost prefix.
    pub class_nearest: Vec<FacilityId>,
    /// The sampled class index (1-based), if the draw landed in an interval.
    pub sampled_class: Option<usize>,
    /// The facility opened by this step, if any.
    pub opened: Option<FacilityId>,
    /// The facility the demand connects to (nearest open after the step).
    pub assigned: FacilityId,
    /// Distance from the demand to `assigned`.
    pub connect_cost: f64,
    /// Connection cost plus the opening cost of the opened facility (0 when
    /// nothing opened). This is the budget handed to the prediction step.
    pub returned_cost: f64,
}

/// `p_k = (delta_{k-1} - delta_k) / 2^k` for `k in 1..=L`.
///
/// `deltas[0]` may be infinite (no facility open yet); `deltas[k]` for
/// `k >= 1` is always finite because class 1 is nonempty, so `p_1` becomes
/// infinite and the sampler then opens some facility with probability 1.
pub fn opening_probabilities(deltas: &[f64]) -> Vec<f64> {
    (1..deltas.len())
        .map(|k| (deltas[k - 1] - deltas[k]) / (k as f64).exp2())
        .collect()
}

/// Tail sums `s_k = sum_{i=k}^{L} p_i` for `k in 1..=L+1`, with `s_{L+1} = 0`.
/// Returned as `tails[k-1] = s_k`, so `tails.len() == probs.len() + 1`.
pub fn opening_tail_sums(probs: &[f64]) -> Vec<f64> {
    let l = probs.len();
    let mut tails = vec![0.0; l + 1];
    for k in (0..l).rev() {
        tails[k] = tails[k + 1] + probs[k];
    }
    tails
}

/// Maps a uniform draw `r in [0, 1)` to the 1-based class index `i` with
/// `r in [s_{i+1}, s_i)`, or `None` when `r >= s_1` (no opening). Empty
/// intervals (`p_i = 0`) can never be selected, and intervals lying entirely
/// at or above 1 are unreachable, which is exactly the truncation rule for
/// probability mass past 1.
pub fn sample_opening_class(tail_sums: &[f64], r: f64) -> Option<usize> {
    let l = tail_sums.len() - 1;
    (1..=l).find(|&i| tail_sums[i] <= r && r < tail_sums[i - 1])
}

/// Runs one opening step for demand `x`: computes the class-wise nearest
/// facilities and their deltas, draws once, opens at most one facility, and
/// connects `x` to the nearest open facility.
pub fn mey_step<R: Rng>(
    x: PointId,
    state: &mut RunState,
    universe: &FacilityUniverse,
    space: &MetricSpace,
    rng: &mut R,
) -> Result<MeyStepTrace> {
    if universe.is_empty() {
        return Err(Error::Config("facility universe is empty".into()));
    }
    let l = universe.num_classes() as usize;
    let fdist = facility_distances(space, universe, x);

    // delta_0: nearest already-open facility.
    let mut best_open: Option<Cand> = None;
    for &f in state.open_facilities() {
        let cand = Cand {
            dist: fdist[f],
            class: universe.class_of(f),
            id: f,
        };
        if best_open.is_none_or(|b| cand.better_than(&b)) {
            best_open = Some(cand);
        }
    }
    let delta0 = best_open.map_or(f64::INFINITY, |c| c.dist);

    // Nearest facility per exact cost class; prefix minima over classes,
    // joined with the open set, give each class's proposal.
    let mut best_in_class: Vec<Option<Cand>> = vec![None; l + 1];
    for f in universe.ids() {
        let k = universe.class_of(f) as usize;
        let cand = Cand {
            dist: fdist[f],
            class: k as u32,
            id: f,
        };
        if best_in_class[k].is_none_or(|b| cand.better_than(&b)) {
            best_in_class[k] = Some(cand);
        }
    }
    let mut deltas = Vec::with_capacity(l + 1);
    let mut class_nearest = Vec::with_capacity(l);
    deltas.push(delta0);
    let mut running = best_open;
    for class_best in best_in_class.iter().skip(1) {
        if let Some(c) = *class_best {
            if running.is_none_or(|b| c.better_than(&b)) {
                running = Some(c);
            }
        }
        let fk = running.expect("class 1 is nonempty");
        class_nearest.push(fk.id);
        deltas.push(fk.dist);
    }

    let probs = opening_probabilities(&deltas);
    let tails = opening_tail_sums(&probs);
    let r: f64 = rng.gen();
    let sampled_class = sample_opening_class(&tails, r);

    let mut opened = None;
    let mut opened_cost = 0.0;
    if let Some(i) = sampled_class {
        let f = class_nearest[i - 1];
        // A facility already open can never be sampled: its interval is empty
        // because opening it again saves no distance.
        debug_assert!(!state.is_open(f));
        if !state.is_open(f) {
            state.open_by_mey(f);
            opened = Some(f);
            opened_cost = universe.cost(f);
        }
    }

    // Connect to the nearest facility in the updated open set.
    let mut best_after = best_open;
    if let Some(f) = opened {
        let cand = Cand {
            dist: fdist[f],
            class: universe.class_of(f),
            id: f,
        };
        if best_after.is_none_or(|b| cand.better_than(&b)) {
            best_after = Some(cand);
        }
    }
    let assigned = best_after.expect("open set is nonempty after the step");

    Ok(MeyStepTrace {
        deltas,
        probs,
        class_nearest,
        sampled_class,
        opened,
        assigned: assigned.id,
        connect_cost: assigned.dist,
        returned_cost: assigned.dist + opened_cost,
    })
}
