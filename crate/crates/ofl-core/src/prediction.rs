//! The budgeted opening loop around a predicted facility, and the
//! calibration rule that replaces far-fetched predictions.
//!
//! The loop repeatedly halves a ball around the prediction (the radius is
//! half the distance to the nearest facility this procedure has opened so
//! far) and opens the cheapest facility inside the ball while the budget
//! lasts. The final, unaffordable candidate is opened with probability
//! `remaining budget / cost`, which makes the expected spend equal the
//! budget.

use rand::Rng;

use crate::algorithms::RunState;
use crate::metric::{facility_distances, FacilityId, FacilityUniverse, MetricSpace, PointId};
use crate::meyerson::Cand;

/// Trace of one budgeted opening invocation.
#[derive(Debug, Clone)]
pub struct PredStepTrace {
    /// Facilities opened deterministically, in order.
    pub opened: Vec<FacilityId>,
    /// The final unaffordable candidate and its acceptance probability
    /// `q / w`, when the loop reached the probabilistic line.
    pub fractional_candidate: Option<(FacilityId, f64)>,
    /// Whether the probabilistic opening fired.
    pub fractional_opened: bool,
    /// Total opening cost charged (deterministic openings plus the
    /// probabilistic one if it fired).
    pub spent: f64,
}

/// Replaces a prediction that is far from the demand by the facility
/// minimizing `d(x, f) + w(f)`. The replacement triggers exactly when
/// `d(x, pred) >= 2 d(x, f') + w(f')`; it can never trigger on the minimizer
/// itself, so calibration is a no-op on already-reasonable predictions.
pub fn calibrate(
    x: PointId,
    pred: FacilityId,
    universe: &FacilityUniverse,
    space: &MetricSpace,
) -> FacilityId {
    let fdist = facility_distances(space, universe, x);
    let mut best: Option<(f64, Cand)> = None;
    for f in universe.ids() {
        let objective = fdist[f] + universe.cost(f);
        let cand = Cand {
            dist: fdist[f],
            class: universe.class_of(f),
            id: f,
        };
        let replace = match &best {
            None => true,
            Some((obj, b)) => objective < *obj || (objective == *obj && cand.better_than(b)),
        };
        if replace {
            best = Some((objective, cand));
        }
    }
    let (_, fp) = best.expect("universe is nonempty");
    if fdist[pred] >= 2.0 * fp.dist + universe.cost(fp.id) {
        fp.id
    } else {
        pred
    }
}

/// Runs the budgeted opening loop for prediction `pred` with budget `q`.
///
/// Terminates when the cheapest candidate in the current ball is
/// unaffordable (then opened with probability `q / w`), when the candidate
/// is already open, or when the ball contains no facility. Every
/// deterministic opening costs at least 1 and halves the ball radius, so the
/// loop runs at most `floor(q) + 1` rounds.
pub fn pred_step<R: Rng>(
    pred: FacilityId,
    q: f64,
    state: &mut RunState,
    universe: &FacilityUniverse,
    space: &MetricSpace,
    rng: &mut R,
) -> PredStepTrace {
    assert!(q.is_finite() && q >= 0.0, "budget must be finite and nonnegative");
    let pred_site = universe.site(pred);
    let pdist = facility_distances(space, universe, pred_site);

    let mut budget = q;
    let mut opened = Vec::new();
    let mut spent = 0.0;
    let mut fractional_candidate = None;
    let mut fractional_opened = false;

    loop {
        let dist_to_pred_open = state
            .pred_opened()
            .iter()
            .map(|&f| pdist[f])
            .fold(f64::INFINITY, f64::min);
        let radius = 0.5 * dist_to_pred_open;

        // Cheapest facility within the ball, ties to the closest, then the
        // smallest index.
        let mut best: Option<(f64, Cand)> = None;
        for f in universe.ids() {
            if pdist[f] > radius {
                continue;
            }
            let w = universe.cost(f);
            let cand = Cand {
                dist: pdist[f],
                class: universe.class_of(f),
                id: f,
            };
            let replace = match &best {
                None => true,
                Some((bw, b)) => w < *bw || (w == *bw && cand.better_than(b)),
            };
            if replace {
                best = Some((w, cand));
            }
        }
        let Some((w, cand)) = best else {
            // Ball is empty; nothing left to open at this radius.
            break;
        };
        if state.is_open(cand.id) {
            // Selecting an already-open facility makes no progress; stop
            // without charging and without the probabilistic opening.
            break;
        }
        if budget >= w {
            state.open_by_pred(cand.id);
            opened.push(cand.id);
            budget -= w;
            spent += w;
        } else {
            let accept = budget / w;
            fractional_candidate = Some((cand.id, accept));
            // A zero-probability event consumes no randomness, keeping
            // zero-budget runs stream-aligned with runs that skip this
            // procedure entirely.
            if budget > 0.0 && rng.gen::<f64>() < accept {
                state.open_by_pred(cand.id);
                fractional_opened = true;
                spent += w;
            }
            break;
        }
    }

    PredStepTrace {
        opened,
        fractional_candidate,
        fractional_opened,
        spent,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::{FacilityUniverse, MetricSpace};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::sync::Arc;

    // Facilities on a line relative to the prediction at the origin:
    // pred itself (cost 4), b at distance 3 (cost 2), a at distance 8 (cost 1).
    fn worked_fixture() -> (Arc<MetricSpace>, Arc<FacilityUniverse>) {
        let space =
            Arc::new(MetricSpace::euclidean(vec![vec![0.0], vec![3.0], vec![8.0]]).unwrap());
        let uni = Arc::new(
            FacilityUniverse::new(vec![0, 1, 2], vec![4.0, 2.0, 1.0], &space).unwrap(),
        );
        (space, uni)
    }

    #[test]
    fn worked_example_opens_cheapest_then_shrinks() {
        let (space, uni) = worked_fixture();
        let mut state = RunState::new(uni.len());
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let trace = pred_step(0, 4.0, &mut state, &uni, &space, &mut rng);
        // Iteration 1: empty set, infinite radius, cheapest overall is a.
        // Iteration 2: radius 4, candidates {b, pred}, cheapest is b.
        // Iteration 3: radius 1.5, only pred qualifies, 4 > 1 remaining.
        assert_eq!(trace.opened, vec![2, 1]);
        let (cand, accept) = trace.fractional_candidate.unwrap();
        assert_eq!(cand, 0);
        assert_eq!(accept, 0.25);
        let deterministic: f64 = trace.opened.iter().map(|&f| uni.cost(f)).sum();
        assert_eq!(deterministic, 3.0);
        assert!(trace.spent == 3.0 || trace.spent == 7.0);
    }

    #[test]
    fn zero_budget_spends_nothing_and_draws_nothing() {
        let (space, uni) = worked_fixture();
        let mut state = RunState::new(uni.len());
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let before = rng.clone();
        let trace = pred_step(0, 0.0, &mut state, &uni, &space, &mut rng);
        assert_eq!(trace.spent, 0.0);
        assert!(trace.opened.is_empty());
        assert!(!trace.fractional_opened);
        let (_, accept) = trace.fractional_candidate.unwrap();
        assert_eq!(accept, 0.0);
        // The RNG stream was not consumed.
        assert_eq!(rng.clone().gen::<u64>(), before.clone().gen::<u64>());
    }

    #[test]
    fn colocated_open_prediction_terminates_silently() {
        let (space, uni) = worked_fixture();
        let mut state = RunState::new(uni.len());
        state.open_by_pred(0);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        // Radius is zero, the only candidate is the open prediction itself.
        let trace = pred_step(0, 10.0, &mut state, &uni, &space, &mut rng);
        assert_eq!(trace.spent, 0.0);
        assert!(trace.fractional_candidate.is_none());
        assert!(!trace.fractional_opened);
    }

    #[test]
    fn calibration_matches_hand_evaluation() {
        // f' at distance 1 with cost 1; prediction at distance 10 from x.
        let space = Arc::new(
            MetricSpace::euclidean(vec![vec![0.0], vec![1.0], vec![10.0]]).unwrap(),
        );
        let uni =
            Arc::new(FacilityUniverse::new(vec![1, 2], vec![1.0, 1.0], &space).unwrap());
        // 10 >= 2*1 + 1: replaced by the minimizer.
        assert_eq!(calibrate(0, 1, &uni, &space), 0);
        // The minimizer itself is never replaced.
        assert_eq!(calibrate(0, 0, &uni, &space), 0);

        // Prediction at distance 2.5: 2.5 < 3, kept.
        let space = Arc::new(
            MetricSpace::euclidean(vec![vec![0.0], vec![1.0], vec![2.5]]).unwrap(),
        );
        let uni =
            Arc::new(FacilityUniverse::new(vec![1, 2], vec![1.0, 1.0], &space).unwrap());
        assert_eq!(calibrate(0, 1, &uni, &space), 1);
    }

    #[test]
    fn successive_openings_have_strictly_increasing_costs() {
        // A cost ladder around the prediction: cheaper facilities sit farther
        // out, so each invocation targets the next rung in.
        let space = Arc::new(MetricSpace::euclidean(vec![
            vec![0.0],
            vec![1.0],
            vec![3.0],
            vec![8.0],
        ])
        .unwrap());
        let uni = Arc::new(
            FacilityUniverse::new(vec![0, 1, 2, 3], vec![8.0, 4.0, 2.0, 1.0], &space).unwrap(),
        );
        let mut state = RunState::new(uni.len());
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let mut costs = Vec::new();
        for q in [1.0, 2.0, 4.0, 8.0] {
            let trace = pred_step(0, q, &mut state, &uni, &space, &mut rng);
            for &f in &trace.opened {
                costs.push(uni.cost(f));
            }
        }
        assert_eq!(costs, vec![1.0, 2.0, 4.0, 8.0]);
        for w in costs.windows(2) {
            assert!(w[1] > w[0]);
        }
    }

    #[test]
    fn loop_terminates_within_budget_bound() {
        let (space, uni) = worked_fixture();
        for seed in 0..20u64 {
            let mut state = RunState::new(uni.len());
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let q = 5.5;
            let trace = pred_step(0, q, &mut state, &uni, &space, &mut rng);
            assert!(trace.opened.len() <= q.floor() as usize + 1);
        }
    }
}
