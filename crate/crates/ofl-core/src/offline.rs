//! Offline benchmark solvers: a radius-based 3-approximation used as the
//! optimum proxy in experiments, and an exact enumeration solver for tiny
//! instances.

use crate::error::{Error, Result};
use crate::instance::OnlineInstance;
use crate::metric::FacilityId;

/// Enumeration bound for [`brute_force`].
pub const BRUTE_FORCE_MAX_FACILITIES: usize = 20;

/// A facility set with its demand assignment and objective value. The
/// assignment maps each demand to its nearest open facility (ties broken by
/// the lowest facility index), which is also the `opt(x)` used by error
/// reports.
#[derive(Debug, Clone)]
pub struct OfflineSolution {
    open_set: Vec<FacilityId>,
    assignment: Vec<FacilityId>,
    opening_cost: f64,
    connection_cost: f64,
}

impl OfflineSolution {
    /// Open facilities in ascending index order.
    pub fn open_set(&self) -> &[FacilityId] {
        &self.open_set
    }

    /// Per-demand assigned facility (the nearest open one).
    pub fn assignment(&self) -> &[FacilityId] {
        &self.assignment
    }

    /// `opt(x)` per demand; identical to the assignment by construction.
    pub fn opt_of(&self) -> &[FacilityId] {
        &self.assignment
    }

    pub fn opening_cost(&self) -> f64 {
        self.opening_cost
    }

    pub fn connection_cost(&self) -> f64 {
        self.connection_cost
    }

    pub fn cost(&self) -> f64 {
        self.opening_cost + self.connection_cost
    }
}

fn assign_to_open(inst: &OnlineInstance, open_set: &[FacilityId]) -> OfflineSolution {
    let uni = inst.universe();
    let space = inst.space();
    let mut assignment = Vec::with_capacity(inst.len());
    let mut connection_cost = 0.0;
    for &x in inst.demands() {
        let mut best: Option<(f64, FacilityId)> = None;
        for &f in open_set {
            let d = space.distance(x, uni.site(f));
            // Ties by the lowest facility index; open_set is ascending.
            if best.is_none_or(|(bd, _)| d < bd) {
                best = Some((d, f));
            }
        }
        let (d, f) = best.expect("open set is nonempty");
        assignment.push(f);
        connection_cost += d;
    }
    let opening_cost = open_set.iter().map(|&f| uni.cost(f)).sum();
    OfflineSolution {
        open_set: open_set.to_vec(),
        assignment,
        opening_cost,
        connection_cost,
    }
}

/// The solution induced by a fixed open set: each demand is assigned to its
/// nearest facility in the set (ties to the lowest index). Useful for
/// measuring error against a reference solution that no solver produced,
/// such as a single designated facility.
pub fn solution_for_open_set(
    inst: &OnlineInstance,
    open_set: &[FacilityId],
) -> Result<OfflineSolution> {
    if open_set.is_empty() {
        return Err(Error::Config("open set must be nonempty".into()));
    }
    let m = inst.universe().len();
    for &f in open_set {
        if f >= m {
            return Err(Error::IndexOutOfRange {
                kind: "facility",
                index: f,
                len: m,
            });
        }
    }
    let mut sorted = open_set.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    Ok(assign_to_open(inst, &sorted))
}

/// The unique radius `r >= 0` with `sum_x max(0, r - d(x, f)) = w(f)`:
/// the scale at which facility `f` pays for itself. Solved exactly on the
/// sorted-distance segments of the piecewise-linear left-hand side.
pub fn mp_radius(inst: &OnlineInstance, f: FacilityId) -> f64 {
    assert!(!inst.is_empty(), "radius needs at least one demand");
    let w = inst.universe().cost(f);
    let site = inst.universe().site(f);
    let space = inst.space();
    let mut dists: Vec<f64> = inst
        .demands()
        .iter()
        .map(|&x| space.distance(x, site))
        .collect();
    dists.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut prefix = 0.0;
    for j in 1..=dists.len() {
        prefix += dists[j - 1];
        let candidate = (w + prefix) / j as f64;
        if j == dists.len() || candidate <= dists[j] {
            return candidate;
        }
    }
    unreachable!("the piecewise-linear equation always has a solution")
}

/// Radius-based greedy 3-approximation: facilities are processed in
/// nondecreasing radius order (ties by index) and selected unless a
/// previously selected facility sits within twice their radius.
pub fn mp_solve(inst: &OnlineInstance) -> Result<OfflineSolution> {
    if inst.universe().is_empty() {
        return Err(Error::Config("facility universe is empty".into()));
    }
    if inst.is_empty() {
        return Err(Error::Config("instance has no demands".into()));
    }
    let uni = inst.universe();
    let space = inst.space();
    let mut order: Vec<(f64, FacilityId)> =
        uni.ids().map(|f| (mp_radius(inst, f), f)).collect();
    order.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)));

    let mut selected: Vec<FacilityId> = Vec::new();
    for &(r, f) in &order {
        let suppressed = selected
            .iter()
            .any(|&g| space.distance(uni.site(f), uni.site(g)) <= 2.0 * r);
        if !suppressed {
            selected.push(f);
        }
    }
    selected.sort_unstable();
    Ok(assign_to_open(inst, &selected))
}

/// Exact optimum by enumerating nonempty facility subsets. Only sensible for
/// tiny instances; refuses more than [`BRUTE_FORCE_MAX_FACILITIES`]
/// facilities.
pub fn brute_force(inst: &OnlineInstance) -> Result<OfflineSolution> {
    let m = inst.universe().len();
    if m == 0 {
        return Err(Error::Config("facility universe is empty".into()));
    }
    if m > BRUTE_FORCE_MAX_FACILITIES {
        return Err(Error::Config(format!(
            "brute force enumeration is limited to {} facilities, got {}",
            BRUTE_FORCE_MAX_FACILITIES, m
        )));
    }
    if inst.is_empty() {
        return Err(Error::Config("instance has no demands".into()));
    }
    let uni = inst.universe();
    let space = inst.space();
    // Dense demand-facility distance matrix, row-major by demand.
    let dist: Vec<Vec<f64>> = inst
        .demands()
        .iter()
        .map(|&x| uni.ids().map(|f| space.distance(x, uni.site(f))).collect())
        .collect();
    let costs: Vec<f64> = uni.ids().map(|f| uni.cost(f)).collect();

    let mut best_mask = 0u32;
    let mut best_cost = f64::INFINITY;
    for mask in 1u32..(1 << m) {
        let mut total: f64 = 0.0;
        let mut bits = mask;
        while bits != 0 {
            let f = bits.trailing_zeros() as usize;
            total += costs[f];
            bits &= bits - 1;
        }
        if total >= best_cost {
            continue;
        }
        for row in &dist {
            let mut nearest = f64::INFINITY;
            let mut bits = mask;
            while bits != 0 {
                let f = bits.trailing_zeros() as usize;
                nearest = nearest.min(row[f]);
                bits &= bits - 1;
            }
            total += nearest;
            if total >= best_cost {
                break;
            }
        }
        if total < best_cost {
            best_cost = total;
            best_mask = mask;
        }
    }
    let open_set: Vec<FacilityId> = (0..m).filter(|f| best_mask & (1 << f) != 0).collect();
    Ok(assign_to_open(inst, &open_set))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::OnlineInstance;
    use crate::metric::{FacilityUniverse, MetricSpace};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::sync::Arc;

    fn line_instance(demand_xs: &[f64], facility_xs: &[f64], costs: &[f64]) -> OnlineInstance {
        let mut pts: Vec<Vec<f64>> = demand_xs.iter().map(|&x| vec![x]).collect();
        let base = pts.len();
        pts.extend(facility_xs.iter().map(|&x| vec![x]));
        let space = Arc::new(MetricSpace::euclidean(pts).unwrap());
        let sites = (0..facility_xs.len()).map(|j| base + j).collect();
        let uni = Arc::new(FacilityUniverse::new(sites, costs.to_vec(), &space).unwrap());
        OnlineInstance::new(space, uni, (0..demand_xs.len()).collect()).unwrap()
    }

    #[test]
    fn radius_solves_the_piecewise_linear_equation() {
        // w=4, demand distances {0,1,2}: 3r - 3 = 4, r = 7/3. A far unit-cost
        // anchor pins the normalization so the probed cost stays 4.
        let inst = line_instance(&[0.0, 1.0, 2.0], &[0.0, 100.0], &[4.0, 1.0]);
        let r = mp_radius(&inst, 0);
        assert!((r - 7.0 / 3.0).abs() < 1e-12);
        // All three demands are inside the radius.
        assert!(r >= 2.0);

        // w=1, single demand at the facility: r = 1.
        let inst = line_instance(&[0.0], &[0.0], &[1.0]);
        assert_eq!(mp_radius(&inst, 0), 1.0);

        // w=1, single demand at distance 5: r = 6.
        let inst = line_instance(&[5.0], &[0.0], &[1.0]);
        assert_eq!(mp_radius(&inst, 0), 6.0);
    }

    #[test]
    fn radius_balance_and_monotonicity() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..50 {
            let demands: Vec<f64> = (0..8).map(|_| rng.gen_range(-10.0..10.0)).collect();
            // A unit-cost anchor far away pins the normalization, so the
            // probed facility keeps its power-of-2 cost verbatim.
            let w1 = [1.0, 2.0, 4.0][rng.gen_range(0..3)];
            let w2 = 2.0 * w1;
            let inst1 = line_instance(&demands, &[0.0, 100.0], &[w1, 1.0]);
            let inst2 = line_instance(&demands, &[0.0, 100.0], &[w2, 1.0]);
            let (r1, r2) = (mp_radius(&inst1, 0), mp_radius(&inst2, 0));
            // Larger opening cost means a strictly larger radius.
            assert!(r2 > r1);
            // The radius balances the opening cost exactly.
            let covered: f64 = demands.iter().map(|&x| (r1 - x.abs()).max(0.0)).sum();
            assert!((covered - w1).abs() < 1e-9);
        }
    }

    #[test]
    fn single_facility_is_always_selected() {
        let inst = line_instance(&[0.0, 1.0, 5.0], &[2.0], &[3.0]);
        let sol = mp_solve(&inst).unwrap();
        assert_eq!(sol.open_set(), &[0]);
        assert_eq!(sol.assignment(), &[0, 0, 0]);
    }

    #[test]
    fn colocated_cheaper_facility_suppresses_the_pricier_one() {
        let inst = line_instance(&[0.0, 1.0, 2.0], &[1.0, 1.0], &[1.0, 2.0]);
        let sol = mp_solve(&inst).unwrap();
        assert_eq!(sol.open_set(), &[0]);
    }

    #[test]
    fn brute_force_prefers_the_dominating_facility() {
        // A facility co-located with every demand at cost 1 versus a far
        // expensive one.
        let inst = line_instance(&[3.0, 3.0, 3.0], &[3.0, 50.0], &[1.0, 8.0]);
        let sol = brute_force(&inst).unwrap();
        assert_eq!(sol.open_set(), &[0]);
        assert_eq!(sol.cost(), 1.0);
    }

    #[test]
    fn brute_force_respects_the_enumeration_bound() {
        let xs: Vec<f64> = (0..21).map(|i| i as f64).collect();
        let costs = vec![1.0; 21];
        let inst = line_instance(&[0.0], &xs, &costs);
        assert!(matches!(brute_force(&inst), Err(Error::Config(_))));
    }

    #[test]
    fn mp_is_within_three_of_brute_force_on_random_instances() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for round in 0..60 {
            let n = rng.gen_range(3..=12);
            let m = rng.gen_range(2..=8);
            let demands: Vec<f64> = (0..n).map(|_| rng.gen_range(-10.0..10.0)).collect();
            let sites: Vec<f64> = (0..m).map(|_| rng.gen_range(-10.0..10.0)).collect();
            let costs: Vec<f64> = (0..m).map(|_| rng.gen_range(1.0..8.0)).collect();
            let inst = line_instance(&demands, &sites, &costs);
            let exact = brute_force(&inst).unwrap();
            let approx = mp_solve(&inst).unwrap();
            assert!(
                exact.cost() <= approx.cost() + 1e-9,
                "round {}: exact above approx",
                round
            );
            assert!(
                approx.cost() <= 3.0 * exact.cost() + 1e-9,
                "round {}: approximation factor exceeded: {} > 3 * {}",
                round,
                approx.cost(),
                exact.cost()
            );
        }
    }

    #[test]
    fn mp_solve_is_deterministic() {
        let inst = line_instance(
            &[0.0, 2.0, 4.0, 9.0, 11.0],
            &[1.0, 3.0, 10.0],
            &[1.0, 2.0, 1.0],
        );
        let a = mp_solve(&inst).unwrap();
        let b = mp_solve(&inst).unwrap();
        assert_eq!(a.open_set(), b.open_set());
        assert_eq!(a.cost(), b.cost());
    }
}
