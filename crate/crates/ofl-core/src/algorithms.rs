//! Online run orchestration: the prediction-augmented algorithm, the plain
//! randomized baseline, and the follow-the-prediction baseline, with shared
//! cost accounting.
//!
//! One run owns one mutable [`RunState`] and one seeded RNG; facilities are
//! only ever added, never closed, and each demand's assignment is fixed the
//! moment it is made.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::instance::{OnlineInstance, PredictionStream};
use crate::metric::FacilityId;
use crate::meyerson::mey_step;
use crate::prediction::{calibrate, pred_step};

/// Which procedure opened a facility. A facility targeted by both in the same
/// step is attributed to whichever opened it first; the later procedure sees
/// it as already open.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Opener {
    Mey,
    Pred,
}

/// Per-demand cost record: the assignment is made at the end of the demand's
/// opening step and never revisited.
#[derive(Debug, Clone, Copy)]
pub struct DemandRecord {
    pub assigned: FacilityId,
    pub connection: f64,
    pub mey_opening: f64,
    pub pred_opening: f64,
}

/// Mutable state of a single online run: the open facility set partitioned by
/// opener, plus the per-demand records.
#[derive(Debug, Clone)]
pub struct RunState {
    opened_by: Vec<Option<Opener>>,
    open_all: Vec<FacilityId>,
    mey_open: Vec<FacilityId>,
    pred_open: Vec<FacilityId>,
    records: Vec<DemandRecord>,
}

impl RunState {
    pub fn new(num_facilities: usize) -> Self {
        RunState {
            opened_by: vec![None; num_facilities],
            open_all: Vec::new(),
            mey_open: Vec::new(),
            pred_open: Vec::new(),
            records: Vec::new(),
        }
    }

    pub fn is_open(&self, f: FacilityId) -> bool {
        self.opened_by[f].is_some()
    }

    pub fn opener(&self, f: FacilityId) -> Option<Opener> {
        self.opened_by[f]
    }

    /// All open facilities, in opening order.
    pub fn open_facilities(&self) -> &[FacilityId] {
        &self.open_all
    }

    /// Facilities opened by the randomized step.
    pub fn mey_opened(&self) -> &[FacilityId] {
        &self.mey_open
    }

    /// Facilities opened by the prediction step.
    pub fn pred_opened(&self) -> &[FacilityId] {
        &self.pred_open
    }

    pub fn records(&self) -> &[DemandRecord] {
        &self.records
    }

    pub(crate) fn open_by_mey(&mut self, f: FacilityId) {
        assert!(self.opened_by[f].is_none(), "facility {} already open", f);
        self.opened_by[f] = Some(Opener::Mey);
        self.open_all.push(f);
        self.mey_open.push(f);
    }

    pub(crate) fn open_by_pred(&mut self, f: FacilityId) {
        assert!(self.opened_by[f].is_none(), "facility {} already open", f);
        self.opened_by[f] = Some(Opener::Pred);
        self.open_all.push(f);
        self.pred_open.push(f);
    }

    pub(crate) fn push_record(&mut self, record: DemandRecord) {
        self.records.push(record);
    }
}

/// Objective breakdown of a finished run:
/// `total = total_opening + total_connection`, with the opening side split by
/// which procedure paid for it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CostSummary {
    pub total_opening: f64,
    pub total_connection: f64,
    pub total: f64,
    pub opening_mey: f64,
    pub opening_pred: f64,
}

impl CostSummary {
    fn from_records(state: &RunState) -> CostSummary {
        let mut connection = 0.0;
        let mut opening_mey = 0.0;
        let mut opening_pred = 0.0;
        for r in state.records() {
            connection += r.connection;
            opening_mey += r.mey_opening;
            opening_pred += r.pred_opening;
        }
        let opening = opening_mey + opening_pred;
        CostSummary {
            total_opening: opening,
            total_connection: connection,
            total: opening + connection,
            opening_mey,
            opening_pred,
        }
    }

    /// Recomputes the objective from the final open set and assignments
    /// instead of the per-demand records. Used as a double-entry check.
    pub fn recompute(state: &RunState, inst: &OnlineInstance) -> CostSummary {
        let uni = inst.universe();
        let space = inst.space();
        let mut opening_mey = 0.0;
        let mut opening_pred = 0.0;
        for &f in state.open_facilities() {
            match state.opener(f) {
                Some(Opener::Mey) => opening_mey += uni.cost(f),
                Some(Opener::Pred) => opening_pred += uni.cost(f),
                None => unreachable!(),
            }
        }
        let connection: f64 = inst
            .demands()
            .iter()
            .zip(state.records())
            .map(|(&x, r)| space.distance(x, uni.site(r.assigned)))
            .sum();
        let opening = opening_mey + opening_pred;
        CostSummary {
            total_opening: opening,
            total_connection: connection,
            total: opening + connection,
            opening_mey,
            opening_pred,
        }
    }
}

/// Budget handed to the prediction step after each opening step.
/// `Zero` is a test hook that turns the combined algorithm into the plain
/// baseline while keeping the code path identical.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PredBudget {
    MeyersonCost,
    Zero,
}

fn check_runnable(inst: &OnlineInstance) -> Result<()> {
    if inst.universe().is_empty() {
        return Err(Error::Config("facility universe is empty".into()));
    }
    Ok(())
}

/// The prediction-augmented online algorithm: calibrate the prediction, run
/// the randomized opening step, then spend that step's cost as the budget of
/// the prediction step. Deterministic given the seed.
pub fn run_pam(
    inst: &OnlineInstance,
    preds: &PredictionStream,
    seed: u64,
) -> Result<(RunState, CostSummary)> {
    run_pam_with_budget(inst, preds, seed, PredBudget::MeyersonCost)
}

/// [`run_pam`] with an explicit budget policy.
pub fn run_pam_with_budget(
    inst: &OnlineInstance,
    preds: &PredictionStream,
    seed: u64,
    budget: PredBudget,
) -> Result<(RunState, CostSummary)> {
    check_runnable(inst)?;
    preds.validate_for(inst)?;
    let (space, uni) = (inst.space(), inst.universe());
    let mut state = RunState::new(uni.len());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for (i, &x) in inst.demands().iter().enumerate() {
        let pred = calibrate(x, preds.get(i), uni, space);
        let mey = mey_step(x, &mut state, uni, space, &mut rng)?;
        let q = match budget {
            PredBudget::MeyersonCost => mey.returned_cost,
            PredBudget::Zero => 0.0,
        };
        let pt = pred_step(pred, q, &mut state, uni, space, &mut rng);
        state.push_record(DemandRecord {
            assigned: mey.assigned,
            connection: mey.connect_cost,
            mey_opening: mey.opened.map_or(0.0, |f| uni.cost(f)),
            pred_opening: pt.spent,
        });
    }
    let summary = CostSummary::from_records(&state);
    Ok((state, summary))
}

/// The plain randomized baseline: opening steps only, no predictions.
pub fn run_meyerson(inst: &OnlineInstance, seed: u64) -> Result<(RunState, CostSummary)> {
    check_runnable(inst)?;
    let (space, uni) = (inst.space(), inst.universe());
    let mut state = RunState::new(uni.len());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for &x in inst.demands() {
        let mey = mey_step(x, &mut state, uni, space, &mut rng)?;
        state.push_record(DemandRecord {
            assigned: mey.assigned,
            connection: mey.connect_cost,
            mey_opening: mey.opened.map_or(0.0, |f| uni.cost(f)),
            pred_opening: 0.0,
        });
    }
    let summary = CostSummary::from_records(&state);
    Ok((state, summary))
}

/// The naive baseline: open the predicted facility if necessary and connect
/// the demand to it, unconditionally. The seed is accepted for interface
/// uniformity but unused (the algorithm is deterministic).
pub fn run_follow_predict(
    inst: &OnlineInstance,
    preds: &PredictionStream,
    _seed: u64,
) -> Result<(RunState, CostSummary)> {
    check_runnable(inst)?;
    preds.validate_for(inst)?;
    let (space, uni) = (inst.space(), inst.universe());
    let mut state = RunState::new(uni.len());
    for (i, &x) in inst.demands().iter().enumerate() {
        let f = preds.get(i);
        let opening = if state.is_open(f) {
            0.0
        } else {
            state.open_by_pred(f);
            uni.cost(f)
        };
        state.push_record(DemandRecord {
            assigned: f,
            connection: space.distance(x, uni.site(f)),
            mey_opening: 0.0,
            pred_opening: opening,
        });
    }
    let summary = CostSummary::from_records(&state);
    Ok((state, summary))
}
