//! C ABI for the online facility location library.
//!
//! Instances and prediction streams are opaque handles created from the same
//! file formats the CLI consumes; every fallible call returns an [`OflStatus`]
//! and leaves a human-readable message retrievable with
//! [`ofl_last_error_message`]. Handles must be released with the matching
//! `*_free` function and are not thread-safe unless externally synchronized.

use std::cell::RefCell;
use std::ffi::{CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;

use libc::{c_char, size_t};

use ofl_core::algorithms::{run_follow_predict, run_meyerson, run_pam, CostSummary};
use ofl_core::error::Error;
use ofl_core::instance::{load_euclidean, load_graph, load_predictions, PredictionStream};
use ofl_core::offline::{brute_force, mp_solve, OfflineSolution};
use ofl_core::OnlineInstance;

/// Result codes returned by every fallible function.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OflStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    InvalidUtf8 = 3,
    ParseError = 4,
    ValidationError = 5,
    ConfigError = 6,
    IoError = 7,
    IndexError = 8,
    InternalPanic = 9,
}

/// Algorithm selector for [`ofl_run`].
pub const OFL_ALGORITHM_PAM: u32 = 0;
pub const OFL_ALGORITHM_MEYERSON: u32 = 1;
pub const OFL_ALGORITHM_FOLLOW_PREDICT: u32 = 2;

/// Solver selector for [`ofl_solve_offline`].
pub const OFL_SOLVER_MP: u32 = 0;
pub const OFL_SOLVER_BRUTE_FORCE: u32 = 1;

/// Cost breakdown of a finished run or offline solution.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct OflCostReport {
    pub opening_cost: f64,
    pub connection_cost: f64,
    pub total_cost: f64,
    pub open_facilities: u64,
}

/// Opaque online instance handle.
pub struct OflInstance {
    inner: OnlineInstance,
}

/// Opaque prediction stream handle.
pub struct OflPredictions {
    inner: PredictionStream,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_last_error(message: &str) {
    let sanitized = message.replace('\0', " ");
    LAST_ERROR.with(|slot| {
        *slot.borrow_mut() = CString::new(sanitized).unwrap_or_default();
    });
}

fn status_of(err: &Error) -> OflStatus {
    match err {
        Error::IndexOutOfRange { .. } => OflStatus::IndexError,
        Error::Validation(_) => OflStatus::ValidationError,
        Error::Parse { .. } => OflStatus::ParseError,
        Error::Config(_) => OflStatus::ConfigError,
        Error::Io { .. } => OflStatus::IoError,
    }
}

fn fail(err: &Error) -> OflStatus {
    set_last_error(&err.to_string());
    status_of(err)
}

/// # Safety
/// `ptr` must be NULL or a NUL-terminated string valid for the duration of
/// the call.
unsafe fn path_arg<'a>(ptr: *const c_char) -> Result<&'a Path, OflStatus> {
    if ptr.is_null() {
        set_last_error("path argument is NULL");
        return Err(OflStatus::NullPointer);
    }
    match CStr::from_ptr(ptr).to_str() {
        Ok(s) => Ok(Path::new(s)),
        Err(_) => {
            set_last_error("path argument is not valid UTF-8");
            Err(OflStatus::InvalidUtf8)
        }
    }
}

fn guarded<F: FnOnce() -> OflStatus>(f: F) -> OflStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(status) => status,
        Err(_) => {
            set_last_error("internal panic");
            OflStatus::InternalPanic
        }
    }
}

/// Copies the message of the last error on this thread into `buf`
/// (NUL-terminated, truncated to `len`). Returns the full message length in
/// bytes, excluding the terminator.
///
/// # Safety
/// `buf` must be NULL or point to at least `len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn ofl_last_error_message(buf: *mut c_char, len: size_t) -> size_t {
    LAST_ERROR.with(|slot| {
        let msg = slot.borrow();
        let bytes = msg.as_bytes();
        if !buf.is_null() && len > 0 {
            let copy = bytes.len().min(len - 1);
            std::ptr::copy_nonoverlapping(bytes.as_ptr() as *const c_char, buf, copy);
            *buf.add(copy) = 0;
        }
        bytes.len()
    })
}

/// Loads a Euclidean instance from a demand points CSV and a facilities CSV.
/// On success stores a new handle in `out`; free it with
/// [`ofl_instance_free`].
///
/// # Safety
/// The path pointers must be NULL or valid NUL-terminated strings; `out`
/// must be a valid pointer to pointer storage.
#[no_mangle]
pub unsafe extern "C" fn ofl_instance_load_euclidean(
    points_path: *const c_char,
    facilities_path: *const c_char,
    out: *mut *mut OflInstance,
) -> OflStatus {
    guarded(|| {
        if out.is_null() {
            set_last_error("output pointer is NULL");
            return OflStatus::NullPointer;
        }
        let points = match path_arg(points_path) {
            Ok(p) => p,
            Err(s) => return s,
        };
        let facilities = match path_arg(facilities_path) {
            Ok(p) => p,
            Err(s) => return s,
        };
        match load_euclidean(points, facilities) {
            Ok(inner) => {
                *out = Box::into_raw(Box::new(OflInstance { inner }));
                OflStatus::Ok
            }
            Err(e) => fail(&e),
        }
    })
}

/// Loads a graph instance from an edge list, a demand vertex list, and a
/// facilities CSV. See [`ofl_instance_load_euclidean`] for the contract.
///
/// # Safety
/// As for [`ofl_instance_load_euclidean`].
#[no_mangle]
pub unsafe extern "C" fn ofl_instance_load_graph(
    edges_path: *const c_char,
    demands_path: *const c_char,
    facilities_path: *const c_char,
    out: *mut *mut OflInstance,
) -> OflStatus {
    guarded(|| {
        if out.is_null() {
            set_last_error("output pointer is NULL");
            return OflStatus::NullPointer;
        }
        let edges = match path_arg(edges_path) {
            Ok(p) => p,
            Err(s) => return s,
        };
        let demands = match path_arg(demands_path) {
            Ok(p) => p,
            Err(s) => return s,
        };
        let facilities = match path_arg(facilities_path) {
            Ok(p) => p,
            Err(s) => return s,
        };
        match load_graph(edges, demands, facilities) {
            Ok(inner) => {
                *out = Box::into_raw(Box::new(OflInstance { inner }));
                OflStatus::Ok
            }
            Err(e) => fail(&e),
        }
    })
}

/// Releases an instance handle. NULL is ignored.
///
/// # Safety
/// `inst` must be NULL or a pointer returned by an `ofl_instance_load_*`
/// function that has not been freed yet.
#[no_mangle]
pub unsafe extern "C" fn ofl_instance_free(inst: *mut OflInstance) {
    if !inst.is_null() {
        drop(Box::from_raw(inst));
    }
}

/// Number of demands in the instance; 0 for NULL.
///
/// # Safety
/// `inst` must be NULL or a live instance handle.
#[no_mangle]
pub unsafe extern "C" fn ofl_instance_num_demands(inst: *const OflInstance) -> u64 {
    if inst.is_null() {
        return 0;
    }
    (*inst).inner.len() as u64
}

/// Number of facilities in the instance; 0 for NULL.
///
/// # Safety
/// `inst` must be NULL or a live instance handle.
#[no_mangle]
pub unsafe extern "C" fn ofl_instance_num_facilities(inst: *const OflInstance) -> u64 {
    if inst.is_null() {
        return 0;
    }
    (*inst).inner.universe().len() as u64
}

/// Loads a prediction stream (one facility index per line) aligned with the
/// instance's demands. Free with [`ofl_predictions_free`].
///
/// # Safety
/// `inst` must be a live instance handle; `path` a valid NUL-terminated
/// string; `out` valid pointer storage.
#[no_mangle]
pub unsafe extern "C" fn ofl_predictions_load(
    inst: *const OflInstance,
    path: *const c_char,
    out: *mut *mut OflPredictions,
) -> OflStatus {
    guarded(|| {
        if inst.is_null() || out.is_null() {
            set_last_error("instance or output pointer is NULL");
            return OflStatus::NullPointer;
        }
        let path = match path_arg(path) {
            Ok(p) => p,
            Err(s) => return s,
        };
        let instance = &(*inst).inner;
        match load_predictions(path, instance.universe())
            .and_then(|preds| preds.validate_for(instance).map(|()| preds))
        {
            Ok(inner) => {
                *out = Box::into_raw(Box::new(OflPredictions { inner }));
                OflStatus::Ok
            }
            Err(e) => fail(&e),
        }
    })
}

/// Releases a prediction stream handle. NULL is ignored.
///
/// # Safety
/// `preds` must be NULL or a pointer returned by [`ofl_predictions_load`]
/// that has not been freed yet.
#[no_mangle]
pub unsafe extern "C" fn ofl_predictions_free(preds: *mut OflPredictions) {
    if !preds.is_null() {
        drop(Box::from_raw(preds));
    }
}

fn report_of(summary: &CostSummary, open: u64) -> OflCostReport {
    OflCostReport {
        opening_cost: summary.total_opening,
        connection_cost: summary.total_connection,
        total_cost: summary.total,
        open_facilities: open,
    }
}

/// Runs one online algorithm (`OFL_ALGORITHM_*`) with the given seed and
/// writes the cost breakdown into `out`. `preds` may be NULL for the
/// prediction-free baseline, and is required otherwise.
///
/// # Safety
/// `inst` must be a live instance handle, `preds` NULL or a live prediction
/// handle loaded against `inst`, and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ofl_run(
    inst: *const OflInstance,
    algorithm: u32,
    preds: *const OflPredictions,
    seed: u64,
    out: *mut OflCostReport,
) -> OflStatus {
    guarded(|| {
        if inst.is_null() || out.is_null() {
            set_last_error("instance or output pointer is NULL");
            return OflStatus::NullPointer;
        }
        let instance = &(*inst).inner;
        let need_preds = algorithm != OFL_ALGORITHM_MEYERSON;
        if need_preds && preds.is_null() {
            set_last_error("this algorithm requires a prediction stream");
            return OflStatus::NullPointer;
        }
        let result = match algorithm {
            OFL_ALGORITHM_PAM => run_pam(instance, &(*preds).inner, seed),
            OFL_ALGORITHM_MEYERSON => run_meyerson(instance, seed),
            OFL_ALGORITHM_FOLLOW_PREDICT => {
                run_follow_predict(instance, &(*preds).inner, seed)
            }
            other => {
                set_last_error(&format!("unknown algorithm selector {}", other));
                return OflStatus::InvalidArgument;
            }
        };
        match result {
            Ok((state, summary)) => {
                *out = report_of(&summary, state.open_facilities().len() as u64);
                OflStatus::Ok
            }
            Err(e) => fail(&e),
        }
    })
}

fn offline_report(solution: &OfflineSolution) -> OflCostReport {
    OflCostReport {
        opening_cost: solution.opening_cost(),
        connection_cost: solution.connection_cost(),
        total_cost: solution.cost(),
        open_facilities: solution.open_set().len() as u64,
    }
}

/// Solves the instance offline with `OFL_SOLVER_MP` (3-approximation) or
/// `OFL_SOLVER_BRUTE_FORCE` (exact, at most 20 facilities) and writes the
/// cost breakdown into `out`.
///
/// # Safety
/// `inst` must be a live instance handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ofl_solve_offline(
    inst: *const OflInstance,
    solver: u32,
    out: *mut OflCostReport,
) -> OflStatus {
    guarded(|| {
        if inst.is_null() || out.is_null() {
            set_last_error("instance or output pointer is NULL");
            return OflStatus::NullPointer;
        }
        let instance = &(*inst).inner;
        let result = match solver {
            OFL_SOLVER_MP => mp_solve(instance),
            OFL_SOLVER_BRUTE_FORCE => brute_force(instance),
            other => {
                set_last_error(&format!("unknown solver selector {}", other));
                return OflStatus::InvalidArgument;
            }
        };
        match result {
            Ok(solution) => {
                *out = offline_report(&solution);
                OflStatus::Ok
            }
            Err(e) => fail(&e),
        }
    })
}
