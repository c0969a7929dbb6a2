//! C ABI over `wsp-core`.
//!
//! Instances and reports are opaque handles owned by the caller and released
//! with their `_free` function. Strings returned through `char **` out
//! parameters are NUL-terminated, heap-allocated and released with
//! [`wsp_string_free`]. Every fallible call returns a [`WspStatus`]; on
//! failure [`wsp_last_error`] describes the problem.

use std::cell::RefCell;
use std::ffi::{CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::time::Duration;

use libc::{c_char, size_t};
use wsp_core::gen::{self, GenParams};
use wsp_core::model::{parse_instance, serialize_instance};
use wsp_core::{pb, Outcome, Plan, SolveReport, SolverConfig, StepId, WorkflowInstance};

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum WspStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    ParseError = 3,
    InvalidArgument = 4,
    Unsupported = 5,
    NoWitness = 6,
    Panic = 99,
}

/// Same numbers as the `wsp solve` exit codes.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum WspOutcome {
    Satisfiable = 10,
    Unsatisfiable = 20,
    BudgetExceeded = 30,
}

#[repr(C)]
#[derive(Clone, Copy, Debug)]
pub struct WspSolveOptions {
    pub useless_pruning: bool,
    pub pair_propagation: bool,
    pub dynamic_order: bool,
    pub saturated_pruning: bool,
    /// Seconds; zero or negative means no limit.
    pub time_limit: f64,
    /// Zero means no limit.
    pub node_limit: u64,
}

pub struct WspInstance {
    inner: WorkflowInstance,
}

pub struct WspReport {
    inner: SolveReport,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).unwrap_or_default());
}

fn fail(status: WspStatus, msg: impl Into<String>) -> WspStatus {
    set_error(msg);
    status
}

fn guard(f: impl FnOnce() -> WspStatus) -> WspStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => s,
        Err(_) => fail(WspStatus::Panic, "internal panic"),
    }
}

unsafe fn read_str<'a>(p: *const c_char) -> Result<&'a str, WspStatus> {
    if p.is_null() {
        return Err(fail(WspStatus::NullPointer, "null string argument"));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| fail(WspStatus::InvalidUtf8, "string argument is not UTF-8"))
}

unsafe fn write_string(out: *mut *mut c_char, s: String) -> WspStatus {
    match CString::new(s) {
        Ok(c) => {
            *out = c.into_raw();
            WspStatus::Ok
        }
        Err(_) => fail(WspStatus::InvalidArgument, "output contains a NUL byte"),
    }
}

/// Message for the last failed call on this thread; empty if none. The
/// pointer stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn wsp_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// # Safety
/// `s` must be null or a string returned by this library.
#[no_mangle]
pub unsafe extern "C" fn wsp_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Parses instance text.
///
/// # Safety
/// `text` must be a NUL-terminated string and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn wsp_instance_parse(
    text: *const c_char,
    out: *mut *mut WspInstance,
) -> WspStatus {
    guard(|| {
        if out.is_null() {
            return fail(WspStatus::NullPointer, "null out pointer");
        }
        let text = match read_str(text) {
            Ok(t) => t,
            Err(s) => return s,
        };
        match parse_instance(text) {
            Ok(inner) => {
                *out = Box::into_raw(Box::new(WspInstance { inner }));
                WspStatus::Ok
            }
            Err(e) => fail(WspStatus::ParseError, e.to_string()),
        }
    })
}

/// Random instance with threshold 3 and scope size 5 counting constraints.
///
/// # Safety
/// `out` must be a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn wsp_instance_generate(
    steps: u32,
    users: u32,
    density: u32,
    counting_b: u32,
    seed: u64,
    out: *mut *mut WspInstance,
) -> WspStatus {
    guard(|| {
        if out.is_null() {
            return fail(WspStatus::NullPointer, "null out pointer");
        }
        let params = GenParams::new(
            steps as usize,
            users as usize,
            density,
            counting_b as usize,
            seed,
        );
        match gen::generate(&params) {
            Ok(inner) => {
                *out = Box::into_raw(Box::new(WspInstance { inner }));
                WspStatus::Ok
            }
            Err(e) => fail(WspStatus::InvalidArgument, e.to_string()),
        }
    })
}

/// # Safety
/// `inst` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn wsp_instance_free(inst: *mut WspInstance) {
    if !inst.is_null() {
        drop(Box::from_raw(inst));
    }
}

/// Number of steps; 0 for a null handle.
///
/// # Safety
/// `inst` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn wsp_instance_steps(inst: *const WspInstance) -> size_t {
    inst.as_ref().map_or(0, |i| i.inner.k())
}

/// # Safety
/// `inst` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn wsp_instance_users(inst: *const WspInstance) -> size_t {
    inst.as_ref().map_or(0, |i| i.inner.n())
}

/// # Safety
/// `inst` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn wsp_instance_constraints(inst: *const WspInstance) -> size_t {
    inst.as_ref().map_or(0, |i| i.inner.constraints().len())
}

/// Canonical instance text.
///
/// # Safety
/// `inst` must be a live handle and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn wsp_instance_serialize(
    inst: *const WspInstance,
    out: *mut *mut c_char,
) -> WspStatus {
    guard(|| match (inst.as_ref(), out.is_null()) {
        (Some(i), false) => write_string(out, serialize_instance(&i.inner)),
        _ => fail(WspStatus::NullPointer, "null argument"),
    })
}

/// All heuristics on, no budget.
#[no_mangle]
pub extern "C" fn wsp_solve_options_default() -> WspSolveOptions {
    let d = SolverConfig::default();
    WspSolveOptions {
        useless_pruning: d.enable_useless_pruning,
        pair_propagation: d.enable_pair_propagation,
        dynamic_order: d.enable_dynamic_order,
        saturated_pruning: d.enable_saturated_pruning,
        time_limit: 0.0,
        node_limit: 0,
    }
}

/// Solves `inst`. `options` may be null for the defaults.
///
/// # Safety
/// `inst` must be a live handle, `options` null or valid, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn wsp_solve(
    inst: *const WspInstance,
    options: *const WspSolveOptions,
    out: *mut *mut WspReport,
) -> WspStatus {
    guard(|| {
        let Some(inst) = inst.as_ref() else {
            return fail(WspStatus::NullPointer, "null instance");
        };
        if out.is_null() {
            return fail(WspStatus::NullPointer, "null out pointer");
        }
        let o = options
            .as_ref()
            .copied()
            .unwrap_or_else(|| wsp_solve_options_default());
        if o.time_limit.is_nan() {
            return fail(WspStatus::InvalidArgument, "time limit is NaN");
        }
        let cfg = SolverConfig {
            enable_useless_pruning: o.useless_pruning,
            enable_pair_propagation: o.pair_propagation,
            enable_dynamic_order: o.dynamic_order,
            enable_saturated_pruning: o.saturated_pruning,
            time_limit: (o.time_limit > 0.0).then(|| Duration::from_secs_f64(o.time_limit)),
            node_limit: (o.node_limit > 0).then_some(o.node_limit),
            ..SolverConfig::default()
        };
        match wsp_core::solve(&inst.inner, &cfg) {
            Ok(inner) => {
                *out = Box::into_raw(Box::new(WspReport { inner }));
                WspStatus::Ok
            }
            Err(e) => fail(WspStatus::InvalidArgument, e.to_string()),
        }
    })
}

/// # Safety
/// `report` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn wsp_report_free(report: *mut WspReport) {
    if !report.is_null() {
        drop(Box::from_raw(report));
    }
}

/// Budget exceeded for a null handle.
///
/// # Safety
/// `report` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn wsp_report_outcome(report: *const WspReport) -> WspOutcome {
    match report.as_ref().map(|r| r.inner.outcome) {
        Some(Outcome::Satisfiable) => WspOutcome::Satisfiable,
        Some(Outcome::Unsatisfiable) => WspOutcome::Unsatisfiable,
        _ => WspOutcome::BudgetExceeded,
    }
}

/// # Safety
/// `report` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn wsp_report_users_processed(report: *const WspReport) -> u64 {
    report
        .as_ref()
        .map_or(0, |r| r.inner.users_processed as u64)
}

/// # Safety
/// `report` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn wsp_report_patterns(report: *const WspReport) -> u64 {
    report
        .as_ref()
        .map_or(0, |r| r.inner.patterns_generated as u64)
}

/// Users whose iteration produced no new pattern.
///
/// # Safety
/// `report` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn wsp_report_n_w(report: *const WspReport) -> u64 {
    report.as_ref().map_or(0, |r| r.inner.n_w as u64)
}

/// Users removed as useless.
///
/// # Safety
/// `report` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn wsp_report_n_useless(report: *const WspReport) -> u64 {
    report.as_ref().map_or(0, |r| r.inner.n_useless as u64)
}

/// Wall-clock seconds spent solving.
///
/// # Safety
/// `report` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn wsp_report_seconds(report: *const WspReport) -> f64 {
    report
        .as_ref()
        .map_or(0.0, |r| r.inner.elapsed.as_secs_f64())
}

/// 0-based user performing 0-based `step` in the witness, or -1 when there
/// is no witness or the step is out of range.
///
/// # Safety
/// `report` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn wsp_report_witness_user(report: *const WspReport, step: u32) -> i64 {
    report
        .as_ref()
        .and_then(|r| r.inner.witness.as_ref())
        .filter(|w| (step as usize) < w.k())
        .and_then(|w| w.get(StepId(step)))
        .map_or(-1, |u| u.0 as i64)
}

/// Witness as `s1=u2 s2=u2 ...`.
///
/// # Safety
/// `report` must be a live handle and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn wsp_report_witness(
    report: *const WspReport,
    out: *mut *mut c_char,
) -> WspStatus {
    guard(|| {
        let Some(report) = report.as_ref() else {
            return fail(WspStatus::NullPointer, "null report");
        };
        if out.is_null() {
            return fail(WspStatus::NullPointer, "null out pointer");
        }
        match &report.inner.witness {
            Some(w) => write_string(out, w.to_string()),
            None => {
                *out = ptr::null_mut();
                fail(WspStatus::NoWitness, "the report has no witness")
            }
        }
    })
}

/// OPB text and variable map of the pseudo-Boolean encoding.
///
/// # Safety
/// `inst` must be a live handle; `opb` and `map` writable pointers.
#[no_mangle]
pub unsafe extern "C" fn wsp_encode_opb(
    inst: *const WspInstance,
    opb: *mut *mut c_char,
    map: *mut *mut c_char,
) -> WspStatus {
    guard(|| {
        let Some(inst) = inst.as_ref() else {
            return fail(WspStatus::NullPointer, "null instance");
        };
        if opb.is_null() || map.is_null() {
            return fail(WspStatus::NullPointer, "null out pointer");
        }
        match pb::encode(&inst.inner) {
            Ok(model) => {
                let (o, m) = pb::emit_opb(&model);
                let status = write_string(opb, o);
                if status != WspStatus::Ok {
                    return status;
                }
                let status = write_string(map, m);
                if status != WspStatus::Ok {
                    wsp_string_free(*opb);
                    *opb = ptr::null_mut();
                }
                status
            }
            Err(e) => fail(WspStatus::Unsupported, e.to_string()),
        }
    })
}

/// Sets `*valid` to whether `plan` (`s1=u2 ...`) is a valid complete plan.
///
/// # Safety
/// `inst` must be a live handle, `plan` a NUL-terminated string and
/// `valid` writable.
#[no_mangle]
pub unsafe extern "C" fn wsp_verify_plan(
    inst: *const WspInstance,
    plan: *const c_char,
    valid: *mut bool,
) -> WspStatus {
    guard(|| {
        let Some(inst) = inst.as_ref() else {
            return fail(WspStatus::NullPointer, "null instance");
        };
        if valid.is_null() {
            return fail(WspStatus::NullPointer, "null out pointer");
        }
        let text = match read_str(plan) {
            Ok(t) => t,
            Err(s) => return s,
        };
        match Plan::parse(text, inst.inner.k()) {
            Ok(p) => {
                *valid = inst.inner.is_valid_complete(&p);
                WspStatus::Ok
            }
            Err(e) => fail(WspStatus::ParseError, e.to_string()),
        }
    })
}
