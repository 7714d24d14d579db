//! C ABI over the `locit` scenario runner.
//!
//! Every function returns a [`LocitStatus`]; on failure the message is
//! available from [`locit_last_error_message`] on the same thread. Handles
//! are opaque and owned by the caller, who releases them with the matching
//! `*_free` function.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use locit::engine::RoundModel;
use locit::runner::{run_scenario, verify_trace, Outcome, TraceRecord};
use locit::scenario::Scenario;
use locit::Error;

/// Result code of every call.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LocitStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidUtf8 = 2,
    Parse = 3,
    Params = 4,
    Topology = 5,
    Model = 6,
    Io = 7,
    Trace = 8,
    Internal = 9,
    Panic = 10,
    BufferTooSmall = 11,
    NotApplicable = 12,
}

/// A parsed scenario.
pub struct LocitScenario {
    inner: Scenario,
}

/// The trace and verdicts of one run.
pub struct LocitOutcome {
    inner: Outcome,
}

/// Summary metrics of a run. Absent values are `-1`.
#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct LocitSummary {
    pub n: u64,
    pub delta: u32,
    pub rounds: u64,
    pub bit_rounds: u64,
    pub stab_rounds: i64,
    pub palette: u64,
    pub adj_radius: i64,
    pub max_bits_per_edge: u64,
    pub proper_every_round: bool,
    /// 0 ok, 2 bound violation, 3 oracle violation.
    pub exit_code: i32,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("interior NULs removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

type Fallible<T> = Result<T, (LocitStatus, String)>;

fn status_of(e: &Error) -> LocitStatus {
    match e {
        Error::Parse { .. } => LocitStatus::Parse,
        Error::GraphParams(_)
        | Error::Params(_)
        | Error::ColorRange { .. }
        | Error::MixedModuli(..)
        | Error::ImproperInput(_) => LocitStatus::Params,
        Error::Topology(_) => LocitStatus::Topology,
        Error::Bandwidth { .. } | Error::Model { .. } => LocitStatus::Model,
        Error::Io(_) => LocitStatus::Io,
        Error::Trace(_) | Error::Json(_) | Error::Csv(_) => LocitStatus::Trace,
        Error::NoValidPoint { .. } | Error::NotPathForest(_) => LocitStatus::Internal,
    }
}

fn lib(e: Error) -> (LocitStatus, String) {
    (status_of(&e), e.to_string())
}

/// Runs `f`, records any failure as the thread's last error and maps panics
/// to [`LocitStatus::Panic`].
fn guard(f: impl FnOnce() -> Fallible<()>) -> LocitStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => LocitStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_error(format!("panic: {msg}"));
            LocitStatus::Panic
        }
    }
}

fn non_null<'a, T>(p: *const T, name: &str) -> Fallible<&'a T> {
    // SAFETY: callers pass either null or a pointer obtained from this library.
    unsafe { p.as_ref() }.ok_or((LocitStatus::NullArgument, format!("{name} is null")))
}

fn out_ptr<'a, T>(p: *mut T, name: &str) -> Fallible<&'a mut T> {
    // SAFETY: callers pass either null or a valid, writable pointer.
    unsafe { p.as_mut() }.ok_or((LocitStatus::NullArgument, format!("{name} is null")))
}

fn c_str<'a>(p: *const c_char, name: &str) -> Fallible<&'a str> {
    if p.is_null() {
        return Err((LocitStatus::NullArgument, format!("{name} is null")));
    }
    // SAFETY: non-null and NUL-terminated per the API contract.
    unsafe { CStr::from_ptr(p) }
        .to_str()
        .map_err(|e| (LocitStatus::InvalidUtf8, format!("{name}: {e}")))
}

fn owned_c_string(s: String) -> Fallible<*mut c_char> {
    CString::new(s)
        .map(CString::into_raw)
        .map_err(|e| (LocitStatus::Internal, e.to_string()))
}

/// Message of the last failed call on this thread, or null. Valid until the
/// next call into the library on the same thread.
#[no_mangle]
pub extern "C" fn locit_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn locit_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Parses a scenario from TOML text.
///
/// # Safety
/// `toml` must be a NUL-terminated string and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn locit_scenario_parse(toml: *const c_char, out: *mut *mut LocitScenario) -> LocitStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        let inner = Scenario::parse(c_str(toml, "toml")?).map_err(lib)?;
        *out = Box::into_raw(Box::new(LocitScenario { inner }));
        Ok(())
    })
}

/// Reads and parses a scenario file.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn locit_scenario_load(path: *const c_char, out: *mut *mut LocitScenario) -> LocitStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        let inner = Scenario::load(c_str(path, "path")?.as_ref()).map_err(lib)?;
        *out = Box::into_raw(Box::new(LocitScenario { inner }));
        Ok(())
    })
}

/// Releases a scenario. Null is ignored.
///
/// # Safety
/// `scenario` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn locit_scenario_free(scenario: *mut LocitScenario) {
    if !scenario.is_null() {
        drop(Box::from_raw(scenario));
    }
}

/// Overrides the seed of the scenario and of its graph generator.
///
/// # Safety
/// `scenario` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn locit_scenario_set_seed(scenario: *mut LocitScenario, seed: u64) -> LocitStatus {
    guard(|| {
        let s = &mut out_ptr(scenario, "scenario")?.inner;
        s.seed = seed;
        s.graph.seed = Some(seed);
        Ok(())
    })
}

/// Overrides the round model: `local`, `congest:B`, `bit` or `set-local`.
///
/// # Safety
/// `scenario` must be a live handle and `model` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn locit_scenario_set_model(scenario: *mut LocitScenario, model: *const c_char) -> LocitStatus {
    guard(|| {
        let s = &mut out_ptr(scenario, "scenario")?.inner;
        s.model = c_str(model, "model")?.parse::<RoundModel>().map_err(lib)?;
        Ok(())
    })
}

/// Runs a scenario. Oracle and bound verdicts are reported through the
/// outcome, not the status.
///
/// # Safety
/// `scenario` must be a live handle and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn locit_run(scenario: *const LocitScenario, out: *mut *mut LocitOutcome) -> LocitStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        let s = &non_null(scenario, "scenario")?.inner;
        let inner = run_scenario(s).map_err(lib)?;
        *out = Box::into_raw(Box::new(LocitOutcome { inner }));
        Ok(())
    })
}

/// Releases an outcome. Null is ignored.
///
/// # Safety
/// `outcome` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn locit_outcome_free(outcome: *mut LocitOutcome) {
    if !outcome.is_null() {
        drop(Box::from_raw(outcome));
    }
}

/// Fills `out` with the run's summary metrics.
///
/// # Safety
/// `outcome` must be a live handle and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn locit_outcome_summary(outcome: *const LocitOutcome, out: *mut LocitSummary) -> LocitStatus {
    guard(|| {
        let o = &non_null(outcome, "outcome")?.inner;
        let row = &o.summary;
        *out_ptr(out, "out")? = LocitSummary {
            n: row.n as u64,
            delta: row.delta,
            rounds: row.rounds as u64,
            bit_rounds: row.bit_rounds as u64,
            stab_rounds: row.stab_rounds.map_or(-1, |t| t as i64),
            palette: row.palette as u64,
            adj_radius: row.adj_radius.map_or(-1, i64::from),
            max_bits_per_edge: row.max_bits_per_edge as u64,
            proper_every_round: o.proper_every_round,
            exit_code: o.exit_code(),
        };
        Ok(())
    })
}

/// Copies `items` into caller buffers of capacity `cap`. `*len` always
/// receives the required count; null buffers with `cap == 0` query it.
fn fill<T: Copy>(items: &[T], bufs: &mut [&mut dyn FnMut(usize, T)], cap: usize, len: &mut usize) -> Fallible<()> {
    *len = items.len();
    if cap < items.len() {
        return Err((
            LocitStatus::BufferTooSmall,
            format!("need {} entries, buffer holds {cap}", items.len()),
        ));
    }
    for (i, &item) in items.iter().enumerate() {
        for write in bufs.iter_mut() {
            write(i, item);
        }
    }
    Ok(())
}

fn last_round<T>(o: &Outcome, pick: impl Fn(&TraceRecord) -> Option<T>) -> Option<T> {
    o.records.iter().rev().find_map(pick)
}

/// Final vertex colors. Writes vertex IDs to `ids` and colors to `colors`.
///
/// # Safety
/// `outcome` must be a live handle, `len` writable, and `ids`/`colors`
/// valid for `cap` entries (or null with `cap == 0`).
#[no_mangle]
pub unsafe extern "C" fn locit_outcome_vertex_colors(
    outcome: *const LocitOutcome,
    ids: *mut u32,
    colors: *mut u64,
    cap: usize,
    len: *mut usize,
) -> LocitStatus {
    guard(|| {
        let o = &non_null(outcome, "outcome")?.inner;
        let len = out_ptr(len, "len")?;
        let items = last_round(o, |r| match r {
            TraceRecord::Round { colors: Some(c), .. } => Some(c.clone()),
            _ => None,
        })
        .ok_or((LocitStatus::NotApplicable, "algorithm colors edges".to_string()))?;
        if cap > 0 && (ids.is_null() || colors.is_null()) {
            return Err((LocitStatus::NullArgument, "output buffer is null".into()));
        }
        fill(
            &items,
            &mut [&mut |i, (v, _)| ids.add(i).write(v), &mut |i, (_, c)| colors.add(i).write(c)],
            cap,
            len,
        )
    })
}

/// Final edge colors as `(us[i], vs[i]) -> colors[i]` with `us[i] < vs[i]`.
///
/// # Safety
/// As [`locit_outcome_vertex_colors`], with three buffers.
#[no_mangle]
pub unsafe extern "C" fn locit_outcome_edge_colors(
    outcome: *const LocitOutcome,
    us: *mut u32,
    vs: *mut u32,
    colors: *mut u64,
    cap: usize,
    len: *mut usize,
) -> LocitStatus {
    guard(|| {
        let o = &non_null(outcome, "outcome")?.inner;
        let len = out_ptr(len, "len")?;
        let items = last_round(o, |r| match r {
            TraceRecord::Round { edge_colors: Some(c), .. } => Some(c.clone()),
            _ => None,
        })
        .ok_or((LocitStatus::NotApplicable, "algorithm colors vertices".to_string()))?;
        if cap > 0 && (us.is_null() || vs.is_null() || colors.is_null()) {
            return Err((LocitStatus::NullArgument, "output buffer is null".into()));
        }
        fill(
            &items,
            &mut [
                &mut |i, (u, _, _)| us.add(i).write(u),
                &mut |i, (_, v, _)| vs.add(i).write(v),
                &mut |i, (_, _, c)| colors.add(i).write(c),
            ],
            cap,
            len,
        )
    })
}

/// The run's trace as line-delimited JSON. Release with
/// [`locit_string_free`].
///
/// # Safety
/// `outcome` must be a live handle and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn locit_outcome_trace_jsonl(outcome: *const LocitOutcome, out: *mut *mut c_char) -> LocitStatus {
    guard(|| {
        let o = &non_null(outcome, "outcome")?.inner;
        let out = out_ptr(out, "out")?;
        let mut buf = Vec::new();
        o.write_jsonl(&mut buf).map_err(lib)?;
        let text = String::from_utf8(buf).map_err(|e| (LocitStatus::Internal, e.to_string()))?;
        *out = owned_c_string(text)?;
        Ok(())
    })
}

/// Releases a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn locit_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Re-checks a JSONL trace with the oracles. `*exit_code` receives 0 when
/// the trace verifies, 2 for a bound violation and 3 for an oracle
/// violation.
///
/// # Safety
/// `trace` must be a NUL-terminated string and `exit_code` writable.
#[no_mangle]
pub unsafe extern "C" fn locit_verify_trace(trace: *const c_char, exit_code: *mut i32) -> LocitStatus {
    guard(|| {
        let code = out_ptr(exit_code, "exit_code")?;
        let check = verify_trace(c_str(trace, "trace")?).map_err(lib)?;
        *code = check.exit_code;
        if check.exit_code != 0 {
            set_error(check.problems.join("; "));
        }
        Ok(())
    })
}
