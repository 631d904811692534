//! C ABI over the evdemand library.
//!
//! Conventions:
//!
//! * Scenarios and profiles are opaque handles created and destroyed by
//!   this library; pass them back only to these functions.
//! * Every fallible call returns an [`EvdStatus`]; outputs travel through
//!   out-pointers which are written only on `EVD_STATUS_OK`.
//! * On failure, [`evd_last_error_message`] returns a thread-local
//!   description of what went wrong.
//! * Strings returned through `char**` out-pointers are owned by the
//!   caller and must be released with [`evd_string_free`].
//!
//! The matching header, `include/evdemand.h`, is regenerated by the build
//! script on every compile.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe, UnwindSafe};
use std::ptr;

use evdemand::config::parse_config;
use evdemand::profile::DemandProfile;
use evdemand::scenario::{preset, ScenarioConfig};

/// Result of every fallible API call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EvdStatus {
    Ok = 0,
    /// A required pointer argument was null.
    NullPointer = 1,
    /// A string argument was not valid UTF-8.
    InvalidUtf8 = 2,
    /// The request contradicts the model or config contract.
    InvalidArgument = 3,
    /// A numerical routine could not reach its accuracy target.
    Numeric = 4,
    /// The destination buffer cannot hold the result.
    BufferTooSmall = 5,
    /// An internal invariant failed; the handle is still valid.
    Panic = 6,
}

/// An experiment description (opaque).
pub struct EvdScenario(ScenarioConfig);

/// A daily demand profile (opaque).
pub struct EvdProfile(DemandProfile);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(message: String) {
    let stored = CString::new(message.replace('\0', "?"))
        .unwrap_or_else(|_| CString::new("error message unavailable").unwrap());
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(stored));
}

fn fail(status: EvdStatus, message: impl ToString) -> EvdStatus {
    set_last_error(message.to_string());
    status
}

/// Last error message of the current thread, or null when the most recent
/// call succeeded. The pointer stays valid until the next failing call on
/// this thread; do not free it.
#[no_mangle]
pub extern "C" fn evd_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Runs a fallible body, converting panics into `Panic` status instead of
/// letting them cross the FFI boundary.
fn guarded<F: FnOnce() -> EvdStatus + UnwindSafe>(body: F) -> EvdStatus {
    match catch_unwind(body) {
        Ok(status) => {
            if status == EvdStatus::Ok {
                LAST_ERROR.with(|slot| *slot.borrow_mut() = None);
            }
            status
        }
        Err(_) => fail(EvdStatus::Panic, "internal panic; see library logs"),
    }
}

/// # Safety
/// `text` must be a valid NUL-terminated string or null.
unsafe fn read_cstr<'a>(text: *const c_char) -> Result<&'a str, EvdStatus> {
    if text.is_null() {
        return Err(fail(EvdStatus::NullPointer, "string argument is null"));
    }
    CStr::from_ptr(text)
        .to_str()
        .map_err(|e| fail(EvdStatus::InvalidUtf8, format!("string argument: {e}")))
}

fn write_out<T>(out: *mut T, value: T) -> EvdStatus {
    if out.is_null() {
        return fail(EvdStatus::NullPointer, "out pointer is null");
    }
    // SAFETY: the caller promised a writable location; null was rejected
    unsafe { ptr::write(out, value) };
    EvdStatus::Ok
}

/// # Safety
/// `handle` must be a live pointer previously returned by this library.
unsafe fn scenario_ref<'a>(handle: *const EvdScenario) -> Result<&'a ScenarioConfig, EvdStatus> {
    handle
        .as_ref()
        .map(|s| &s.0)
        .ok_or_else(|| fail(EvdStatus::NullPointer, "scenario handle is null"))
}

/// # Safety
/// `handle` must be a live pointer previously returned by this library.
unsafe fn profile_ref<'a>(handle: *const EvdProfile) -> Result<&'a DemandProfile, EvdStatus> {
    handle
        .as_ref()
        .map(|p| &p.0)
        .ok_or_else(|| fail(EvdStatus::NullPointer, "profile handle is null"))
}

/// Builds one of the shipped presets by name (`fig9-uniform`,
/// `fig8-trunc-gauss`, `fig8-rician`, `fig8-exponential`).
///
/// # Safety
/// `name` must be a valid NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn evd_scenario_preset(
    name: *const c_char,
    out: *mut *mut EvdScenario,
) -> EvdStatus {
    guarded(AssertUnwindSafe(|| {
        let name = match read_cstr(name) {
            Ok(s) => s,
            Err(status) => return status,
        };
        match preset(name) {
            Ok(s) => write_out(out, Box::into_raw(Box::new(EvdScenario(s)))),
            Err(e) => fail(EvdStatus::InvalidArgument, e),
        }
    }))
}

/// Parses a scenario from TOML text. `default_label` names the scenario
/// when the text does not; it may be null.
///
/// # Safety
/// `toml_text` must be a valid NUL-terminated string; `default_label`
/// must be valid or null; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn evd_scenario_from_toml(
    toml_text: *const c_char,
    default_label: *const c_char,
    out: *mut *mut EvdScenario,
) -> EvdStatus {
    guarded(AssertUnwindSafe(|| {
        let text = match read_cstr(toml_text) {
            Ok(s) => s,
            Err(status) => return status,
        };
        let label = if default_label.is_null() {
            "scenario"
        } else {
            match read_cstr(default_label) {
                Ok(s) => s,
                Err(status) => return status,
            }
        };
        match parse_config(text, label) {
            Ok(s) => write_out(out, Box::into_raw(Box::new(EvdScenario(s)))),
            Err(e) => fail(EvdStatus::InvalidArgument, e),
        }
    }))
}

/// Releases a scenario handle. Null is a no-op.
///
/// # Safety
/// `handle` must come from this library and must not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn evd_scenario_free(handle: *mut EvdScenario) {
    if !handle.is_null() {
        drop(Box::from_raw(handle));
    }
}

/// Reads the scenario's RNG seed.
///
/// # Safety
/// `handle` must be live; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn evd_scenario_seed(
    handle: *const EvdScenario,
    out: *mut u64,
) -> EvdStatus {
    guarded(AssertUnwindSafe(|| match scenario_ref(handle) {
        Ok(s) => write_out(out, s.seed),
        Err(status) => status,
    }))
}

/// Replaces the scenario's RNG seed.
///
/// # Safety
/// `handle` must be a live, exclusively held scenario handle.
#[no_mangle]
pub unsafe extern "C" fn evd_scenario_set_seed(
    handle: *mut EvdScenario,
    seed: u64,
) -> EvdStatus {
    guarded(AssertUnwindSafe(|| match handle.as_mut() {
        Some(s) => {
            s.0.seed = seed;
            EvdStatus::Ok
        }
        None => fail(EvdStatus::NullPointer, "scenario handle is null"),
    }))
}

/// Reads the scenario's fleet size.
///
/// # Safety
/// `handle` must be live; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn evd_scenario_fleet_size(
    handle: *const EvdScenario,
    out: *mut u64,
) -> EvdStatus {
    guarded(AssertUnwindSafe(|| match scenario_ref(handle) {
        Ok(s) => write_out(out, s.fleet_size),
        Err(status) => status,
    }))
}

/// Writes the scenario's result-relevant content hash.
///
/// # Safety
/// `handle` must be live; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn evd_scenario_hash(
    handle: *const EvdScenario,
    out: *mut u64,
) -> EvdStatus {
    guarded(AssertUnwindSafe(|| match scenario_ref(handle) {
        Ok(s) => write_out(out, s.hash()),
        Err(status) => status,
    }))
}

/// Returns the scenario's label as a heap string; release it with
/// [`evd_string_free`].
///
/// # Safety
/// `handle` must be live; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn evd_scenario_label(
    handle: *const EvdScenario,
    out: *mut *mut c_char,
) -> EvdStatus {
    guarded(AssertUnwindSafe(|| {
        let scenario = match scenario_ref(handle) {
            Ok(s) => s,
            Err(status) => return status,
        };
        match CString::new(scenario.label.clone()) {
            Ok(s) => write_out(out, s.into_raw()),
            Err(e) => fail(EvdStatus::InvalidArgument, format!("label is not a C string: {e}")),
        }
    }))
}

/// Computes the analytic per-vehicle expected profile.
///
/// # Safety
/// `handle` must be live; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn evd_scenario_expected_profile(
    handle: *const EvdScenario,
    out: *mut *mut EvdProfile,
) -> EvdStatus {
    guarded(AssertUnwindSafe(|| {
        let scenario = match scenario_ref(handle) {
            Ok(s) => s,
            Err(status) => return status,
        };
        match scenario.expected_profile() {
            Ok(p) => write_out(out, Box::into_raw(Box::new(EvdProfile(p)))),
            Err(e @ evdemand::analytic::AnalyticError::QuadratureFailure { .. }) => {
                fail(EvdStatus::Numeric, e)
            }
            Err(e) => fail(EvdStatus::InvalidArgument, e),
        }
    }))
}

/// Runs the Monte Carlo simulation over the scenario's fleet.
/// `workers = 0` uses one thread per core; the result is identical for
/// every worker count.
///
/// # Safety
/// `handle` must be live; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn evd_scenario_simulate(
    handle: *const EvdScenario,
    workers: usize,
    out: *mut *mut EvdProfile,
) -> EvdStatus {
    guarded(AssertUnwindSafe(|| {
        let scenario = match scenario_ref(handle) {
            Ok(s) => s,
            Err(status) => return status,
        };
        match scenario.simulate_fleet(workers) {
            Ok(p) => write_out(out, Box::into_raw(Box::new(EvdProfile(p)))),
            Err(e) => fail(EvdStatus::InvalidArgument, e),
        }
    }))
}

/// Releases a profile handle. Null is a no-op.
///
/// # Safety
/// `handle` must come from this library and must not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn evd_profile_free(handle: *mut EvdProfile) {
    if !handle.is_null() {
        drop(Box::from_raw(handle));
    }
}

/// Number of bins in the profile's day grid.
///
/// # Safety
/// `handle` must be live; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn evd_profile_bin_count(
    handle: *const EvdProfile,
    out: *mut usize,
) -> EvdStatus {
    guarded(AssertUnwindSafe(|| match profile_ref(handle) {
        Ok(p) => write_out(out, p.values_kw().len()),
        Err(status) => status,
    }))
}

/// Bin width in hours.
///
/// # Safety
/// `handle` must be live; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn evd_profile_resolution_hours(
    handle: *const EvdProfile,
    out: *mut f64,
) -> EvdStatus {
    guarded(AssertUnwindSafe(|| match profile_ref(handle) {
        Ok(p) => write_out(out, p.resolution_h()),
        Err(status) => status,
    }))
}

/// Energy of one day under the profile, kWh.
///
/// # Safety
/// `handle` must be live; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn evd_profile_daily_energy_kwh(
    handle: *const EvdProfile,
    out: *mut f64,
) -> EvdStatus {
    guarded(AssertUnwindSafe(|| match profile_ref(handle) {
        Ok(p) => write_out(out, p.daily_energy_kwh()),
        Err(status) => status,
    }))
}

/// Peak demand and the clock time (bin center, hours) where it occurs.
/// Either out-pointer may be null to skip that value.
///
/// # Safety
/// `handle` must be live; non-null out-pointers must be writable.
#[no_mangle]
pub unsafe extern "C" fn evd_profile_peak(
    handle: *const EvdProfile,
    peak_kw: *mut f64,
    peak_time_h: *mut f64,
) -> EvdStatus {
    guarded(AssertUnwindSafe(|| {
        let profile = match profile_ref(handle) {
            Ok(p) => p,
            Err(status) => return status,
        };
        let (bin, value) = profile.peak();
        if !peak_kw.is_null() {
            ptr::write(peak_kw, value);
        }
        if !peak_time_h.is_null() {
            ptr::write(peak_time_h, profile.bin_center(bin));
        }
        EvdStatus::Ok
    }))
}

/// Copies the per-bin expected demand (kW) into `buf`.
///
/// # Safety
/// `handle` must be live; `buf` must point to at least `capacity` doubles.
#[no_mangle]
pub unsafe extern "C" fn evd_profile_values(
    handle: *const EvdProfile,
    buf: *mut f64,
    capacity: usize,
) -> EvdStatus {
    guarded(AssertUnwindSafe(|| {
        let profile = match profile_ref(handle) {
            Ok(p) => p,
            Err(status) => return status,
        };
        if buf.is_null() {
            return fail(EvdStatus::NullPointer, "value buffer is null");
        }
        let values = profile.values_kw();
        if capacity < values.len() {
            return fail(
                EvdStatus::BufferTooSmall,
                format!("need {} doubles, got {capacity}", values.len()),
            );
        }
        ptr::copy_nonoverlapping(values.as_ptr(), buf, values.len());
        EvdStatus::Ok
    }))
}

/// Whether the profile carries a per-bin standard-error column (Monte
/// Carlo runs with at least two sessions do; analytic runs do not).
///
/// # Safety
/// `handle` must be live; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn evd_profile_has_stderr(
    handle: *const EvdProfile,
    out: *mut bool,
) -> EvdStatus {
    guarded(AssertUnwindSafe(|| match profile_ref(handle) {
        Ok(p) => write_out(out, p.stderr_kw().is_some()),
        Err(status) => status,
    }))
}

/// Copies the per-bin standard errors (kW) into `buf`. Fails with
/// `InvalidArgument` when the profile has none.
///
/// # Safety
/// `handle` must be live; `buf` must point to at least `capacity` doubles.
#[no_mangle]
pub unsafe extern "C" fn evd_profile_stderr(
    handle: *const EvdProfile,
    buf: *mut f64,
    capacity: usize,
) -> EvdStatus {
    guarded(AssertUnwindSafe(|| {
        let profile = match profile_ref(handle) {
            Ok(p) => p,
            Err(status) => return status,
        };
        if buf.is_null() {
            return fail(EvdStatus::NullPointer, "stderr buffer is null");
        }
        let Some(stderr) = profile.stderr_kw() else {
            return fail(EvdStatus::InvalidArgument, "profile has no stderr column");
        };
        if capacity < stderr.len() {
            return fail(
                EvdStatus::BufferTooSmall,
                format!("need {} doubles, got {capacity}", stderr.len()),
            );
        }
        ptr::copy_nonoverlapping(stderr.as_ptr(), buf, stderr.len());
        EvdStatus::Ok
    }))
}

/// Serializes the profile to CSV; release the string with
/// [`evd_string_free`].
///
/// # Safety
/// `handle` must be live; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn evd_profile_to_csv(
    handle: *const EvdProfile,
    out: *mut *mut c_char,
) -> EvdStatus {
    guarded(AssertUnwindSafe(|| {
        let profile = match profile_ref(handle) {
            Ok(p) => p,
            Err(status) => return status,
        };
        match CString::new(profile.to_csv()) {
            Ok(s) => write_out(out, s.into_raw()),
            Err(e) => fail(EvdStatus::Panic, format!("CSV contained NUL: {e}")),
        }
    }))
}

/// Parses a profile from CSV text produced by [`evd_profile_to_csv`] (or
/// any file in the same schema).
///
/// # Safety
/// `text` must be a valid NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn evd_profile_from_csv(
    text: *const c_char,
    out: *mut *mut EvdProfile,
) -> EvdStatus {
    guarded(AssertUnwindSafe(|| {
        let text = match read_cstr(text) {
            Ok(s) => s,
            Err(status) => return status,
        };
        match DemandProfile::from_csv_str(text) {
            Ok(p) => write_out(out, Box::into_raw(Box::new(EvdProfile(p)))),
            Err(e) => fail(EvdStatus::InvalidArgument, e),
        }
    }))
}

/// Releases a string returned by this library. Null is a no-op.
///
/// # Safety
/// `text` must come from this library and must not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn evd_string_free(text: *mut c_char) {
    if !text.is_null() {
        drop(CString::from_raw(text));
    }
}
