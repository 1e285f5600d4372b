//! C interface to capbound.
//!
//! Every function returns a [`CbStatus`]; results come back through out
//! pointers. On failure the message is kept per thread and can be read with
//! [`cb_last_error_message`]. Handles and strings returned by the library are
//! owned by the caller and released with the matching `*_free` function.
//!
//! The SDP backend links OpenBLAS. On AVX-512 machines with OpenBLAS 0.3.20,
//! export `OPENBLAS_CORETYPE=Haswell` before the process starts.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use capbound::channel::{self, Channel};
use capbound::cli::{BoundsDocument, DegradabilityDocument, Document, RunOptions, SearchDocument, StateDocument};
use capbound::linalg::{CMat, C64};
use capbound::optim::{self, OptimOptions};
use capbound::sdp::{self, SdpOptions};
use capbound::state::BipartiteState;
use capbound::{bippt, Error};

/// Result code of every call.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CbStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    /// Malformed input, unphysical map or state, bad options.
    Validation = 3,
    /// The SDP solver failed or a bound chain came out inconsistent.
    Solver = 4,
    Panic = 5,
}

/// Optimizer and solver settings. Obtain defaults from [`cb_options_default`].
#[repr(C)]
#[derive(Clone, Copy, Debug)]
pub struct CbOptions {
    pub restarts: usize,
    pub max_iter: usize,
    pub tol: f64,
    pub seed: u64,
    pub budget: usize,
    pub sdp_tol: f64,
    pub sdp_max_iter: u32,
}

/// Opaque channel handle.
pub struct CbChannel(Channel);

/// Opaque bipartite state handle.
pub struct CbState(BipartiteState);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn fail(status: CbStatus, msg: impl Into<String>) -> CbStatus {
    set_error(msg.into());
    status
}

fn status_of(e: &Error) -> CbStatus {
    if e.is_validation() {
        CbStatus::Validation
    } else {
        CbStatus::Solver
    }
}

struct Failure(CbStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure(status_of(&e), e.to_string())
    }
}

type Outcome<T> = Result<T, Failure>;

fn null(what: &str) -> Failure {
    Failure(CbStatus::NullPointer, format!("{what} is null"))
}

/// Runs `f` behind a panic guard and records any failure.
fn guard(f: impl FnOnce() -> Outcome<()>) -> CbStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            CbStatus::Ok
        }
        Ok(Err(Failure(status, msg))) => fail(status, msg),
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            fail(CbStatus::Panic, format!("panic: {msg}"))
        }
    }
}

unsafe fn text<'a>(s: *const c_char, what: &str) -> Outcome<&'a str> {
    if s.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(s)
        .to_str()
        .map_err(|_| Failure(CbStatus::InvalidUtf8, format!("{what} is not valid UTF-8")))
}

unsafe fn write<T>(out: *mut T, value: T, what: &str) -> Outcome<()> {
    if out.is_null() {
        return Err(null(what));
    }
    out.write(value);
    Ok(())
}

unsafe fn write_string(out: *mut *mut c_char, s: String) -> Outcome<()> {
    let c = CString::new(s).map_err(|_| Failure(CbStatus::Solver, "output contains NUL".into()))?;
    write(out, c.into_raw(), "out")
}

unsafe fn channel<'a>(h: *const CbChannel) -> Outcome<&'a Channel> {
    h.as_ref().map(|c| &c.0).ok_or_else(|| null("channel"))
}

unsafe fn state<'a>(h: *const CbState) -> Outcome<&'a BipartiteState> {
    h.as_ref().map(|s| &s.0).ok_or_else(|| null("state"))
}

unsafe fn run_options(opts: *const CbOptions) -> Outcome<RunOptions> {
    let o = match opts.as_ref() {
        Some(o) => *o,
        None => cb_options_default(),
    };
    let optim = OptimOptions {
        restarts: o.restarts,
        max_iter: o.max_iter,
        tol: o.tol,
        seed: o.seed,
        budget: o.budget,
        ..OptimOptions::default()
    };
    optim.validate()?;
    if !(o.sdp_tol > 0.0 && o.sdp_tol.is_finite()) || o.sdp_max_iter == 0 {
        return Err(Error::Config(format!("invalid SDP settings (tol {}, max iter {})", o.sdp_tol, o.sdp_max_iter)).into());
    }
    Ok(RunOptions::new(optim, &SdpOptions { feas: o.sdp_tol, gap: o.sdp_tol, max_iter: o.sdp_max_iter }))
}

/// Reads `count` row-major `rows x cols` complex matrices stored as
/// interleaved (re, im) pairs.
unsafe fn matrices(data: *const f64, count: usize, rows: usize, cols: usize) -> Outcome<Vec<CMat>> {
    if data.is_null() {
        return Err(null("data"));
    }
    let per = rows
        .checked_mul(cols)
        .and_then(|n| n.checked_mul(2))
        .filter(|_| count > 0 && rows > 0 && cols > 0)
        .ok_or_else(|| Failure(CbStatus::Validation, "dimensions must be positive".into()))?;
    let raw = std::slice::from_raw_parts(data, per * count);
    Ok(raw
        .chunks_exact(per)
        .map(|m| CMat::from_fn(rows, cols, |r, c| C64::new(m[2 * (r * cols + c)], m[2 * (r * cols + c) + 1])))
        .collect())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn cb_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message of the last failed call on this thread, or NULL. The pointer stays
/// valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn cb_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

#[no_mangle]
pub extern "C" fn cb_options_default() -> CbOptions {
    let o = OptimOptions::default();
    let s = SdpOptions::default();
    CbOptions {
        restarts: o.restarts,
        max_iter: o.max_iter,
        tol: o.tol,
        seed: o.seed,
        budget: o.budget,
        sdp_tol: s.feas,
        sdp_max_iter: s.max_iter,
    }
}

/// Frees a string returned by the library. NULL is ignored.
///
/// # Safety
/// `s` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn cb_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Parses a channel from its JSON form (`dim_in`, `dim_out`, `kraus`).
///
/// # Safety
/// `json` must be NUL-terminated; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cb_channel_from_json(json: *const c_char, out: *mut *mut CbChannel) -> CbStatus {
    guard(|| {
        let ch = channel::channel_from_json(text(json, "json")?)?;
        write(out, Box::into_raw(Box::new(CbChannel(ch))), "out")
    })
}

/// Builds a named channel family, e.g. `erasure` with params `{d, p}`.
///
/// # Safety
/// `name` must be NUL-terminated; `params` must hold `n_params` values.
#[no_mangle]
pub unsafe extern "C" fn cb_channel_builtin(
    name: *const c_char,
    params: *const f64,
    n_params: usize,
    out: *mut *mut CbChannel,
) -> CbStatus {
    guard(|| {
        let name = text(name, "name")?;
        let params = match n_params {
            0 => &[][..],
            _ if params.is_null() => return Err(null("params")),
            n => std::slice::from_raw_parts(params, n),
        };
        let ch = channel::builtin(name, params)?;
        write(out, Box::into_raw(Box::new(CbChannel(ch))), "out")
    })
}

/// Builds a channel from `count` Kraus operators, each `dim_out x dim_in`,
/// row-major with interleaved real and imaginary parts.
///
/// # Safety
/// `data` must hold `2 * count * dim_out * dim_in` values.
#[no_mangle]
pub unsafe extern "C" fn cb_channel_from_kraus(
    dim_in: usize,
    dim_out: usize,
    count: usize,
    data: *const f64,
    out: *mut *mut CbChannel,
) -> CbStatus {
    guard(|| {
        let ch = Channel::new(matrices(data, count, dim_out, dim_in)?)?;
        write(out, Box::into_raw(Box::new(CbChannel(ch))), "out")
    })
}

/// # Safety
/// `ch` must come from this library and not have been freed. NULL is ignored.
#[no_mangle]
pub unsafe extern "C" fn cb_channel_free(ch: *mut CbChannel) {
    if !ch.is_null() {
        drop(Box::from_raw(ch));
    }
}

/// # Safety
/// `ch` must be a live handle; each out pointer must be NULL or writable.
#[no_mangle]
pub unsafe extern "C" fn cb_channel_dims(
    ch: *const CbChannel,
    dim_in: *mut usize,
    dim_out: *mut usize,
    dim_env: *mut usize,
) -> CbStatus {
    guard(|| {
        let ch = channel(ch)?;
        for (p, v) in [(dim_in, ch.dim_in()), (dim_out, ch.dim_out()), (dim_env, ch.dim_env())] {
            if !p.is_null() {
                p.write(v);
            }
        }
        Ok(())
    })
}

/// Complementary channel to the environment.
///
/// # Safety
/// `ch` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cb_channel_complement(ch: *const CbChannel, out: *mut *mut CbChannel) -> CbStatus {
    guard(|| {
        let c = channel(ch)?.complementary();
        write(out, Box::into_raw(Box::new(CbChannel(c))), "out")
    })
}

/// JSON form of the channel; free with [`cb_string_free`].
///
/// # Safety
/// `ch` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cb_channel_to_json(ch: *const CbChannel, out: *mut *mut c_char) -> CbStatus {
    guard(|| {
        let s = serde_json::to_string(channel(ch)?).map_err(Error::from)?;
        write_string(out, s)
    })
}

/// Parses a bipartite state from JSON (`dim_a`, `dim_b`, `rho`).
///
/// # Safety
/// `json` must be NUL-terminated; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cb_state_from_json(json: *const c_char, out: *mut *mut CbState) -> CbStatus {
    guard(|| {
        let st: BipartiteState = serde_json::from_str(text(json, "json")?).map_err(Error::from)?;
        write(out, Box::into_raw(Box::new(CbState(st))), "out")
    })
}

/// Builds a state on `A ⊗ B` from a row-major density matrix with interleaved
/// real and imaginary parts.
///
/// # Safety
/// `data` must hold `2 * (dim_a * dim_b)^2` values.
#[no_mangle]
pub unsafe extern "C" fn cb_state_from_density(
    dim_a: usize,
    dim_b: usize,
    data: *const f64,
    out: *mut *mut CbState,
) -> CbStatus {
    guard(|| {
        let n = dim_a.checked_mul(dim_b).ok_or_else(|| Failure(CbStatus::Validation, "dimension overflow".into()))?;
        let mat = matrices(data, 1, n, n)?.remove(0);
        let st = BipartiteState::from_matrix(dim_a, dim_b, mat)?;
        write(out, Box::into_raw(Box::new(CbState(st))), "out")
    })
}

/// # Safety
/// `st` must come from this library and not have been freed. NULL is ignored.
#[no_mangle]
pub unsafe extern "C" fn cb_state_free(st: *mut CbState) {
    if !st.is_null() {
        drop(Box::from_raw(st));
    }
}

/// Single-letter quantity of a channel computed by [`cb_channel_quantity`].
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CbQuantity {
    /// Coherent information, heuristic lower bound.
    Q1 = 0,
    /// Private information, heuristic lower bound.
    P1 = 1,
    /// Holevo information.
    Chi = 2,
    /// Entanglement-assisted capacity.
    Ce = 3,
    /// log2 of the diamond norm of the transpose composed with the channel.
    TransposeBound = 4,
    /// Diamond distance to the nearest degradable composition.
    EpsDegradable = 5,
    /// Same for antidegradable.
    EpsAntidegradable = 6,
}

/// Evaluates one quantity. `opts` may be NULL for defaults.
///
/// # Safety
/// `ch` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cb_channel_quantity(
    ch: *const CbChannel,
    quantity: CbQuantity,
    opts: *const CbOptions,
    out: *mut f64,
) -> CbStatus {
    guard(|| {
        let ch = channel(ch)?;
        let o = run_options(opts)?;
        let value = match quantity {
            CbQuantity::Q1 => optim::q1(ch, &o.optim).value,
            CbQuantity::P1 => optim::p1(ch, &o.optim).value,
            CbQuantity::Chi => optim::holevo_chi(ch, &o.optim).value,
            CbQuantity::Ce => optim::ce(ch, &o.optim).value,
            CbQuantity::TransposeBound => sdp::transpose_q_upper_with(ch, &o.sdp())?.objective,
            CbQuantity::EpsDegradable => sdp::eps_degradable_with(ch, &o.sdp())?.eps,
            CbQuantity::EpsAntidegradable => sdp::eps_antidegradable_with(ch, &o.sdp())?.eps,
        };
        write(out, value, "out")
    })
}

/// Diamond norm of the difference of two channels with equal dimensions.
///
/// # Safety
/// `a` and `b` must be live handles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cb_diamond_distance(
    a: *const CbChannel,
    b: *const CbChannel,
    opts: *const CbOptions,
    out: *mut f64,
) -> CbStatus {
    guard(|| {
        let (a, b) = (channel(a)?, channel(b)?);
        let o = run_options(opts)?;
        let delta = a.choi().sub(&b.choi())?;
        write(out, sdp::diamond_norm_with(&delta, &o.sdp())?.objective, "out")
    })
}

/// Full bound report, same JSON as `capbound bounds --format json`.
/// `side_channel` of 0 skips the symmetric side-channel chains.
///
/// # Safety
/// `ch` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cb_bounds_json(
    ch: *const CbChannel,
    opts: *const CbOptions,
    side_channel: usize,
    out: *mut *mut c_char,
) -> CbStatus {
    guard(|| {
        let ch = channel(ch)?;
        let doc = BoundsDocument::compute(ch, run_options(opts)?, (side_channel > 0).then_some(side_channel))?;
        write_string(out, doc.to_json()?)
    })
}

/// Approximate degradability report, same JSON as `capbound degradability`.
///
/// # Safety
/// `ch` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cb_degradability_json(
    ch: *const CbChannel,
    opts: *const CbOptions,
    out: *mut *mut c_char,
) -> CbStatus {
    guard(|| {
        let doc = DegradabilityDocument::compute(channel(ch)?, run_options(opts)?)?;
        write_string(out, doc.to_json()?)
    })
}

/// Distillation bounds for a state, same JSON as `capbound state-bounds`.
///
/// # Safety
/// `st` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cb_state_bounds_json(
    st: *const CbState,
    opts: *const CbOptions,
    orders: bool,
    out: *mut *mut c_char,
) -> CbStatus {
    guard(|| {
        let doc = StateDocument::compute(state(st)?, run_options(opts)?, orders)?;
        write_string(out, doc.to_json()?)
    })
}

/// Runs the bi-PPT search. `config_json` holds a search configuration; absent
/// fields take their defaults, and NULL means all defaults.
///
/// # Safety
/// `config_json` must be NULL or NUL-terminated; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cb_search_bippt_json(config_json: *const c_char, out: *mut *mut c_char) -> CbStatus {
    guard(|| {
        let config: bippt::SearchConfig = if config_json.is_null() {
            bippt::SearchConfig::default()
        } else {
            serde_json::from_str(text(config_json, "config_json")?).map_err(Error::from)?
        };
        let outcome = bippt::search(&config)?;
        write_string(out, SearchDocument { config, outcome }.to_json()?)
    })
}
