//! C ABI over `amac_core`.
//!
//! Every fallible call returns an [`AmacStatus`]; on failure the message is
//! kept per thread and read with [`amac_last_error_message`]. Channels are
//! opaque [`AmacChannel`] handles released with [`amac_channel_free`].
//! Sender subsets are bitmasks (bit `m` for sender `m + 1`) and subset
//! arrays are indexed by `mask - 1`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use amac_core::cli::{run, ExperimentConfig};
use amac_core::regions::{polytope, union_contains, vertex, Ordering, RateVector, SearchBudget};
use amac_core::{channels, AmacError, Distribution, DmcChannel, ProductInput};

/// Result codes.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AmacStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    InvalidDistribution = 3,
    InvalidChannel = 4,
    ShapeMismatch = 5,
    Unsupported = 6,
    Numerical = 7,
    CapacityExceeded = 8,
    Config = 9,
    Io = 10,
    Panic = 11,
}

/// Opaque channel handle.
pub struct AmacChannel {
    inner: DmcChannel,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &AmacError) -> AmacStatus {
    match e {
        AmacError::InvalidDistribution(_) => AmacStatus::InvalidDistribution,
        AmacError::InvalidChannel(_) => AmacStatus::InvalidChannel,
        AmacError::ShapeMismatch(_) | AmacError::DimensionMismatch { .. } => AmacStatus::ShapeMismatch,
        AmacError::Unsupported(_) => AmacStatus::Unsupported,
        AmacError::Numerical(_) => AmacStatus::Numerical,
        AmacError::Capacity(_) => AmacStatus::CapacityExceeded,
        AmacError::Config { .. } | AmacError::Json(_) => AmacStatus::Config,
        AmacError::Io(_) => AmacStatus::Io,
        _ => AmacStatus::InvalidArgument,
    }
}

struct Fail(AmacStatus, String);

impl From<AmacError> for Fail {
    fn from(e: AmacError) -> Self {
        Fail(status_of(&e), e.to_string())
    }
}

fn null(what: &str) -> Fail {
    Fail(AmacStatus::NullPointer, format!("{what} is null"))
}

/// Runs `f`, recording any error or panic.
fn guard(f: impl FnOnce() -> Result<(), Fail>) -> AmacStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            AmacStatus::Ok
        }
        Ok(Err(Fail(code, msg))) => {
            set_error(msg);
            code
        }
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("panic: {msg}"));
            AmacStatus::Panic
        }
    }
}

unsafe fn slice<'a, T>(p: *const T, len: usize, what: &str) -> Result<&'a [T], Fail> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn slice_mut<'a, T>(p: *mut T, len: usize, what: &str) -> Result<&'a mut [T], Fail> {
    if len == 0 {
        return Ok(&mut []);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts_mut(p, len))
}

unsafe fn handle<'a>(h: *const AmacChannel) -> Result<&'a DmcChannel, Fail> {
    h.as_ref().map(|c| &c.inner).ok_or_else(|| null("channel"))
}

unsafe fn text<'a>(s: *const c_char, what: &str) -> Result<&'a str, Fail> {
    if s.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(s)
        .to_str()
        .map_err(|_| Fail(AmacStatus::InvalidArgument, format!("{what} is not UTF-8")))
}

/// Product input from concatenated marginals, one block per sender.
fn product_input(w: &DmcChannel, flat: &[f64]) -> Result<ProductInput, Fail> {
    let want: usize = w.input_sizes().iter().sum();
    if flat.len() != want {
        return Err(Fail(
            AmacStatus::ShapeMismatch,
            format!("{} input probabilities, channel alphabets need {want}", flat.len()),
        ));
    }
    let mut at = 0;
    let mut laws = Vec::with_capacity(w.num_senders());
    for &a in w.input_sizes() {
        laws.push(Distribution::new(flat[at..at + a].to_vec())?);
        at += a;
    }
    Ok(ProductInput::new(laws))
}

unsafe fn put_channel(out: *mut *mut AmacChannel, w: DmcChannel) -> Result<(), Fail> {
    if out.is_null() {
        return Err(null("out"));
    }
    *out = Box::into_raw(Box::new(AmacChannel { inner: w }));
    Ok(())
}

/// Message of the last failed call on this thread, or null. Valid until
/// the next call into the library on the same thread.
#[no_mangle]
pub extern "C" fn amac_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version, static string.
#[no_mangle]
pub extern "C" fn amac_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Builds a channel from its transition table, row-major with `x_1`
/// slowest and `y` fastest (`prod(inputs) * outputs` entries).
///
/// # Safety
/// `inputs` must point to `senders` values and `transition` to
/// `transition_len` values; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn amac_channel_new(
    inputs: *const usize,
    senders: usize,
    outputs: usize,
    transition: *const f64,
    transition_len: usize,
    out: *mut *mut AmacChannel,
) -> AmacStatus {
    guard(|| {
        let inputs = slice(inputs, senders, "inputs")?;
        let t = slice(transition, transition_len, "transition")?;
        let w = DmcChannel::new(inputs.to_vec(), outputs, t.to_vec())?;
        put_channel(out, w)
    })
}

/// The two-sender binary channel of the even-delay example.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn amac_channel_example4(out: *mut *mut AmacChannel) -> AmacStatus {
    guard(|| put_channel(out, channels::example4()))
}

/// Binary symmetric channel with crossover `eps`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn amac_channel_bsc(eps: f64, out: *mut *mut AmacChannel) -> AmacStatus {
    guard(|| put_channel(out, channels::bsc(eps)?))
}

/// Releases a channel; null is ignored.
///
/// # Safety
/// `channel` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn amac_channel_free(channel: *mut AmacChannel) {
    if !channel.is_null() {
        drop(Box::from_raw(channel));
    }
}

/// Number of senders, 0 for null.
///
/// # Safety
/// `channel` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn amac_channel_num_senders(channel: *const AmacChannel) -> usize {
    channel.as_ref().map_or(0, |c| c.inner.num_senders())
}

/// Writes the polytope bounds `b(S) = I(X_S; Y | X_{S^c})` for every
/// non-empty subset, `out[mask - 1]`, `2^K - 1` entries.
///
/// # Safety
/// `input` must point to `input_len` values (marginals concatenated in
/// sender order) and `out` to `out_len` writable values.
#[no_mangle]
pub unsafe extern "C" fn amac_polytope_bounds(
    channel: *const AmacChannel,
    input: *const f64,
    input_len: usize,
    out: *mut f64,
    out_len: usize,
) -> AmacStatus {
    guard(|| {
        let w = handle(channel)?;
        let p = product_input(w, slice(input, input_len, "input")?)?;
        let poly = polytope(w, &p)?;
        let dst = slice_mut(out, out_len, "out")?;
        if dst.len() != poly.bounds().len() {
            return Err(Fail(
                AmacStatus::ShapeMismatch,
                format!("out holds {}, need {}", dst.len(), poly.bounds().len()),
            ));
        }
        dst.copy_from_slice(poly.bounds());
        Ok(())
    })
}

/// Successive-decoding vertex for a 0-based decoding order.
///
/// # Safety
/// `input` must point to `input_len` values, `order` and `out` to `K` values.
#[no_mangle]
pub unsafe extern "C" fn amac_vertex(
    channel: *const AmacChannel,
    input: *const f64,
    input_len: usize,
    order: *const usize,
    out: *mut f64,
) -> AmacStatus {
    guard(|| {
        let w = handle(channel)?;
        let k = w.num_senders();
        let p = product_input(w, slice(input, input_len, "input")?)?;
        let pi = Ordering::new(slice(order, k, "order")?.to_vec())?;
        let v = vertex(&polytope(w, &p)?, &pi)?;
        slice_mut(out, k, "out")?.copy_from_slice(v.as_slice());
        Ok(())
    })
}

/// Whether `rates` lies in the union of polytopes over product inputs, by
/// the default grid-and-refine search. Writes 1 or 0 to `member`.
///
/// # Safety
/// `rates` must point to `K` values; `member` must be writable.
#[no_mangle]
pub unsafe extern "C" fn amac_union_contains(
    channel: *const AmacChannel,
    rates: *const f64,
    member: *mut i32,
) -> AmacStatus {
    guard(|| {
        let w = handle(channel)?;
        let r = RateVector::new(slice(rates, w.num_senders(), "rates")?.to_vec())?;
        let inside = union_contains(w, &r, &SearchBudget::default())?.is_some();
        let m = member.as_mut().ok_or_else(|| null("member"))?;
        *m = i32::from(inside);
        Ok(())
    })
}

/// Runs a JSON experiment config (any task) and writes its artifacts to
/// `out_dir`. On success `summary` receives a JSON string naming the files;
/// release it with [`amac_string_free`]. Relative channel files resolve
/// against the working directory.
///
/// # Safety
/// Strings must be NUL-terminated; `summary` must be writable.
#[no_mangle]
pub unsafe extern "C" fn amac_run_config(
    config_json: *const c_char,
    out_dir: *const c_char,
    summary: *mut *mut c_char,
) -> AmacStatus {
    guard(|| {
        let cfg = ExperimentConfig::from_json(text(config_json, "config_json")?)?;
        let dir = text(out_dir, "out_dir")?;
        if summary.is_null() {
            return Err(null("summary"));
        }
        let s = run(&cfg, Path::new("."), None, Path::new(dir))?;
        let body = serde_json::to_string(&s).map_err(AmacError::from)?;
        *summary = CString::new(body).map_err(|e| Fail(AmacStatus::InvalidArgument, e.to_string()))?.into_raw();
        Ok(())
    })
}

/// Releases a string returned by this library; null is ignored.
///
/// # Safety
/// `s` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn amac_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
