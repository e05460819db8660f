//! C ABI for `ggfit`.
//!
//! Every fallible function returns a [`GgfitStatus`]; on failure a message is
//! available from [`ggfit_last_error_message`] on the calling thread. Objects
//! cross the boundary as opaque handles that the caller releases with the
//! matching `_free` function.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use ggfit::{
    critical_values, knn_entropy, run_test, test_statistic, CriticalSource, CriticalValueTable, Error, GGParams,
    RandomStream, STParams, Sample, Tail,
};

/// Result codes. Values 2 to 5 agree with the command-line exit codes.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GgfitStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    DuplicatePoints = 3,
    Lookup = 4,
    Io = 5,
    Numerical = 6,
    Panic = 7,
}

/// Rejection region of the test.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GgfitTail {
    Left = 0,
    Right = 1,
    TwoSided = 2,
}

impl From<GgfitTail> for Tail {
    fn from(t: GgfitTail) -> Self {
        match t {
            GgfitTail::Left => Tail::Left,
            GgfitTail::Right => Tail::Right,
            GgfitTail::TwoSided => Tail::TwoSided,
        }
    }
}

/// Decision of one test. Absent critical values are NaN.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct GgfitOutcome {
    pub statistic: f64,
    pub entropy: f64,
    pub moment: f64,
    pub critical_lower: f64,
    pub critical_upper: f64,
    pub reject: bool,
    pub n: usize,
    pub m: usize,
    pub k: usize,
}

/// An `n × m` sample of points.
pub struct GgfitSample(Sample);

/// A table of simulated null critical values.
pub struct GgfitTable(CriticalValueTable);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: String) {
    let message = CString::new(message.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(message));
}

fn status_of(err: &Error) -> GgfitStatus {
    match err {
        Error::DuplicatePoints { .. } => GgfitStatus::DuplicatePoints,
        Error::Lookup(_) => GgfitStatus::Lookup,
        Error::Io(_) => GgfitStatus::Io,
        Error::Quadrature { .. } | Error::InconsistentDensity { .. } | Error::Decomposition => {
            GgfitStatus::Numerical
        }
        _ => GgfitStatus::InvalidArgument,
    }
}

fn fail(err: Error) -> GgfitStatus {
    set_error(err.to_string());
    status_of(&err)
}

fn null(name: &str) -> GgfitStatus {
    set_error(format!("{name} is null"));
    GgfitStatus::NullPointer
}

fn guard(f: impl FnOnce() -> Result<(), GgfitStatus>) -> GgfitStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => GgfitStatus::Ok,
        Ok(Err(status)) => status,
        Err(_) => {
            set_error("internal panic".into());
            GgfitStatus::Panic
        }
    }
}

unsafe fn deref<'a, T>(p: *const T, name: &str) -> Result<&'a T, GgfitStatus> {
    p.as_ref().ok_or_else(|| null(name))
}

unsafe fn write<T>(out: *mut T, value: T, name: &str) -> Result<(), GgfitStatus> {
    if out.is_null() {
        return Err(null(name));
    }
    out.write(value);
    Ok(())
}

fn boxed<T>(value: T) -> *mut T {
    Box::into_raw(Box::new(value))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn ggfit_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message for the most recent failure on this thread, or NULL.
///
/// The pointer stays valid until the next call into this library from the
/// same thread.
#[no_mangle]
pub extern "C" fn ggfit_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Copies `n * m` row-major values into a new sample.
///
/// # Safety
/// `data` must point to `n * m` readable doubles and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ggfit_sample_from_rows(
    data: *const f64,
    n: usize,
    m: usize,
    out: *mut *mut GgfitSample,
) -> GgfitStatus {
    guard(|| {
        if data.is_null() {
            return Err(null("data"));
        }
        let len = n.checked_mul(m).ok_or_else(|| fail(Error::Domain("n * m overflows".into())))?;
        let values = std::slice::from_raw_parts(data, len).to_vec();
        let sample = Sample::new(values, m).map_err(fail)?;
        write(out, boxed(GgfitSample(sample)), "out")
    })
}

/// Draws `n` points from `GG_rate(m, s)`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ggfit_sample_gg(
    m: usize,
    s: f64,
    rate: f64,
    n: usize,
    seed: u64,
    stream: u64,
    out: *mut *mut GgfitSample,
) -> GgfitStatus {
    guard(|| {
        let params = GGParams::new(m, s, rate).map_err(fail)?;
        let sample = params.sample(n, RandomStream::new(seed, stream)).map_err(fail)?;
        write(out, boxed(GgfitSample(sample)), "out")
    })
}

/// Draws `n` points from the `m`-variate Student-t law with `nu` degrees of freedom.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ggfit_sample_student_t(
    m: usize,
    nu: f64,
    n: usize,
    seed: u64,
    stream: u64,
    out: *mut *mut GgfitSample,
) -> GgfitStatus {
    guard(|| {
        let params = STParams::new(m, nu).map_err(fail)?;
        let sample = params.sample(n, RandomStream::new(seed, stream)).map_err(fail)?;
        write(out, boxed(GgfitSample(sample)), "out")
    })
}

/// Reports the number of points and the dimension.
///
/// # Safety
/// `sample` must be a live handle; `n` and `m` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ggfit_sample_shape(sample: *const GgfitSample, n: *mut usize, m: *mut usize) -> GgfitStatus {
    guard(|| {
        let s = &deref(sample, "sample")?.0;
        write(n, s.n(), "n")?;
        write(m, s.dim(), "m")
    })
}

/// Copies the row-major coordinates into `out`, which holds `len` doubles.
///
/// # Safety
/// `sample` must be a live handle and `out` must have room for `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn ggfit_sample_copy(sample: *const GgfitSample, out: *mut f64, len: usize) -> GgfitStatus {
    guard(|| {
        let values = deref(sample, "sample")?.0.as_slice();
        if out.is_null() {
            return Err(null("out"));
        }
        if len != values.len() {
            return Err(fail(Error::Domain(format!("buffer holds {len} values, sample has {}", values.len()))));
        }
        ptr::copy_nonoverlapping(values.as_ptr(), out, len);
        Ok(())
    })
}

/// Releases a sample. NULL is ignored.
///
/// # Safety
/// `sample` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ggfit_sample_free(sample: *mut GgfitSample) {
    if !sample.is_null() {
        drop(Box::from_raw(sample));
    }
}

/// k-nearest-neighbour entropy estimate in nats.
///
/// # Safety
/// `sample` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ggfit_knn_entropy(sample: *const GgfitSample, k: usize, out: *mut f64) -> GgfitStatus {
    guard(|| {
        let estimate = knn_entropy(&deref(sample, "sample")?.0, k).map_err(fail)?;
        write(out, estimate.value, "out")
    })
}

/// Goodness-of-fit statistic for shape `s`.
///
/// # Safety
/// `sample` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ggfit_test_statistic(
    sample: *const GgfitSample,
    s: f64,
    k: usize,
    out: *mut f64,
) -> GgfitStatus {
    guard(|| {
        let t = test_statistic(&deref(sample, "sample")?.0, s, k).map_err(fail)?;
        write(out, t, "out")
    })
}

/// Simulates a critical-value table at the levels in `alphas`.
///
/// # Safety
/// `alphas` must point to `n_alphas` readable doubles and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ggfit_table_simulate(
    m: usize,
    s: f64,
    n: usize,
    k: usize,
    alphas: *const f64,
    n_alphas: usize,
    replicates: usize,
    seed: u64,
    stream: u64,
    out: *mut *mut GgfitTable,
) -> GgfitStatus {
    guard(|| {
        if alphas.is_null() {
            return Err(null("alphas"));
        }
        let alphas = std::slice::from_raw_parts(alphas, n_alphas);
        let table =
            critical_values(m, s, n, k, alphas, replicates, RandomStream::new(seed, stream)).map_err(fail)?;
        write(out, boxed(GgfitTable(table)), "out")
    })
}

/// Parses a table from its JSON form.
///
/// # Safety
/// `json` must be a NUL-terminated string and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ggfit_table_from_json(json: *const c_char, out: *mut *mut GgfitTable) -> GgfitStatus {
    guard(|| {
        if json.is_null() {
            return Err(null("json"));
        }
        let text = CStr::from_ptr(json)
            .to_str()
            .map_err(|e| fail(Error::Config(format!("table is not UTF-8: {e}"))))?;
        let table = CriticalValueTable::from_json(text).map_err(fail)?;
        write(out, boxed(GgfitTable(table)), "out")
    })
}

/// Serializes a table to JSON. Release the string with [`ggfit_string_free`].
///
/// # Safety
/// `table` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ggfit_table_to_json(table: *const GgfitTable, out: *mut *mut c_char) -> GgfitStatus {
    guard(|| {
        let json = deref(table, "table")?.0.to_json().map_err(fail)?;
        let json = CString::new(json).map_err(|e| fail(Error::Config(e.to_string())))?;
        write(out, json.into_raw(), "out")
    })
}

/// Releases a table. NULL is ignored.
///
/// # Safety
/// `table` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ggfit_table_free(table: *mut GgfitTable) {
    if !table.is_null() {
        drop(Box::from_raw(table));
    }
}

/// Releases a string returned by this library. NULL is ignored.
///
/// # Safety
/// `s` must be NULL or a string from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ggfit_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

fn outcome(o: ggfit::TestOutcome) -> GgfitOutcome {
    GgfitOutcome {
        statistic: o.statistic,
        entropy: o.entropy,
        moment: o.moment,
        critical_lower: o.critical_lower.unwrap_or(f64::NAN),
        critical_upper: o.critical_upper.unwrap_or(f64::NAN),
        reject: o.reject,
        n: o.n,
        m: o.m,
        k: o.k,
    }
}

/// Tests the sample against `GG(m, s)` with critical values from `table`.
///
/// # Safety
/// `sample` and `table` must be live handles and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ggfit_run_test(
    sample: *const GgfitSample,
    s: f64,
    k: usize,
    alpha: f64,
    table: *const GgfitTable,
    tail: GgfitTail,
    out: *mut GgfitOutcome,
) -> GgfitStatus {
    guard(|| {
        let sample = &deref(sample, "sample")?.0;
        let table = &deref(table, "table")?.0;
        let o = run_test(sample, s, k, alpha, CriticalSource::Table(table), tail.into()).map_err(fail)?;
        write(out, outcome(o), "out")
    })
}

/// Tests the sample with critical values simulated on the spot.
///
/// # Safety
/// `sample` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ggfit_run_test_fresh(
    sample: *const GgfitSample,
    s: f64,
    k: usize,
    alpha: f64,
    replicates: usize,
    seed: u64,
    stream: u64,
    tail: GgfitTail,
    out: *mut GgfitOutcome,
) -> GgfitStatus {
    guard(|| {
        let sample = &deref(sample, "sample")?.0;
        let source = CriticalSource::FreshMonteCarlo { replicates, stream: RandomStream::new(seed, stream) };
        let o = run_test(sample, s, k, alpha, source, tail.into()).map_err(fail)?;
        write(out, outcome(o), "out")
    })
}
