//! C ABI over the `geoctl` manifold kernels and scenario runner.
//!
//! Handles are opaque and owned by the caller once returned; release them
//! with the matching `*_free`. Points and tangent vectors are row-major
//! `double` arrays of `rows × cols` entries (see
//! [`geo_manifold_ambient_shape`]). Every function returns a [`GeoStatus`];
//! on failure [`geo_last_error`] describes the problem for the calling
//! thread.

use std::cell::RefCell;
use std::ffi::{c_char, c_int, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use geoctl::manifold::{self, Point, Tangent};
use geoctl::scenario::{self, RunReport, ScenarioConfig};
use geoctl::{GeoError, Manifold, Mat};

/// Status codes returned by every entry point.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GeoStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidManifold = 2,
    ShapeMismatch = 3,
    ConstraintViolation = 4,
    NotTangent = 5,
    InjectivityRadiusExceeded = 6,
    AtCutLocus = 7,
    ConfigInvalid = 8,
    Numerical = 9,
    Io = 10,
    InvalidUtf8 = 11,
    Panic = 12,
}

/// Opaque manifold handle.
pub struct GeoManifold {
    inner: Manifold,
}

/// Opaque scenario report handle.
pub struct GeoReport {
    report: RunReport,
    json: CString,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let clean = msg.replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(clean).unwrap_or_default());
}

fn status_of(e: &GeoError) -> GeoStatus {
    match e {
        GeoError::InvalidManifold(_) => GeoStatus::InvalidManifold,
        GeoError::ShapeMismatch { .. } => GeoStatus::ShapeMismatch,
        GeoError::ConstraintViolation(_) => GeoStatus::ConstraintViolation,
        GeoError::NotTangent(_) | GeoError::BasepointMismatch { .. } => GeoStatus::NotTangent,
        GeoError::InjectivityRadiusExceeded { .. } => GeoStatus::InjectivityRadiusExceeded,
        GeoError::AtCutLocus => GeoStatus::AtCutLocus,
        GeoError::ConfigInvalid(_) | GeoError::GainOutOfRange(_) => GeoStatus::ConfigInvalid,
        GeoError::Io(_) => GeoStatus::Io,
        GeoError::Scenario { source, .. } => status_of(source),
        _ => GeoStatus::Numerical,
    }
}

enum Failure {
    Null,
    Utf8,
    Geo(GeoError),
}

impl From<GeoError> for Failure {
    fn from(e: GeoError) -> Self {
        Failure::Geo(e)
    }
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> GeoStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            GeoStatus::Ok
        }
        Ok(Err(Failure::Null)) => {
            set_error("null pointer argument");
            GeoStatus::NullPointer
        }
        Ok(Err(Failure::Utf8)) => {
            set_error("string argument is not valid UTF-8");
            GeoStatus::InvalidUtf8
        }
        Ok(Err(Failure::Geo(e))) => {
            set_error(&e.to_string());
            status_of(&e)
        }
        Err(_) => {
            set_error("internal panic");
            GeoStatus::Panic
        }
    }
}

unsafe fn handle<'a>(m: *const GeoManifold) -> Result<&'a Manifold, Failure> {
    m.as_ref().map(|h| &h.inner).ok_or(Failure::Null)
}

unsafe fn read_mat(m: &Manifold, data: *const f64) -> Result<Mat, Failure> {
    if data.is_null() {
        return Err(Failure::Null);
    }
    let (r, c) = m.ambient_shape();
    let values = std::slice::from_raw_parts(data, r * c);
    Ok(Mat::from_row_slice(r, c, values))
}

unsafe fn write_mat(a: &Mat, out: *mut f64) -> Result<(), Failure> {
    if out.is_null() {
        return Err(Failure::Null);
    }
    let (r, c) = a.shape();
    let dst = std::slice::from_raw_parts_mut(out, r * c);
    for i in 0..r {
        for j in 0..c {
            dst[i * c + j] = a[(i, j)];
        }
    }
    Ok(())
}

unsafe fn point(m: &Manifold, data: *const f64) -> Result<Point, Failure> {
    Ok(Point::new(*m, read_mat(m, data)?)?)
}

unsafe fn tangent(p: &Point, data: *const f64) -> Result<Tangent, Failure> {
    Ok(p.tangent(read_mat(&p.manifold(), data)?)?)
}

unsafe fn emit(m: Manifold, out: *mut *mut GeoManifold) -> Result<(), Failure> {
    if out.is_null() {
        return Err(Failure::Null);
    }
    *out = Box::into_raw(Box::new(GeoManifold { inner: m }));
    Ok(())
}

/// Euclidean space `R^n`.
///
/// # Safety
/// `out` must be a valid pointer to writable storage.
#[no_mangle]
pub unsafe extern "C" fn geo_manifold_euclidean(n: usize, out: *mut *mut GeoManifold) -> GeoStatus {
    guard(|| emit(Manifold::euclidean(n)?, out))
}

/// Sphere `S^n` of the given radius embedded in `R^{n+1}`.
///
/// # Safety
/// `out` must be a valid pointer to writable storage.
#[no_mangle]
pub unsafe extern "C" fn geo_manifold_sphere(
    n: usize,
    radius: f64,
    out: *mut *mut GeoManifold,
) -> GeoStatus {
    guard(|| emit(Manifold::sphere(n, radius)?, out))
}

/// The rotation group SO(3).
///
/// # Safety
/// `out` must be a valid pointer to writable storage.
#[no_mangle]
pub unsafe extern "C" fn geo_manifold_so3(out: *mut *mut GeoManifold) -> GeoStatus {
    guard(|| emit(Manifold::so3(), out))
}

/// Symmetric positive-definite `n × n` matrices, affine-invariant metric.
///
/// # Safety
/// `out` must be a valid pointer to writable storage.
#[no_mangle]
pub unsafe extern "C" fn geo_manifold_spd(n: usize, out: *mut *mut GeoManifold) -> GeoStatus {
    guard(|| emit(Manifold::spd(n)?, out))
}

/// # Safety
/// `m` must be null or a handle returned by a `geo_manifold_*` constructor
/// that has not been freed.
#[no_mangle]
pub unsafe extern "C" fn geo_manifold_free(m: *mut GeoManifold) {
    if !m.is_null() {
        drop(Box::from_raw(m));
    }
}

/// Ambient array shape of points and tangent vectors, and the intrinsic
/// dimension.
///
/// # Safety
/// `m` must be a live handle; output pointers must be writable.
#[no_mangle]
pub unsafe extern "C" fn geo_manifold_ambient_shape(
    m: *const GeoManifold,
    rows: *mut usize,
    cols: *mut usize,
    dim: *mut usize,
) -> GeoStatus {
    guard(|| {
        let m = handle(m)?;
        if rows.is_null() || cols.is_null() || dim.is_null() {
            return Err(Failure::Null);
        }
        let (r, c) = m.ambient_shape();
        *rows = r;
        *cols = c;
        *dim = m.dim();
        Ok(())
    })
}

/// `out = exp_p(v)`.
///
/// # Safety
/// `m` must be a live handle; arrays must hold `rows × cols` doubles.
#[no_mangle]
pub unsafe extern "C" fn geo_exp(
    m: *const GeoManifold,
    p: *const f64,
    v: *const f64,
    out: *mut f64,
) -> GeoStatus {
    guard(|| {
        let m = handle(m)?;
        let p = point(m, p)?;
        let v = tangent(&p, v)?;
        write_mat(manifold::exp_map(&p, &v)?.coords(), out)
    })
}

/// `out = log_p(q)`.
///
/// # Safety
/// `m` must be a live handle; arrays must hold `rows × cols` doubles.
#[no_mangle]
pub unsafe extern "C" fn geo_log(
    m: *const GeoManifold,
    p: *const f64,
    q: *const f64,
    out: *mut f64,
) -> GeoStatus {
    guard(|| {
        let m = handle(m)?;
        let (p, q) = (point(m, p)?, point(m, q)?);
        write_mat(manifold::log_map(&p, &q)?.coords(), out)
    })
}

/// Geodesic distance `d(p, q)`.
///
/// # Safety
/// `m` must be a live handle; arrays must hold `rows × cols` doubles and
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn geo_dist(
    m: *const GeoManifold,
    p: *const f64,
    q: *const f64,
    out: *mut f64,
) -> GeoStatus {
    guard(|| {
        let m = handle(m)?;
        let (p, q) = (point(m, p)?, point(m, q)?);
        if out.is_null() {
            return Err(Failure::Null);
        }
        *out = manifold::dist(&p, &q);
        Ok(())
    })
}

/// Metric inner product `⟨u, v⟩_p`.
///
/// # Safety
/// `m` must be a live handle; arrays must hold `rows × cols` doubles and
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn geo_inner(
    m: *const GeoManifold,
    p: *const f64,
    u: *const f64,
    v: *const f64,
    out: *mut f64,
) -> GeoStatus {
    guard(|| {
        let m = handle(m)?;
        let p = point(m, p)?;
        let (u, v) = (tangent(&p, u)?, tangent(&p, v)?);
        if out.is_null() {
            return Err(Failure::Null);
        }
        *out = manifold::inner(&u, &v)?;
        Ok(())
    })
}

/// Parallel transport of `v ∈ T_pM` to `q` along the minimizing geodesic.
///
/// # Safety
/// `m` must be a live handle; arrays must hold `rows × cols` doubles.
#[no_mangle]
pub unsafe extern "C" fn geo_transport(
    m: *const GeoManifold,
    p: *const f64,
    q: *const f64,
    v: *const f64,
    out: *mut f64,
) -> GeoStatus {
    guard(|| {
        let m = handle(m)?;
        let (p, q) = (point(m, p)?, point(m, q)?);
        let v = tangent(&p, v)?;
        write_mat(manifold::parallel_transport(&v, &q)?.coords(), out)
    })
}

/// Curvature `R(x, y) z` at `p`, with
/// `R(X,Y)Z = ∇_X∇_Y Z − ∇_Y∇_X Z − ∇_[X,Y] Z`.
///
/// # Safety
/// `m` must be a live handle; arrays must hold `rows × cols` doubles.
#[no_mangle]
pub unsafe extern "C" fn geo_curvature(
    m: *const GeoManifold,
    p: *const f64,
    x: *const f64,
    y: *const f64,
    z: *const f64,
    out: *mut f64,
) -> GeoStatus {
    guard(|| {
        let m = handle(m)?;
        let p = point(m, p)?;
        let (x, y, z) = (tangent(&p, x)?, tangent(&p, y)?, tangent(&p, z)?);
        write_mat(manifold::curvature(&p, &x, &y, &z)?.coords(), out)
    })
}

/// Run a scenario from its TOML text. Output files are written only when
/// the configuration names an output directory.
///
/// # Safety
/// `toml` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn geo_scenario_run(
    toml: *const c_char,
    out: *mut *mut GeoReport,
) -> GeoStatus {
    guard(|| {
        if toml.is_null() || out.is_null() {
            return Err(Failure::Null);
        }
        let text = CStr::from_ptr(toml).to_str().map_err(|_| Failure::Utf8)?;
        let cfg = ScenarioConfig::from_toml(text)?;
        let report = scenario::run(&cfg)?;
        let json = CString::new(report.to_json()?).map_err(|_| Failure::Utf8)?;
        *out = Box::into_raw(Box::new(GeoReport { report, json }));
        Ok(())
    })
}

/// 1 when every criterion of the run passed, 0 otherwise, -1 for null.
///
/// # Safety
/// `r` must be null or a live report handle.
#[no_mangle]
pub unsafe extern "C" fn geo_report_passed(r: *const GeoReport) -> c_int {
    match r.as_ref() {
        Some(r) => c_int::from(r.report.passed),
        None => -1,
    }
}

/// The report as JSON, owned by the handle and valid until it is freed.
///
/// # Safety
/// `r` must be null or a live report handle.
#[no_mangle]
pub unsafe extern "C" fn geo_report_json(r: *const GeoReport) -> *const c_char {
    match r.as_ref() {
        Some(r) => r.json.as_ptr(),
        None => ptr::null(),
    }
}

/// # Safety
/// `r` must be null or a report handle that has not been freed.
#[no_mangle]
pub unsafe extern "C" fn geo_report_free(r: *mut GeoReport) {
    if !r.is_null() {
        drop(Box::from_raw(r));
    }
}

/// Message for the most recent failure on this thread; empty after a
/// success. Valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn geo_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}
