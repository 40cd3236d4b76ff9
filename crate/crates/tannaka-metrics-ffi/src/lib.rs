//! C ABI for the core library.
//!
//! Conventions:
//!
//! * Every constructor returns an opaque handle (null on failure) that must
//!   be released with the matching `*_free`; handles are safe to share
//!   across threads for read-only calls.
//! * Fallible functions return a [`TmStatus`]; outputs go through pointer
//!   parameters. `TM_STATUS_OK` is zero.
//! * On failure, [`tm_last_error`] returns a thread-local UTF-8 message
//!   describing the most recent error on the calling thread.
//! * Complex matrices cross the boundary as column-major
//!   `double` arrays of length `2 * dim * dim`: entry `(row, col)` occupies
//!   slots `2 * (col * dim + row)` (real) and `2 * (col * dim + row) + 1`
//!   (imaginary).

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::ptr;
use std::sync::Arc;
use tannaka_metrics::dual::{stability_check, DualityReport, RepFamily};
use tannaka_metrics::error::Error;
use tannaka_metrics::group::{word_length, FiniteGroup, LengthFunction};
use tannaka_metrics::linalg::CMatrix;
use tannaka_metrics::pontryagin::{lattice_dual_length, QuadraticLattice};
use tannaka_metrics::unitary::{distance, MetricChoice};

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let cleaned: String = msg.chars().filter(|&c| c != '\0').collect();
    LAST_ERROR.with(|slot| {
        *slot.borrow_mut() = CString::new(cleaned).unwrap_or_default();
    });
}

/// Status codes returned by fallible functions.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TmStatus {
    /// Success.
    TmStatusOk = 0,
    /// A pointer argument was null or an index was out of range.
    TmStatusInvalidArgument = 1,
    /// Input data failed validation (not a group, not a length, ...).
    TmStatusInvalidInput = 2,
    /// The computation itself failed; see `tm_last_error`.
    TmStatusComputation = 3,
}

fn status_of(err: &Error) -> TmStatus {
    match err {
        Error::InvalidArgument(_) | Error::InvalidSpec(_) | Error::DimMismatch { .. } => {
            TmStatus::TmStatusInvalidArgument
        }
        Error::Internal(_) | Error::Io(_) | Error::Json(_) => TmStatus::TmStatusComputation,
        _ => TmStatus::TmStatusInvalidInput,
    }
}

fn fail(err: &Error) -> TmStatus {
    set_error(&err.to_string());
    status_of(err)
}

fn invalid(msg: &str) -> TmStatus {
    set_error(msg);
    TmStatus::TmStatusInvalidArgument
}

/// Opaque finite group handle.
pub struct TmGroup {
    inner: Arc<FiniteGroup>,
}

/// Opaque length-function handle, tied to the group it was built from.
pub struct TmLength {
    group: Arc<FiniteGroup>,
    inner: LengthFunction,
}

/// Opaque stability-report handle.
pub struct TmReport {
    inner: DualityReport,
    json: CString,
}

/// Metric selector for distance and stability calls.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TmMetric {
    TmMetricOperator = 0,
    TmMetricArclength = 1,
}

impl From<TmMetric> for MetricChoice {
    fn from(m: TmMetric) -> MetricChoice {
        match m {
            TmMetric::TmMetricOperator => MetricChoice::Operator,
            TmMetric::TmMetricArclength => MetricChoice::Arclength,
        }
    }
}

/// Representation family selector for stability calls.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TmFamily {
    TmFamilyIrrepsOnly = 0,
    TmFamilyDirectSums = 1,
}

impl From<TmFamily> for RepFamily {
    fn from(f: TmFamily) -> RepFamily {
        match f {
            TmFamily::TmFamilyIrrepsOnly => RepFamily::IrrepsOnly,
            TmFamily::TmFamilyDirectSums => RepFamily::DirectSums,
        }
    }
}

/// Message describing the most recent error on this thread. The pointer is
/// valid until the next failing call on the same thread. Never null.
#[no_mangle]
pub extern "C" fn tm_last_error() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ptr())
}

/// Library version as a static UTF-8 string (never freed).
#[no_mangle]
pub extern "C" fn tm_version() -> *const c_char {
    static VERSION: &str = concat!(env!("CARGO_PKG_VERSION"), "\0");
    VERSION.as_ptr() as *const c_char
}

/// Cyclic group of order `n`. Returns null on failure.
#[no_mangle]
pub extern "C" fn tm_group_cyclic(n: usize) -> *mut TmGroup {
    match FiniteGroup::cyclic(n) {
        Ok(g) => Box::into_raw(Box::new(TmGroup { inner: Arc::new(g) })),
        Err(e) => {
            set_error(&e.to_string());
            ptr::null_mut()
        }
    }
}

/// Dihedral group with `n` rotations (order `2n`). Returns null on failure.
#[no_mangle]
pub extern "C" fn tm_group_dihedral(n: usize) -> *mut TmGroup {
    match FiniteGroup::dihedral(n) {
        Ok(g) => Box::into_raw(Box::new(TmGroup { inner: Arc::new(g) })),
        Err(e) => {
            set_error(&e.to_string());
            ptr::null_mut()
        }
    }
}

/// Direct product of two groups. Returns null on failure.
///
/// # Safety
/// `a` and `b` must be valid group handles.
#[no_mangle]
pub unsafe extern "C" fn tm_group_product(
    a: *const TmGroup,
    b: *const TmGroup,
) -> *mut TmGroup {
    let (Some(a), Some(b)) = (a.as_ref(), b.as_ref()) else {
        set_error("null group handle");
        return ptr::null_mut();
    };
    match FiniteGroup::product(&a.inner, &b.inner) {
        Ok(g) => Box::into_raw(Box::new(TmGroup { inner: Arc::new(g) })),
        Err(e) => {
            set_error(&e.to_string());
            ptr::null_mut()
        }
    }
}

/// Number of elements, or 0 for a null handle.
///
/// # Safety
/// `group` must be a valid group handle or null.
#[no_mangle]
pub unsafe extern "C" fn tm_group_order(group: *const TmGroup) -> usize {
    group.as_ref().map_or(0, |g| g.inner.order())
}

/// Release a group handle (null is ignored).
///
/// # Safety
/// `group` must have come from a `tm_group_*` constructor and not have been
/// freed already.
#[no_mangle]
pub unsafe extern "C" fn tm_group_free(group: *mut TmGroup) {
    if !group.is_null() {
        drop(Box::from_raw(group));
    }
}

/// Word length over `gen_count` generator element indices with optional
/// positive weights (pass null for unit weights).
///
/// # Safety
/// `group` must be valid; `gens` must point to `gen_count` readable entries;
/// `weights` must be null or point to `gen_count` readable doubles.
#[no_mangle]
pub unsafe extern "C" fn tm_length_word(
    group: *const TmGroup,
    gens: *const usize,
    weights: *const f64,
    gen_count: usize,
    out: *mut *mut TmLength,
) -> TmStatus {
    let Some(g) = group.as_ref() else { return invalid("null group handle") };
    if out.is_null() {
        return invalid("null output pointer");
    }
    if gens.is_null() && gen_count > 0 {
        return invalid("null generator array");
    }
    let gens = std::slice::from_raw_parts(gens, gen_count);
    let weights = if weights.is_null() {
        None
    } else {
        Some(std::slice::from_raw_parts(weights, gen_count))
    };
    match word_length(&g.inner, gens, weights) {
        Ok(l) => {
            *out = Box::into_raw(Box::new(TmLength {
                group: Arc::clone(&g.inner),
                inner: l,
            }));
            TmStatus::TmStatusOk
        }
        Err(e) => fail(&e),
    }
}

/// Length function from explicit per-element values (`INFINITY` allowed).
///
/// # Safety
/// `group` must be valid; `values` must point to one readable double per
/// group element.
#[no_mangle]
pub unsafe extern "C" fn tm_length_values(
    group: *const TmGroup,
    values: *const f64,
    value_count: usize,
    out: *mut *mut TmLength,
) -> TmStatus {
    let Some(g) = group.as_ref() else { return invalid("null group handle") };
    if out.is_null() {
        return invalid("null output pointer");
    }
    if values.is_null() {
        return invalid("null value array");
    }
    if value_count != g.inner.order() {
        return invalid("value count does not match the group order");
    }
    let values = std::slice::from_raw_parts(values, value_count).to_vec();
    match LengthFunction::new(&g.inner, values) {
        Ok(l) => {
            *out = Box::into_raw(Box::new(TmLength {
                group: Arc::clone(&g.inner),
                inner: l,
            }));
            TmStatus::TmStatusOk
        }
        Err(e) => fail(&e),
    }
}

/// Value of the length at one element (`INFINITY` for elements outside the
/// support).
///
/// # Safety
/// `length` must be valid; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn tm_length_value(
    length: *const TmLength,
    element: usize,
    out: *mut f64,
) -> TmStatus {
    let Some(l) = length.as_ref() else { return invalid("null length handle") };
    if out.is_null() {
        return invalid("null output pointer");
    }
    if element >= l.group.order() {
        return invalid("element index out of range");
    }
    *out = l.inner.value(element);
    TmStatus::TmStatusOk
}

/// Release a length handle (null is ignored).
///
/// # Safety
/// `length` must have come from a `tm_length_*` constructor and not have
/// been freed already.
#[no_mangle]
pub unsafe extern "C" fn tm_length_free(length: *mut TmLength) {
    if !length.is_null() {
        drop(Box::from_raw(length));
    }
}

/// Run the double-dual stability check and produce a report handle.
///
/// # Safety
/// `group` and `length` must be valid handles built from the same group;
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn tm_stability(
    group: *const TmGroup,
    length: *const TmLength,
    metric: TmMetric,
    family: TmFamily,
    out: *mut *mut TmReport,
) -> TmStatus {
    let Some(g) = group.as_ref() else { return invalid("null group handle") };
    let Some(l) = length.as_ref() else { return invalid("null length handle") };
    if out.is_null() {
        return invalid("null output pointer");
    }
    if !Arc::ptr_eq(&g.inner, &l.group) {
        return invalid("the length was built for a different group handle");
    }
    match stability_check(&g.inner, &l.inner, metric.into(), family.into()) {
        Ok(report) => {
            let json = serde_json::to_string_pretty(&report)
                .ok()
                .and_then(|s| CString::new(s).ok())
                .unwrap_or_default();
            *out = Box::into_raw(Box::new(TmReport { inner: report, json }));
            TmStatus::TmStatusOk
        }
        Err(e) => fail(&e),
    }
}

/// 1 when the report's verdict is stable, 0 otherwise (or for null).
///
/// # Safety
/// `report` must be a valid report handle or null.
#[no_mangle]
pub unsafe extern "C" fn tm_report_stable(report: *const TmReport) -> i32 {
    report.as_ref().map_or(0, |r| r.inner.stable as i32)
}

/// Largest value of `length - double dual` over the group.
///
/// # Safety
/// `report` must be a valid report handle or null.
#[no_mangle]
pub unsafe extern "C" fn tm_report_max_defect(report: *const TmReport) -> f64 {
    report.as_ref().map_or(f64::NAN, |r| r.inner.max_defect)
}

/// Double-dual value at one element.
///
/// # Safety
/// `report` must be valid; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn tm_report_double_dual(
    report: *const TmReport,
    element: usize,
    out: *mut f64,
) -> TmStatus {
    let Some(r) = report.as_ref() else { return invalid("null report handle") };
    if out.is_null() {
        return invalid("null output pointer");
    }
    let Some(row) = r.inner.elements.get(element) else {
        return invalid("element index out of range");
    };
    *out = row.ldd;
    TmStatus::TmStatusOk
}

/// Full report as a JSON string; the pointer stays valid until the report
/// handle is freed.
///
/// # Safety
/// `report` must be a valid report handle or null.
#[no_mangle]
pub unsafe extern "C" fn tm_report_to_json(report: *const TmReport) -> *const c_char {
    report.as_ref().map_or(ptr::null(), |r| r.json.as_ptr())
}

/// Release a report handle (null is ignored).
///
/// # Safety
/// `report` must have come from `tm_stability` and not have been freed
/// already.
#[no_mangle]
pub unsafe extern "C" fn tm_report_free(report: *mut TmReport) {
    if !report.is_null() {
        drop(Box::from_raw(report));
    }
}

unsafe fn matrix_from_interleaved(data: *const f64, dim: usize) -> Option<CMatrix> {
    if data.is_null() || dim == 0 {
        return None;
    }
    let slice = std::slice::from_raw_parts(data, 2 * dim * dim);
    Some(CMatrix::from_fn(dim, dim, |r, c| {
        let k = 2 * (c * dim + r);
        num_complex::Complex64::new(slice[k], slice[k + 1])
    }))
}

/// Distance between two `dim x dim` unitaries given as interleaved
/// column-major complex arrays (see the module docs for the layout).
///
/// # Safety
/// `u` and `v` must each point to `2 * dim * dim` readable doubles; `out`
/// must be writable.
#[no_mangle]
pub unsafe extern "C" fn tm_unitary_distance(
    metric: TmMetric,
    u: *const f64,
    v: *const f64,
    dim: usize,
    out: *mut f64,
) -> TmStatus {
    if out.is_null() {
        return invalid("null output pointer");
    }
    let (Some(mu), Some(mv)) = (
        matrix_from_interleaved(u, dim),
        matrix_from_interleaved(v, dim),
    ) else {
        return invalid("null matrix data or zero dimension");
    };
    let check = |m: &CMatrix| -> bool {
        let defect = (m.adjoint() * m - CMatrix::identity(dim, dim))
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max);
        defect <= 1e-8
    };
    if !check(&mu) || !check(&mv) {
        set_error("input matrix is not unitary within 1e-8");
        return TmStatus::TmStatusInvalidInput;
    }
    *out = distance(metric.into(), &mu, &mv);
    TmStatus::TmStatusOk
}

/// Closed-form dual length `sqrt(<p, A^{-1} p>)` of a character `p` against
/// the quadratic form `A` (row-major `n x n`, symmetric positive definite).
///
/// # Safety
/// `form` must point to `n * n` readable doubles; `p` to `n`; `out` must be
/// writable.
#[no_mangle]
pub unsafe extern "C" fn tm_lattice_dual_length(
    form: *const f64,
    p: *const f64,
    n: usize,
    out: *mut f64,
) -> TmStatus {
    if form.is_null() || p.is_null() || out.is_null() {
        return invalid("null pointer argument");
    }
    if n == 0 {
        return invalid("dimension must be at least 1");
    }
    let form = std::slice::from_raw_parts(form, n * n);
    let p = std::slice::from_raw_parts(p, n);
    let a = nalgebra::DMatrix::from_fn(n, n, |i, j| form[i * n + j]);
    let q = match QuadraticLattice::new(a, nalgebra::DMatrix::identity(n, n)) {
        Ok(q) => q,
        Err(e) => return fail(&e),
    };
    match lattice_dual_length(&q, p) {
        Ok(v) => {
            *out = v;
            TmStatus::TmStatusOk
        }
        Err(e) => fail(&e),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::ffi::CStr;

    #[test]
    fn cyclic_group_round_trip() {
        let g = tm_group_cyclic(4);
        assert!(!g.is_null());
        unsafe {
            assert_eq!(tm_group_order(g), 4);
            tm_group_free(g);
        }
    }

    #[test]
    fn invalid_group_sets_an_error() {
        let g = tm_group_cyclic(0);
        assert!(g.is_null());
        let msg = unsafe { CStr::from_ptr(tm_last_error()) };
        assert!(!msg.to_bytes().is_empty());
    }

    #[test]
    fn z4_stability_through_the_c_surface() {
        unsafe {
            let g = tm_group_cyclic(4);
            let gens = [1usize];
            let mut l: *mut TmLength = ptr::null_mut();
            assert_eq!(
                tm_length_word(g, gens.as_ptr(), ptr::null(), 1, &mut l),
                TmStatus::TmStatusOk
            );
            let mut v = 0.0;
            assert_eq!(tm_length_value(l, 2, &mut v), TmStatus::TmStatusOk);
            assert_eq!(v, 2.0);

            let mut report: *mut TmReport = ptr::null_mut();
            assert_eq!(
                tm_stability(
                    g,
                    l,
                    TmMetric::TmMetricArclength,
                    TmFamily::TmFamilyIrrepsOnly,
                    &mut report
                ),
                TmStatus::TmStatusOk
            );
            assert_eq!(tm_report_stable(report), 1);
            assert!(tm_report_max_defect(report).abs() < 1e-9);
            let mut ldd = 0.0;
            assert_eq!(tm_report_double_dual(report, 2, &mut ldd), TmStatus::TmStatusOk);
            assert!((ldd - 2.0).abs() < 1e-9);
            let json = CStr::from_ptr(tm_report_to_json(report));
            assert!(json.to_str().unwrap().contains("\"stable\": true"));

            tm_report_free(report);
            tm_length_free(l);
            tm_group_free(g);
        }
    }

    #[test]
    fn mismatched_handles_are_rejected() {
        unsafe {
            let g4 = tm_group_cyclic(4);
            let g6 = tm_group_cyclic(6);
            let gens = [1usize];
            let mut l: *mut TmLength = ptr::null_mut();
            assert_eq!(
                tm_length_word(g4, gens.as_ptr(), ptr::null(), 1, &mut l),
                TmStatus::TmStatusOk
            );
            let mut report: *mut TmReport = ptr::null_mut();
            assert_eq!(
                tm_stability(
                    g6,
                    l,
                    TmMetric::TmMetricArclength,
                    TmFamily::TmFamilyDirectSums,
                    &mut report
                ),
                TmStatus::TmStatusInvalidArgument
            );
            assert!(report.is_null());
            tm_length_free(l);
            tm_group_free(g4);
            tm_group_free(g6);
        }
    }

    #[test]
    fn unitary_distance_on_interleaved_buffers() {
        // 1x1 unitaries: 1 and i, arclength distance pi/2.
        let u = [1.0, 0.0];
        let v = [0.0, 1.0];
        let mut out = 0.0;
        unsafe {
            assert_eq!(
                tm_unitary_distance(
                    TmMetric::TmMetricArclength,
                    u.as_ptr(),
                    v.as_ptr(),
                    1,
                    &mut out
                ),
                TmStatus::TmStatusOk
            );
        }
        assert!((out - std::f64::consts::FRAC_PI_2).abs() < 1e-12);

        // Non-unitary input is rejected.
        let bad = [2.0, 0.0];
        unsafe {
            assert_eq!(
                tm_unitary_distance(
                    TmMetric::TmMetricOperator,
                    bad.as_ptr(),
                    v.as_ptr(),
                    1,
                    &mut out
                ),
                TmStatus::TmStatusInvalidInput
            );
        }
    }

    #[test]
    fn lattice_dual_length_matches_the_closed_form() {
        let form = [4.0, 0.0, 0.0, 1.0];
        let p = [2.0, 0.0];
        let mut out = 0.0;
        unsafe {
            assert_eq!(
                tm_lattice_dual_length(form.as_ptr(), p.as_ptr(), 2, &mut out),
                TmStatus::TmStatusOk
            );
        }
        assert!((out - 1.0).abs() < 1e-12);

        // Indefinite form rejected with an error message.
        let bad = [1.0, 0.0, 0.0, -1.0];
        unsafe {
            assert_eq!(
                tm_lattice_dual_length(bad.as_ptr(), p.as_ptr(), 2, &mut out),
                TmStatus::TmStatusInvalidInput
            );
            let msg = CStr::from_ptr(tm_last_error()).to_str().unwrap();
            assert!(msg.contains("positive definite"), "{msg}");
        }
    }

    #[test]
    fn version_is_a_readable_string() {
        let v = unsafe { CStr::from_ptr(tm_version()) };
        assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
    }
}
