//! C interface to `pvqed`.
//!
//! Every function returns a [`PvqedStatus`]; results go through out
//! pointers. On failure a description is available from
//! [`pvqed_last_error_message`] on the same thread. Handles are opaque and
//! must be released with the matching `_free` function.
//!
//! Pass `INFINITY` as `beta` for zero temperature. A null `cfg` selects the
//! default quadrature settings.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use pvqed::fields::{load_field, local_energy, FieldGrid};
use pvqed::lagrangian::{f0_pv, ft_pv, total_density};
use pvqed::response::{m0_response, mt_response};
use pvqed::{Error, IntegralResult, PauliVillarsScheme, QuadratureConfig};

/// Opaque Pauli-Villars scheme.
pub struct PvqedScheme(PauliVillarsScheme);

/// Opaque magnetic field grid.
pub struct PvqedField(FieldGrid);

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PvqedStatus {
    Ok = 0,
    /// Null pointer or invalid string argument.
    InvalidArgument = 1,
    DegenerateMasses = 2,
    Domain = 3,
    /// Non-finite integrand or truncated series.
    Convergence = 4,
    InvalidConfig = 5,
    /// Malformed or inconsistent field file.
    Parse = 6,
    Io = 7,
    /// A Rust panic was caught at the boundary.
    Internal = 8,
}

#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct PvqedQuadConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_depth: u32,
    /// 15 or 21.
    pub points_per_panel: u32,
    pub max_panels: u32,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct PvqedEstimate {
    pub value: f64,
    pub error_estimate: f64,
    pub panels_used: u64,
    pub converged: bool,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct PvqedDensity {
    pub f0: f64,
    pub ft: f64,
    pub total: f64,
    pub error_estimate: f64,
    pub extrapolated: bool,
    pub converged: bool,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct PvqedEnergy {
    pub energy: f64,
    pub cells_clipped: u64,
    pub converged: bool,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(e: &Error) -> PvqedStatus {
    match e {
        Error::DegenerateMasses(_) => PvqedStatus::DegenerateMasses,
        Error::Domain(_) | Error::Resample(_) => PvqedStatus::Domain,
        Error::NonFiniteEvaluation { .. } | Error::SeriesTruncation { .. } => PvqedStatus::Convergence,
        Error::InvalidConfig(_) => PvqedStatus::InvalidConfig,
        Error::Parse { .. }
        | Error::NonUniformGrid(_)
        | Error::IncompleteGrid { .. }
        | Error::GridTooSmall(_) => PvqedStatus::Parse,
        Error::Io { .. } => PvqedStatus::Io,
    }
}

struct Fail(PvqedStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(status_of(&e), e.to_string())
    }
}

fn null(what: &str) -> Fail {
    Fail(PvqedStatus::InvalidArgument, format!("{what} is null"))
}

fn guard<F: FnOnce() -> Result<(), Fail>>(f: F) -> PvqedStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error(String::new());
            PvqedStatus::Ok
        }
        Ok(Err(Fail(s, m))) => {
            set_error(m);
            s
        }
        Err(_) => {
            set_error("internal panic".into());
            PvqedStatus::Internal
        }
    }
}

unsafe fn config(cfg: *const PvqedQuadConfig) -> Result<QuadratureConfig, Fail> {
    let q = match cfg.as_ref() {
        None => QuadratureConfig::default(),
        Some(c) => QuadratureConfig {
            rel_tol: c.rel_tol,
            abs_tol: c.abs_tol,
            max_depth: c.max_depth,
            points_per_panel: c.points_per_panel as usize,
            max_panels: c.max_panels as usize,
        },
    };
    q.validate()?;
    Ok(q)
}

unsafe fn scheme<'a>(s: *const PvqedScheme) -> Result<&'a PauliVillarsScheme, Fail> {
    s.as_ref().map(|s| &s.0).ok_or_else(|| null("scheme"))
}

unsafe fn put<T>(out: *mut T, v: T) -> Result<(), Fail> {
    if out.is_null() {
        return Err(null("output pointer"));
    }
    out.write(v);
    Ok(())
}

fn estimate(r: IntegralResult) -> PvqedEstimate {
    PvqedEstimate {
        value: r.value,
        error_estimate: r.error_estimate,
        panels_used: r.panels_used as u64,
        converged: r.converged,
    }
}

/// Default quadrature settings.
#[no_mangle]
pub extern "C" fn pvqed_quad_config_default() -> PvqedQuadConfig {
    let d = QuadratureConfig::default();
    PvqedQuadConfig {
        rel_tol: d.rel_tol,
        abs_tol: d.abs_tol,
        max_depth: d.max_depth,
        points_per_panel: d.points_per_panel as u32,
        max_panels: d.max_panels as u32,
    }
}

/// Message describing the most recent failed call on this thread; empty
/// after a successful call. The pointer stays valid until the next call
/// into this library on the same thread.
#[no_mangle]
pub extern "C" fn pvqed_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn pvqed_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Builds a scheme with `0 < m0 < m1 < m2`.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn pvqed_scheme_new(m0: f64, m1: f64, m2: f64, out: *mut *mut PvqedScheme) -> PvqedStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("output pointer"));
        }
        out.write(ptr::null_mut());
        let s = PauliVillarsScheme::new(m0, m1, m2)?;
        out.write(Box::into_raw(Box::new(PvqedScheme(s))));
        Ok(())
    })
}

/// # Safety
/// `scheme` must be null or a handle from `pvqed_scheme_new` not yet freed.
#[no_mangle]
pub unsafe extern "C" fn pvqed_scheme_free(scheme: *mut PvqedScheme) {
    if !scheme.is_null() {
        drop(Box::from_raw(scheme));
    }
}

/// Writes `c0, c1, c2` to `out[0..3]`.
///
/// # Safety
/// `scheme` must be a live handle; `out` must point to three doubles.
#[no_mangle]
pub unsafe extern "C" fn pvqed_scheme_coeffs(scheme: *const PvqedScheme, out: *mut f64) -> PvqedStatus {
    guard(|| {
        let c = self::scheme(scheme)?.coeffs();
        if out.is_null() {
            return Err(null("output pointer"));
        }
        ptr::copy_nonoverlapping(c.as_ptr(), out, 3);
        Ok(())
    })
}

/// # Safety
/// `scheme` must be a live handle; `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn pvqed_scheme_lambda(scheme: *const PvqedScheme, out: *mut f64) -> PvqedStatus {
    guard(|| put(out, self::scheme(scheme)?.lambda()))
}

/// Zero-temperature response `M⁰(q)`.
///
/// # Safety
/// `scheme` must be a live handle; `cfg` null or valid; `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn pvqed_m0_response(
    scheme: *const PvqedScheme,
    q: f64,
    cfg: *const PvqedQuadConfig,
    out: *mut PvqedEstimate,
) -> PvqedStatus {
    guard(|| {
        let r = m0_response(q, self::scheme(scheme)?, &config(cfg)?)?;
        put(out, estimate(r))
    })
}

/// Thermal response `Mᵀ(q,β)`.
///
/// # Safety
/// As [`pvqed_m0_response`].
#[no_mangle]
pub unsafe extern "C" fn pvqed_mt_response(
    scheme: *const PvqedScheme,
    q: f64,
    beta: f64,
    cfg: *const PvqedQuadConfig,
    out: *mut PvqedEstimate,
) -> PvqedStatus {
    guard(|| {
        let r = mt_response(q, beta, self::scheme(scheme)?, &config(cfg)?)?;
        put(out, estimate(r))
    })
}

/// Vacuum energy density `f⁰_PV(a)` at field strength `a = |B|`.
///
/// # Safety
/// As [`pvqed_m0_response`].
#[no_mangle]
pub unsafe extern "C" fn pvqed_f0_pv(
    scheme: *const PvqedScheme,
    a: f64,
    cfg: *const PvqedQuadConfig,
    out: *mut PvqedEstimate,
) -> PvqedStatus {
    guard(|| {
        let r = f0_pv(a, self::scheme(scheme)?, &config(cfg)?)?;
        put(out, estimate(r))
    })
}

/// Thermal energy density `fᵀ_PV(a,β)`.
///
/// # Safety
/// As [`pvqed_m0_response`].
#[no_mangle]
pub unsafe extern "C" fn pvqed_ft_pv(
    scheme: *const PvqedScheme,
    a: f64,
    beta: f64,
    cfg: *const PvqedQuadConfig,
    out: *mut PvqedEstimate,
) -> PvqedStatus {
    guard(|| {
        let r = ft_pv(a, beta, self::scheme(scheme)?, &config(cfg)?)?;
        put(out, estimate(r))
    })
}

/// `f⁰_PV + fᵀ_PV` with its parts.
///
/// # Safety
/// As [`pvqed_m0_response`].
#[no_mangle]
pub unsafe extern "C" fn pvqed_total_density(
    scheme: *const PvqedScheme,
    a: f64,
    beta: f64,
    cfg: *const PvqedQuadConfig,
    out: *mut PvqedDensity,
) -> PvqedStatus {
    guard(|| {
        let s = self::scheme(scheme)?;
        let p = total_density(a, beta, s, &config(cfg)?)?;
        put(
            out,
            PvqedDensity {
                f0: p.f0,
                ft: p.ft,
                total: p.total,
                error_estimate: p.err,
                extrapolated: pvqed::lagrangian::is_extrapolated(a, s),
                converged: p.converged,
            },
        )
    })
}

/// Loads a field grid from a CSV file with header `x,y,z,Bx,By,Bz`.
///
/// # Safety
/// `path` must be a NUL-terminated UTF-8 string; `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn pvqed_field_load(path: *const c_char, out: *mut *mut PvqedField) -> PvqedStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("output pointer"));
        }
        out.write(ptr::null_mut());
        if path.is_null() {
            return Err(null("path"));
        }
        let p = CStr::from_ptr(path)
            .to_str()
            .map_err(|_| Fail(PvqedStatus::InvalidArgument, "path is not valid UTF-8".into()))?;
        let g = load_field(p)?;
        out.write(Box::into_raw(Box::new(PvqedField(g))));
        Ok(())
    })
}

/// # Safety
/// `field` must be null or a handle from `pvqed_field_load` not yet freed.
#[no_mangle]
pub unsafe extern "C" fn pvqed_field_free(field: *mut PvqedField) {
    if !field.is_null() {
        drop(Box::from_raw(field));
    }
}

/// Grid dimensions `nx, ny, nz` written to `out[0..3]`.
///
/// # Safety
/// `field` must be a live handle; `out` must point to three `size_t`.
#[no_mangle]
pub unsafe extern "C" fn pvqed_field_dims(field: *const PvqedField, out: *mut usize) -> PvqedStatus {
    guard(|| {
        let f = field.as_ref().ok_or_else(|| null("field"))?;
        if out.is_null() {
            return Err(null("output pointer"));
        }
        ptr::copy_nonoverlapping(f.0.dims().as_ptr(), out, 3);
        Ok(())
    })
}

/// Local-density energy `Σ (f⁰_PV + fᵀ_PV)(|B|) h³` over the grid.
///
/// # Safety
/// `field` and `scheme` must be live handles; `cfg` null or valid; `out`
/// valid for writes.
#[no_mangle]
pub unsafe extern "C" fn pvqed_local_energy(
    field: *const PvqedField,
    scheme: *const PvqedScheme,
    beta: f64,
    cfg: *const PvqedQuadConfig,
    out: *mut PvqedEnergy,
) -> PvqedStatus {
    guard(|| {
        let f = field.as_ref().ok_or_else(|| null("field"))?;
        let e = local_energy(&f.0, beta, self::scheme(scheme)?, &config(cfg)?)?;
        put(
            out,
            PvqedEnergy {
                energy: e.energy,
                cells_clipped: e.cells_clipped as u64,
                converged: e.converged,
            },
        )
    })
}
