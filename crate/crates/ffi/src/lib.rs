//! C interface to `linsys`.
//!
//! Functions return a [`LinsysStatus`]; on failure a message is available
//! from [`linsys_last_error`] on the same thread. Systems are opaque handles
//! released with [`linsys_system_free`]; strings returned by the library are
//! released with [`linsys_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use linsys::bounds::{c_tilde, lambda, star_inequality, upper_bound_strong, LambdaQuery};
use linsys::dominance::{reduction_sequence, Strategy};
use linsys::oracle::{max_free, Freeness, SearchOptions};
use linsys::structure::{build_hypergraph, is_irreducible, parameters, SystemParameters};
use linsys::{catalog, parse_system, reduce_mod_p, Error, ZSystem};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LinsysStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Syntax = 3,
    InvalidArgument = 4,
    NotPrime = 5,
    Unbalanced = 6,
    Reducible = 7,
    NotDominant = 8,
    TooLarge = 9,
    GuardExceeded = 10,
    Precondition = 11,
    NotFound = 12,
    Panic = 13,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LinsysFreeness {
    Strong = 0,
    Weak = 1,
}

/// Opaque system handle.
pub struct LinsysSystem {
    inner: ZSystem,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct LinsysParameters {
    pub r1: usize,
    pub r2: usize,
    pub l: usize,
    pub m_max: usize,
    pub irreducible: bool,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct LinsysBound {
    pub value: f64,
    pub tolerance: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct LinsysSearchResult {
    pub value: usize,
    pub nodes_explored: u64,
    pub exhaustive: bool,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(err: &Error) -> LinsysStatus {
    match err {
        Error::Syntax { .. } | Error::VariableIndex { .. } | Error::CoefficientOverflow { .. } | Error::ZeroEquation { .. } | Error::NoEquations => {
            LinsysStatus::Syntax
        }
        Error::TooLarge { .. } => LinsysStatus::TooLarge,
        Error::NotPrime(_) => LinsysStatus::NotPrime,
        Error::Unbalanced { .. } => LinsysStatus::Unbalanced,
        Error::Reducible => LinsysStatus::Reducible,
        Error::NotDominant { .. } => LinsysStatus::NotDominant,
        Error::InvalidArgument(_) => LinsysStatus::InvalidArgument,
        Error::GuardExceeded { .. } => LinsysStatus::GuardExceeded,
        Error::Precondition(_) => LinsysStatus::Precondition,
    }
}

fn guard(body: impl FnOnce() -> Result<(), (LinsysStatus, String)>) -> LinsysStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => LinsysStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            LinsysStatus::Panic
        }
    }
}

trait Lift<T> {
    fn lift(self) -> Result<T, (LinsysStatus, String)>;
}

impl<T> Lift<T> for linsys::Result<T> {
    fn lift(self) -> Result<T, (LinsysStatus, String)> {
        self.map_err(|e| (status_of(&e), e.to_string()))
    }
}

fn null(what: &str) -> (LinsysStatus, String) {
    (LinsysStatus::NullPointer, format!("{what} is null"))
}

unsafe fn read_str<'a>(p: *const c_char, what: &str) -> Result<&'a str, (LinsysStatus, String)> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p).to_str().map_err(|_| (LinsysStatus::InvalidUtf8, format!("{what} is not UTF-8")))
}

unsafe fn system_ref<'a>(s: *const LinsysSystem) -> Result<&'a ZSystem, (LinsysStatus, String)> {
    s.as_ref().map(|s| &s.inner).ok_or_else(|| null("system"))
}

unsafe fn write_out<T>(out: *mut T, value: T, what: &str) -> Result<(), (LinsysStatus, String)> {
    if out.is_null() {
        return Err(null(what));
    }
    out.write(value);
    Ok(())
}

/// Message for the last failure on this thread, or null. Valid until the
/// next failing call on the same thread.
#[no_mangle]
pub extern "C" fn linsys_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Parses `.lineq` text into a new handle.
///
/// # Safety
/// `text` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn linsys_system_parse(text: *const c_char, out: *mut *mut LinsysSystem) -> LinsysStatus {
    guard(|| {
        let text = read_str(text, "text")?;
        let inner = parse_system(text).lift()?;
        write_out(out, Box::into_raw(Box::new(LinsysSystem { inner })), "out")
    })
}

/// Looks up a built-in system such as `SW` or `STAR3`.
///
/// # Safety
/// `name` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn linsys_system_builtin(name: *const c_char, out: *mut *mut LinsysSystem) -> LinsysStatus {
    guard(|| {
        let name = read_str(name, "name")?;
        let inner = catalog::by_name(name).ok_or((LinsysStatus::NotFound, format!("no built-in system named {name}")))?;
        write_out(out, Box::into_raw(Box::new(LinsysSystem { inner })), "out")
    })
}

/// # Safety
/// `system` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn linsys_system_free(system: *mut LinsysSystem) {
    if !system.is_null() {
        drop(Box::from_raw(system));
    }
}

/// Number of variables, or 0 for a null handle.
///
/// # Safety
/// `system` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn linsys_system_variable_count(system: *const LinsysSystem) -> usize {
    system.as_ref().map_or(0, |s| s.inner.variable_count())
}

/// Number of equations, or 0 for a null handle.
///
/// # Safety
/// `system` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn linsys_system_equation_count(system: *const LinsysSystem) -> usize {
    system.as_ref().map_or(0, |s| s.inner.equation_count())
}

/// Canonical text of the system; free with `linsys_string_free`.
///
/// # Safety
/// `system` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn linsys_system_render(system: *const LinsysSystem, out: *mut *mut c_char) -> LinsysStatus {
    guard(|| {
        let s = system_ref(system)?;
        let c = CString::new(s.render()).map_err(|_| (LinsysStatus::InvalidUtf8, "rendering contains NUL".into()))?;
        write_out(out, c.into_raw(), "out")
    })
}

/// # Safety
/// `s` must be null or a string returned by this library.
#[no_mangle]
pub unsafe extern "C" fn linsys_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// # Safety
/// `system` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn linsys_system_parameters(system: *const LinsysSystem, out: *mut LinsysParameters) -> LinsysStatus {
    guard(|| {
        let s = system_ref(system)?;
        let h = build_hypergraph(s);
        let q = parameters(&h);
        let value = LinsysParameters { r1: q.r1, r2: q.r2, l: q.l, m_max: q.m_max, irreducible: is_irreducible(&h).irreducible };
        write_out(out, value, "out")
    })
}

/// `Λ_{m,α,h}` with its tolerance.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn linsys_lambda(m: u64, alpha: f64, h: u64, out: *mut LinsysBound) -> LinsysStatus {
    guard(|| {
        let r = lambda(&LambdaQuery::new(m, alpha, h).lift()?);
        write_out(out, LinsysBound { value: r.value, tolerance: r.tolerance }, "out")
    })
}

/// `C̃_{(r1,r2,L,m)}(d)` with its tolerance.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn linsys_c_tilde(r1: u64, r2: u64, l: u64, m: u64, d: u64, out: *mut LinsysBound) -> LinsysStatus {
    guard(|| {
        let r = c_tilde(r1, r2, l, m, d).lift()?;
        write_out(out, LinsysBound { value: r.value, tolerance: r.tolerance }, "out")
    })
}

/// Writes `r1/2 + r2/e - L` to `margin` and whether it is positive to `holds`.
///
/// # Safety
/// `holds` and `margin` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn linsys_star_inequality(r1: usize, r2: usize, l: usize, holds: *mut bool, margin: *mut f64) -> LinsysStatus {
    guard(|| {
        let v = star_inequality(&SystemParameters { r1, r2, l, m_max: 1 });
        write_out(holds, v.holds, "holds")?;
        write_out(margin, v.margin, "margin")
    })
}

/// Upper bound on strongly free subsets of `F_p^n`; `value` is the bound
/// and `tolerance` that of its base.
///
/// # Safety
/// `system` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn linsys_upper_bound_strong(system: *const LinsysSystem, p: u64, n: u32, out: *mut LinsysBound) -> LinsysStatus {
    guard(|| {
        let s = system_ref(system)?;
        let t = reduce_mod_p(s, p).lift()?.system;
        let ub = upper_bound_strong(&t, n).lift()?;
        write_out(out, LinsysBound { value: ub.bound, tolerance: ub.base.tolerance }, "out")
    })
}

/// Largest dominant coefficient of the greedy reduction sequence and whether
/// it ends in the one-variable empty system. Returns `NotDominant` when no
/// equation is dominant.
///
/// # Safety
/// `system` must be a live handle; `b_tilde` and `reaches_empty_one` valid pointers.
#[no_mangle]
pub unsafe extern "C" fn linsys_reduction_b_tilde(system: *const LinsysSystem, b_tilde: *mut u64, reaches_empty_one: *mut bool) -> LinsysStatus {
    guard(|| {
        let s = system_ref(system)?;
        let trace = reduction_sequence(s, Strategy::Greedy)
            .lift()?
            .ok_or((LinsysStatus::NotDominant, "no dominant subsystem".to_string()))?;
        write_out(b_tilde, trace.b_tilde, "b_tilde")?;
        write_out(reaches_empty_one, trace.reaches_empty_one, "reaches_empty_one")
    })
}

/// Exact largest free subset of `F_p^n`; `workers = 0` uses the default pool.
///
/// # Safety
/// `system` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn linsys_max_free(
    system: *const LinsysSystem,
    p: u64,
    n: usize,
    kind: LinsysFreeness,
    workers: usize,
    out: *mut LinsysSearchResult,
) -> LinsysStatus {
    guard(|| {
        let s = system_ref(system)?;
        let t = reduce_mod_p(s, p).lift()?.system;
        let kind = match kind {
            LinsysFreeness::Strong => Freeness::Strong,
            LinsysFreeness::Weak => Freeness::Weak,
        };
        let r = max_free(&t, n, kind, &SearchOptions { workers, ..SearchOptions::default() }).lift()?;
        write_out(out, LinsysSearchResult { value: r.value, nodes_explored: r.nodes_explored, exhaustive: r.exhaustive }, "out")
    })
}
