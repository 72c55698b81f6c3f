//! C interface to `invar`.
//!
//! Tables cross the boundary as opaque [`InvarTable`] handles. Every
//! function returns an [`InvarStatus`]; on failure a message is available
//! from [`invar_last_error`] until the next call on the same thread.
//! Strings returned by the library must be released with
//! [`invar_string_free`], tables with [`invar_table_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use invar::arrangement;
use invar::io::{self, ArrangementFile, FanFile};
use invar::sstables::{self, SpectralError};
use invar::table::{self, InvariantTable, TableKind};
use invar::toric;

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum InvarStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    /// Malformed JSON or data rejected by validation.
    InvalidInput = 3,
    /// The request has no solution (e.g. a non-projective fan).
    Infeasible = 4,
    /// Cell index outside the table.
    OutOfRange = 5,
    /// An unknown cell was read or the table is incomplete.
    Unknown = 6,
    SearchLimit = 7,
    Panic = 8,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum InvarTableKind {
    Lyubeznik = 0,
    CechDeRham = 1,
}

/// Opaque table handle.
pub struct InvarTable {
    inner: InvariantTable,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).ok());
}

struct Fail(InvarStatus, String);

type FfiResult<T> = Result<T, Fail>;

fn input<E: std::fmt::Display>(e: E) -> Fail {
    Fail(InvarStatus::InvalidInput, e.to_string())
}

fn guard(f: impl FnOnce() -> FfiResult<()>) -> InvarStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => InvarStatus::Ok,
        Ok(Err(Fail(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            InvarStatus::Panic
        }
    }
}

unsafe fn read_str<'a>(s: *const c_char) -> FfiResult<&'a str> {
    if s.is_null() {
        return Err(Fail(InvarStatus::NullPointer, "null string".into()));
    }
    CStr::from_ptr(s)
        .to_str()
        .map_err(|_| Fail(InvarStatus::InvalidUtf8, "string is not UTF-8".into()))
}

unsafe fn table_ref<'a>(t: *const InvarTable) -> FfiResult<&'a InvariantTable> {
    t.as_ref()
        .map(|h| &h.inner)
        .ok_or_else(|| Fail(InvarStatus::NullPointer, "null table".into()))
}

unsafe fn write_out<T>(out: *mut T, v: T) -> FfiResult<()> {
    if out.is_null() {
        return Err(Fail(InvarStatus::NullPointer, "null output pointer".into()));
    }
    out.write(v);
    Ok(())
}

unsafe fn emit_table(out: *mut *mut InvarTable, t: InvariantTable) -> FfiResult<()> {
    if out.is_null() {
        return Err(Fail(InvarStatus::NullPointer, "null output pointer".into()));
    }
    out.write(Box::into_raw(Box::new(InvarTable { inner: t })));
    Ok(())
}

fn spectral(e: SpectralError) -> Fail {
    match e {
        SpectralError::SearchLimit(_) => Fail(InvarStatus::SearchLimit, e.to_string()),
        SpectralError::Table(table::TableError::HasUnknowns) => {
            Fail(InvarStatus::Unknown, e.to_string())
        }
        other => input(other),
    }
}

fn toric_fail(e: toric::ToricError) -> Fail {
    match e {
        toric::ToricError::NotProjective => Fail(InvarStatus::Infeasible, e.to_string()),
        other => input(other),
    }
}

fn load_fan(json: &str) -> FfiResult<toric::Fan3> {
    let (fan, _) = FanFile::parse(json).and_then(|f| f.to_fan()).map_err(input)?;
    Ok(fan)
}

fn load_components(json: &str) -> FfiResult<Vec<arrangement::AffineSubspace>> {
    ArrangementFile::parse(json)
        .and_then(|f| f.components())
        .map_err(input)
}

/// Message for the last failed call on this thread, or null. The pointer
/// stays valid until the next library call on the same thread.
#[no_mangle]
pub extern "C" fn invar_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(std::ptr::null(), |s| s.as_ptr()))
}

/// Closed-form λ-table for an ideal of dimension `dim` (0, 1 or 2); `a` is
/// the number of connected components of the punctured spectrum.
///
/// # Safety
/// `out` must be a valid pointer to writable storage.
#[no_mangle]
pub unsafe extern "C" fn invar_tables_small(dim: usize, a: u64, out: *mut *mut InvarTable) -> InvarStatus {
    guard(|| {
        let t = table::canonical_small_tables(dim, a).map_err(input)?;
        emit_table(out, t)
    })
}

/// ρ-table of the arrangement described by the JSON document `json`.
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn invar_arrangement_cdr(json: *const c_char, out: *mut *mut InvarTable) -> InvarStatus {
    guard(|| {
        let comps = load_components(read_str(json)?)?;
        let lattice = arrangement::build_lattice(&comps).map_err(input)?;
        emit_table(out, arrangement::cdr_table(&lattice))
    })
}

/// λ-table of an arrangement whose components have dimension at most 2.
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn invar_arrangement_lyubeznik(
    json: *const c_char,
    out: *mut *mut InvarTable,
) -> InvarStatus {
    guard(|| {
        let comps = load_components(read_str(json)?)?;
        emit_table(out, arrangement::lyubeznik_dim2(&comps).map_err(input)?)
    })
}

/// λ-table of the cone over a projective toric 3-fold. A complete but
/// non-projective fan yields `Infeasible`.
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn invar_fan_lyubeznik(json: *const c_char, out: *mut *mut InvarTable) -> InvarStatus {
    guard(|| {
        let fan = load_fan(read_str(json)?)?;
        emit_table(out, toric::toric_lyubeznik(&fan).map_err(toric_fail)?)
    })
}

/// # Safety
/// `json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn invar_fan_picard_rank(json: *const c_char, out: *mut usize) -> InvarStatus {
    guard(|| {
        let fan = load_fan(read_str(json)?)?;
        write_out(out, toric::picard_rank(&fan).map_err(toric_fail)?)
    })
}

/// Parses a table document `{"kind", "dim", "entries", ...}`.
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn invar_table_from_json(json: *const c_char, out: *mut *mut InvarTable) -> InvarStatus {
    guard(|| {
        let (t, _) = io::table_from_json(read_str(json)?).map_err(input)?;
        emit_table(out, t)
    })
}

/// # Safety
/// `table` must be null or a handle returned by this library and not yet
/// freed.
#[no_mangle]
pub unsafe extern "C" fn invar_table_free(table: *mut InvarTable) {
    if !table.is_null() {
        drop(Box::from_raw(table));
    }
}

/// # Safety
/// `table` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn invar_table_dim(table: *const InvarTable, out: *mut usize) -> InvarStatus {
    guard(|| write_out(out, table_ref(table)?.dim()))
}

/// # Safety
/// `table` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn invar_table_kind(table: *const InvarTable, out: *mut InvarTableKind) -> InvarStatus {
    guard(|| {
        let k = match table_ref(table)?.kind() {
            TableKind::Lyubeznik => InvarTableKind::Lyubeznik,
            TableKind::CechDeRham => InvarTableKind::CechDeRham,
        };
        write_out(out, k)
    })
}

/// Entry `(p, q)`. Unknown cells return `Unknown` and leave `out` alone.
///
/// # Safety
/// `table` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn invar_table_entry(
    table: *const InvarTable,
    p: usize,
    q: usize,
    out: *mut u64,
) -> InvarStatus {
    guard(|| {
        let t = table_ref(table)?;
        if p > t.dim() || q > t.dim() {
            return Err(Fail(InvarStatus::OutOfRange, format!("cell ({p},{q}) outside dim {}", t.dim())));
        }
        match t.get(p, q) {
            Some(v) => write_out(out, v),
            None => Err(Fail(InvarStatus::Unknown, format!("cell ({p},{q}) is unknown"))),
        }
    })
}

/// `Σ (-1)^{p+q} T_{p,q}`.
///
/// # Safety
/// `table` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn invar_table_euler_sum(table: *const InvarTable, out: *mut i64) -> InvarStatus {
    guard(|| {
        let s = table::euler_sum(table_ref(table)?).map_err(|e| Fail(InvarStatus::Unknown, e.to_string()))?;
        write_out(out, s)
    })
}

/// Whether some choice of differentials makes a complete λ-table
/// converge. Structural violations count as not converging.
///
/// # Safety
/// `table` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn invar_table_check_convergence(table: *const InvarTable, out: *mut bool) -> InvarStatus {
    guard(|| {
        let t = table_ref(table)?;
        let diags = table::validate_lambda(t, None).map_err(input)?;
        let ok = diags.is_empty() && sstables::check_convergence_lambda(t).map_err(spectral)?.feasible;
        write_out(out, ok)
    })
}

/// Serializes the table; release the result with [`invar_string_free`].
///
/// # Safety
/// `table` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn invar_table_to_json(table: *const InvarTable, out: *mut *mut c_char) -> InvarStatus {
    guard(|| {
        let s = io::table_to_json(table_ref(table)?, &[]);
        let c = CString::new(s).map_err(input)?;
        write_out(out, c.into_raw())
    })
}

/// # Safety
/// `s` must be null or a string returned by this library and not yet freed.
#[no_mangle]
pub unsafe extern "C" fn invar_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
