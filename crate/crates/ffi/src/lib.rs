//! C ABI over `kripkekit`.
//!
//! Structures cross the boundary as opaque handles created from JSON
//! documents and released with the matching `_free` function. Every call
//! returns a [`KkStatus`]; on failure the message is available from
//! [`kk_last_error`] until the next call on the same thread. Strings
//! returned through out-parameters are owned by the caller and must be
//! released with [`kk_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::sync::Arc;

use kripkekit::category::{cauchy_completion, CategoryFile, FinCategory};
use kripkekit::formula::parse_formula;
use kripkekit::io::{self, Format, Model2dFile, ModelFile};
use kripkekit::kripke::{world_names, Evaluator, KripkeModel};
use kripkekit::profunctor::{proofs, TwoDimModel};
use kripkekit::verify::{run_suite, VerifyOptions};
use kripkekit::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KkStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidUtf8 = 2,
    Json = 3,
    Schema = 4,
    Parse = 5,
    InvalidStructure = 6,
    UnknownName = 7,
    NotCauchyComplete = 8,
    UnknownSuite = 9,
    Io = 10,
    Panic = 11,
}

/// A Kripke model: a poset frame, an optional bimodule and a valuation.
pub struct KkModel {
    inner: KripkeModel,
}

/// A presheaf model over a Cauchy-complete finite category.
pub struct KkModel2d {
    inner: TwoDimModel,
}

/// A finite category.
pub struct KkCategory {
    inner: Arc<FinCategory>,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).expect("nul bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> KkStatus {
    match e {
        Error::Json { .. } => KkStatus::Json,
        Error::Schema { .. } => KkStatus::Schema,
        Error::Parse { .. } => KkStatus::Parse,
        Error::UnknownElement(_)
        | Error::UnknownWorld(_)
        | Error::UnknownVariable(_)
        | Error::UnknownObject(_)
        | Error::UnknownArrow(_) => KkStatus::UnknownName,
        Error::BaseNotCauchyComplete => KkStatus::NotCauchyComplete,
        Error::UnknownSuite(_) => KkStatus::UnknownSuite,
        Error::Io { .. } => KkStatus::Io,
        _ => KkStatus::InvalidStructure,
    }
}

struct Fail(KkStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(status_of(&e), e.to_string())
    }
}

fn guard(body: impl FnOnce() -> Result<(), Fail>) -> KkStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => KkStatus::Ok,
        Ok(Err(Fail(status, msg))) => {
            set_error(&msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            KkStatus::Panic
        }
    }
}

unsafe fn text<'a>(p: *const c_char, what: &str) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(Fail(KkStatus::NullArgument, format!("`{what}` is null")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Fail(KkStatus::InvalidUtf8, format!("`{what}` is not UTF-8")))
}

unsafe fn handle<'a, T>(p: *const T, what: &str) -> Result<&'a T, Fail> {
    p.as_ref()
        .ok_or_else(|| Fail(KkStatus::NullArgument, format!("`{what}` is null")))
}

fn out<T>(p: *mut T, what: &str) -> Result<(), Fail> {
    if p.is_null() {
        Err(Fail(KkStatus::NullArgument, format!("`{what}` is null")))
    } else {
        Ok(())
    }
}

fn c_string(s: String) -> *mut c_char {
    CString::new(s).expect("JSON output has no nul bytes").into_raw()
}

/// The message of the last failed call on this thread, or null.
/// The pointer stays valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn kk_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Releases a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn kk_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Library version as a static string.
#[no_mangle]
pub extern "C" fn kk_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Parses a Kripke model document. With `close`, the relation is replaced
/// by the least bimodule containing it.
///
/// # Safety
/// `json` must be a nul-terminated string; `out_model` must be writable.
#[no_mangle]
pub unsafe extern "C" fn kk_model_from_json(json: *const c_char, close: bool, out_model: *mut *mut KkModel) -> KkStatus {
    guard(|| {
        out(out_model, "out_model")?;
        let value = io::parse_json(text(json, "json")?)?;
        let inner = io::decode::<ModelFile>(Format::Model, value)?.build(close)?;
        *out_model = Box::into_raw(Box::new(KkModel { inner }));
        Ok(())
    })
}

/// # Safety
/// `model` must come from [`kk_model_from_json`] or be null.
#[no_mangle]
pub unsafe extern "C" fn kk_model_free(model: *mut KkModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Does `formula` hold at `world`? Both semantics are computed and must agree.
///
/// # Safety
/// Pointers must be valid; strings nul-terminated.
#[no_mangle]
pub unsafe extern "C" fn kk_model_check(
    model: *const KkModel,
    world: *const c_char,
    formula: *const c_char,
    out_holds: *mut bool,
) -> KkStatus {
    guard(|| {
        out(out_holds, "out_holds")?;
        let m = &handle(model, "model")?.inner;
        let world = text(world, "world")?;
        let phi = parse_formula(text(formula, "formula")?)?;
        let w = m.frame().index(world).map_err(|_| Error::UnknownWorld(world.into()))?;
        *out_holds = Evaluator::new(m).check(&phi)? >> w & 1 == 1;
        Ok(())
    })
}

/// The truth set of `formula` as a JSON array of world names.
///
/// # Safety
/// Pointers must be valid; free the result with [`kk_string_free`].
#[no_mangle]
pub unsafe extern "C" fn kk_model_interp(
    model: *const KkModel,
    formula: *const c_char,
    out_json: *mut *mut c_char,
) -> KkStatus {
    guard(|| {
        out(out_json, "out_json")?;
        let m = &handle(model, "model")?.inner;
        let phi = parse_formula(text(formula, "formula")?)?;
        let worlds = world_names(m.frame(), Evaluator::new(m).check(&phi)?);
        *out_json = c_string(serde_json::to_string(&worlds).expect("serializable"));
        Ok(())
    })
}

/// Parses a presheaf model document. Fails with
/// `KK_STATUS_NOT_CAUCHY_COMPLETE` when the base needs completing first.
///
/// # Safety
/// `json` must be a nul-terminated string; `out_model` must be writable.
#[no_mangle]
pub unsafe extern "C" fn kk_model2d_from_json(json: *const c_char, out_model: *mut *mut KkModel2d) -> KkStatus {
    guard(|| {
        out(out_model, "out_model")?;
        let value = io::parse_json(text(json, "json")?)?;
        let inner = io::decode::<Model2dFile>(Format::Model2d, value)?.build()?;
        *out_model = Box::into_raw(Box::new(KkModel2d { inner }));
        Ok(())
    })
}

/// # Safety
/// `model` must come from [`kk_model2d_from_json`] or be null.
#[no_mangle]
pub unsafe extern "C" fn kk_model2d_free(model: *mut KkModel2d) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// The proofs of `formula` at object `world`: their number, and optionally
/// their labels as a JSON array (pass null for `out_json` to skip).
///
/// # Safety
/// Pointers must be valid; free any returned string with [`kk_string_free`].
#[no_mangle]
pub unsafe extern "C" fn kk_model2d_proofs(
    model: *const KkModel2d,
    world: *const c_char,
    formula: *const c_char,
    out_count: *mut usize,
    out_json: *mut *mut c_char,
) -> KkStatus {
    guard(|| {
        out(out_count, "out_count")?;
        let m = &handle(model, "model")?.inner;
        let phi = parse_formula(text(formula, "formula")?)?;
        let witnesses = proofs(m, &phi, text(world, "world")?)?;
        *out_count = witnesses.len();
        if !out_json.is_null() {
            *out_json = c_string(serde_json::to_string(&witnesses).expect("serializable"));
        }
        Ok(())
    })
}

/// # Safety
/// `json` must be a nul-terminated string; `out_category` must be writable.
#[no_mangle]
pub unsafe extern "C" fn kk_category_from_json(json: *const c_char, out_category: *mut *mut KkCategory) -> KkStatus {
    guard(|| {
        out(out_category, "out_category")?;
        let value = io::parse_json(text(json, "json")?)?;
        let file: CategoryFile = io::decode(Format::Category, value)?;
        let inner = Arc::new(FinCategory::from_file(&file)?);
        *out_category = Box::into_raw(Box::new(KkCategory { inner }));
        Ok(())
    })
}

/// # Safety
/// `category` must come from this library or be null.
#[no_mangle]
pub unsafe extern "C" fn kk_category_free(category: *mut KkCategory) {
    if !category.is_null() {
        drop(Box::from_raw(category));
    }
}

/// Object and arrow counts.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn kk_category_size(
    category: *const KkCategory,
    out_objects: *mut usize,
    out_arrows: *mut usize,
) -> KkStatus {
    guard(|| {
        out(out_objects, "out_objects")?;
        out(out_arrows, "out_arrows")?;
        let c = &handle(category, "category")?.inner;
        *out_objects = c.num_objects();
        *out_arrows = c.num_arrows();
        Ok(())
    })
}

/// Whether every idempotent splits.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn kk_category_is_cauchy_complete(category: *const KkCategory, out_complete: *mut bool) -> KkStatus {
    guard(|| {
        out(out_complete, "out_complete")?;
        *out_complete = handle(category, "category")?.inner.is_cauchy_complete();
        Ok(())
    })
}

/// The Karoubi envelope, as a new handle.
///
/// # Safety
/// Pointers must be valid; free the result with [`kk_category_free`].
#[no_mangle]
pub unsafe extern "C" fn kk_category_complete(category: *const KkCategory, out_category: *mut *mut KkCategory) -> KkStatus {
    guard(|| {
        out(out_category, "out_category")?;
        let c = &handle(category, "category")?.inner;
        let inner = cauchy_completion(c).category;
        *out_category = Box::into_raw(Box::new(KkCategory { inner }));
        Ok(())
    })
}

/// The category as a JSON document in the input format.
///
/// # Safety
/// Pointers must be valid; free the result with [`kk_string_free`].
#[no_mangle]
pub unsafe extern "C" fn kk_category_to_json(category: *const KkCategory, out_json: *mut *mut c_char) -> KkStatus {
    guard(|| {
        out(out_json, "out_json")?;
        let c = &handle(category, "category")?.inner;
        *out_json = c_string(serde_json::to_string(&c.to_file()).expect("serializable"));
        Ok(())
    })
}

/// Runs a verification suite. `out_passed` is true when every case
/// passed; the full report, seed included, goes to `out_json` if non-null.
///
/// # Safety
/// Pointers must be valid; free any returned string with [`kk_string_free`].
#[no_mangle]
pub unsafe extern "C" fn kk_verify(
    suite: *const c_char,
    size_cap: usize,
    seed: u64,
    count: usize,
    out_passed: *mut bool,
    out_json: *mut *mut c_char,
) -> KkStatus {
    guard(|| {
        out(out_passed, "out_passed")?;
        let opts = VerifyOptions { size_cap, seed, count };
        let report = run_suite(text(suite, "suite")?, &opts)?;
        *out_passed = report.all_passed();
        if !out_json.is_null() {
            *out_json = c_string(serde_json::to_string(&report).expect("serializable"));
        }
        Ok(())
    })
}
