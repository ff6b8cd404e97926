//! C interface to freelo.
//!
//! Objects are opaque handles released with their `_free` function. Strings returned through
//! `char **out` are owned by the caller and released with [`freelo_string_free`]. Every call
//! returns a [`FreeloStatus`]; on failure [`freelo_last_error`] describes what went wrong.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::Arc;

use freelo::config::{parse_group, product_oracle, x_oracle, GroupChoice};
use freelo::group::{BallSpec, FreeProduct, Group};
use freelo::order::{check_axioms, DynOracle, Sign};
use freelo::pl::PLMap;
use freelo::xgroup::XGroup;
use freelo::{rational, Error};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FreeloStatus {
    Ok = 0,
    /// The computation ran but a checked property failed; the report says which.
    Failed = 1,
    InvalidInput = 2,
    CapExceeded = 3,
    NullArgument = 4,
    /// Any other error raised by the library, such as a violated precondition.
    Error = 5,
    Panic = 6,
}

/// A group handle.
pub struct FreeloGroup(GroupChoice);

enum OracleInner {
    Product(Arc<FreeProduct>, DynOracle<FreeProduct>),
    X(Arc<XGroup>, DynOracle<XGroup>),
}

/// An ordering handle. It keeps its group alive on its own.
pub struct FreeloOracle(OracleInner);

/// A piecewise-linear homeomorphism of the line with rational breakpoints.
pub struct FreeloPlMap(PLMap);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(e: &Error) -> FreeloStatus {
    match e {
        Error::UnknownGenerator(_)
        | Error::Parse(_)
        | Error::Invalid(_)
        | Error::Unsupported(_)
        | Error::ValidityExceeded { .. }
        | Error::NonMonotone(_) => FreeloStatus::InvalidInput,
        Error::CapExceeded { .. } => FreeloStatus::CapExceeded,
        _ => FreeloStatus::Error,
    }
}

struct Fail(FreeloStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(status_of(&e), e.to_string())
    }
}

fn guard(f: impl FnOnce() -> Result<FreeloStatus, Fail>) -> FreeloStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(s)) => s,
        Ok(Err(Fail(s, msg))) => {
            set_error(&msg);
            s
        }
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_error(&format!("panic: {msg}"));
            FreeloStatus::Panic
        }
    }
}

unsafe fn arg_str<'a>(p: *const c_char, name: &str) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(Fail(FreeloStatus::NullArgument, format!("`{name}` is null")));
    }
    CStr::from_ptr(p).to_str().map_err(|_| Fail(FreeloStatus::InvalidInput, format!("`{name}` is not UTF-8")))
}

unsafe fn arg_ref<'a, T>(p: *const T, name: &str) -> Result<&'a T, Fail> {
    p.as_ref().ok_or_else(|| Fail(FreeloStatus::NullArgument, format!("`{name}` is null")))
}

unsafe fn put<T>(out: *mut T, v: T) -> Result<(), Fail> {
    if out.is_null() {
        return Err(Fail(FreeloStatus::NullArgument, "output pointer is null".into()));
    }
    out.write(v);
    Ok(())
}

unsafe fn put_string(out: *mut *mut c_char, s: String) -> Result<(), Fail> {
    let c = CString::new(s).map_err(|_| Fail(FreeloStatus::Error, "string contains NUL".into()))?;
    put(out, c.into_raw())
}

/// Message for the last failed call on this thread; empty if none. Valid until the next call.
#[no_mangle]
pub extern "C" fn freelo_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

#[no_mangle]
pub extern "C" fn freelo_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// # Safety
/// `s` must come from this library or be null.
#[no_mangle]
pub unsafe extern "C" fn freelo_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Parses a group name such as `F2`, `Z^2*Z` or `X`.
///
/// # Safety
/// `name` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn freelo_group_new(name: *const c_char, out: *mut *mut FreeloGroup) -> FreeloStatus {
    guard(|| {
        let g = parse_group(arg_str(name, "name")?)?;
        put(out, Box::into_raw(Box::new(FreeloGroup(g))))?;
        Ok(FreeloStatus::Ok)
    })
}

/// # Safety
/// `g` must come from [`freelo_group_new`] or be null.
#[no_mangle]
pub unsafe extern "C" fn freelo_group_free(g: *mut FreeloGroup) {
    if !g.is_null() {
        drop(Box::from_raw(g));
    }
}

/// Number of generators, or 0 for a null handle.
///
/// # Safety
/// `g` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn freelo_group_rank(g: *const FreeloGroup) -> usize {
    match g.as_ref() {
        Some(FreeloGroup(GroupChoice::Product(p))) => p.rank(),
        Some(FreeloGroup(GroupChoice::X(x))) => x.rank(),
        None => 0,
    }
}

/// Writes the normal form of `word`, e.g. `a.a^-1.b^2` gives `b^2`.
///
/// # Safety
/// Pointers must be valid; `out` receives a string to release with [`freelo_string_free`].
#[no_mangle]
pub unsafe extern "C" fn freelo_word_normalize(
    g: *const FreeloGroup,
    word: *const c_char,
    out: *mut *mut c_char,
) -> FreeloStatus {
    guard(|| {
        let w = arg_str(word, "word")?;
        let s = match &arg_ref(g, "group")?.0 {
            GroupChoice::Product(p) => p.format(&p.parse(w)?),
            GroupChoice::X(x) => x.format(&x.parse(w)?),
        };
        put_string(out, s)?;
        Ok(FreeloStatus::Ok)
    })
}

/// Builds an ordering from a spec such as `magnus`, `lex:perm=1,0`, `magnus:neg=a:conj=b` or `xsign`.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn freelo_oracle_new(
    g: *const FreeloGroup,
    spec: *const c_char,
    out: *mut *mut FreeloOracle,
) -> FreeloStatus {
    guard(|| {
        let spec = arg_str(spec, "spec")?;
        let inner = match &arg_ref(g, "group")?.0 {
            GroupChoice::Product(p) => OracleInner::Product(p.clone(), product_oracle(p, spec)?),
            GroupChoice::X(x) => OracleInner::X(x.clone(), x_oracle(x, spec)?),
        };
        put(out, Box::into_raw(Box::new(FreeloOracle(inner))))?;
        Ok(FreeloStatus::Ok)
    })
}

/// # Safety
/// `o` must come from [`freelo_oracle_new`] or be null.
#[no_mangle]
pub unsafe extern "C" fn freelo_oracle_free(o: *mut FreeloOracle) {
    if !o.is_null() {
        drop(Box::from_raw(o));
    }
}

/// Writes -1, 0 or +1 to `out`.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn freelo_oracle_sign(o: *const FreeloOracle, word: *const c_char, out: *mut i8) -> FreeloStatus {
    guard(|| {
        let w = arg_str(word, "word")?;
        let s = match &arg_ref(o, "oracle")?.0 {
            OracleInner::Product(g, o) => o.sign(&g.parse(w)?)?,
            OracleInner::X(g, o) => o.sign(&g.parse(w)?)?,
        };
        put(
            out,
            match s {
                Sign::Neg => -1,
                Sign::Zero => 0,
                Sign::Pos => 1,
            },
        )?;
        Ok(FreeloStatus::Ok)
    })
}

/// Checks the cone axioms on the ball of `radius` in all generators. Returns `Failed` when a
/// violation was found; `report` (may be null) receives the JSON report either way.
///
/// # Safety
/// Pointers must be valid; `report` may be null.
#[no_mangle]
pub unsafe extern "C" fn freelo_check_axioms(
    o: *const FreeloOracle,
    radius: u32,
    report: *mut *mut c_char,
) -> FreeloStatus {
    guard(|| {
        let r = match &arg_ref(o, "oracle")?.0 {
            OracleInner::Product(g, o) => check_axioms(&**o, &BallSpec::full(&**g, radius))?,
            OracleInner::X(g, o) => check_axioms(&**o, &BallSpec::full(&**g, radius))?,
        };
        if !report.is_null() {
            put_string(report, serde_json::to_string(&r).expect("reports serialize"))?;
        }
        Ok(if r.ok() { FreeloStatus::Ok } else { FreeloStatus::Failed })
    })
}

/// Parses `{"left_slope": "1", "points": [["0", "0"], ...], "right_slope": "1"}`.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn freelo_plmap_parse(json: *const c_char, out: *mut *mut FreeloPlMap) -> FreeloStatus {
    guard(|| {
        let v: serde_json::Value = serde_json::from_str(arg_str(json, "json")?)
            .map_err(|e| Fail(FreeloStatus::InvalidInput, format!("map json: {e}")))?;
        put(out, Box::into_raw(Box::new(FreeloPlMap(PLMap::from_json(&v)?))))?;
        Ok(FreeloStatus::Ok)
    })
}

/// # Safety
/// `f` must come from this library or be null.
#[no_mangle]
pub unsafe extern "C" fn freelo_plmap_free(f: *mut FreeloPlMap) {
    if !f.is_null() {
        drop(Box::from_raw(f));
    }
}

/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn freelo_plmap_to_json(f: *const FreeloPlMap, out: *mut *mut c_char) -> FreeloStatus {
    guard(|| {
        put_string(out, arg_ref(f, "map")?.0.to_json().to_string())?;
        Ok(FreeloStatus::Ok)
    })
}

/// Evaluates at an exact rational such as `-3/4`; the result is written in the same form.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn freelo_plmap_eval(
    f: *const FreeloPlMap,
    x: *const c_char,
    out: *mut *mut c_char,
) -> FreeloStatus {
    guard(|| {
        let x = rational::parse(arg_str(x, "x")?)?;
        put_string(out, rational::format(&arg_ref(f, "map")?.0.eval(&x)))?;
        Ok(FreeloStatus::Ok)
    })
}

/// `out = f ∘ g`.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn freelo_plmap_compose(
    f: *const FreeloPlMap,
    g: *const FreeloPlMap,
    out: *mut *mut FreeloPlMap,
) -> FreeloStatus {
    guard(|| {
        let h = arg_ref(f, "f")?.0.compose(&arg_ref(g, "g")?.0);
        put(out, Box::into_raw(Box::new(FreeloPlMap(h))))?;
        Ok(FreeloStatus::Ok)
    })
}

/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn freelo_plmap_inverse(f: *const FreeloPlMap, out: *mut *mut FreeloPlMap) -> FreeloStatus {
    guard(|| {
        let h = arg_ref(f, "f")?.0.inverse();
        put(out, Box::into_raw(Box::new(FreeloPlMap(h))))?;
        Ok(FreeloStatus::Ok)
    })
}

/// Runs any command-line subcommand given as JSON, e.g.
/// `{"command": "perturb", "group": "Z*Z", "n": 2}`. `report` receives the JSON report.
/// Returns `Failed` when the report's `ok` is false.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn freelo_run_json(command: *const c_char, report: *mut *mut c_char) -> FreeloStatus {
    guard(|| {
        let out = freelo::cli::run_json(arg_str(command, "command")?)?;
        put_string(report, serde_json::to_string(&out.report).expect("reports serialize"))?;
        Ok(if out.ok { FreeloStatus::Ok } else { FreeloStatus::Failed })
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn status_mapping() {
        assert_eq!(status_of(&Error::Parse("x".into())), FreeloStatus::InvalidInput);
        assert_eq!(status_of(&Error::CapExceeded { what: "ball", cap: 1 }), FreeloStatus::CapExceeded);
        assert_eq!(status_of(&Error::Precondition("x".into())), FreeloStatus::Error);
    }

    #[test]
    fn panics_are_caught() {
        assert_eq!(guard(|| panic!("boom")), FreeloStatus::Panic);
        let msg = unsafe { CStr::from_ptr(freelo_last_error()) }.to_str().unwrap();
        assert_eq!(msg, "panic: boom");
    }
}
