//! C ABI over the `chaingraph` core.
//!
//! Models are opaque [`CgModel`] handles created by [`cg_model_parse`] or
//! [`cg_model_load`] and released with [`cg_model_free`]. Every fallible
//! call returns a [`CgStatus`]; on failure [`cg_last_error`] describes the
//! problem for the calling thread. Strings handed out by the library are
//! NUL-terminated UTF-8 and must be released with [`cg_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use chaingraph::decompose::{chain_components, component_subgraphs};
use chaingraph::factorize::Format;
use chaingraph::lang::{self, Resolved};
use chaingraph::markov::{implies_ci, CiQuery};
use chaingraph::plates::{factorize_plated, Binding};
use chaingraph::{GraphError, PlateError};

/// Result codes. Values 1 to 3 match the command-line exit codes.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CgStatus {
    Ok = 0,
    InvalidModel = 1,
    Usage = 2,
    Resource = 3,
    NullArgument = 10,
    InvalidUtf8 = 11,
    Io = 12,
    Internal = 13,
}

/// Output notation for [`cg_factorize`].
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CgFormat {
    Text = 0,
    Latex = 1,
}

/// Opaque handle to a resolved model.
pub struct CgModel {
    resolved: Resolved,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).ok());
}

struct Fail(CgStatus, String);

impl From<GraphError> for Fail {
    fn from(e: GraphError) -> Self {
        let code = match e {
            GraphError::TooLarge { .. } => CgStatus::Resource,
            GraphError::Query(_) => CgStatus::Usage,
            _ => CgStatus::InvalidModel,
        };
        Fail(code, e.to_string())
    }
}

impl From<PlateError> for Fail {
    fn from(e: PlateError) -> Self {
        match e {
            PlateError::Graph(g) => g.into(),
            PlateError::Unbound(_)
            | PlateError::ZeroCardinality(_)
            | PlateError::RaggedMismatch { .. }
            | PlateError::RaggedTopLevel(_) => Fail(CgStatus::Usage, e.to_string()),
            _ => Fail(CgStatus::InvalidModel, e.to_string()),
        }
    }
}

/// Runs `f`, converting failures and panics into a status and last error.
fn guard(f: impl FnOnce() -> Result<(), Fail>) -> CgStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            CgStatus::Ok
        }
        Ok(Err(Fail(code, msg))) => {
            set_error(msg);
            code
        }
        Err(_) => {
            set_error("internal error");
            CgStatus::Internal
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(Fail(CgStatus::NullArgument, format!("{what} is null")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Fail(CgStatus::InvalidUtf8, format!("{what} is not valid UTF-8")))
}

unsafe fn model_arg<'a>(m: *const CgModel) -> Result<&'a CgModel, Fail> {
    m.as_ref().ok_or(Fail(CgStatus::NullArgument, "model is null".into()))
}

unsafe fn put_string(out: *mut *mut c_char, s: String) -> Result<(), Fail> {
    if out.is_null() {
        return Err(Fail(CgStatus::NullArgument, "output pointer is null".into()));
    }
    let c = CString::new(s).map_err(|_| Fail(CgStatus::Internal, "output contains NUL".into()))?;
    *out = c.into_raw();
    Ok(())
}

fn parse_model(src: &str) -> Result<Box<CgModel>, Fail> {
    match lang::load(src) {
        Ok(resolved) => Ok(Box::new(CgModel { resolved })),
        Err(diags) => Err(Fail(
            CgStatus::InvalidModel,
            diags.iter().map(|d| d.report("<input>", src)).collect::<String>(),
        )),
    }
}

/// Parses model source text into a new handle stored in `*out`.
///
/// # Safety
/// `src` must be a valid NUL-terminated string and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn cg_model_parse(src: *const c_char, out: *mut *mut CgModel) -> CgStatus {
    guard(|| {
        let src = str_arg(src, "source")?;
        if out.is_null() {
            return Err(Fail(CgStatus::NullArgument, "output pointer is null".into()));
        }
        *out = Box::into_raw(parse_model(src)?);
        Ok(())
    })
}

/// Reads and parses the model file at `path`.
///
/// # Safety
/// `path` must be a valid NUL-terminated string and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn cg_model_load(path: *const c_char, out: *mut *mut CgModel) -> CgStatus {
    guard(|| {
        let path = str_arg(path, "path")?;
        if out.is_null() {
            return Err(Fail(CgStatus::NullArgument, "output pointer is null".into()));
        }
        let src = std::fs::read_to_string(path).map_err(|e| Fail(CgStatus::Io, format!("{path}: {e}")))?;
        *out = Box::into_raw(parse_model(&src)?);
        Ok(())
    })
}

/// Releases a model handle. Null is ignored.
///
/// # Safety
/// `m` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn cg_model_free(m: *mut CgModel) {
    if !m.is_null() {
        drop(Box::from_raw(m));
    }
}

/// Number of nodes in the template graph.
///
/// # Safety
/// `m` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn cg_node_count(m: *const CgModel, out: *mut usize) -> CgStatus {
    guard(|| {
        let m = model_arg(m)?;
        if out.is_null() {
            return Err(Fail(CgStatus::NullArgument, "output pointer is null".into()));
        }
        *out = m.resolved.model.graph.len();
        Ok(())
    })
}

fn blocks(names: Vec<Vec<&str>>) -> String {
    names.into_iter().map(|b| b.join(" ") + "\n").collect()
}

/// Chain components, one per line with space-separated names.
///
/// # Safety
/// `m` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn cg_components(m: *const CgModel, out: *mut *mut c_char) -> CgStatus {
    guard(|| {
        let g = &model_arg(m)?.resolved.model.graph;
        put_string(out, blocks(chain_components(g).names(g)))
    })
}

/// Component subgraphs, one per line with space-separated names.
///
/// # Safety
/// `m` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn cg_subgraphs(m: *const CgModel, out: *mut *mut c_char) -> CgStatus {
    guard(|| {
        let g = &model_arg(m)?.resolved.model.graph;
        put_string(out, blocks(component_subgraphs(g).names(g)))
    })
}

/// Renders the factorization. `bindings` is null or a `;`-separated list
/// of `SYM=INT[,INT...]` assignments; with bindings the plates are
/// expanded, without them plated models render symbolically.
///
/// # Safety
/// `m` must be a live handle, `bindings` null or NUL-terminated, `out`
/// writable.
#[no_mangle]
pub unsafe extern "C" fn cg_factorize(
    m: *const CgModel,
    format: CgFormat,
    bindings: *const c_char,
    out: *mut *mut c_char,
) -> CgStatus {
    guard(|| {
        let m = model_arg(m)?;
        let binding = if bindings.is_null() {
            None
        } else {
            let text = str_arg(bindings, "bindings")?;
            let mut b = Binding::new();
            for a in text.split(';').map(str::trim).filter(|a| !a.is_empty()) {
                b.parse_assignment(a).map_err(|e| Fail(CgStatus::Usage, e))?;
            }
            Some(b)
        };
        let format = match format {
            CgFormat::Text => Format::Text,
            CgFormat::Latex => Format::Latex,
        };
        let f = factorize_plated(&m.resolved.model, binding.as_ref())?;
        put_string(out, f.render(format))
    })
}

/// Decides an independence statement such as `a,b _||_ c | d`, storing
/// the answer in `*out`.
///
/// # Safety
/// `m` must be a live handle, `query` NUL-terminated, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn cg_query(m: *const CgModel, query: *const c_char, out: *mut bool) -> CgStatus {
    guard(|| {
        let m = model_arg(m)?;
        let text = str_arg(query, "query")?;
        if out.is_null() {
            return Err(Fail(CgStatus::NullArgument, "output pointer is null".into()));
        }
        let g = &m.resolved.model.graph;
        let q = CiQuery::parse(g, text).map_err(|e| Fail(CgStatus::Usage, e.to_string()))?;
        *out = implies_ci(g, &q)?;
        Ok(())
    })
}

/// Graphviz DOT text for the model, plates drawn as clusters.
///
/// # Safety
/// `m` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn cg_dot(m: *const CgModel, out: *mut *mut c_char) -> CgStatus {
    guard(|| {
        let m = model_arg(m)?;
        put_string(out, lang::to_dot(&m.resolved.model, &m.resolved.name))
    })
}

/// Message for the last failed call on this thread, or null. The pointer
/// stays valid until the next call into the library on this thread.
#[no_mangle]
pub extern "C" fn cg_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Releases a string returned by the library. Null is ignored.
///
/// # Safety
/// `s` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn cg_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
