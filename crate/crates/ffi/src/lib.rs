//! C ABI over the `tagmap` library.
//!
//! Graphs, token tables and embedding sets cross the boundary as opaque
//! handles. The caller owns every handle it receives and releases it with
//! the matching `*_free` function. Fallible calls return a [`TagmapStatus`];
//! after a failure, [`tagmap_last_error`] describes it for the calling thread.
//!
//! Strings are NUL-terminated UTF-8. Output pointers are written only on
//! success.

use std::cell::RefCell;
use std::collections::BTreeSet;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use tagmap::compose::{build_tag_embeddings, Strategy, TokenTable};
use tagmap::embedding::EmbeddingSet;
use tagmap::io::vectors::{load_embeddings, load_token_table, save_embeddings};
use tagmap::ontology::{load_graph, ConceptGraph, RelationClasses};
use tagmap::retrofit::{check_feasible, direct_solve_with, jacobi_retrofit, DegreeMode, SolverParams};
use tagmap::Error;

/// Result of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TagmapStatus {
    Ok = 0,
    /// A required pointer argument was null.
    NullArgument = 1,
    InvalidUtf8 = 2,
    Io = 3,
    /// Malformed input file.
    Parse = 4,
    Config = 5,
    Validation = 6,
    /// A named tag, token or concept was not found.
    Lookup = 7,
    /// Some graph component has no known vector.
    Infeasible = 8,
    Singular = 9,
    Eval = 10,
    /// The library panicked; the handles passed in should not be reused.
    Panic = 11,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TagmapStrategy {
    Avg = 0,
    Sif = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TagmapSolver {
    Jacobi = 0,
    Direct = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct TagmapRetrofitParams {
    pub solver: TagmapSolver,
    /// Jacobi stopping threshold on the largest coordinate change.
    pub tol: f64,
    pub max_iter: usize,
    /// Count only relatedness neighbours in `1/degree` weights.
    pub relatedness_only_degree: bool,
}

/// Typed concept graph.
pub struct TagmapGraph(ConceptGraph);

/// Token vectors with frequency ranks.
pub struct TagmapTokenTable(TokenTable);

/// Vectors keyed by tag or concept id.
pub struct TagmapEmbeddings(EmbeddingSet);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

struct Failure {
    status: TagmapStatus,
    message: String,
}

impl Failure {
    fn new(status: TagmapStatus, message: impl Into<String>) -> Self {
        Failure { status, message: message.into() }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let message = e.to_string();
        let mut inner = &e;
        while let Error::File { source, .. } = inner {
            inner = source;
        }
        let status = match inner {
            Error::Parse { .. } | Error::Format { .. } | Error::Json(_) => TagmapStatus::Parse,
            Error::Config(_) => TagmapStatus::Config,
            Error::Validation(_) | Error::EmptyComposition => TagmapStatus::Validation,
            Error::Lookup { .. } => TagmapStatus::Lookup,
            Error::Infeasible { .. } => TagmapStatus::Infeasible,
            Error::Singular(_) => TagmapStatus::Singular,
            Error::Eval(_) => TagmapStatus::Eval,
            Error::Io(_) | Error::File { .. } => TagmapStatus::Io,
        };
        Failure { status, message }
    }
}

fn set_last_error(message: String) {
    let c = CString::new(message.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(c));
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> TagmapStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => TagmapStatus::Ok,
        Ok(Err(fail)) => {
            set_last_error(fail.message);
            fail.status
        }
        Err(panic) => {
            let msg = panic
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| panic.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_last_error(format!("internal error: {msg}"));
            TagmapStatus::Panic
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(Failure::new(TagmapStatus::NullArgument, format!("`{what}` is null")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Failure::new(TagmapStatus::InvalidUtf8, format!("`{what}` is not valid UTF-8")))
}

unsafe fn ref_arg<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| Failure::new(TagmapStatus::NullArgument, format!("`{what}` is null")))
}

/// A slice from a pointer and length; a null pointer is allowed for length 0.
unsafe fn slice_arg<'a, T>(p: *const T, len: usize, what: &str) -> Result<&'a [T], Failure> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(Failure::new(TagmapStatus::NullArgument, format!("`{what}` is null")));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn write_out<T>(out: *mut T, value: T, what: &str) -> Result<(), Failure> {
    if out.is_null() {
        return Err(Failure::new(TagmapStatus::NullArgument, format!("`{what}` is null")));
    }
    out.write(value);
    Ok(())
}

fn check_out<T>(out: *mut T, what: &str) -> Result<(), Failure> {
    if out.is_null() {
        Err(Failure::new(TagmapStatus::NullArgument, format!("`{what}` is null")))
    } else {
        Ok(())
    }
}

/// Message of the last failed call on this thread, or null if none.
/// The pointer stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn tagmap_last_error() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static string.
#[no_mangle]
pub extern "C" fn tagmap_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Default solver settings: Jacobi, tol 1e-6, 1000 sweeps, all neighbours.
#[no_mangle]
pub extern "C" fn tagmap_retrofit_params_default() -> TagmapRetrofitParams {
    let d = SolverParams::default();
    TagmapRetrofitParams {
        solver: TagmapSolver::Jacobi,
        tol: d.tol,
        max_iter: d.max_iter,
        relatedness_only_degree: d.degree_mode == DegreeMode::RelatednessOnly,
    }
}

// ---- graphs ----

/// Loads a `source<TAB>relation<TAB>target` edge list. `relations` names a
/// `relation=class` file and may be null for the built-in classes.
///
/// # Safety
/// String arguments must be null or NUL-terminated; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn tagmap_graph_load(
    path: *const c_char,
    relations: *const c_char,
    out: *mut *mut TagmapGraph,
) -> TagmapStatus {
    guard(|| {
        check_out(out, "out")?;
        let path = Path::new(str_arg(path, "path")?);
        let classes = if relations.is_null() {
            RelationClasses::default()
        } else {
            let p = Path::new(str_arg(relations, "relations")?);
            let file = tagmap::io::open(p)?;
            RelationClasses::parse(file).map_err(|e| e.in_file(p))?
        };
        let (g, _) = load_graph(tagmap::io::open(path)?, &classes).map_err(|e| e.in_file(path))?;
        write_out(out, Box::into_raw(Box::new(TagmapGraph(g))), "out")
    })
}

/// # Safety
/// `g` must be null or a live graph handle.
#[no_mangle]
pub unsafe extern "C" fn tagmap_graph_concept_count(g: *const TagmapGraph) -> usize {
    g.as_ref().map_or(0, |g| g.0.concept_count())
}

/// # Safety
/// `g` must be null or a live graph handle.
#[no_mangle]
pub unsafe extern "C" fn tagmap_graph_edge_count(g: *const TagmapGraph) -> usize {
    g.as_ref().map_or(0, |g| g.0.edge_count())
}

/// # Safety
/// `g` must be null or a handle from `tagmap_graph_load`, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn tagmap_graph_free(g: *mut TagmapGraph) {
    if !g.is_null() {
        drop(Box::from_raw(g));
    }
}

// ---- token tables ----

/// Loads word vectors; line order gives frequency ranks. `max_rank` of 0
/// reads the whole file.
///
/// # Safety
/// `path` must be NUL-terminated; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn tagmap_token_table_load(
    path: *const c_char,
    max_rank: usize,
    out: *mut *mut TagmapTokenTable,
) -> TagmapStatus {
    guard(|| {
        check_out(out, "out")?;
        let path = Path::new(str_arg(path, "path")?);
        let table = load_token_table(path, None, (max_rank > 0).then_some(max_rank))?;
        write_out(out, Box::into_raw(Box::new(TagmapTokenTable(table))), "out")
    })
}

/// # Safety
/// `t` must be null or a live token table handle.
#[no_mangle]
pub unsafe extern "C" fn tagmap_token_table_len(t: *const TagmapTokenTable) -> usize {
    t.as_ref().map_or(0, |t| t.0.len())
}

/// # Safety
/// `t` must be null or a live token table handle.
#[no_mangle]
pub unsafe extern "C" fn tagmap_token_table_dim(t: *const TagmapTokenTable) -> usize {
    t.as_ref().map_or(0, |t| t.0.dim())
}

/// # Safety
/// `t` must be null or a handle from `tagmap_token_table_load`, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn tagmap_token_table_free(t: *mut TagmapTokenTable) {
    if !t.is_null() {
        drop(Box::from_raw(t));
    }
}

// ---- embeddings ----

/// Loads vectors keyed by id. All-zero rows are marked unknown.
///
/// # Safety
/// `path` must be NUL-terminated; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn tagmap_embeddings_load(path: *const c_char, out: *mut *mut TagmapEmbeddings) -> TagmapStatus {
    guard(|| {
        check_out(out, "out")?;
        let set = load_embeddings(Path::new(str_arg(path, "path")?))?;
        write_out(out, Box::into_raw(Box::new(TagmapEmbeddings(set))), "out")
    })
}

/// # Safety
/// `e` must be a live embeddings handle; `path` must be NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn tagmap_embeddings_save(e: *const TagmapEmbeddings, path: *const c_char) -> TagmapStatus {
    guard(|| {
        let e = ref_arg(e, "embeddings")?;
        save_embeddings(&e.0, Path::new(str_arg(path, "path")?))?;
        Ok(())
    })
}

/// # Safety
/// `e` must be null or a live embeddings handle.
#[no_mangle]
pub unsafe extern "C" fn tagmap_embeddings_len(e: *const TagmapEmbeddings) -> usize {
    e.as_ref().map_or(0, |e| e.0.len())
}

/// # Safety
/// `e` must be null or a live embeddings handle.
#[no_mangle]
pub unsafe extern "C" fn tagmap_embeddings_dim(e: *const TagmapEmbeddings) -> usize {
    e.as_ref().map_or(0, |e| e.0.dim())
}

/// Copies the vector of `id` into `buf`, which must hold exactly `dim`
/// values.
///
/// # Safety
/// `e` must be a live handle, `id` NUL-terminated and `buf` writable for
/// `buf_len` doubles.
#[no_mangle]
pub unsafe extern "C" fn tagmap_embeddings_get(
    e: *const TagmapEmbeddings,
    id: *const c_char,
    buf: *mut f64,
    buf_len: usize,
) -> TagmapStatus {
    guard(|| {
        let e = ref_arg(e, "embeddings")?;
        let id = str_arg(id, "id")?;
        check_out(buf, "buf")?;
        if buf_len != e.0.dim() {
            return Err(Failure::new(
                TagmapStatus::Validation,
                format!("buffer holds {buf_len} values, vectors have {}", e.0.dim()),
            ));
        }
        let v = e.0.get(id).ok_or_else(|| Error::lookup("id", id))?;
        std::slice::from_raw_parts_mut(buf, buf_len).copy_from_slice(v);
        Ok(())
    })
}

/// # Safety
/// `e` must be null or an embeddings handle from this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn tagmap_embeddings_free(e: *mut TagmapEmbeddings) {
    if !e.is_null() {
        drop(Box::from_raw(e));
    }
}

// ---- operations ----

/// Composes one vector per tag label. SIF uses smoothing constant `a` and
/// removes the first singular direction of the resulting tag matrix; `a`
/// is ignored for averaging. Tags without any known token get a zero vector.
///
/// # Safety
/// `table` must be a live handle, `tags` must point to `n_tags`
/// NUL-terminated strings and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn tagmap_compose(
    table: *const TagmapTokenTable,
    tags: *const *const c_char,
    n_tags: usize,
    strategy: TagmapStrategy,
    a: f64,
    out: *mut *mut TagmapEmbeddings,
) -> TagmapStatus {
    guard(|| {
        check_out(out, "out")?;
        let table = ref_arg(table, "table")?;
        let labels =
            slice_arg(tags, n_tags, "tags")?.iter().map(|&p| str_arg(p, "tag")).collect::<Result<Vec<&str>, _>>()?;
        let strategy = match strategy {
            TagmapStrategy::Avg => Strategy::Avg,
            TagmapStrategy::Sif => Strategy::Sif,
        };
        let composed = build_tag_embeddings(&labels, &table.0, strategy, a)?;
        write_out(out, Box::into_raw(Box::new(TagmapEmbeddings(composed.embeddings))), "out")
    })
}

fn known_ids(set: &EmbeddingSet) -> BTreeSet<String> {
    set.ids().iter().enumerate().filter(|&(i, _)| set.known_at(i)).map(|(_, id)| id.clone()).collect()
}

/// Number of graph components that hold no known vector; retrofitting
/// succeeds only when this is 0.
///
/// # Safety
/// Handles must be live; `out_count` must be writable.
#[no_mangle]
pub unsafe extern "C" fn tagmap_uncovered_components(
    graph: *const TagmapGraph,
    initial: *const TagmapEmbeddings,
    out_count: *mut usize,
) -> TagmapStatus {
    guard(|| {
        check_out(out_count, "out_count")?;
        let initial = &ref_arg(initial, "initial")?.0;
        let known = known_ids(initial);
        let g = ref_arg(graph, "graph")?.0.with_concepts(known.iter().map(String::as_str));
        let report = check_feasible(&g, &known)?;
        write_out(out_count, report.uncovered().len(), "out_count")
    })
}

/// Retrofits `initial` onto `graph`. Entries of `initial` with a non-zero
/// vector are the known concepts; ids missing from the graph join it as
/// isolated concepts. `params` may be null for the defaults and
/// `out_iterations` may be null.
///
/// # Safety
/// Handles must be live; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn tagmap_retrofit(
    graph: *const TagmapGraph,
    initial: *const TagmapEmbeddings,
    params: *const TagmapRetrofitParams,
    out: *mut *mut TagmapEmbeddings,
    out_iterations: *mut usize,
) -> TagmapStatus {
    guard(|| {
        check_out(out, "out")?;
        let initial = &ref_arg(initial, "initial")?.0;
        let p = params.as_ref().copied().unwrap_or_else(|| tagmap_retrofit_params_default());
        let known = known_ids(initial);
        let g = ref_arg(graph, "graph")?.0.with_concepts(known.iter().map(String::as_str));
        let degree_mode =
            if p.relatedness_only_degree { DegreeMode::RelatednessOnly } else { DegreeMode::AllNeighbors };
        let (q, iterations) = match p.solver {
            TagmapSolver::Jacobi => {
                let params = SolverParams { tol: p.tol, max_iter: p.max_iter, degree_mode, ..SolverParams::default() };
                let (q, report) = jacobi_retrofit(&g, initial, &known, &params)?;
                (q, report.iterations)
            }
            TagmapSolver::Direct => (direct_solve_with(&g, initial, &known, degree_mode)?, 0),
        };
        if !out_iterations.is_null() {
            out_iterations.write(iterations);
        }
        write_out(out, Box::into_raw(Box::new(TagmapEmbeddings(q))), "out")
    })
}

/// Cosine similarity; 0 when either vector is zero.
///
/// # Safety
/// `u` and `v` must be readable for `len` doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn tagmap_cosine(u: *const f64, v: *const f64, len: usize, out: *mut f64) -> TagmapStatus {
    guard(|| {
        let c = tagmap::cosine(slice_arg(u, len, "u")?, slice_arg(v, len, "v")?)?;
        write_out(out, c, "out")
    })
}

/// ROC AUC with ties counted as one half. `labels` holds 0 or 1 per item.
/// When every label is equal the AUC is undefined: `*out_defined` is set to
/// false and `*out_auc` to NaN.
///
/// # Safety
/// `scores` and `labels` must be readable for `n` items; outputs writable.
#[no_mangle]
pub unsafe extern "C" fn tagmap_roc_auc(
    scores: *const f64,
    labels: *const u8,
    n: usize,
    out_auc: *mut f64,
    out_defined: *mut bool,
) -> TagmapStatus {
    guard(|| {
        check_out(out_auc, "out_auc")?;
        check_out(out_defined, "out_defined")?;
        let scores = slice_arg(scores, n, "scores")?;
        let labels: Vec<bool> = slice_arg(labels, n, "labels")?.iter().map(|&b| b != 0).collect();
        let auc = tagmap::roc_auc(scores, &labels)?;
        out_auc.write(auc.unwrap_or(f64::NAN));
        out_defined.write(auc.is_some());
        Ok(())
    })
}
