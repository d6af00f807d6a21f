//! C interface to the simulator: weight comparison, main-chain selection,
//! derived parameters and experiment runs.
//!
//! Every function returns a [`MediumStatus`]; on failure the message is
//! available from [`medium_last_error`] on the same thread. Handles are
//! opaque and must be released with their `*_free` function.

use std::cell::RefCell;
use std::cmp::Ordering;
use std::ffi::{c_char, CStr, CString};
use std::fs::File;
use std::io::BufWriter;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use medium_core::analysis::derive_params;
use medium_core::blocktree::{
    compare_weight, medium_select, BlockId, BlockTree, Miner, WeightCoefficient, WeightPoly,
};
use medium_core::experiments::{
    run_experiment, write_rows, ExperimentConfig, ExperimentError, Protocol, ResultRow,
};
use medium_core::mining::ProtocolParams;

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MediumStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    InvalidUtf8 = 3,
    Config = 4,
    Simulation = 5,
    Analysis = 6,
    Io = 7,
    BufferTooSmall = 8,
    Panic = 9,
}

/// Weight coefficient handle.
pub struct MediumCoeff(WeightCoefficient);

/// Block tree handle.
pub struct MediumTree(BlockTree);

/// Result rows of one experiment run.
pub struct MediumResults {
    rows: Vec<ResultRow>,
    protocols: Vec<CString>,
    metrics: Vec<CString>,
}

#[repr(C)]
#[derive(Clone, Copy, Debug)]
pub struct MediumParams {
    pub n: u32,
    pub t: u32,
    pub p: f64,
    pub q: u32,
    pub epsilon: f64,
    pub lambda: u64,
    pub delta: f64,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, Default)]
pub struct MediumDerived {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub gamma_u: f64,
    pub f: f64,
    pub g: f64,
    pub k: f64,
    pub k_terms: u64,
    pub k_threshold: u64,
    pub r: u64,
    pub r_hat: u64,
    pub u: f64,
    pub u_rounds: u64,
    pub tau_growth: f64,
    pub throughput_ok: bool,
}

/// One result row. The strings belong to the results handle.
#[repr(C)]
#[derive(Clone, Copy, Debug)]
pub struct MediumRow {
    pub protocol: *const c_char,
    pub metric: *const c_char,
    pub var: f64,
    pub seed: u64,
    pub value: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let s = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(s).ok());
}

struct Failure(MediumStatus, String);

impl From<ExperimentError> for Failure {
    fn from(e: ExperimentError) -> Self {
        let status = match e {
            ExperimentError::Config(_) => MediumStatus::Config,
            ExperimentError::Sim(_) => MediumStatus::Simulation,
            ExperimentError::Analysis(_) => MediumStatus::Analysis,
            ExperimentError::Csv(_) | ExperimentError::Io(_) => MediumStatus::Io,
        };
        Failure(status, e.to_string())
    }
}

fn fail(status: MediumStatus, msg: impl ToString) -> Failure {
    Failure(status, msg.to_string())
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> MediumStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            MediumStatus::Ok
        }
        Ok(Err(Failure(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            MediumStatus::Panic
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char, name: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(fail(MediumStatus::NullPointer, format!("{name} is null")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| fail(MediumStatus::InvalidUtf8, format!("{name} is not UTF-8")))
}

unsafe fn ref_arg<'a, T>(p: *const T, name: &str) -> Result<&'a T, Failure> {
    p.as_ref()
        .ok_or_else(|| fail(MediumStatus::NullPointer, format!("{name} is null")))
}

unsafe fn mut_arg<'a, T>(p: *mut T, name: &str) -> Result<&'a mut T, Failure> {
    p.as_mut()
        .ok_or_else(|| fail(MediumStatus::NullPointer, format!("{name} is null")))
}

unsafe fn slice_arg<'a>(p: *const u64, len: usize, name: &str) -> Result<&'a [u64], Failure> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(fail(MediumStatus::NullPointer, format!("{name} is null")));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

/// Message of the last failed call on this thread, or null. Valid until the
/// next call on the same thread.
#[no_mangle]
pub extern "C" fn medium_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Parses `ghost`, `bitcoin`, `P^(1/k)`, `a/b` or an integer.
///
/// # Safety
/// `spec` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn medium_coeff_parse(
    spec: *const c_char,
    out: *mut *mut MediumCoeff,
) -> MediumStatus {
    guard(|| {
        let out = mut_arg(out, "out")?;
        let s = str_arg(spec, "spec")?;
        let p: Protocol = s
            .parse()
            .map_err(|e: ExperimentError| fail(MediumStatus::InvalidArgument, e))?;
        *out = Box::into_raw(Box::new(MediumCoeff(p.coefficient())));
        Ok(())
    })
}

/// Floating-point value of the coefficient (infinity for the longest-chain limit).
///
/// # Safety
/// `coeff` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn medium_coeff_approx(coeff: *const MediumCoeff) -> f64 {
    match coeff.as_ref() {
        Some(c) if c.0.is_limit() => f64::INFINITY,
        Some(c) => c.0.approx(),
        None => f64::NAN,
    }
}

/// # Safety
/// `coeff` must be null or a handle from [`medium_coeff_parse`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn medium_coeff_free(coeff: *mut MediumCoeff) {
    if !coeff.is_null() {
        drop(Box::from_raw(coeff));
    }
}

/// Exact comparison of two weight polynomials given as per-level block
/// counts. Writes -1, 0 or 1 to `out`. Under the longest-chain limit the
/// deeper polynomial wins.
///
/// # Safety
/// `a` and `b` must point to `a_len` and `b_len` values; `coeff` and `out`
/// must be valid.
#[no_mangle]
pub unsafe extern "C" fn medium_compare_weight(
    a: *const u64,
    a_len: usize,
    b: *const u64,
    b_len: usize,
    coeff: *const MediumCoeff,
    out: *mut i32,
) -> MediumStatus {
    guard(|| {
        let out = mut_arg(out, "out")?;
        let c = ref_arg(coeff, "coeff")?;
        let pa = WeightPoly::new(slice_arg(a, a_len, "a")?.to_vec());
        let pb = WeightPoly::new(slice_arg(b, b_len, "b")?.to_vec());
        let ord = if c.0.is_limit() {
            pa.degree().cmp(&pb.degree())
        } else {
            compare_weight(&pa, &pb, &c.0).map_err(|e| fail(MediumStatus::InvalidArgument, e))?
        };
        *out = match ord {
            Ordering::Less => -1,
            Ordering::Equal => 0,
            Ordering::Greater => 1,
        };
        Ok(())
    })
}

/// New tree holding only genesis (id 0).
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn medium_tree_new(out: *mut *mut MediumTree) -> MediumStatus {
    guard(|| {
        let out = mut_arg(out, "out")?;
        *out = Box::into_raw(Box::new(MediumTree(BlockTree::new())));
        Ok(())
    })
}

/// # Safety
/// `tree` must be null or a handle from [`medium_tree_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn medium_tree_free(tree: *mut MediumTree) {
    if !tree.is_null() {
        drop(Box::from_raw(tree));
    }
}

/// Number of blocks including genesis, 0 for a null handle.
///
/// # Safety
/// `tree` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn medium_tree_len(tree: *const MediumTree) -> usize {
    tree.as_ref().map_or(0, |t| t.0.len())
}

/// Appends an honest block mined by `party` below `parent`.
///
/// # Safety
/// `tree` must be a live handle and `out_id` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn medium_tree_extend(
    tree: *mut MediumTree,
    parent: u64,
    party: u32,
    out_id: *mut u64,
) -> MediumStatus {
    guard(|| {
        let t = mut_arg(tree, "tree")?;
        let out = mut_arg(out_id, "out_id")?;
        let id =
            t.0.extend(BlockId(parent), Miner::Honest(party))
                .map_err(|e| fail(MediumStatus::InvalidArgument, e))?;
        *out = id.0;
        Ok(())
    })
}

/// Writes the main chain, genesis first, into `buf`. `out_len` receives the
/// chain length; when it exceeds `cap` nothing is written and
/// `BufferTooSmall` is returned.
///
/// # Safety
/// `tree` and `coeff` must be live handles, `buf` must hold `cap` values and
/// `out_len` must be valid.
#[no_mangle]
pub unsafe extern "C" fn medium_tree_main_chain(
    tree: *const MediumTree,
    coeff: *const MediumCoeff,
    buf: *mut u64,
    cap: usize,
    out_len: *mut usize,
) -> MediumStatus {
    guard(|| {
        let t = ref_arg(tree, "tree")?;
        let c = ref_arg(coeff, "coeff")?;
        let len = mut_arg(out_len, "out_len")?;
        let chain =
            medium_select(&t.0, &c.0).map_err(|e| fail(MediumStatus::InvalidArgument, e))?;
        let ids = chain.blocks();
        *len = ids.len();
        if ids.len() > cap {
            return Err(fail(
                MediumStatus::BufferTooSmall,
                format!("chain has {} blocks", ids.len()),
            ));
        }
        if buf.is_null() {
            return Err(fail(MediumStatus::NullPointer, "buf is null"));
        }
        for (k, id) in ids.iter().enumerate() {
            *buf.add(k) = id.0;
        }
        Ok(())
    })
}

/// Default configuration: n = 100, t = 20, p = 1e-3, q = 10, ε = 0.5, λ = 200.
#[no_mangle]
pub extern "C" fn medium_params_default() -> MediumParams {
    let p = ProtocolParams::default();
    MediumParams {
        n: p.n,
        t: p.t,
        p: p.p,
        q: p.q,
        epsilon: p.epsilon,
        lambda: p.lambda,
        delta: p.delta,
    }
}

/// Closed-form quantities of a configuration under a finite coefficient.
///
/// # Safety
/// `params`, `coeff` and `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn medium_derive(
    params: *const MediumParams,
    coeff: *const MediumCoeff,
    out: *mut MediumDerived,
) -> MediumStatus {
    guard(|| {
        let p = ref_arg(params, "params")?;
        let c = ref_arg(coeff, "coeff")?;
        let out = mut_arg(out, "out")?;
        let params = ProtocolParams {
            n: p.n,
            t: p.t,
            p: p.p,
            q: p.q,
            epsilon: p.epsilon,
            lambda: p.lambda,
            delta: p.delta,
            ..ProtocolParams::default()
        };
        params
            .validate()
            .map_err(|e| fail(MediumStatus::InvalidArgument, e))?;
        let d = derive_params(&params, &c.0).map_err(|e| fail(MediumStatus::Analysis, e))?;
        *out = MediumDerived {
            alpha: d.alpha,
            beta: d.beta,
            gamma: d.gamma,
            gamma_u: d.gamma_u,
            f: d.f,
            g: d.g,
            k: d.k.value,
            k_terms: d.k.terms,
            k_threshold: d.k.threshold,
            r: d.fresh.r,
            r_hat: d.fresh.r_hat,
            u: d.fresh.u,
            u_rounds: d.fresh.u_rounds,
            tau_growth: d.tau_growth,
            throughput_ok: d.throughput_ok,
        };
        Ok(())
    })
}

/// Runs the experiment described by `config` (`key = value` lines).
/// `kind` is the experiment used when the text does not name one:
/// `simulate`, `throughput`, `balance` or `params`.
///
/// # Safety
/// `config` and `kind` must be NUL-terminated strings, `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn medium_experiment_run(
    config: *const c_char,
    kind: *const c_char,
    out: *mut *mut MediumResults,
) -> MediumStatus {
    guard(|| {
        let out = mut_arg(out, "out")?;
        let text = str_arg(config, "config")?;
        let kind = str_arg(kind, "kind")?;
        let cfg = ExperimentConfig::parse(text, kind)?;
        cfg.validate()?;
        let rows = run_experiment(&cfg)?;
        let cstr = |s: &str| CString::new(s).map_err(|e| fail(MediumStatus::InvalidArgument, e));
        let protocols = rows
            .iter()
            .map(|r| cstr(&r.protocol))
            .collect::<Result<_, _>>()?;
        let metrics = rows
            .iter()
            .map(|r| cstr(&r.metric))
            .collect::<Result<_, _>>()?;
        *out = Box::into_raw(Box::new(MediumResults {
            rows,
            protocols,
            metrics,
        }));
        Ok(())
    })
}

/// # Safety
/// `results` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn medium_results_len(results: *const MediumResults) -> usize {
    results.as_ref().map_or(0, |r| r.rows.len())
}

/// # Safety
/// `results` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn medium_results_row(
    results: *const MediumResults,
    index: usize,
    out: *mut MediumRow,
) -> MediumStatus {
    guard(|| {
        let res = ref_arg(results, "results")?;
        let out = mut_arg(out, "out")?;
        let row = res.rows.get(index).ok_or_else(|| {
            fail(
                MediumStatus::InvalidArgument,
                format!("row {index} of {}", res.rows.len()),
            )
        })?;
        *out = MediumRow {
            protocol: res.protocols[index].as_ptr(),
            metric: res.metrics[index].as_ptr(),
            var: row.var,
            seed: row.seed,
            value: row.value,
        };
        Ok(())
    })
}

/// Writes the rows as CSV to `path`.
///
/// # Safety
/// `results` must be a live handle and `path` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn medium_results_write_csv(
    results: *const MediumResults,
    path: *const c_char,
) -> MediumStatus {
    guard(|| {
        let res = ref_arg(results, "results")?;
        let path = str_arg(path, "path")?;
        let file = File::create(path).map_err(|e| fail(MediumStatus::Io, e))?;
        write_rows(BufWriter::new(file), &res.rows)?;
        Ok(())
    })
}

/// # Safety
/// `results` must be null or a handle from [`medium_experiment_run`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn medium_results_free(results: *mut MediumResults) {
    if !results.is_null() {
        drop(Box::from_raw(results));
    }
}
