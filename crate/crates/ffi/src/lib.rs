//! C interface: parse a problem file, compute its zeta function, count points.
//!
//! Every function returns an [`NzStatus`]; on failure the message is available from
//! [`nz_last_error`] on the same thread. Handles are opaque and must be released with
//! the matching `_free` function.

#![allow(clippy::missing_safety_doc)]

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::ptr;

use nodal_zeta::cli::{node_set, ProblemInput};
use nodal_zeta::oracle::{count_points, DEFAULT_BUDGET};
use nodal_zeta::zeta::{compute_zeta, format_factors, ZetaFunction, ZetaOptions};
use nodal_zeta::Error;

/// Result codes. Values 1 to 5 match the exit codes of the command-line tool.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NzStatus {
    Ok = 0,
    Parse = 1,
    NotOdp = 2,
    Equisingularity = 3,
    Precision = 4,
    Internal = 5,
    NullPointer = 6,
    InvalidUtf8 = 7,
    BufferTooSmall = 8,
}

/// A parsed problem file.
pub struct NzProblem {
    input: ProblemInput,
}

/// A computed zeta function.
pub struct NzZeta {
    zeta: ZetaFunction,
    certified: bool,
}

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(msg: impl Into<String>) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg.into());
}

fn fail(e: Error) -> NzStatus {
    set_error(e.to_string());
    match e.exit_code() {
        1 => NzStatus::Parse,
        2 => NzStatus::NotOdp,
        3 => NzStatus::Equisingularity,
        4 => NzStatus::Precision,
        _ => NzStatus::Internal,
    }
}

/// Copies `s` with a terminating NUL; `needed` receives the full size including the NUL.
unsafe fn write_string(s: &str, buf: *mut c_char, len: usize, needed: *mut usize) -> NzStatus {
    if !needed.is_null() {
        *needed = s.len() + 1;
    }
    if buf.is_null() || len < s.len() + 1 {
        set_error("buffer too small");
        return NzStatus::BufferTooSmall;
    }
    ptr::copy_nonoverlapping(s.as_ptr() as *const c_char, buf, s.len());
    *buf.add(s.len()) = 0;
    NzStatus::Ok
}

/// Parses a problem given as TOML text.
#[no_mangle]
pub unsafe extern "C" fn nz_problem_parse(text: *const c_char, out: *mut *mut NzProblem) -> NzStatus {
    if text.is_null() || out.is_null() {
        set_error("null pointer");
        return NzStatus::NullPointer;
    }
    *out = ptr::null_mut();
    let Ok(text) = CStr::from_ptr(text).to_str() else {
        set_error("input is not UTF-8");
        return NzStatus::InvalidUtf8;
    };
    match ProblemInput::parse(text) {
        Ok(input) => {
            *out = Box::into_raw(Box::new(NzProblem { input }));
            NzStatus::Ok
        }
        Err(e) => fail(e),
    }
}

#[no_mangle]
pub unsafe extern "C" fn nz_problem_free(problem: *mut NzProblem) {
    if !problem.is_null() {
        drop(Box::from_raw(problem));
    }
}

/// Computes the zeta function over F_p; `prime` 0 takes the prime from the problem file.
/// `terms` 0 uses the certified truncation; `early_stop` nonzero grows the series until
/// Q(T) repeats.
#[no_mangle]
pub unsafe extern "C" fn nz_zeta_compute(
    problem: *const NzProblem,
    prime: u64,
    terms: usize,
    early_stop: i32,
    out: *mut *mut NzZeta,
) -> NzStatus {
    if problem.is_null() || out.is_null() {
        set_error("null pointer");
        return NzStatus::NullPointer;
    }
    *out = ptr::null_mut();
    let input = &(*problem).input;
    let Some(p) = (if prime == 0 { input.prime } else { Some(prime) }) else {
        return fail(Error::Invalid("no prime given".into()));
    };
    let nodes = match node_set(input) {
        Ok(n) => n,
        Err(e) => return fail(e),
    };
    let opts = ZetaOptions {
        terms: (terms > 0).then_some(terms),
        early_stop: early_stop != 0,
        jobs: 1,
        ..Default::default()
    };
    match compute_zeta(&input.f, &nodes, p, &opts) {
        Ok(r) => {
            *out = Box::into_raw(Box::new(NzZeta {
                certified: r.diagnostics.certified,
                zeta: r.zeta,
            }));
            NzStatus::Ok
        }
        Err(e) => fail(e),
    }
}

#[no_mangle]
pub unsafe extern "C" fn nz_zeta_free(zeta: *mut NzZeta) {
    if !zeta.is_null() {
        drop(Box::from_raw(zeta));
    }
}

/// Degree of Q(T).
#[no_mangle]
pub unsafe extern "C" fn nz_zeta_degree(zeta: *const NzZeta) -> usize {
    if zeta.is_null() {
        return 0;
    }
    (*zeta).zeta.interesting.len() - 1
}

/// 1 when the truncation met the formal bound, 0 for an early-stopped run.
#[no_mangle]
pub unsafe extern "C" fn nz_zeta_certified(zeta: *const NzZeta) -> i32 {
    (!zeta.is_null() && (*zeta).certified) as i32
}

/// Coefficient of T^i in Q(T) as a decimal string.
#[no_mangle]
pub unsafe extern "C" fn nz_zeta_coefficient(
    zeta: *const NzZeta,
    i: usize,
    buf: *mut c_char,
    len: usize,
    needed: *mut usize,
) -> NzStatus {
    if zeta.is_null() {
        set_error("null pointer");
        return NzStatus::NullPointer;
    }
    let zeta = &*zeta;
    let Some(c) = zeta.zeta.interesting.get(i) else {
        return fail(Error::Invalid(format!("no coefficient {i}")));
    };
    write_string(&c.to_string(), buf, len, needed)
}

/// The zeta function as text, e.g. `1/((1-T)(1-5T)^3(1-25T))`.
#[no_mangle]
pub unsafe extern "C" fn nz_zeta_to_string(zeta: *const NzZeta, buf: *mut c_char, len: usize, needed: *mut usize) -> NzStatus {
    if zeta.is_null() {
        set_error("null pointer");
        return NzStatus::NullPointer;
    }
    write_string(&(*zeta).zeta.to_string(), buf, len, needed)
}

/// Q(T) in factored form.
#[no_mangle]
pub unsafe extern "C" fn nz_zeta_factored(zeta: *const NzZeta, buf: *mut c_char, len: usize, needed: *mut usize) -> NzStatus {
    if zeta.is_null() {
        set_error("null pointer");
        return NzStatus::NullPointer;
    }
    write_string(&format_factors(&(*zeta).zeta.factors()), buf, len, needed)
}

/// Number of points over F_{p^r}; `budget` 0 uses the default cap on p^{rn}.
#[no_mangle]
pub unsafe extern "C" fn nz_count_points(problem: *const NzProblem, prime: u64, r: u32, budget: u64, out: *mut u64) -> NzStatus {
    if problem.is_null() || out.is_null() {
        set_error("null pointer");
        return NzStatus::NullPointer;
    }
    let budget = if budget == 0 { DEFAULT_BUDGET } else { budget as u128 };
    match count_points(&(*problem).input.f, prime, r, budget) {
        Ok(c) => {
            *out = c;
            NzStatus::Ok
        }
        Err(e) => fail(e),
    }
}

/// Message of the last failure on this thread.
#[no_mangle]
pub unsafe extern "C" fn nz_last_error(buf: *mut c_char, len: usize, needed: *mut usize) -> NzStatus {
    let msg = LAST_ERROR.with(|e| e.borrow().clone());
    write_string(&msg, buf, len, needed)
}
