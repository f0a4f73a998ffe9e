//! C ABI for the solver: opaque tensor/result handles, status codes, and a
//! flat options struct. The generated header lives at `include/srtc.h`.
//!
//! Conventions: every function that can fail returns [`SrtcStatus`]; handles
//! created by `srtc_*_create`/`srtc_*_read`/`srtc_solve` are owned by the
//! caller and released with the matching `*_free`. Tensor payloads are dense
//! `double` arrays with the first index fastest, matching the SRT1 container.

use srtc::admm::AdmmConfig;
use srtc::data::ObservationMask;
use srtc::error::Error;
use srtc::io;
use srtc::solver::{run, SolveResult, SolverConfig};
use srtc::tensor::Tensor3;
use std::ffi::{c_char, CStr};
use std::path::Path;

/// Status codes returned by every fallible entry point.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SrtcStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidArgument = 2,
    DimensionMismatch = 3,
    IoError = 4,
    FormatError = 5,
    NumericalError = 6,
    EmptyMask = 7,
    Utf8Error = 8,
}

fn status_of(err: &Error) -> SrtcStatus {
    match err {
        Error::InvalidMode(_) | Error::InvalidConfig(_) | Error::RankExceedsDim { .. } => {
            SrtcStatus::InvalidArgument
        }
        Error::DimMismatch(_) => SrtcStatus::DimensionMismatch,
        Error::EmptyMask => SrtcStatus::EmptyMask,
        Error::NonFinite(_) | Error::Format(_) => SrtcStatus::FormatError,
        Error::Numerical(_) => SrtcStatus::NumericalError,
        Error::Io(_) => SrtcStatus::IoError,
    }
}

/// Opaque dense order-3 tensor handle.
pub struct SrtcTensor {
    inner: Tensor3,
}

/// Opaque solve-result handle holding the recovered tensor, the smooth
/// foreground, the low-rank background, and the iteration trace.
pub struct SrtcResult {
    x: SrtcTensor,
    s: SrtcTensor,
    l: SrtcTensor,
    trace: srtc::solver::SolveTrace,
}

impl From<SolveResult> for SrtcResult {
    fn from(r: SolveResult) -> Self {
        Self {
            x: SrtcTensor { inner: r.x },
            s: SrtcTensor { inner: r.s },
            l: SrtcTensor { inner: r.l },
            trace: r.trace,
        }
    }
}

/// Solver options; zero ranks select the default rule
/// `(ceil(0.8 H), ceil(0.8 W), 1)`.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct SrtcOptions {
    pub lambda: f64,
    pub rho: f64,
    pub rank1: u32,
    pub rank2: u32,
    pub rank3: u32,
    pub outer_tol: f64,
    pub outer_max_iter: u32,
    pub admm_gamma: f64,
    pub admm_c1: f64,
    pub admm_c2: f64,
    pub admm_tol: f64,
    pub admm_max_iter: u32,
    pub seed: u64,
}

impl SrtcOptions {
    fn to_config(self) -> SolverConfig {
        let ranks = if self.rank1 == 0 && self.rank2 == 0 && self.rank3 == 0 {
            None
        } else {
            Some((self.rank1 as usize, self.rank2 as usize, self.rank3 as usize))
        };
        SolverConfig {
            lambda: self.lambda,
            rho: self.rho,
            ranks,
            outer_tol: self.outer_tol,
            outer_max_iter: self.outer_max_iter as usize,
            admm: AdmmConfig {
                gamma: self.admm_gamma,
                c1: self.admm_c1,
                c2: self.admm_c2,
                tol: self.admm_tol,
                max_iter: self.admm_max_iter as usize,
            },
            seed: self.seed,
        }
    }
}

/// Default options mirroring the library defaults.
#[no_mangle]
pub extern "C" fn srtc_options_default() -> SrtcOptions {
    let cfg = SolverConfig::default();
    SrtcOptions {
        lambda: cfg.lambda,
        rho: cfg.rho,
        rank1: 0,
        rank2: 0,
        rank3: 0,
        outer_tol: cfg.outer_tol,
        outer_max_iter: cfg.outer_max_iter as u32,
        admm_gamma: cfg.admm.gamma,
        admm_c1: cfg.admm.c1,
        admm_c2: cfg.admm.c2,
        admm_tol: cfg.admm.tol,
        admm_max_iter: cfg.admm.max_iter as u32,
        seed: cfg.seed,
    }
}

unsafe fn path_from<'a>(ptr: *const c_char) -> Result<&'a Path, SrtcStatus> {
    if ptr.is_null() {
        return Err(SrtcStatus::NullArgument);
    }
    match CStr::from_ptr(ptr).to_str() {
        Ok(s) => Ok(Path::new(s)),
        Err(_) => Err(SrtcStatus::Utf8Error),
    }
}

/// Creates a tensor of dims `(i1, i2, i3)`. `data` may be null for a zero
/// tensor; otherwise it must point to `i1 * i2 * i3` doubles, first index
/// fastest.
///
/// # Safety
/// `data`, when non-null, must be valid for `i1 * i2 * i3` reads; `out` must
/// be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn srtc_tensor_create(
    i1: u32,
    i2: u32,
    i3: u32,
    data: *const f64,
    out: *mut *mut SrtcTensor,
) -> SrtcStatus {
    if out.is_null() {
        return SrtcStatus::NullArgument;
    }
    let dims = (i1 as usize, i2 as usize, i3 as usize);
    let len = dims.0.saturating_mul(dims.1).saturating_mul(dims.2);
    let values = if data.is_null() {
        vec![0.0; len]
    } else {
        std::slice::from_raw_parts(data, len).to_vec()
    };
    match Tensor3::new(dims, values) {
        Ok(inner) => {
            *out = Box::into_raw(Box::new(SrtcTensor { inner }));
            SrtcStatus::Ok
        }
        Err(e) => status_of(&e),
    }
}

/// Reads an SRT1 file.
///
/// # Safety
/// `path` must be a valid NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn srtc_tensor_read(path: *const c_char, out: *mut *mut SrtcTensor) -> SrtcStatus {
    if out.is_null() {
        return SrtcStatus::NullArgument;
    }
    let path = match path_from(path) {
        Ok(p) => p,
        Err(s) => return s,
    };
    match io::read_tensor(path) {
        Ok(inner) => {
            *out = Box::into_raw(Box::new(SrtcTensor { inner }));
            SrtcStatus::Ok
        }
        Err(e) => status_of(&e),
    }
}

/// Writes a tensor as an SRT1 file.
///
/// # Safety
/// `tensor` must be a live handle and `path` a valid NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn srtc_tensor_write(tensor: *const SrtcTensor, path: *const c_char) -> SrtcStatus {
    let Some(tensor) = tensor.as_ref() else {
        return SrtcStatus::NullArgument;
    };
    let path = match path_from(path) {
        Ok(p) => p,
        Err(s) => return s,
    };
    match io::write_tensor(path, &tensor.inner) {
        Ok(()) => SrtcStatus::Ok,
        Err(e) => status_of(&e),
    }
}

/// Dims of a tensor handle.
///
/// # Safety
/// All pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn srtc_tensor_dims(
    tensor: *const SrtcTensor,
    i1: *mut u32,
    i2: *mut u32,
    i3: *mut u32,
) -> SrtcStatus {
    let Some(tensor) = tensor.as_ref() else {
        return SrtcStatus::NullArgument;
    };
    if i1.is_null() || i2.is_null() || i3.is_null() {
        return SrtcStatus::NullArgument;
    }
    let dims = tensor.inner.dims();
    *i1 = dims.0 as u32;
    *i2 = dims.1 as u32;
    *i3 = dims.2 as u32;
    SrtcStatus::Ok
}

/// Borrowed pointer to the tensor payload (`i1 * i2 * i3` doubles, first
/// index fastest); valid until the handle is freed. Null for a null handle.
///
/// # Safety
/// `tensor` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn srtc_tensor_data(tensor: *const SrtcTensor) -> *const f64 {
    match tensor.as_ref() {
        Some(t) => t.inner.data().as_ptr(),
        None => std::ptr::null(),
    }
}

/// Releases a tensor handle; null is a no-op.
///
/// # Safety
/// `tensor` must be a handle returned by this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn srtc_tensor_free(tensor: *mut SrtcTensor) {
    if !tensor.is_null() {
        drop(Box::from_raw(tensor));
    }
}

/// Runs the solver. `mask` is a 0/1 tensor congruent with `video`; `options`
/// may be null for defaults.
///
/// # Safety
/// `video` and `mask` must be live handles, `out` a valid pointer, and
/// `options` either null or a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn srtc_solve(
    video: *const SrtcTensor,
    mask: *const SrtcTensor,
    options: *const SrtcOptions,
    out: *mut *mut SrtcResult,
) -> SrtcStatus {
    if out.is_null() {
        return SrtcStatus::NullArgument;
    }
    let (Some(video), Some(mask)) = (video.as_ref(), mask.as_ref()) else {
        return SrtcStatus::NullArgument;
    };
    let cfg = if options.is_null() {
        SolverConfig::default()
    } else {
        (*options).to_config()
    };
    let mask = match ObservationMask::from_tensor(&mask.inner) {
        Ok(m) => m,
        Err(e) => return status_of(&e),
    };
    match run(&video.inner, &mask, &cfg) {
        Ok(result) => {
            *out = Box::into_raw(Box::new(SrtcResult::from(result)));
            SrtcStatus::Ok
        }
        Err(e) => status_of(&e),
    }
}

/// Borrowed handle to the recovered tensor; lifetime tied to the result.
///
/// # Safety
/// `result` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn srtc_result_x(result: *const SrtcResult) -> *const SrtcTensor {
    match result.as_ref() {
        Some(r) => &r.x,
        None => std::ptr::null(),
    }
}

/// Borrowed handle to the smooth foreground; lifetime tied to the result.
///
/// # Safety
/// `result` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn srtc_result_s(result: *const SrtcResult) -> *const SrtcTensor {
    match result.as_ref() {
        Some(r) => &r.s,
        None => std::ptr::null(),
    }
}

/// Borrowed handle to the low-rank background; lifetime tied to the result.
///
/// # Safety
/// `result` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn srtc_result_l(result: *const SrtcResult) -> *const SrtcTensor {
    match result.as_ref() {
        Some(r) => &r.l,
        None => std::ptr::null(),
    }
}

/// Number of outer iterations performed.
///
/// # Safety
/// `result` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn srtc_result_iterations(result: *const SrtcResult) -> u32 {
    match result.as_ref() {
        Some(r) => r.trace.iterations() as u32,
        None => 0,
    }
}

/// Per-iteration diagnostics for 0-based `iteration`; any output pointer may
/// be null to skip that field.
///
/// # Safety
/// `result` must be a live handle; output pointers must be valid or null.
#[no_mangle]
pub unsafe extern "C" fn srtc_result_trace(
    result: *const SrtcResult,
    iteration: u32,
    objective: *mut f64,
    relchg_x: *mut f64,
    relchg_s: *mut f64,
    relchg_l: *mut f64,
    inner_iters: *mut u32,
) -> SrtcStatus {
    let Some(r) = result.as_ref() else {
        return SrtcStatus::NullArgument;
    };
    let trace = &r.trace;
    let i = iteration as usize;
    if i >= trace.iterations() {
        return SrtcStatus::InvalidArgument;
    }
    if !objective.is_null() {
        *objective = trace.objective[i];
    }
    if !relchg_x.is_null() {
        *relchg_x = trace.relchg_x[i];
    }
    if !relchg_s.is_null() {
        *relchg_s = trace.relchg_s[i];
    }
    if !relchg_l.is_null() {
        *relchg_l = trace.relchg_l[i];
    }
    if !inner_iters.is_null() {
        *inner_iters = trace.inner_iters[i] as u32;
    }
    SrtcStatus::Ok
}

/// Releases a result handle; null is a no-op.
///
/// # Safety
/// `result` must be a handle returned by `srtc_solve`, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn srtc_result_free(result: *mut SrtcResult) {
    if !result.is_null() {
        drop(Box::from_raw(result));
    }
}

/// Static description of a status code.
#[no_mangle]
pub extern "C" fn srtc_status_message(status: SrtcStatus) -> *const c_char {
    let msg: &'static [u8] = match status {
        SrtcStatus::Ok => b"ok\0",
        SrtcStatus::NullArgument => b"null argument\0",
        SrtcStatus::InvalidArgument => b"invalid argument\0",
        SrtcStatus::DimensionMismatch => b"dimension mismatch\0",
        SrtcStatus::IoError => b"i/o error\0",
        SrtcStatus::FormatError => b"malformed or non-finite data\0",
        SrtcStatus::NumericalError => b"numerical failure\0",
        SrtcStatus::EmptyMask => b"observation mask has no observed entries\0",
        SrtcStatus::Utf8Error => b"path is not valid utf-8\0",
    };
    msg.as_ptr() as *const c_char
}
