//! C ABI over the ecglab library.
//!
//! Models are opaque handles created by the `ecglab_model_*` constructors
//! and released with `ecglab_model_free`.  Every fallible call returns an
//! `EcglabStatus`; on failure a thread-local message is retrievable with
//! `ecglab_last_error`.  Buffers are caller-allocated.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::ptr;

use ecglab::ecg::{self, MeasureChoice, Model, Thresholds};
use ecglab::stable;
use ecglab::subgroup::SubgroupSpec;
use ecglab::EcgError;

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

/// Status codes returned by every fallible entry point.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EcglabStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    CapExceeded = 3,
    SamplerCollapse = 4,
    Internal = 5,
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(err: &EcgError) -> EcglabStatus {
    match err {
        EcgError::CapExceeded(_) => EcglabStatus::CapExceeded,
        EcgError::SamplerCollapse { .. } => EcglabStatus::SamplerCollapse,
        EcgError::Io(_) => EcglabStatus::Internal,
        _ => EcglabStatus::InvalidArgument,
    }
}

fn fail(err: EcgError) -> EcglabStatus {
    let code = status_of(&err);
    set_error(&err.to_string());
    code
}

fn invalid(msg: &str) -> EcglabStatus {
    set_error(msg);
    EcglabStatus::InvalidArgument
}

/// Opaque model handle.
pub struct EcglabModel {
    inner: Model,
}

/// One estimated point of the normalized extremal cocycle curve.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct EcglabEcgPoint {
    pub n: u32,
    /// Monte Carlo estimate of the expected pointwise maximum
    pub abar: f64,
    /// standard error of that estimate
    pub se: f64,
    /// normalized extremal cocycle C_n
    pub cn: f64,
}

/// Curve classification.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EcglabClassification {
    NonVanishing = 0,
    Vanishing = 1,
    Inconclusive = 2,
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn ecglab_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Copies the last error message on this thread into `buf` (truncated to
/// `len - 1` bytes, always NUL-terminated).  Returns the full message
/// length, or 0 when no error is pending.
///
/// # Safety
/// `buf` must point to `len` writable bytes (or be NULL with `len == 0`).
#[no_mangle]
pub unsafe extern "C" fn ecglab_last_error(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let guard = e.borrow();
        let Some(msg) = guard.as_ref() else {
            return 0;
        };
        let bytes = msg.as_bytes();
        if !buf.is_null() && len > 0 {
            let n = bytes.len().min(len - 1);
            ptr::copy_nonoverlapping(bytes.as_ptr() as *const c_char, buf, n);
            *buf.add(n) = 0;
        }
        bytes.len()
    })
}

/// Creates the full free-group model `F_d` on its tree boundary.
///
/// # Safety
/// `out` must be a valid pointer to a model-handle slot.
#[no_mangle]
pub unsafe extern "C" fn ecglab_model_tree_full(
    rank: u32,
    out: *mut *mut EcglabModel,
) -> EcglabStatus {
    if out.is_null() {
        return EcglabStatus::NullPointer;
    }
    match Model::tree_full(rank) {
        Ok(m) => {
            *out = Box::into_raw(Box::new(EcglabModel { inner: m }));
            EcglabStatus::Ok
        }
        Err(e) => fail(e),
    }
}

/// Creates a subgroup model from a spec string (`full`, `zk:1,0`,
/// `c2c3:x,y`).  `measure` is 0 for the subgroup's empirical Patterson
/// measure, 1 for the ambient uniform measure.  `max_radius` bounds the
/// ball radii later queries may use.
///
/// # Safety
/// `subgroup` must be a NUL-terminated string and `out` a valid slot.
#[no_mangle]
pub unsafe extern "C" fn ecglab_model_tree_subgroup(
    rank: u32,
    subgroup: *const c_char,
    measure: u32,
    ps_depth: u32,
    max_radius: u32,
    out: *mut *mut EcglabModel,
) -> EcglabStatus {
    if out.is_null() || subgroup.is_null() {
        return EcglabStatus::NullPointer;
    }
    let Ok(spec_str) = CStr::from_ptr(subgroup).to_str() else {
        return invalid("subgroup spec is not valid UTF-8");
    };
    let spec: SubgroupSpec = match spec_str.parse() {
        Ok(s) => s,
        Err(e) => return fail(e),
    };
    let measure = match measure {
        0 => MeasureChoice::SubgroupPatterson,
        1 => MeasureChoice::AmbientUniform,
        _ => return invalid("measure must be 0 (subgroup-patterson) or 1 (ambient-uniform)"),
    };
    match Model::tree_subgroup(rank, spec, measure, ps_depth, max_radius) {
        Ok(m) => {
            *out = Box::into_raw(Box::new(EcglabModel { inner: m }));
            EcglabStatus::Ok
        }
        Err(e) => fail(e),
    }
}

/// Creates the hyperbolic-plane lattice model on its circle boundary with
/// matrix balls enumerated up to `max_radius` (capped at 10).
///
/// # Safety
/// `out` must be a valid pointer to a model-handle slot.
#[no_mangle]
pub unsafe extern "C" fn ecglab_model_circle_harmonic(
    max_radius: u32,
    out: *mut *mut EcglabModel,
) -> EcglabStatus {
    if out.is_null() {
        return EcglabStatus::NullPointer;
    }
    match Model::circle_harmonic(max_radius) {
        Ok(m) => {
            *out = Box::into_raw(Box::new(EcglabModel { inner: m }));
            EcglabStatus::Ok
        }
        Err(e) => fail(e),
    }
}

/// Releases a model handle.  NULL is a no-op.
///
/// # Safety
/// `model` must have been produced by an `ecglab_model_*` constructor and
/// not freed before.
#[no_mangle]
pub unsafe extern "C" fn ecglab_model_free(model: *mut EcglabModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Dimension `v` of the model's conformal density (`V_n = exp(v n)`).
///
/// # Safety
/// `model` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn ecglab_model_dimension(
    model: *const EcglabModel,
    out: *mut f64,
) -> EcglabStatus {
    if model.is_null() || out.is_null() {
        return EcglabStatus::NullPointer;
    }
    *out = (*model).inner.dimension();
    EcglabStatus::Ok
}

/// Estimates the ECG curve over `n = n_min..=n_max` with `samples` boundary
/// draws and the given master seed.  `out_points` must hold
/// `n_max - n_min + 1` entries; the classification lands in `out_class`.
///
/// # Safety
/// `model`, `out_points` (with capacity for the full range) and
/// `out_class` must be valid.
#[no_mangle]
pub unsafe extern "C" fn ecglab_ecg_curve(
    model: *const EcglabModel,
    n_min: u32,
    n_max: u32,
    samples: usize,
    seed: u64,
    out_points: *mut EcglabEcgPoint,
    out_class: *mut EcglabClassification,
) -> EcglabStatus {
    if model.is_null() || out_points.is_null() || out_class.is_null() {
        return EcglabStatus::NullPointer;
    }
    if n_min > n_max {
        return invalid("n_min must not exceed n_max");
    }
    let ns: Vec<u32> = (n_min..=n_max).collect();
    match ecg::ecg_curve(&(*model).inner, &ns, samples, seed, Thresholds::default()) {
        Ok(curve) => {
            for (i, p) in curve.points.iter().enumerate() {
                *out_points.add(i) = EcglabEcgPoint {
                    n: p.n,
                    abar: p.abar,
                    se: p.stderr,
                    cn: p.cn,
                };
            }
            *out_class = match curve.classification {
                ecg::Classification::NonVanishing => EcglabClassification::NonVanishing,
                ecg::Classification::Vanishing => EcglabClassification::Vanishing,
                ecg::Classification::Inconclusive => EcglabClassification::Inconclusive,
            };
            EcglabStatus::Ok
        }
        Err(e) => fail(e),
    }
}

/// Exact ball size of `F_d`: the number of reduced words of length at most
/// `n`.  Fails with `CAP_EXCEEDED` if the count does not fit in 64 bits.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ecglab_ball_count(rank: u32, n: u32, out: *mut u64) -> EcglabStatus {
    if out.is_null() {
        return EcglabStatus::NullPointer;
    }
    if rank < 1 {
        return invalid("rank must be >= 1");
    }
    let count = ecglab::words::ball_size(rank, n);
    match u64::try_from(&count) {
        Ok(v) => {
            *out = v;
            EcglabStatus::Ok
        }
        Err(_) => {
            set_error("ball size exceeds 64 bits");
            EcglabStatus::CapExceeded
        }
    }
}

/// Exact subgroup growth count `V_H(1,1,m)` for a spec string.
///
/// # Safety
/// `subgroup` must be NUL-terminated; `out` valid.
#[no_mangle]
pub unsafe extern "C" fn ecglab_subgroup_ball_count(
    rank: u32,
    subgroup: *const c_char,
    m: u32,
    out: *mut u64,
) -> EcglabStatus {
    if out.is_null() || subgroup.is_null() {
        return EcglabStatus::NullPointer;
    }
    let Ok(spec_str) = CStr::from_ptr(subgroup).to_str() else {
        return invalid("subgroup spec is not valid UTF-8");
    };
    let spec: SubgroupSpec = match spec_str.parse() {
        Ok(s) => s,
        Err(e) => return fail(e),
    };
    match spec.ball_count(rank, m) {
        Ok(count) => match u64::try_from(&count) {
            Ok(v) => {
                *out = v;
                EcglabStatus::Ok
            }
            Err(_) => {
                set_error("subgroup count exceeds 64 bits");
                EcglabStatus::CapExceeded
            }
        },
        Err(e) => fail(e),
    }
}

/// Fraction of the radius-`r` sphere within tree distance `c` of the orbit
/// of `H ∩ B_r`, as a double.
///
/// # Safety
/// `subgroup` must be NUL-terminated; `out` valid.
#[no_mangle]
pub unsafe extern "C" fn ecglab_shell_mass(
    rank: u32,
    subgroup: *const c_char,
    r: u32,
    c: u32,
    out: *mut f64,
) -> EcglabStatus {
    if out.is_null() || subgroup.is_null() {
        return EcglabStatus::NullPointer;
    }
    let Ok(spec_str) = CStr::from_ptr(subgroup).to_str() else {
        return invalid("subgroup spec is not valid UTF-8");
    };
    let spec: SubgroupSpec = match spec_str.parse() {
        Ok(s) => s,
        Err(e) => return fail(e),
    };
    match ecglab::subgroup::shell_mass_f64(&spec, rank, r, c) {
        Ok(mass) => {
            *out = mass;
            EcglabStatus::Ok
        }
        Err(e) => fail(e),
    }
}

/// Fills `out` with `count` draws of a symmetric α-stable variable.
///
/// # Safety
/// `out` must point to `count` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn ecglab_sample_sas(
    alpha: f64,
    scale: f64,
    seed: u64,
    count: usize,
    out: *mut f64,
) -> EcglabStatus {
    if out.is_null() {
        return EcglabStatus::NullPointer;
    }
    let params = match stable::StableParams::new(alpha, scale) {
        Ok(p) => p,
        Err(e) => return fail(e),
    };
    let mut rng = ecglab::seeding::stream(seed, ecglab::seeding::domain::STABLE_DIRECT, 0);
    for i in 0..count {
        *out.add(i) = stable::sample_sas(&params, &mut rng);
    }
    EcglabStatus::Ok
}

/// The series constant `c_alpha`.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ecglab_c_alpha(alpha: f64, out: *mut f64) -> EcglabStatus {
    if out.is_null() {
        return EcglabStatus::NullPointer;
    }
    match stable::c_alpha(alpha) {
        Ok(v) => {
            *out = v;
            EcglabStatus::Ok
        }
        Err(e) => fail(e),
    }
}

/// Median of `M_n / V_n^{1/alpha}` over `replicates` simulated partial
/// maxima of the stable field, one radius per entry of `radii`.
///
/// # Safety
/// `model` must be valid; `radii` must hold `radii_len` entries; `out`
/// must hold `radii_len` doubles.
#[no_mangle]
pub unsafe extern "C" fn ecglab_maxima_medians(
    model: *const EcglabModel,
    radii: *const u32,
    radii_len: usize,
    alpha: f64,
    terms: usize,
    replicates: usize,
    seed: u64,
    out: *mut f64,
) -> EcglabStatus {
    if model.is_null() || radii.is_null() || out.is_null() {
        return EcglabStatus::NullPointer;
    }
    let radii = std::slice::from_raw_parts(radii, radii_len);
    for (i, &n) in radii.iter().enumerate() {
        match stable::maxima_experiment(&(*model).inner, n, alpha, terms, replicates, seed) {
            Ok(sample) => {
                *out.add(i) = ecglab::stats::median(&sample.over_vn_alpha);
            }
            Err(e) => return fail(e),
        }
    }
    EcglabStatus::Ok
}
