//! C ABI over the force-regression core: load a trained checkpoint, query
//! its input geometry, and predict per-plate forces for one input window.
//!
//! Conventions:
//! - Every fallible call returns a `GrfStatus`; `GRF_STATUS_OK` is 0.
//! - On failure, `grf_last_error_message()` returns a UTF-8 description that
//!   stays valid until the calling thread's next call into this library.
//! - `GrfModel` is an opaque handle owned by the caller; release it with
//!   `grf_model_free`. All other returned pointers are borrowed.

use grf_core::model::{load_checkpoint, predict_force, Checkpoint};
use grf_core::tensor::Tensor;
use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;

/// Result code for every fallible call in this API.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GrfStatus {
    /// Success.
    GrfStatusOk = 0,
    /// A required pointer argument was null.
    GrfStatusNullArgument = 1,
    /// A string argument was not valid UTF-8.
    GrfStatusInvalidUtf8 = 2,
    /// The checkpoint could not be read or failed verification.
    GrfStatusLoadFailed = 3,
    /// An input buffer had the wrong length for the model.
    GrfStatusInvalidInput = 4,
    /// The computation itself failed; see `grf_last_error_message`.
    GrfStatusComputeFailed = 5,
}

/// Opaque trained-model handle (a loaded checkpoint).
pub struct GrfModel {
    ckpt: Checkpoint,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(message: String) {
    let sanitized = message.replace('\0', " ");
    LAST_ERROR.with(|slot| {
        *slot.borrow_mut() = CString::new(sanitized).unwrap_or_default();
    });
}

fn fail(status: GrfStatus, message: String) -> GrfStatus {
    set_error(message);
    status
}

/// Run `body`, translating panics into `GrfStatusComputeFailed` so they can
/// never unwind across the C boundary.
fn guarded(body: impl FnOnce() -> GrfStatus) -> GrfStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(status) => status,
        Err(_) => fail(
            GrfStatus::GrfStatusComputeFailed,
            "internal panic".to_string(),
        ),
    }
}

/// Message describing the calling thread's most recent failure. Borrowed:
/// valid until this thread's next call into the library. Never null.
#[no_mangle]
pub extern "C" fn grf_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ptr())
}

/// Library version as a static nul-terminated string.
#[no_mangle]
pub extern "C" fn grf_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Load a checkpoint file produced by the `grf train` command.
///
/// # Safety
/// `path` must point to a nul-terminated string and `out_model` to writable
/// storage for one pointer. On success `*out_model` owns the model and must
/// be released with [`grf_model_free`].
#[no_mangle]
pub unsafe extern "C" fn grf_model_load(
    path: *const c_char,
    out_model: *mut *mut GrfModel,
) -> GrfStatus {
    guarded(|| {
        if path.is_null() || out_model.is_null() {
            return fail(
                GrfStatus::GrfStatusNullArgument,
                "path and out_model must be non-null".into(),
            );
        }
        let path = match unsafe { CStr::from_ptr(path) }.to_str() {
            Ok(s) => s,
            Err(e) => return fail(GrfStatus::GrfStatusInvalidUtf8, format!("path: {e}")),
        };
        match load_checkpoint(Path::new(path)) {
            Ok(ckpt) => {
                unsafe { *out_model = Box::into_raw(Box::new(GrfModel { ckpt })) };
                GrfStatus::GrfStatusOk
            }
            Err(e) => fail(GrfStatus::GrfStatusLoadFailed, e.to_string()),
        }
    })
}

/// Release a model returned by [`grf_model_load`]. Null is a no-op.
///
/// # Safety
/// `model` must be a pointer previously returned by [`grf_model_load`] and
/// not yet freed.
#[no_mangle]
pub unsafe extern "C" fn grf_model_free(model: *mut GrfModel) {
    if !model.is_null() {
        drop(unsafe { Box::from_raw(model) });
    }
}

/// Window length in frames the model was trained with. 0 if `model` is null.
///
/// # Safety
/// `model` must be a live pointer from [`grf_model_load`].
#[no_mangle]
pub unsafe extern "C" fn grf_model_frames(model: *const GrfModel) -> usize {
    if model.is_null() {
        return 0;
    }
    unsafe { &*model }.ckpt.model.config.frames
}

/// Number of skeleton joints per frame. 0 if `model` is null.
///
/// # Safety
/// `model` must be a live pointer from [`grf_model_load`].
#[no_mangle]
pub unsafe extern "C" fn grf_model_joints(model: *const GrfModel) -> usize {
    if model.is_null() {
        return 0;
    }
    unsafe { &*model }.ckpt.model.config.joints
}

/// Coordinates per joint (2 for camera keypoints, 3 for lifted poses).
/// 0 if `model` is null.
///
/// # Safety
/// `model` must be a live pointer from [`grf_model_load`].
#[no_mangle]
pub unsafe extern "C" fn grf_model_in_channels(model: *const GrfModel) -> usize {
    if model.is_null() {
        return 0;
    }
    unsafe { &*model }.ckpt.model.config.in_channels
}

/// Total f64 values one prediction window must contain:
/// `frames * joints * in_channels`.
///
/// # Safety
/// `model` must be a live pointer from [`grf_model_load`].
#[no_mangle]
pub unsafe extern "C" fn grf_model_window_len(model: *const GrfModel) -> usize {
    if model.is_null() {
        return 0;
    }
    let cfg = &unsafe { &*model }.ckpt.model.config;
    cfg.frames * cfg.joints * cfg.in_channels
}

/// Predict the six plate-force components, in newtons, for one window.
///
/// `window` is row-major `[frames][joints * in_channels]` with keypoint
/// coordinates normalized to [-1, 1] (2D) or meters (3D), exactly as during
/// training. `window_len` must equal [`grf_model_window_len`]. `out_forces`
/// receives 6 values: plate-1 x/y/z then plate-2 x/y/z.
///
/// # Safety
/// `model` must be live; `window` must reference `window_len` readable f64
/// values; `out_forces` must reference 6 writable f64 values.
#[no_mangle]
pub unsafe extern "C" fn grf_model_predict(
    model: *const GrfModel,
    window: *const f64,
    window_len: usize,
    out_forces: *mut f64,
) -> GrfStatus {
    guarded(|| {
        if model.is_null() || window.is_null() || out_forces.is_null() {
            return fail(
                GrfStatus::GrfStatusNullArgument,
                "model, window and out_forces must be non-null".into(),
            );
        }
        let handle = unsafe { &*model };
        let cfg = &handle.ckpt.model.config;
        let expected = cfg.frames * cfg.joints * cfg.in_channels;
        if window_len != expected {
            return fail(
                GrfStatus::GrfStatusInvalidInput,
                format!("window_len {window_len} != frames*joints*channels {expected}"),
            );
        }
        let data = unsafe { std::slice::from_raw_parts(window, window_len) }.to_vec();
        let tensor = match Tensor::new(&[cfg.frames, cfg.joints * cfg.in_channels], data) {
            Ok(t) => t,
            Err(e) => return fail(GrfStatus::GrfStatusInvalidInput, e.to_string()),
        };
        match predict_force(&handle.ckpt.model, &tensor) {
            Ok(per_kg) => {
                let scale = handle.ckpt.train_mean_mass_kg;
                for (i, v) in per_kg.iter().enumerate() {
                    unsafe { *out_forces.add(i) = v * scale };
                }
                GrfStatus::GrfStatusOk
            }
            Err(e) => fail(GrfStatus::GrfStatusComputeFailed, e.to_string()),
        }
    })
}

/// Mean k-peaks distance between two equal-length force signals (newtons):
/// the evaluation metric combining per-peak frame offset and magnitude error.
/// Writes the result to `out_value`.
///
/// # Safety
/// `predicted` and `truth` must reference `len` readable f64 values each;
/// `out_value` must reference one writable f64.
#[no_mangle]
pub unsafe extern "C" fn grf_mean_k_peaks(
    predicted: *const f64,
    truth: *const f64,
    len: usize,
    k: usize,
    min_peak_distance: usize,
    out_value: *mut f64,
) -> GrfStatus {
    guarded(|| {
        if predicted.is_null() || truth.is_null() || out_value.is_null() {
            return fail(
                GrfStatus::GrfStatusNullArgument,
                "predicted, truth and out_value must be non-null".into(),
            );
        }
        let pred = unsafe { std::slice::from_raw_parts(predicted, len) };
        let gt = unsafe { std::slice::from_raw_parts(truth, len) };
        match grf_core::metrics::mean_k_peaks(pred, gt, k, min_peak_distance) {
            Ok(v) => {
                unsafe { *out_value = v };
                GrfStatus::GrfStatusOk
            }
            Err(e) => fail(GrfStatus::GrfStatusComputeFailed, e.to_string()),
        }
    })
}
