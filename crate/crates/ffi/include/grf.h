/* C interface to the force-regression runtime. Generated; do not edit. */

#ifndef GRF_H
#define GRF_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result code for every fallible call in this API.
 */
typedef enum GrfStatus {
  /**
   * Success.
   */
  GrfStatusOk = 0,
  /**
   * A required pointer argument was null.
   */
  GrfStatusNullArgument = 1,
  /**
   * A string argument was not valid UTF-8.
   */
  GrfStatusInvalidUtf8 = 2,
  /**
   * The checkpoint could not be read or failed verification.
   */
  GrfStatusLoadFailed = 3,
  /**
   * An input buffer had the wrong length for the model.
   */
  GrfStatusInvalidInput = 4,
  /**
   * The computation itself failed; see `grf_last_error_message`.
   */
  GrfStatusComputeFailed = 5,
} GrfStatus;

/**
 * Opaque trained-model handle (a loaded checkpoint).
 */
typedef struct GrfModel GrfModel;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message describing the calling thread's most recent failure. Borrowed:
 * valid until this thread's next call into the library. Never null.
 */
const char *grf_last_error_message(void);

/**
 * Library version as a static nul-terminated string.
 */
const char *grf_version(void);

/**
 * Load a checkpoint file produced by the `grf train` command.
 *
 * # Safety
 * `path` must point to a nul-terminated string and `out_model` to writable
 * storage for one pointer. On success `*out_model` owns the model and must
 * be released with [`grf_model_free`].
 */
enum GrfStatus grf_model_load(const char *path, struct GrfModel **out_model);

/**
 * Release a model returned by [`grf_model_load`]. Null is a no-op.
 *
 * # Safety
 * `model` must be a pointer previously returned by [`grf_model_load`] and
 * not yet freed.
 */
void grf_model_free(struct GrfModel *model);

/**
 * Window length in frames the model was trained with. 0 if `model` is null.
 *
 * # Safety
 * `model` must be a live pointer from [`grf_model_load`].
 */
uintptr_t grf_model_frames(const struct GrfModel *model);

/**
 * Number of skeleton joints per frame. 0 if `model` is null.
 *
 * # Safety
 * `model` must be a live pointer from [`grf_model_load`].
 */
uintptr_t grf_model_joints(const struct GrfModel *model);

/**
 * Coordinates per joint (2 for camera keypoints, 3 for lifted poses).
 * 0 if `model` is null.
 *
 * # Safety
 * `model` must be a live pointer from [`grf_model_load`].
 */
uintptr_t grf_model_in_channels(const struct GrfModel *model);

/**
 * Total f64 values one prediction window must contain:
 * `frames * joints * in_channels`.
 *
 * # Safety
 * `model` must be a live pointer from [`grf_model_load`].
 */
uintptr_t grf_model_window_len(const struct GrfModel *model);

/**
 * Predict the six plate-force components, in newtons, for one window.
 *
 * `window` is row-major `[frames][joints * in_channels]` with keypoint
 * coordinates normalized to [-1, 1] (2D) or meters (3D), exactly as during
 * training. `window_len` must equal [`grf_model_window_len`]. `out_forces`
 * receives 6 values: plate-1 x/y/z then plate-2 x/y/z.
 *
 * # Safety
 * `model` must be live; `window` must reference `window_len` readable f64
 * values; `out_forces` must reference 6 writable f64 values.
 */
enum GrfStatus grf_model_predict(const struct GrfModel *model,
                                 const double *window,
                                 uintptr_t window_len,
                                 double *out_forces);

/**
 * Mean k-peaks distance between two equal-length force signals (newtons):
 * the evaluation metric combining per-peak frame offset and magnitude error.
 * Writes the result to `out_value`.
 *
 * # Safety
 * `predicted` and `truth` must reference `len` readable f64 values each;
 * `out_value` must reference one writable f64.
 */
enum GrfStatus grf_mean_k_peaks(const double *predicted,
                                const double *truth,
                                uintptr_t len,
                                uintptr_t k,
                                uintptr_t min_peak_distance,
                                double *out_value);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* GRF_H */
