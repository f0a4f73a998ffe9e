/* C interface for the srtc solver. Generated by cbindgen; do not edit. */

#ifndef SRTC_H
#define SRTC_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/*
 Status codes returned by every fallible entry point.
 */
typedef enum SrtcStatus {
  SRTC_STATUS_OK = 0,
  SRTC_STATUS_NULL_ARGUMENT = 1,
  SRTC_STATUS_INVALID_ARGUMENT = 2,
  SRTC_STATUS_DIMENSION_MISMATCH = 3,
  SRTC_STATUS_IO_ERROR = 4,
  SRTC_STATUS_FORMAT_ERROR = 5,
  SRTC_STATUS_NUMERICAL_ERROR = 6,
  SRTC_STATUS_EMPTY_MASK = 7,
  SRTC_STATUS_UTF8_ERROR = 8,
} SrtcStatus;

/*
 Opaque solve-result handle holding the recovered tensor, the smooth
 foreground, the low-rank background, and the iteration trace.
 */
typedef struct SrtcResult SrtcResult;

/*
 Opaque dense order-3 tensor handle.
 */
typedef struct SrtcTensor SrtcTensor;

/*
 Solver options; zero ranks select the default rule
 `(ceil(0.8 H), ceil(0.8 W), 1)`.
 */
typedef struct SrtcOptions {
  double lambda;
  double rho;
  uint32_t rank1;
  uint32_t rank2;
  uint32_t rank3;
  double outer_tol;
  uint32_t outer_max_iter;
  double admm_gamma;
  double admm_c1;
  double admm_c2;
  double admm_tol;
  uint32_t admm_max_iter;
  uint64_t seed;
} SrtcOptions;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Default options mirroring the library defaults.
 */
struct SrtcOptions srtc_options_default(void);

/*
 Creates a tensor of dims `(i1, i2, i3)`. `data` may be null for a zero
 tensor; otherwise it must point to `i1 * i2 * i3` doubles, first index
 fastest.

 # Safety
 `data`, when non-null, must be valid for `i1 * i2 * i3` reads; `out` must
 be a valid pointer.
 */
enum SrtcStatus srtc_tensor_create(uint32_t i1,
                                   uint32_t i2,
                                   uint32_t i3,
                                   const double *data,
                                   struct SrtcTensor **out);

/*
 Reads an SRT1 file.

 # Safety
 `path` must be a valid NUL-terminated string and `out` a valid pointer.
 */
enum SrtcStatus srtc_tensor_read(const char *path, struct SrtcTensor **out);

/*
 Writes a tensor as an SRT1 file.

 # Safety
 `tensor` must be a live handle and `path` a valid NUL-terminated string.
 */
enum SrtcStatus srtc_tensor_write(const struct SrtcTensor *tensor, const char *path);

/*
 Dims of a tensor handle.

 # Safety
 All pointers must be valid.
 */
enum SrtcStatus srtc_tensor_dims(const struct SrtcTensor *tensor,
                                 uint32_t *i1,
                                 uint32_t *i2,
                                 uint32_t *i3);

/*
 Borrowed pointer to the tensor payload (`i1 * i2 * i3` doubles, first
 index fastest); valid until the handle is freed. Null for a null handle.

 # Safety
 `tensor` must be a live handle or null.
 */
const double *srtc_tensor_data(const struct SrtcTensor *tensor);

/*
 Releases a tensor handle; null is a no-op.

 # Safety
 `tensor` must be a handle returned by this library, not yet freed.
 */
void srtc_tensor_free(struct SrtcTensor *tensor);

/*
 Runs the solver. `mask` is a 0/1 tensor congruent with `video`; `options`
 may be null for defaults.

 # Safety
 `video` and `mask` must be live handles, `out` a valid pointer, and
 `options` either null or a valid pointer.
 */
enum SrtcStatus srtc_solve(const struct SrtcTensor *video,
                           const struct SrtcTensor *mask,
                           const struct SrtcOptions *options,
                           struct SrtcResult **out);

/*
 Borrowed handle to the recovered tensor; lifetime tied to the result.

 # Safety
 `result` must be a live handle or null.
 */
const struct SrtcTensor *srtc_result_x(const struct SrtcResult *result);

/*
 Borrowed handle to the smooth foreground; lifetime tied to the result.

 # Safety
 `result` must be a live handle or null.
 */
const struct SrtcTensor *srtc_result_s(const struct SrtcResult *result);

/*
 Borrowed handle to the low-rank background; lifetime tied to the result.

 # Safety
 `result` must be a live handle or null.
 */
const struct SrtcTensor *srtc_result_l(const struct SrtcResult *result);

/*
 Number of outer iterations performed.

 # Safety
 `result` must be a live handle or null.
 */
uint32_t srtc_result_iterations(const struct SrtcResult *result);

/*
 Per-iteration diagnostics for 0-based `iteration`; any output pointer may
 be null to skip that field.

 # Safety
 `result` must be a live handle; output pointers must be valid or null.
 */
enum SrtcStatus srtc_result_trace(const struct SrtcResult *result,
                                  uint32_t iteration,
                                  double *objective,
                                  double *relchg_x,
                                  double *relchg_s,
                                  double *relchg_l,
                                  uint32_t *inner_iters);

/*
 Releases a result handle; null is a no-op.

 # Safety
 `result` must be a handle returned by `srtc_solve`, not yet freed.
 */
void srtc_result_free(struct SrtcResult *result);

/*
 Static description of a status code.
 */
const char *srtc_status_message(enum SrtcStatus status);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SRTC_H */
