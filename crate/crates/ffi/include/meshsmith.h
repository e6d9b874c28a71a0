/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#ifndef MESHSMITH_H
#define MESHSMITH_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result codes.
 */
typedef enum MsStatus {
  MS_STATUS_OK = 0,
  MS_STATUS_NULL_POINTER = 1,
  MS_STATUS_INVALID_ARGUMENT = 2,
  MS_STATUS_INVALID_MESH = 3,
  MS_STATUS_IO = 4,
  MS_STATUS_UNKNOWN_SMOOTHER = 5,
  MS_STATUS_MISSING_MODEL = 6,
  MS_STATUS_BAD_MODEL = 7,
  MS_STATUS_BUFFER_TOO_SMALL = 8,
  MS_STATUS_INTERNAL = 9,
} MsStatus;

/**
 * Opaque triangle mesh.
 */
typedef struct MsMesh MsMesh;

/**
 * Opaque smoother, possibly holding a loaded model.
 */
typedef struct MsSmoother MsSmoother;

/**
 * Whole-mesh quality summary. Angles are in degrees.
 */
typedef struct MsQuality {
  double min_angle_min;
  double min_angle_mean;
  double max_angle_max;
  double max_angle_mean;
  double inv_ar_min;
  double inv_ar_mean;
  double weighted_quality;
  size_t element_count;
} MsQuality;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread, or null. Valid until the
 * next failing call on the same thread.
 */
const char *ms_last_error_message(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *ms_version(void);

/**
 * Builds a mesh from `node_count` interleaved `x, y` pairs and
 * `triangle_count` counter-clockwise index triples. `fixed` holds one flag
 * per node or is null; boundary nodes are always fixed.
 *
 * # Safety
 * Array pointers must be valid for the stated lengths; `out` must be writable.
 */
enum MsStatus ms_mesh_new(const double *xy,
                          size_t node_count,
                          const uint32_t *triangles,
                          size_t triangle_count,
                          const uint8_t *fixed,
                          struct MsMesh **out);

/**
 * Reads an `.m2d` mesh file.
 *
 * # Safety
 * `path` must be a NUL-terminated string; `out` must be writable.
 */
enum MsStatus ms_mesh_read(const char *path, struct MsMesh **out);

/**
 * Writes the mesh as an `.m2d` file.
 *
 * # Safety
 * `mesh` must come from this library; `path` must be NUL-terminated.
 */
enum MsStatus ms_mesh_write(const struct MsMesh *mesh, const char *path);

/**
 * Releases a mesh. Null is ignored.
 *
 * # Safety
 * `mesh` must come from this library and not be used afterwards.
 */
void ms_mesh_free(struct MsMesh *mesh);

/**
 * Number of nodes, or 0 for a null handle.
 *
 * # Safety
 * `mesh` must be null or come from this library.
 */
size_t ms_mesh_node_count(const struct MsMesh *mesh);

/**
 * Number of triangles, or 0 for a null handle.
 *
 * # Safety
 * `mesh` must be null or come from this library.
 */
size_t ms_mesh_triangle_count(const struct MsMesh *mesh);

/**
 * Copies the node coordinates as interleaved `x, y` pairs into `xy`, which
 * holds `len` doubles.
 *
 * # Safety
 * `xy` must be writable for `len` doubles.
 */
enum MsStatus ms_mesh_copy_nodes(const struct MsMesh *mesh, double *xy, size_t len);

/**
 * Number of elements with non-positive area, or 0 for a null handle.
 *
 * # Safety
 * `mesh` must be null or come from this library.
 */
size_t ms_mesh_negative_elements(const struct MsMesh *mesh);

/**
 * Computes the quality summary of `mesh`.
 *
 * # Safety
 * `out` must be writable.
 */
enum MsStatus ms_mesh_quality(const struct MsMesh *mesh, struct MsQuality *out);

/**
 * Renders the mesh to an SVG file.
 *
 * # Safety
 * `mesh` must come from this library; `path` must be NUL-terminated.
 */
enum MsStatus ms_mesh_render_svg(const struct MsMesh *mesh, const char *path);

/**
 * Creates a smoother by name: `laplacian`, `smart-laplacian`, `angle`,
 * `cvt`, `optim`, `nn` or `gmsnet`. `model_path` is required for the last
 * two and ignored otherwise; it may be null.
 *
 * # Safety
 * `name` and a non-null `model_path` must be NUL-terminated; `out` must be writable.
 */
enum MsStatus ms_smoother_new(const char *name, const char *model_path, struct MsSmoother **out);

/**
 * Releases a smoother. Null is ignored.
 *
 * # Safety
 * `smoother` must come from this library and not be used afterwards.
 */
void ms_smoother_free(struct MsSmoother *smoother);

/**
 * Smooths `mesh` in place for at most `max_sweeps` sweeps. The executed
 * sweep count is written to `sweeps_out` unless it is null.
 *
 * # Safety
 * Handles must come from this library; `sweeps_out` must be null or writable.
 */
enum MsStatus ms_smooth(struct MsMesh *mesh,
                        const struct MsSmoother *smoother,
                        uint32_t max_sweeps,
                        uint32_t *sweeps_out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* MESHSMITH_H */
