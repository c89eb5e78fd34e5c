#ifndef MESHSTEG_H
#define MESHSTEG_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum MstegFormat {
  MSTEG_FORMAT_OFF = 0,
  MSTEG_FORMAT_PLY = 1,
} MstegFormat;

typedef enum MstegProfile {
  MSTEG_PROFILE_IFPD_CS = 0,
  MSTEG_PROFILE_IFPD_S1 = 1,
  MSTEG_PROFILE_IFPD_S2 = 2,
  MSTEG_PROFILE_IFPD_S3 = 3,
  MSTEG_PROFILE_VND = 4,
  MSTEG_PROFILE_GCD = 5,
  MSTEG_PROFILE_DIHEDRAL = 6,
} MstegProfile;

typedef enum MstegStatus {
  MSTEG_STATUS_OK = 0,
  MSTEG_STATUS_NULL_POINTER = 1,
  MSTEG_STATUS_PARSE = 2,
  MSTEG_STATUS_CAPACITY = 3,
  MSTEG_STATUS_PARAMS_MISMATCH = 4,
  MSTEG_STATUS_INVALID_ARGUMENT = 5,
  MSTEG_STATUS_INTERNAL = 6,
} MstegStatus;

// Opaque mesh handle.
typedef struct MstegMesh MstegMesh;

// Opaque params handle.
typedef struct MstegParams MstegParams;

// Embedding knobs. Start from [`msteg_embed_options_default`].
typedef struct MstegEmbedOptions {
  // Bits per vertex used to pick the change set; `<= 0` derives it from
  // the message length.
  double alpha;
  // Decimal digits; negative means detect from the cover.
  int32_t k_star;
  enum MstegProfile profile;
  // Syndrome-trellis constraint height, 6..=15.
  uint32_t stc_height;
  uint64_t seed;
} MstegEmbedOptions;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failed call on this thread, or null. Valid until the
// next call on the same thread.
const char *msteg_last_error(void);

struct MstegEmbedOptions msteg_embed_options_default(void);

// Parse OFF or PLY text of `len` bytes.
//
// # Safety
// `text` must point to `len` readable bytes and `out` must be writable.
enum MstegStatus msteg_mesh_parse(const uint8_t *text,
                                  size_t len,
                                  enum MstegFormat format,
                                  struct MstegMesh **out);

// Read a mesh file; the format follows the extension.
//
// # Safety
// `path` must be a NUL-terminated string and `out` writable.
enum MstegStatus msteg_mesh_read(const char *path, struct MstegMesh **out);

// Render a mesh with `decimals` fixed fractional digits. Free the result
// with [`msteg_buffer_free`].
//
// # Safety
// `mesh` must come from this library; `out` and `out_len` writable.
enum MstegStatus msteg_mesh_write(const struct MstegMesh *mesh,
                                  enum MstegFormat format,
                                  uint32_t decimals,
                                  uint8_t **out,
                                  size_t *out_len);

// Vertex count, or 0 for a null handle.
//
// # Safety
// `mesh` must be null or come from this library.
size_t msteg_mesh_vertex_count(const struct MstegMesh *mesh);

// Copy the vertex coordinates, `3 * vertex_count` doubles, into `xyz`.
//
// # Safety
// `xyz` must have room for `cap` doubles.
enum MstegStatus msteg_mesh_vertices(const struct MstegMesh *mesh, double *xyz, size_t cap);

// # Safety
// `mesh` must be null or come from this library, and not be used again.
void msteg_mesh_free(struct MstegMesh *mesh);

// Parse a params file.
//
// # Safety
// `text` must be NUL-terminated and `out` writable.
enum MstegStatus msteg_params_parse(const char *text, struct MstegParams **out);

// Serialize params; free with [`msteg_string_free`].
//
// # Safety
// `params` must come from this library and `out` be writable.
enum MstegStatus msteg_params_to_text(const struct MstegParams *params, char **out);

// Message length in bytes carried by these params.
//
// # Safety
// `params` must be null or come from this library.
size_t msteg_params_message_bytes(const struct MstegParams *params);

// # Safety
// `params` must be null or come from this library, and not be used again.
void msteg_params_free(struct MstegParams *params);

// Hide `len` bytes in `cover`. On success `*stego` and `*params` are new
// handles owned by the caller.
//
// # Safety
// Pointers must be valid as described; `options` may be null for defaults.
enum MstegStatus msteg_embed(const struct MstegMesh *cover,
                             const uint8_t *message,
                             size_t len,
                             const struct MstegEmbedOptions *options,
                             struct MstegMesh **stego,
                             struct MstegParams **params);

// Recover the message. Free the buffer with [`msteg_buffer_free`].
//
// # Safety
// Handles must come from this library; `out` and `out_len` writable.
enum MstegStatus msteg_extract(const struct MstegMesh *stego,
                               const struct MstegParams *params,
                               uint8_t **out,
                               size_t *out_len);

// # Safety
// `buf`/`len` must be exactly what this library handed out, or null.
void msteg_buffer_free(uint8_t *buf, size_t len);

// # Safety
// `s` must be a string from this library, or null.
void msteg_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* MESHSTEG_H */
