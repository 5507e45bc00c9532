#ifndef SYMGROWTH_H
#define SYMGROWTH_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes. The first four match the command-line exit codes.
 */
typedef enum SgStatus {
  SG_STATUS_OK = 0,
  /**
   * The computation finished but a certificate did not verify.
   */
  SG_STATUS_UNVERIFIED = 1,
  SG_STATUS_INVALID_INPUT = 2,
  SG_STATUS_RESOURCE_EXCEEDED = 3,
  SG_STATUS_NULL_POINTER = 4,
  SG_STATUS_INTERNAL = 5,
} SgStatus;

typedef struct SgCertificate SgCertificate;

/**
 * An instance spec together with its generated set.
 */
typedef struct SgInstance SgInstance;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *sg_version(void);

/**
 * Message for the last failed call on this thread. Valid until the next
 * failing call on the same thread.
 */
const char *sg_last_error_message(void);

/**
 * Parses instance JSON (`{"group": ..., "set": ...}`) and generates its set.
 *
 * # Safety
 * `json` must be a NUL-terminated string and `out` a valid pointer.
 */
enum SgStatus sg_instance_load(const char *json, struct SgInstance **out);

/**
 * # Safety
 * `inst` must come from [`sg_instance_load`] or be null.
 */
void sg_instance_free(struct SgInstance *inst);

/**
 * # Safety
 * `inst` must be a live instance handle and `out` a valid pointer.
 */
enum SgStatus sg_instance_size(const struct SgInstance *inst, uint64_t *out);

/**
 * Doubling statistics as canonical JSON.
 *
 * # Safety
 * `inst` must be a live instance handle and `out` a valid pointer.
 */
enum SgStatus sg_doubling_json(const struct SgInstance *inst, char **out);

/**
 * `Sym_eta(A)` as a JSON array of element encodings; `eta` is `"p/q"`.
 *
 * # Safety
 * `inst` must be a live instance handle, `eta` a NUL-terminated string and
 * `out` a valid pointer.
 */
enum SgStatus sg_sym_json(const struct SgInstance *inst, const char *eta, char **out);

/**
 * Builds a certificate at parameter `k`. Returns `SG_STATUS_UNVERIFIED`
 * (with the certificate still written to `out`) if its checks fail.
 *
 * # Safety
 * `inst` must be a live instance handle and `out` a valid pointer.
 */
enum SgStatus sg_run(const struct SgInstance *inst, uint32_t k, struct SgCertificate **out);

/**
 * # Safety
 * `json` must be a NUL-terminated string and `out` a valid pointer.
 */
enum SgStatus sg_certificate_from_json(const char *json, struct SgCertificate **out);

/**
 * 1 if the certificate's own checks all passed, 0 otherwise (or if null).
 *
 * # Safety
 * `cert` must be a live certificate handle or null.
 */
int32_t sg_certificate_verified(const struct SgCertificate *cert);

/**
 * Canonical certificate JSON.
 *
 * # Safety
 * `cert` must be a live certificate handle and `out` a valid pointer.
 */
enum SgStatus sg_certificate_to_json(const struct SgCertificate *cert, char **out);

/**
 * # Safety
 * `cert` must come from this library or be null.
 */
void sg_certificate_free(struct SgCertificate *cert);

/**
 * Independent recomputation of `cert` against `inst`. Writes the report
 * JSON to `report` (may be null) and returns `SG_STATUS_OK` or
 * `SG_STATUS_UNVERIFIED`.
 *
 * # Safety
 * `cert` and `inst` must be live handles; `report` must be null or valid.
 */
enum SgStatus sg_verify(const struct SgCertificate *cert,
                        const struct SgInstance *inst,
                        char **report);

/**
 * Almost-invariant pair at parameter `k` as JSON.
 *
 * # Safety
 * `inst` must be a live instance handle and `out` a valid pointer.
 */
enum SgStatus sg_almost_invariant_json(const struct SgInstance *inst, uint32_t k, char **out);

/**
 * Releases a string returned by this library.
 *
 * # Safety
 * `s` must come from this library or be null.
 */
void sg_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SYMGROWTH_H */
