#ifndef QKDAUTH_H
#define QKDAUTH_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Signature parameter sets.
 */
#define QKDAUTH_PARAMS_REFERENCE 1

#define QKDAUTH_PARAMS_DESK 2

/**
 * Encoded tag: 128-bit value, key offset, sequence number.
 */
#define QKDAUTH_MAC_TAG_LEN 32

#define QKDAUTH_DIGEST_LEN 32

typedef enum QkdauthStatus {
  QKDAUTH_OK = 0,
  QKDAUTH_NULL_POINTER = 1,
  QKDAUTH_INVALID_ARGUMENT = 2,
  QKDAUTH_CRYPTO_ERROR = 3,
  QKDAUTH_POOL_EXHAUSTED = 4,
  QKDAUTH_BUFFER_TOO_SMALL = 5,
  QKDAUTH_PANIC = 6,
} QkdauthStatus;

/**
 * Opaque signing keypair.
 */
typedef struct QkdauthKeypair QkdauthKeypair;

/**
 * Opaque pre-shared key pool for one direction of use.
 */
typedef struct QkdauthPool QkdauthPool;

/**
 * Link description for key-rate queries.
 */
typedef struct QkdauthLinkParams {
  double length_km;
  double attenuation_db_per_km;
  double pulse_rate_hz;
  double mu;
  double nu;
  double vacuum;
  double detector_efficiency;
  double dark_count;
  double misalignment;
  double sift_factor;
  double ec_efficiency;
  double block_size;
  double finite_key_epsilon;
} QkdauthLinkParams;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Copies the last error message of this thread, NUL-terminated and
 * truncated to `cap`. Returns the full message length without the NUL.
 *
 * # Safety
 * `buf` must be valid for `cap` bytes or null when `cap` is 0.
 */
size_t qkdauth_last_error_message(char *buf, size_t cap);

/**
 * NUL-terminated crate version, static storage.
 */
const char *qkdauth_version(void);

/**
 * SM3 digest of `data` into `out[32]`.
 *
 * # Safety
 * `data` must be valid for `len` bytes; `out` for 32 bytes.
 */
enum QkdauthStatus qkdauth_sm3(const uint8_t *data, size_t len, uint8_t *out);

/**
 * Encoded sizes for a parameter set; 0 for an unknown set.
 */
size_t qkdauth_signature_len(uint16_t params);

size_t qkdauth_public_key_len(uint16_t params);

/**
 * Deterministic keypair from a 32-byte seed.
 *
 * # Safety
 * `seed` must be valid for 32 bytes; `out` must be a valid pointer.
 */
enum QkdauthStatus qkdauth_keypair_generate(uint16_t params,
                                            const uint8_t *seed,
                                            struct QkdauthKeypair **out);

/**
 * # Safety
 * `kp` must come from `qkdauth_keypair_generate` and not be used afterwards.
 */
void qkdauth_keypair_free(struct QkdauthKeypair *kp);

/**
 * Encoded public key.
 *
 * # Safety
 * `kp` must be a live handle; `out` valid for `cap` bytes; `written` valid.
 */
enum QkdauthStatus qkdauth_keypair_public_key(const struct QkdauthKeypair *kp,
                                              uint8_t *out,
                                              size_t cap,
                                              size_t *written);

/**
 * Signs `msg`. The signing randomness is derived from `rng_seed`.
 *
 * # Safety
 * `kp` must be a live handle; buffers must match their lengths.
 */
enum QkdauthStatus qkdauth_sign(const struct QkdauthKeypair *kp,
                                const uint8_t *msg,
                                size_t msg_len,
                                uint64_t rng_seed,
                                uint8_t *out,
                                size_t cap,
                                size_t *written);

/**
 * Sets `*valid` to 1 if `sig` is a valid signature on `msg` under the
 * encoded public key, 0 otherwise. Malformed keys are an error; malformed
 * signatures just fail to verify.
 *
 * # Safety
 * Buffers must match their lengths; `valid` must be a valid pointer.
 */
enum QkdauthStatus qkdauth_verify(uint16_t params,
                                  const uint8_t *pk,
                                  size_t pk_len,
                                  const uint8_t *msg,
                                  size_t msg_len,
                                  const uint8_t *sig,
                                  size_t sig_len,
                                  int32_t *valid);

/**
 * Pool over `len` bytes of shared key. Each peer keeps its own pool built
 * from the same bytes.
 *
 * # Safety
 * `key` must be valid for `len` bytes; `out` must be a valid pointer.
 */
enum QkdauthStatus qkdauth_pool_new(const uint8_t *key, size_t len, struct QkdauthPool **out);

/**
 * # Safety
 * `pool` must come from `qkdauth_pool_new` and not be used afterwards.
 */
void qkdauth_pool_free(struct QkdauthPool *pool);

/**
 * Unused key bits left in the pool.
 *
 * # Safety
 * `pool` must be a live handle or null.
 */
uint64_t qkdauth_pool_remaining(const struct QkdauthPool *pool);

/**
 * Tags `msg`, consuming pool bits; writes `QKDAUTH_MAC_TAG_LEN` bytes.
 *
 * # Safety
 * `pool` must be a live handle; `out` valid for `QKDAUTH_MAC_TAG_LEN` bytes.
 */
enum QkdauthStatus qkdauth_mac_tag(struct QkdauthPool *pool,
                                   const uint8_t *msg,
                                   size_t msg_len,
                                   uint8_t *out);

/**
 * Verifies a tag from the peer's pool copy, consuming the same bits.
 *
 * # Safety
 * `pool` must be a live handle; `tag` valid for `QKDAUTH_MAC_TAG_LEN` bytes.
 */
enum QkdauthStatus qkdauth_mac_verify(struct QkdauthPool *pool,
                                      const uint8_t *msg,
                                      size_t msg_len,
                                      const uint8_t *tag,
                                      int32_t *valid);

/**
 * Fills `out` with the bundled calibrated link at `length_km`.
 *
 * # Safety
 * `out` must be a valid pointer.
 */
enum QkdauthStatus qkdauth_link_params_default(double length_km, struct QkdauthLinkParams *out);

/**
 * Secure key rate in bits per second.
 *
 * # Safety
 * `p` and `out` must be valid pointers.
 */
enum QkdauthStatus qkdauth_secure_key_rate(const struct QkdauthLinkParams *p, double *out);

/**
 * Pools needed for pairwise pre-shared keys among `n` users.
 */
uint64_t qkdauth_preshared_pairs_required(uint32_t n);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* QKDAUTH_H */
