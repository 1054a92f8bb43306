#ifndef QPKE_SIM_H
#define QPKE_SIM_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stddef.h>
#include <stdint.h>

typedef enum QsStatus {
  QS_STATUS_OK = 0,
  QS_STATUS_NULL_POINTER = 1,
  QS_STATUS_INVALID_ARGUMENT = 2,
  // The ciphertext is the abort symbol.
  QS_STATUS_ABORT = 3,
  // The quantum public key was already used by an encryption.
  QS_STATUS_KEY_CONSUMED = 4,
  QS_STATUS_PARSE = 5,
  // The experiment ran but at least one of its checks failed.
  QS_STATUS_CHECK_FAILED = 6,
  QS_STATUS_INTERNAL = 7,
} QsStatus;

// Party selector for transcript outputs.
typedef enum QsParty {
  QS_PARTY_ALICE = 0,
  QS_PARTY_BOB = 1,
} QsParty;

typedef struct QsEvCiphertext QsEvCiphertext;

// Secret key plus its single-use quantum public key.
typedef struct QsEvKeyPair QsEvKeyPair;

typedef struct QsRng QsRng;

typedef struct QsTranscript QsTranscript;

// Bytes owned by this library.
typedef struct QsBuffer {
  uint8_t *data;
  size_t len;
} QsBuffer;

// Message for the last failed call on this thread, or NULL. The pointer stays
// valid until the next failing call on the same thread.
const char *qs_last_error(void);

// Deterministic random stream for `(seed, stream_id)`.
struct QsRng *qs_rng_new(uint64_t seed, uint64_t stream_id);

// # Safety
// `rng` must be NULL or come from [`qs_rng_new`] and not be freed yet.
void qs_rng_free(struct QsRng *rng);

// Samples an everlasting key pair into `*out`.
//
// # Safety
// `rng` must be a live handle and `out` a writable pointer.
enum QsStatus qs_ev_keygen(size_t lambda,
                           size_t preimage_bits,
                           struct QsRng *rng,
                           struct QsEvKeyPair **out);

// # Safety
// `kp` must be NULL or come from [`qs_ev_keygen`] and not be freed yet.
void qs_ev_keypair_free(struct QsEvKeyPair *kp);

// Encrypts bit `m` (0 or 1) under the pair's public key. The quantum key is
// consumed: a second call on the same pair returns `KeyConsumed`.
//
// # Safety
// `kp` and `rng` must be live handles and `out` a writable pointer.
enum QsStatus qs_ev_encrypt(struct QsEvKeyPair *kp,
                            uint8_t m,
                            struct QsRng *rng,
                            struct QsEvCiphertext **out);

// # Safety
// `ct` must be NULL or a live ciphertext handle.
void qs_ev_ciphertext_free(struct QsEvCiphertext *ct);

// 1 if `ct` is the abort symbol, 0 otherwise (including NULL).
//
// # Safety
// `ct` must be NULL or a live ciphertext handle.
uint8_t qs_ev_ciphertext_is_abort(const struct QsEvCiphertext *ct);

// Text form of a ciphertext; free with [`qs_string_free`]. NULL on bad input.
//
// # Safety
// `ct` must be NULL or a live ciphertext handle.
char *qs_ev_ciphertext_to_string(const struct QsEvCiphertext *ct);

// Decrypts into `*m`; returns `Abort` for the abort symbol.
//
// # Safety
// `kp` and `ct` must be live handles and `m` a writable pointer.
enum QsStatus qs_ev_decrypt(const struct QsEvKeyPair *kp,
                            const struct QsEvCiphertext *ct,
                            uint8_t *m);

// Runs one honest QKD session and stores its transcript in `*out`.
//
// # Safety
// `rng` must be a live handle and `out` a writable pointer.
enum QsStatus qs_qkd_session(size_t lambda,
                             size_t preimage_bits,
                             struct QsRng *rng,
                             struct QsTranscript **out);

// # Safety
// `t` must be NULL or a live transcript handle.
void qs_transcript_free(struct QsTranscript *t);

// 1 when both parties accepted with equal keys.
//
// # Safety
// `t` must be NULL or a live transcript handle.
uint8_t qs_transcript_agree(const struct QsTranscript *t);

// A party's output as `key <hex>` or `REJECT`; free with [`qs_string_free`].
//
// # Safety
// `t` must be NULL or a live transcript handle.
char *qs_transcript_outcome(const struct QsTranscript *t, enum QsParty party);

// Serializes a transcript; free the buffer with [`qs_buffer_free`].
//
// # Safety
// `t` must be a live transcript handle and `out` a writable pointer.
enum QsStatus qs_transcript_encode(const struct QsTranscript *t, struct QsBuffer *out);

// Parses `len` bytes at `data` into a transcript.
//
// # Safety
// `data` must point to `len` readable bytes and `out` be writable.
enum QsStatus qs_transcript_decode(const uint8_t *data, size_t len, struct QsTranscript **out);

// # Safety
// `buf` must come from this library and not be freed yet.
void qs_buffer_free(struct QsBuffer buf);

// # Safety
// `s` must be NULL or a string returned by this library, not yet freed.
void qs_string_free(char *s);

// Runs an experiment described by `key = value` lines (the same keys as the
// command-line config file). The report text is stored in `*report` even
// when a check fails; free it with [`qs_string_free`].
//
// # Safety
// `config` must be a NUL-terminated string and `report` a writable pointer.
enum QsStatus qs_run_experiment(const char *config, char **report);

#endif  /* QPKE_SIM_H */
