#ifndef SEATOK_H
#define SEATOK_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stddef.h>
#include <stdint.h>

typedef enum SeatokStatus {
  SEATOK_STATUS_OK = 0,
  /**
   * A required pointer was null.
   */
  SEATOK_STATUS_NULL_POINTER = 1,
  /**
   * A string argument was not valid UTF-8.
   */
  SEATOK_STATUS_INVALID_UTF8 = 2,
  /**
   * Inputs were rejected (malformed files, bad parameters).
   */
  SEATOK_STATUS_INVALID_INPUT = 3,
  /**
   * Processing failed (I/O, unencodable text, invalid ids).
   */
  SEATOK_STATUS_RUNTIME = 4,
  /**
   * The library panicked; the handle involved should be discarded.
   */
  SEATOK_STATUS_PANIC = 5,
} SeatokStatus;

/**
 * Opaque vocabulary handle.
 */
typedef struct SeatokVocab SeatokVocab;

/**
 * Counts returned by [`seatok_extend`].
 */
typedef struct SeatokExtendSummary {
  size_t candidates;
  size_t kept;
  size_t pruned;
  size_t rejected;
  size_t vocab_size;
} SeatokExtendSummary;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Kebab-case code of the last failure on this thread, or null.
 */
const char *seatok_last_error_code(void);

/**
 * Message of the last failure on this thread, or null.
 */
const char *seatok_last_error_message(void);

/**
 * Loads a vocabulary file.
 *
 * # Safety
 * `path` must be a NUL-terminated string and `out` a valid pointer.
 */
enum SeatokStatus seatok_vocab_load(const char *path, struct SeatokVocab **out);

/**
 * Releases a handle from [`seatok_vocab_load`]. Null is ignored.
 *
 * # Safety
 * `vocab` must come from [`seatok_vocab_load`] and not be used afterwards.
 */
void seatok_vocab_free(struct SeatokVocab *vocab);

/**
 * Number of tokens, or 0 for a null handle.
 *
 * # Safety
 * `vocab` must be null or a live handle.
 */
size_t seatok_vocab_len(const struct SeatokVocab *vocab);

/**
 * Encodes `len` bytes of UTF-8 text. On success `*ids_out` holds
 * `*ids_len` ids (null when empty) to be released with [`seatok_ids_free`].
 *
 * # Safety
 * `text` must point to `len` readable bytes; out-pointers must be valid.
 */
enum SeatokStatus seatok_encode(const struct SeatokVocab *vocab,
                                const uint8_t *text,
                                size_t len,
                                uint32_t **ids_out,
                                size_t *ids_len);

/**
 * Releases ids from [`seatok_encode`].
 *
 * # Safety
 * `ids`/`len` must be exactly as returned by [`seatok_encode`].
 */
void seatok_ids_free(uint32_t *ids, size_t len);

/**
 * Decodes ids to UTF-8. `*text_out` holds `*text_len` bytes followed by a
 * NUL terminator (the text itself may contain NUL); release it with
 * [`seatok_text_free`].
 *
 * # Safety
 * `ids` must point to `len` readable ids; out-pointers must be valid.
 */
enum SeatokStatus seatok_decode(const struct SeatokVocab *vocab,
                                const uint32_t *ids,
                                size_t len,
                                char **text_out,
                                size_t *text_len);

/**
 * Releases text from [`seatok_decode`].
 *
 * # Safety
 * `text`/`len` must be exactly as returned by [`seatok_decode`].
 */
void seatok_text_free(char *text, size_t len);

/**
 * Releases a string from [`seatok_compression_ratio`]. Null is ignored.
 *
 * # Safety
 * `s` must come from this library and not be used afterwards.
 */
void seatok_string_free(char *s);

/**
 * Extends `base` with `target` tokens found on `corpus` and writes the same
 * files as `seatok vocab extend` with default options: `out`, its
 * `.report.json` and its `.freq.tsv` siblings.
 *
 * # Safety
 * Path arguments must be NUL-terminated strings; `summary` may be null.
 */
enum SeatokStatus seatok_extend(const char *base,
                                const char *target,
                                const char *corpus,
                                uint64_t min_freq,
                                const char *out,
                                struct SeatokExtendSummary *summary);

/**
 * Compression report of `subject` against `baseline` over a parallel
 * JSONL file, as the pretty JSON `seatok metrics ratio --out` writes for
 * one subject. Release `*json_out` with [`seatok_string_free`].
 *
 * # Safety
 * Path arguments must be NUL-terminated strings; `json_out` must be valid.
 */
enum SeatokStatus seatok_compression_ratio(const char *subject,
                                           const char *baseline,
                                           const char *parallel,
                                           char **json_out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SEATOK_H */
