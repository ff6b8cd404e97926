#ifndef FREELO_H
#define FREELO_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum FreeloStatus {
  FREELO_STATUS_OK = 0,
  /**
   * The computation ran but a checked property failed; the report says which.
   */
  FREELO_STATUS_FAILED = 1,
  FREELO_STATUS_INVALID_INPUT = 2,
  FREELO_STATUS_CAP_EXCEEDED = 3,
  FREELO_STATUS_NULL_ARGUMENT = 4,
  /**
   * Any other error raised by the library, such as a violated precondition.
   */
  FREELO_STATUS_ERROR = 5,
  FREELO_STATUS_PANIC = 6,
} FreeloStatus;

/**
 * A group handle.
 */
typedef struct FreeloGroup FreeloGroup;

/**
 * An ordering handle. It keeps its group alive on its own.
 */
typedef struct FreeloOracle FreeloOracle;

/**
 * A piecewise-linear homeomorphism of the line with rational breakpoints.
 */
typedef struct FreeloPlMap FreeloPlMap;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread; empty if none. Valid until the next call.
 */
const char *freelo_last_error(void);

const char *freelo_version(void);

/**
 * # Safety
 * `s` must come from this library or be null.
 */
void freelo_string_free(char *s);

/**
 * Parses a group name such as `F2`, `Z^2*Z` or `X`.
 *
 * # Safety
 * `name` must be a NUL-terminated string and `out` a valid pointer.
 */
enum FreeloStatus freelo_group_new(const char *name, struct FreeloGroup **out);

/**
 * # Safety
 * `g` must come from [`freelo_group_new`] or be null.
 */
void freelo_group_free(struct FreeloGroup *g);

/**
 * Number of generators, or 0 for a null handle.
 *
 * # Safety
 * `g` must be a live handle or null.
 */
size_t freelo_group_rank(const struct FreeloGroup *g);

/**
 * Writes the normal form of `word`, e.g. `a.a^-1.b^2` gives `b^2`.
 *
 * # Safety
 * Pointers must be valid; `out` receives a string to release with [`freelo_string_free`].
 */
enum FreeloStatus freelo_word_normalize(const struct FreeloGroup *g, const char *word, char **out);

/**
 * Builds an ordering from a spec such as `magnus`, `lex:perm=1,0`, `magnus:neg=a:conj=b` or `xsign`.
 *
 * # Safety
 * Pointers must be valid.
 */
enum FreeloStatus freelo_oracle_new(const struct FreeloGroup *g,
                                    const char *spec,
                                    struct FreeloOracle **out);

/**
 * # Safety
 * `o` must come from [`freelo_oracle_new`] or be null.
 */
void freelo_oracle_free(struct FreeloOracle *o);

/**
 * Writes -1, 0 or +1 to `out`.
 *
 * # Safety
 * Pointers must be valid.
 */
enum FreeloStatus freelo_oracle_sign(const struct FreeloOracle *o, const char *word, int8_t *out);

/**
 * Checks the cone axioms on the ball of `radius` in all generators. Returns `Failed` when a
 * violation was found; `report` (may be null) receives the JSON report either way.
 *
 * # Safety
 * Pointers must be valid; `report` may be null.
 */
enum FreeloStatus freelo_check_axioms(const struct FreeloOracle *o, uint32_t radius, char **report);

/**
 * Parses `{"left_slope": "1", "points": [["0", "0"], ...], "right_slope": "1"}`.
 *
 * # Safety
 * Pointers must be valid.
 */
enum FreeloStatus freelo_plmap_parse(const char *json, struct FreeloPlMap **out);

/**
 * # Safety
 * `f` must come from this library or be null.
 */
void freelo_plmap_free(struct FreeloPlMap *f);

/**
 * # Safety
 * Pointers must be valid.
 */
enum FreeloStatus freelo_plmap_to_json(const struct FreeloPlMap *f, char **out);

/**
 * Evaluates at an exact rational such as `-3/4`; the result is written in the same form.
 *
 * # Safety
 * Pointers must be valid.
 */
enum FreeloStatus freelo_plmap_eval(const struct FreeloPlMap *f, const char *x, char **out);

/**
 * `out = f ∘ g`.
 *
 * # Safety
 * Pointers must be valid.
 */
enum FreeloStatus freelo_plmap_compose(const struct FreeloPlMap *f,
                                       const struct FreeloPlMap *g,
                                       struct FreeloPlMap **out);

/**
 * # Safety
 * Pointers must be valid.
 */
enum FreeloStatus freelo_plmap_inverse(const struct FreeloPlMap *f, struct FreeloPlMap **out);

/**
 * Runs any command-line subcommand given as JSON, e.g.
 * `{"command": "perturb", "group": "Z*Z", "n": 2}`. `report` receives the JSON report.
 * Returns `Failed` when the report's `ok` is false.
 *
 * # Safety
 * Pointers must be valid.
 */
enum FreeloStatus freelo_run_json(const char *command, char **report);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* FREELO_H */
