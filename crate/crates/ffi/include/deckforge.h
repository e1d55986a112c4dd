#ifndef DECKFORGE_H
#define DECKFORGE_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum DfStatus {
  DF_STATUS_OK = 0,
  DF_STATUS_INVALID_ARGUMENT = 1,
  DF_STATUS_CONFIG = 3,
  DF_STATUS_ASSEMBLY = 4,
  DF_STATUS_EXPORT = 5,
  DF_STATUS_PANIC = 99,
} DfStatus;

// An assembled deck together with what is needed to export it.
typedef struct DfDeck DfDeck;

// Loaded corpus: semantic graph, grammar and content sources.
typedef struct DfServices DfServices;

typedef struct DfAssembleOptions {
  // 0 takes the schema's default length.
  size_t n_slides;
  uint64_t seed;
  // 0 uses every available core.
  size_t parallelism;
  // Generation rounds including the first; 0 means 10.
  size_t max_rounds;
  // Non-zero selects the sequential reference assembler.
  uint8_t serial;
} DfAssembleOptions;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message for the last failed call on this thread, or NULL. The pointer is
// owned by the library and valid until the next call on this thread.
const char *df_last_error_message(void);

struct DfAssembleOptions df_assemble_options_default(void);

// Loads an offline corpus. A NULL `corpus_dir` selects the bundled one.
//
// # Safety
// `corpus_dir` must be NULL or a NUL-terminated string; `out` must be a
// valid pointer.
enum DfStatus df_services_load(const char *corpus_dir, struct DfServices **out);

// # Safety
// `services` must be NULL or a handle from [`df_services_load`] not yet freed.
void df_services_free(struct DfServices *services);

// Assembles a deck about `topic`. `schema` is a bundled schema name or a
// path to a schema file; NULL selects the default. `options` may be NULL.
//
// # Safety
// Pointers must be NULL or valid; strings NUL-terminated.
enum DfStatus df_assemble(const struct DfServices *services,
                          const char *topic,
                          const char *schema,
                          const struct DfAssembleOptions *options,
                          struct DfDeck **out);

// # Safety
// `deck` must be NULL or a live handle from [`df_assemble`].
size_t df_deck_slide_count(const struct DfDeck *deck);

// Canonical JSON manifest of the deck. Free the result with [`df_string_free`].
//
// # Safety
// `deck` must be a live handle; `out` a valid pointer.
enum DfStatus df_deck_manifest_json(const struct DfDeck *deck, char **out);

// # Safety
// `s` must be NULL or a string returned by this library, freed once.
void df_string_free(char *s);

// Writes a pptx file. With `embed_media` zero, pictures link to the
// corpus files instead of being copied in.
//
// # Safety
// `deck` must be a live handle; `path` a NUL-terminated string.
enum DfStatus df_deck_export_pptx(const struct DfDeck *deck, const char *path, uint8_t embed_media);

// # Safety
// `deck` must be a live handle; `path` a NUL-terminated string.
enum DfStatus df_deck_export_html(const struct DfDeck *deck, const char *path);

// # Safety
// `deck` must be NULL or a handle from [`df_assemble`] not yet freed.
void df_deck_free(struct DfDeck *deck);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* DECKFORGE_H */
