/*
 * softmention C API: software mention, attribute, and relation extraction
 * pipeline over chat-completion endpoints, with rule-based baselines and a
 * span-exact weighted-F1 scorer.
 *
 * All functions return smx_status; on failure smx_last_error() holds a
 * thread-local message. Strings returned through char** out-parameters are
 * heap-allocated and must be released with smx_string_free(). Opaque handles
 * are released with their matching *_free/_close function.
 */

#ifndef SOFTMENTION_H
#define SOFTMENTION_H

#include <stddef.h>

#if defined(_WIN32)
#define SMX_API __declspec(dllexport)
#else
#define SMX_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum smx_status {
  SMX_OK = 0,
  SMX_ERR_CONFIG = 1,    /* bad configuration or usage */
  SMX_ERR_DATA = 2,      /* malformed corpus or sidecar data */
  SMX_ERR_TRANSPORT = 3, /* retries exhausted / transport failure */
  SMX_ERR_INTERNAL = 4
} smx_status;

typedef struct smx_corpus smx_corpus;
typedef struct smx_matrix smx_matrix;

SMX_API const char* smx_version(void);

/* Message for the most recent failure on this thread; never NULL. */
SMX_API const char* smx_last_error(void);

SMX_API void smx_string_free(char* s);

/* --- corpus ------------------------------------------------------------- */

/* Loads a line-delimited corpus file (one sentence record per line),
 * rejecting any record that violates a corpus invariant. */
SMX_API smx_status smx_corpus_open(const char* path, smx_corpus** out);

/* Loads structurally parseable records even when span or duplicate
 * invariants are broken, so smx_corpus_validate can report them. */
SMX_API smx_status smx_corpus_open_lenient(const char* path, smx_corpus** out);
SMX_API void smx_corpus_close(smx_corpus* corpus);
SMX_API size_t smx_corpus_size(const smx_corpus* corpus);

/* JSON report of every invariant violation; "[]" means the corpus is valid. */
SMX_API smx_status smx_corpus_validate(const smx_corpus* corpus,
                                       char** report_json_out);

/* --- relation signatures -------------------------------------------------*/

SMX_API smx_status smx_mine_signatures(const smx_corpus* train,
                                       int seed_with_static_table,
                                       smx_matrix** out);
SMX_API void smx_matrix_free(smx_matrix* matrix);
SMX_API smx_status smx_matrix_to_json(const smx_matrix* matrix,
                                      char** json_out);

/* --- pipeline ------------------------------------------------------------*/

/*
 * Runs one subtask end to end. config_json mirrors the CLI run flags, e.g.
 * {"subtask":3,"retrieval":"relation_signature","train":"train.jsonl",
 *  "test":"test.jsonl","embeddings":"emb.jsonl","out_dir":"out",
 *  "transport":"mock","cache_dir":"cache"}
 * Writes predictions.jsonl and manifest.json into out_dir and returns the
 * manifest JSON.
 */
SMX_API smx_status smx_run(const char* config_json, char** manifest_json_out);

/*
 * Rule-based relation baselines. config_json:
 * {"rule":"heuristic"|"necessary","train":"...","test":"...","out_dir":"...",
 *  "seed_static_table":true,"mentions":"optional path"}
 * Returns the predictions file path.
 */
SMX_API smx_status smx_baseline(const char* config_json,
                                char** predictions_path_out);

/*
 * Scores predictions against gold. options_json (may be NULL):
 * {"channel":"type_only"|"type_and_intention","out_dir":"optional"}
 * Returns the evaluation report as JSON.
 */
SMX_API smx_status smx_score(const char* gold_path, const char* pred_path,
                             int subtask, const char* options_json,
                             char** report_json_out);

/* Fixed-width text table for a report produced by smx_score. */
SMX_API smx_status smx_format_report(const char* report_json, char** table_out);

/* Delta (b minus a) between two report.json files. */
SMX_API smx_status smx_compare(const char* report_a_path,
                               const char* report_b_path,
                               char** delta_json_out);
SMX_API smx_status smx_format_delta(const char* delta_json, char** table_out);

#ifdef __cplusplus
}
#endif

#endif /* SOFTMENTION_H */
