/* pcfgthresh: thresholded CKY parsing for PCFGs, C interface.
 *
 * Objects are opaque handles. Every call that can fail returns a
 * pt_status; on failure pt_last_error() describes the problem (the
 * message is per thread and valid until the next failing call on it).
 * Strings handed out through char** are owned by the caller and released
 * with pt_string_free().
 */
#ifndef PCFGTHRESH_H
#define PCFGTHRESH_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#if defined(PT_BUILDING_LIBRARY)
#define PT_API __declspec(dllexport)
#else
#define PT_API __declspec(dllimport)
#endif
#else
#define PT_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum pt_status {
  PT_OK = 0,
  PT_ERR_ARGUMENT = 1, /* bad argument or option */
  PT_ERR_FORMAT = 2,   /* malformed input file or value */
  PT_ERR_MODEL = 3,    /* unknown word, no parse, incompatible grammars */
  PT_ERR_IO = 4,       /* file cannot be read or written */
  PT_ERR_INTERNAL = 5
} pt_status;

typedef struct pt_parser pt_parser;
typedef struct pt_result pt_result;

PT_API const char* pt_version(void);
PT_API const char* pt_last_error(void);
PT_API void pt_string_free(char* s);

/* Grammar construction. transform: "6gram", "terminal-prime" or "coarse". */
PT_API pt_status pt_induce_file(const char* treebank_path, const char* transform, const char* grammar_out_path);
/* Descendants map from a first-pass grammar (built with first_transform)
 * to a 6-gram second-pass grammar. */
PT_API pt_status pt_build_descendants(const char* first_grammar_path, const char* second_grammar_path,
                                      const char* first_transform, const char* out_path);

/* Parsers. */
PT_API pt_status pt_parser_open_grammar(const char* grammar_path, pt_parser** out);
PT_API pt_status pt_parser_open_pipeline(const char* pipeline_path, pt_parser** out);
PT_API void pt_parser_free(pt_parser* parser);
PT_API size_t pt_parser_pass_count(const pt_parser* parser);
/* pass < 0 selects the final pass. Ratios in [0,1]; 0 disables. */
PT_API pt_status pt_parser_set_thresholds(pt_parser* parser, int pass, double beam, double global, double mp_node,
                                          double mp_prod);
PT_API pt_status pt_parser_get_thresholds(const pt_parser* parser, int pass, double* beam, double* global,
                                          double* mp_node, double* mp_prod);
/* Options: "retry" (0/1), "retry-divisor", "max-retries", "beam-prior"
 * (0/1), "loosen-gates" (0/1). */
PT_API pt_status pt_parser_set_option(pt_parser* parser, const char* name, const char* value);
/* Current thresholds, one "beam=.. global=.. mpnode=.. mpprod=.." line per
 * pass. */
PT_API pt_status pt_parser_thresholds(const pt_parser* parser, char** out);

/* One whitespace-separated sentence of part-of-speech tags. Unknown tags
 * and unparseable sentences are reported through the status. */
PT_API pt_status pt_parser_parse(pt_parser* parser, const char* sentence, pt_result** out);
PT_API void pt_result_free(pt_result* result);
PT_API int pt_result_failed(const pt_result* result);
PT_API double pt_result_entropy(const pt_result* result); /* bits; +inf on failure */
PT_API uint64_t pt_result_productions(const pt_result* result);
PT_API double pt_result_elapsed(const pt_result* result);
PT_API uint32_t pt_result_retries(const pt_result* result);
PT_API double pt_result_viterbi(const pt_result* result); /* log2; -inf on failure */
PT_API const char* pt_result_tree(const pt_result* result); /* "(())" on failure */

/* Parses a sentence file, writing one tree per line and one JSON record
 * per line. Per-sentence failures become "(())" and a null entropy.
 * Either output path may be NULL; a trees path of "-" means stdout. */
PT_API pt_status pt_parser_parse_file(pt_parser* parser, const char* sentences_path, const char* trees_out_path,
                                      const char* records_out_path);

/* TSV: one row per value of the named threshold ("beam", "global",
 * "mpnode", "mpprod" for the final pass, or "p<k>.<name>"). gold_path may
 * be NULL; with it, precision and recall columns are filled. */
PT_API pt_status pt_sweep(pt_parser* parser, const char* parameter, const double* values, size_t count,
                          const char* sentences_path, const char* gold_path, char** tsv_out);

typedef struct pt_optimize_config {
  double target_entropy;
  uint32_t max_iterations;
  int figure_direction; /* nonzero: tighten while entropy is above target */
} pt_optimize_config;

PT_API pt_optimize_config pt_optimize_config_default(void);
/* Tunes the parser's nonzero thresholds on a sentence file and installs
 * the result in the parser. trace_out receives the TSV search trace,
 * warning_out (may be NULL) is set to 1 if the iteration cap was hit. */
PT_API pt_status pt_optimize(pt_parser* parser, const char* sentences_path, const pt_optimize_config* config,
                             char** trace_out, int* warning_out);

/* Labeled bracket scores of candidate trees (failures as "(())") against
 * gold trees, as "key<TAB>value" lines. */
PT_API pt_status pt_eval_files(const char* candidates_path, const char* gold_path, char** report_out);
/* Per-metric decreased/same/increased counts between two record files. */
PT_API pt_status pt_compare_runs(const char* records_a_path, const char* records_b_path, const char* gold_path,
                                 char** tsv_out);

#ifdef __cplusplus
}
#endif

#endif
