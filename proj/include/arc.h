/* C interface to the ARC solving library. All functions return an arc_status;
 * results come back through out parameters. Handles are opaque and freed with
 * their matching *_free function; returned strings are freed with
 * arc_string_free. On failure arc_last_error() describes the problem for the
 * calling thread. */

#ifndef ARC_H
#define ARC_H

#ifdef __cplusplus
extern "C" {
#endif

typedef enum arc_status {
  ARC_OK = 0,
  ARC_ERR_MALFORMED_JSON = 1,
  ARC_ERR_SCHEMA_VIOLATION = 2,
  ARC_ERR_VALUE_OUT_OF_RANGE = 3,
  ARC_ERR_RAGGED_GRID = 4,
  ARC_ERR_EMPTY_GRID = 5,
  ARC_ERR_NO_SUCH_SEPARATOR = 6,
  ARC_ERR_OUT_OF_BOUNDS = 7,
  ARC_ERR_UNKNOWN_PRIMITIVE = 8,
  ARC_ERR_BAD_ARITY = 9,
  ARC_ERR_BAD_ARGUMENT_TYPE = 10,
  ARC_ERR_EMPTY_PROGRAM = 11,
  ARC_ERR_SELECTOR_UNRESOLVED = 12,
  ARC_ERR_GEOMETRY = 13,
  ARC_ERR_BACKEND = 14,
  ARC_ERR_DIMENSION_MISMATCH = 15,
  ARC_ERR_DUPLICATE_ID = 16,
  ARC_ERR_NO_SURVIVOR = 17,
  ARC_ERR_DATASET_NOT_FOUND = 18,
  ARC_ERR_IO = 19,
  ARC_ERR_PRECONDITION = 20,
  ARC_ERR_INVALID_ARGUMENT = 21,
  ARC_ERR_UNKNOWN = 99
} arc_status;

typedef struct arc_task arc_task;
typedef struct arc_grid arc_grid;
typedef struct arc_instruction arc_instruction;

typedef enum arc_split { ARC_SPLIT_TRAIN = 0, ARC_SPLIT_TEST = 1 } arc_split;
typedef enum arc_side { ARC_SIDE_INPUT = 0, ARC_SIDE_OUTPUT = 1 } arc_side;

const char* arc_version(void);

/* Message for the most recent failure on this thread; empty when the last
 * call succeeded. */
const char* arc_last_error(void);

void arc_string_free(char* s);

/* ---- tasks ---- */

arc_status arc_task_parse(const char* json_text, const char* id, arc_task** out);
arc_status arc_task_load_file(const char* path, arc_task** out);
void arc_task_free(arc_task* task);

arc_status arc_task_serialize(const arc_task* task, char** out_json);
arc_status arc_task_redact(const arc_task* task, char** out_json);

int arc_task_pair_count(const arc_task* task, arc_split split);
/* Copies the requested grid; ARC_ERR_PRECONDITION when the output is absent. */
arc_status arc_task_grid(const arc_task* task, arc_split split, int index, arc_side side,
                         arc_grid** out);

/* ---- grids ---- */

arc_status arc_grid_from_json(const char* json_text, arc_grid** out);
void arc_grid_free(arc_grid* grid);

int arc_grid_rows(const arc_grid* grid);
int arc_grid_cols(const arc_grid* grid);
/* Returns -1 when out of bounds. */
int arc_grid_cell(const arc_grid* grid, int row, int col);
int arc_grids_equal(const arc_grid* a, const arc_grid* b);
arc_status arc_grid_render_ascii(const arc_grid* grid, char** out_text);
arc_status arc_grid_to_json(const arc_grid* grid, char** out_json);

/* Segmentation config is JSON:
 *   {"connectivity": 4|8, "grouping": "same-value"|"any-nonbackground",
 *    "background": 0-9}
 * NULL or "{}" selects the defaults (8, any-nonbackground, 0). */
arc_status arc_grid_extract_objects(const arc_grid* grid, const char* config_json,
                                    char** out_objects_json);
arc_status arc_grid_detect_symmetries(const arc_grid* grid, char** out_report_json);

/* ---- instruction language ---- */

arc_status arc_instruction_parse(const char* text, arc_instruction** out);
void arc_instruction_free(arc_instruction* instruction);
arc_status arc_instruction_print(const arc_instruction* instruction, char** out_text);
arc_status arc_instruction_apply(const arc_instruction* instruction, const arc_grid* grid,
                                 const char* config_json, arc_grid** out);
/* Verifies against the task's training pairs; the report is JSON. */
arc_status arc_instruction_verify(const arc_instruction* instruction, const arc_task* task,
                                  const char* config_json, char** out_report_json);
const char* arc_grammar_help(void);

/* ---- evaluation harness ---- */

/* Config is the run-config JSON documented in the project README. The run
 * report JSON is returned and also written to the configured output dir. */
arc_status arc_run_eval(const char* config_json, char** out_report_json);

#ifdef __cplusplus
}
#endif

#endif /* ARC_H */
