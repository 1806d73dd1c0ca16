#ifndef TAGHEAD_H
#define TAGHEAD_H

/* C interface to the taghead library. A session wraps one run config plus an
 * output directory; commands write their artifacts under that directory and
 * leave a text summary on the session. All functions are synchronous and a
 * session must only be used from one thread at a time. */

#ifdef __cplusplus
extern "C" {
#endif

typedef enum tag_status {
  TAG_OK = 0,
  TAG_ERR_ARGUMENT = 1,  /* bad pointer or argument value */
  TAG_ERR_CONFIG = 2,    /* config parse/validation, unsupported version */
  TAG_ERR_IO = 3,        /* file read/write failure */
  TAG_ERR_SHAPE = 4,     /* dimension mismatch */
  TAG_ERR_STATE = 5,     /* call not valid in the current state */
  TAG_ERR_CAPACITY = 6,  /* problem size exceeds a configured cap */
  TAG_ERR_INTERNAL = 7
} tag_status;

typedef struct tag_session tag_session;

const char* tag_version(void);
const char* tag_status_name(tag_status status);

/* Loads the JSON run config at config_path. out_dir is created on demand. */
tag_status tag_session_open(const char* config_path, const char* out_dir, tag_session** session_out);
void tag_session_close(tag_session* session);

/* Detail message for the last failed call; empty string if none. Owned by the
 * session, valid until the next call on it. */
const char* tag_session_error(const tag_session* session);

/* Text summary of the last successful command, same lifetime rules. */
const char* tag_session_summary(const tag_session* session);

tag_status tag_gen_data(tag_session* session);
tag_status tag_train(tag_session* session);
tag_status tag_eval(tag_session* session, const char* checkpoint_path, const char* split);
tag_status tag_ablate(tag_session* session);
/* widths: array of FFN widths; pass NULL/0 for the default {256,512,1024,2048}. */
tag_status tag_sweep_ffn(tag_session* session, const int* widths, int num_widths);
tag_status tag_param_report(tag_session* session);
/* inject_fault != 0 flips one backward rule as a negative control. */
tag_status tag_gradcheck(tag_session* session, int inject_fault, double* max_rel_err_out);
tag_status tag_bench(tag_session* session);
tag_status tag_dump_features(tag_session* session, const char* checkpoint_path, const char* split,
                             const char* stage);

#ifdef __cplusplus
}
#endif

#endif /* TAGHEAD_H */
