#ifndef SFLOW_SFLOW_H
#define SFLOW_SFLOW_H

/* C interface to the sflow library. Requests and results are JSON text. */

#ifdef __cplusplus
extern "C" {
#endif

typedef enum sflow_status {
  SFLOW_OK = 0,          /* decided */
  SFLOW_INPUT_ERROR = 1, /* request could not be parsed or validated */
  SFLOW_UNKNOWN = 2,     /* ran to completion, verdict Unknown */
  SFLOW_INTERNAL = 3
} sflow_status;

typedef struct sflow_result sflow_result;
typedef struct sflow_assembly sflow_assembly;

const char* sflow_version(void);

/* Runs `command` ("iem.check", "iem.orbit", "iem.separate", "suspend",
 * "surface.admit", "surgery.exec", "billiard.unfold", "billiard.trace",
 * "billiard.verdict", "flow.pairtest") on a JSON request. `source_name`
 * labels error messages and may be NULL. *out is always set and must be
 * released with sflow_result_free. */
sflow_status sflow_run(const char* command, const char* request_json, const char* source_name, sflow_result** out);

sflow_status sflow_result_status(const sflow_result* r);
/* Result document; empty on input errors. */
const char* sflow_result_json(const sflow_result* r);
/* "name:line:col: message" for input errors, otherwise empty. */
const char* sflow_result_error(const sflow_result* r);
void sflow_result_free(sflow_result* r);

/* Incremental surgery. Each step is one JSON script operation. */
sflow_assembly* sflow_assembly_new(void);
sflow_status sflow_assembly_step(sflow_assembly* a, const char* op_json, sflow_result** out);
/* Current assembly: transcript, canonical form, components and verdicts. */
sflow_status sflow_assembly_describe(const sflow_assembly* a, sflow_result** out);
void sflow_assembly_free(sflow_assembly* a);

#ifdef __cplusplus
}
#endif

#endif
