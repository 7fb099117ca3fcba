#ifndef DWITT_DWITT_H
#define DWITT_DWITT_H

/* C interface to the dwitt library. Every operation takes a JSON object of
 * arguments and produces a JSON result envelope
 *   {"schema_version": 1, "op": ..., "pass": bool, "result": {...}}
 * plus a short text rendering. Handles are opaque; functions return a
 * dwitt_status and keep the message of the last error on the context. */

#include <stddef.h>

#if defined(_WIN32)
#define DWITT_API __declspec(dllexport)
#else
#define DWITT_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum dwitt_status {
    DWITT_OK = 0,
    DWITT_E_USAGE = 1,
    DWITT_E_PARSE = 2,
    DWITT_E_ARITY_MISMATCH = 3,
    DWITT_E_SHAPE_MISMATCH = 4,
    DWITT_E_NOT_DIVISIBLE = 5,
    DWITT_E_NOT_IN_IMAGE = 6,
    DWITT_E_INVALID_LIFT = 7,
    DWITT_E_FROBENIUS_MISMATCH = 8,
    DWITT_E_NOT_SATURATED = 9,
    DWITT_E_ITERATION_LIMIT = 10,
    DWITT_E_BUDGET_EXCEEDED = 11,
    DWITT_E_SPAN_OVERFLOW = 12,
    DWITT_E_NULL_ARGUMENT = 50,
    DWITT_E_UNKNOWN_OP = 51,
    DWITT_E_INTERNAL = 99
} dwitt_status;

typedef struct dwitt_context dwitt_context;
typedef struct dwitt_result dwitt_result;

DWITT_API const char* dwitt_version(void);
DWITT_API const char* dwitt_status_name(int status);
/* 1 for usage, parse, arity and shape errors, the unknown-op and null-argument
 * codes; 0 otherwise. */
DWITT_API int dwitt_status_is_usage(int status);

DWITT_API dwitt_context* dwitt_context_new(void);
DWITT_API void dwitt_context_free(dwitt_context* ctx);
DWITT_API const char* dwitt_last_error(const dwitt_context* ctx);

/* Budgets used when the arguments do not give one: "adjunction_budget",
 * "span_budget", "saturation_cap". */
DWITT_API int dwitt_set_budget(dwitt_context* ctx, const char* name, unsigned long value);
DWITT_API int dwitt_get_budget(const dwitt_context* ctx, const char* name, unsigned long* value);

/* Newline-separated list of operation names. */
DWITT_API const char* dwitt_operations(void);

DWITT_API int dwitt_call(dwitt_context* ctx, const char* op, const char* args_json, dwitt_result** out);

DWITT_API const char* dwitt_result_json(const dwitt_result* r);
DWITT_API const char* dwitt_result_text(const dwitt_result* r);
DWITT_API int dwitt_result_pass(const dwitt_result* r);
DWITT_API void dwitt_result_free(dwitt_result* r);

#ifdef __cplusplus
}
#endif

#endif
