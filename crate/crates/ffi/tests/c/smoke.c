#include <math.h>
#include <stdio.h>
#include <string.h>

#include "capbound.h"

#define CHECK(cond)                                                          \
  do {                                                                       \
    if (!(cond)) {                                                           \
      const char *msg = cb_last_error_message();                             \
      fprintf(stderr, "%s:%d: %s (%s)\n", __FILE__, __LINE__, #cond,         \
              msg ? msg : "no error");                                       \
      return 1;                                                              \
    }                                                                        \
  } while (0)

int main(void) {
  CbOptions opts = cb_options_default();
  opts.restarts = 4;
  opts.max_iter = 400;

  double params[] = {2.0, 0.25};
  CbChannel *ch = NULL;
  CHECK(cb_channel_builtin("erasure", params, 2, &ch) == CB_STATUS_OK);

  size_t din = 0, dout = 0, denv = 0;
  CHECK(cb_channel_dims(ch, &din, &dout, &denv) == CB_STATUS_OK);
  CHECK(din == 2 && dout == 3);

  double q1 = 0.0;
  CHECK(cb_channel_quantity(ch, CB_QUANTITY_Q1, &opts, &q1) == CB_STATUS_OK);
  CHECK(fabs(q1 - 0.5) < 1e-6);

  char *json = NULL;
  CHECK(cb_bounds_json(ch, &opts, 0, &json) == CB_STATUS_OK);
  CHECK(strstr(json, "\"command\": \"bounds\"") != NULL);
  cb_string_free(json);

  double bad[] = {0.9, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0};
  CbChannel *nontp = NULL;
  CHECK(cb_channel_from_kraus(2, 2, 1, bad, &nontp) == CB_STATUS_VALIDATION);
  CHECK(nontp == NULL);
  CHECK(strstr(cb_last_error_message(), "trace preserving") != NULL);

  cb_channel_free(ch);
  printf("capbound %s ok\n", cb_version());
  return 0;
}
