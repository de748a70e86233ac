#include <math.h>
#include <stdio.h>
#include <stdlib.h>

#include "stratx.h"

#define CHECK(call)                                                        \
  do {                                                                     \
    StratxStatus st_ = (call);                                             \
    if (st_ != STRATX_STATUS_OK) {                                         \
      fprintf(stderr, "%s failed: %d %s\n", #call, st_, stratx_last_error()); \
      return 1;                                                            \
    }                                                                      \
  } while (0)

int main(void) {
  StratxDataset *ds = NULL;
  CHECK(stratx_dataset_synth("bodyweight", 2000, 0.0, 0, &ds));

  size_t height = 0, pregnant = 0;
  CHECK(stratx_dataset_column_index(ds, "height", &height));
  CHECK(stratx_dataset_column_index(ds, "pregnant", &pregnant));

  StratxParams params = stratx_params_default();
  StratxCurve *curve = NULL;
  CHECK(stratx_stratpd(ds, height, &params, &curve));
  size_t n = stratx_curve_len(curve);
  double *x = malloc(n * sizeof *x), *y = malloc(n * sizeof *y);
  CHECK(stratx_curve_copy(curve, x, y, NULL, n));
  double slope = (y[n - 1] - y[0]) / (x[n - 1] - x[0]);
  printf("points=%zu end-to-end slope=%.3f\n", n, slope);
  if (fabs(slope - 10.0) > 0.5) return 1;

  StratxEffect *eff = NULL;
  CHECK(stratx_catstratpd(ds, pregnant, NULL, &eff));
  double delta[2];
  CHECK(stratx_effect_copy(eff, delta, NULL, 2));
  printf("%s=%.3f %s=%.3f\n", stratx_effect_label(eff, 0), delta[0],
         stratx_effect_label(eff, 1), delta[1]);

  if (stratx_stratpd(ds, 99, &params, &curve) != STRATX_STATUS_INVALID_ARGUMENT) return 1;

  free(x);
  free(y);
  stratx_curve_free(curve);
  stratx_effect_free(eff);
  stratx_dataset_free(ds);
  puts("ok");
  return 0;
}
