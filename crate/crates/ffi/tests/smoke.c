#include <math.h>
#include <stdio.h>
#include "amac.h"

int main(void) {
    AmacChannel *w = NULL;
    if (amac_channel_example4(&w) != AMAC_STATUS_OK) return 1;
    double input[4] = {0.5, 0.5, 0.5, 0.5};
    double b[3];
    if (amac_polytope_bounds(w, input, 4, b, 3) != AMAC_STATUS_OK) return 2;
    if (fabs(b[0] - 0.655639) > 1e-6 || fabs(b[2] - 0.704434) > 1e-6) return 3;
    double bad[4] = {0.5, 0.6, 0.5, 0.5};
    if (amac_polytope_bounds(w, bad, 4, b, 3) != AMAC_STATUS_INVALID_DISTRIBUTION) return 4;
    if (amac_last_error_message() == NULL) return 5;
    amac_channel_free(w);
    printf("ok %s\n", amac_version());
    return 0;
}
