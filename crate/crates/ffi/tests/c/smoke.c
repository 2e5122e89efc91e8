#include <math.h>
#include <stdio.h>
#include <string.h>

#include "oampnr.h"

#define CHECK(call)                                                              \
    do {                                                                         \
        OampnrStatus s_ = (call);                                                \
        if (s_ != OAMPNR_STATUS_OK) {                                            \
            fprintf(stderr, "%s: %d %s\n", #call, (int)s_, oampnr_last_error()); \
            return 1;                                                            \
        }                                                                        \
    } while (0)

int main(void) {
    OampnrProfile *profile = oampnr_profile_paper_fit();
    char digest[17];
    CHECK(oampnr_profile_digest(profile, digest, sizeof digest));
    if (strlen(digest) != 16) return 2;

    OampnrState *state = NULL;
    CHECK(oampnr_state_from_profile(profile, 0, 0, &state));
    double g2 = 0.0;
    CHECK(oampnr_state_g2_classical(state, &g2));
    if (fabs(g2 - 1.74) > 1e-9) return 3;

    OampnrDistribution *dist = NULL;
    CHECK(oampnr_joint_pnr(state, profile, 0.7853981633974483, 20, 20, &dist));
    size_t rows = 0, cols = 0;
    double tail = 0.0;
    CHECK(oampnr_distribution_shape(dist, &rows, &cols, &tail));
    double p[21 * 21];
    CHECK(oampnr_distribution_copy(dist, p, rows * cols));
    double total = tail;
    for (size_t i = 0; i < rows * cols; i++) total += p[i];
    if (fabs(total - 1.0) > 1e-9) return 4;

    if (oampnr_distribution_copy(dist, p, 3) != OAMPNR_STATUS_BUFFER_TOO_SMALL) return 5;
    if (oampnr_state_g2_classical(NULL, &g2) != OAMPNR_STATUS_NULL_POINTER) return 6;

    printf("ok %s g2=%.6f total=%.12f\n", digest, g2, total);
    oampnr_distribution_free(dist);
    oampnr_state_free(state);
    oampnr_profile_free(profile);
    return 0;
}
