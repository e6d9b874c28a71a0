#include <stdio.h>
#include <string.h>

#include "meshsmith.h"

#define CHECK(cond)                                               \
    do {                                                          \
        if (!(cond)) {                                            \
            fprintf(stderr, "%s:%d: %s\n", __FILE__, __LINE__, #cond); \
            return 1;                                             \
        }                                                         \
    } while (0)

int main(void) {
    const double xy[] = {0.3, 0.7, 0.0, 0.0, 1.0, 0.0, 1.0, 1.0, 0.0, 1.0};
    const uint32_t tris[] = {0, 1, 2, 0, 2, 3, 0, 3, 4, 0, 4, 1};
    MsMesh *mesh = NULL;
    MsSmoother *smoother = NULL;
    MsQuality q;
    uint32_t sweeps = 0;
    double out[10];

    CHECK(ms_mesh_new(xy, 5, tris, 4, NULL, &mesh) == MS_STATUS_OK);
    CHECK(ms_smoother_new("angle", NULL, &smoother) == MS_STATUS_OK);
    CHECK(ms_smooth(mesh, smoother, 100, &sweeps) == MS_STATUS_OK);
    CHECK(sweeps >= 1);
    CHECK(ms_mesh_copy_nodes(mesh, out, 10) == MS_STATUS_OK);
    CHECK(out[0] > 0.49 && out[0] < 0.51 && out[1] > 0.49 && out[1] < 0.51);
    CHECK(ms_mesh_quality(mesh, &q) == MS_STATUS_OK);
    CHECK(q.element_count == 4);
    CHECK(ms_mesh_negative_elements(mesh) == 0);

    CHECK(ms_smoother_new("nope", NULL, &smoother) == MS_STATUS_UNKNOWN_SMOOTHER);
    CHECK(strstr(ms_last_error_message(), "nope") != NULL);

    ms_smoother_free(smoother);
    ms_mesh_free(mesh);
    printf("ok %s\n", ms_version());
    return 0;
}
