/* Minimal consumer of the C ABI: metric lookup, a scenario run, and a
 * geodesic trace. Build (from the repository root):
 *
 *   cargo build -p sasaki-ffi --release
 *   cc crates/ffi/examples/smoke.c -Icrates/ffi/include \
 *      target/release/libsasaki_ffi.a -lm -o smoke && ./smoke
 */
#include <stdio.h>
#include <string.h>
#include "sasaki.h"

int main(void) {
    SgManifold *m = NULL;
    if (sg_manifold_conformal(2, 1.0, &m) != SG_STATUS_OK) {
        fprintf(stderr, "constructor failed\n");
        return 1;
    }
    double x[2] = {2.0, 0.0};
    double g[4];
    if (sg_manifold_metric(m, x, g) != SG_STATUS_OK) {
        fprintf(stderr, "metric failed: %s\n", sg_last_error_message());
        return 1;
    }
    printf("g(2,0) = [[%g, %g], [%g, %g]]\n", g[0], g[1], g[2], g[3]);

    char *json = NULL;
    if (sg_scenario_run("zero-section", 0, -1.0, -1.0, &json) != SG_STATUS_OK) {
        fprintf(stderr, "scenario failed: %s\n", sg_last_error_message());
        return 1;
    }
    printf("zero-section pass: %s\n", strstr(json, "\"outcome\":\"pass\"") ? "yes" : "no");
    sg_string_free(json);

    double x0[2] = {0, 0}, xd[2] = {1, 0}, xi[2] = {0, 0}, xid[2] = {0, 1};
    char *csv = NULL;
    int truncated = 0;
    if (sg_geodesic_trace_csv(m, x0, xd, xi, xid, 1.0, 0.01, &csv, &truncated) != SG_STATUS_OK) {
        fprintf(stderr, "geodesic failed: %s\n", sg_last_error_message());
        return 1;
    }
    int rows = 0;
    for (const char *p = csv; *p; ++p) {
        if (*p == '\n') ++rows;
    }
    printf("trace rows: %d (truncated=%d)\n", rows - 1, truncated);
    sg_string_free(csv);
    sg_manifold_free(m);
    printf("ok\n");
    return 0;
}
