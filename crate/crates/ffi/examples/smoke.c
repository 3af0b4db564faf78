#include <stdio.h>
#include <stdlib.h>
#include "gms.h"

int main(void) {
    GmsPoints *points = NULL;
    double truth[10 * 5];
    if (gms_haystack(125, 125, 10, 5, 0.0, 7, &points, truth, 50) != GMS_STATUS_OK) {
        fprintf(stderr, "haystack: %s\n", gms_last_error_message());
        return 1;
    }
    GmsResult *result = NULL;
    if (gms_recover(points, 5, 0.0, 0, &result) != GMS_STATUS_OK) {
        fprintf(stderr, "recover: %s\n", gms_last_error_message());
        return 1;
    }
    double basis[10 * 5];
    double err = -1.0;
    gms_result_basis(result, basis, 50);
    gms_recovery_error(basis, 5, truth, 5, 10, &err);
    printf("gms %s recovery error %.3e\n", gms_version(), err);
    gms_result_free(result);
    result = NULL;

    if (gms_recover(NULL, 5, 0.0, 0, &result) != GMS_STATUS_NULL_POINTER) {
        return 1;
    }
    printf("expected failure: %s\n", gms_last_error_message());
    gms_points_free(points);
    return err < 1e-8 ? 0 : 1;
}
