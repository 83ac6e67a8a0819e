#include <stdio.h>
#include <stdlib.h>
#include "grf.h"

int main(int argc, char **argv) {
    if (argc != 2) { fprintf(stderr, "usage: %s <checkpoint>\n", argv[0]); return 2; }

    printf("library version: %s\n", grf_version());

    GrfModel *model = NULL;
    if (grf_model_load(argv[1], &model) != GrfStatusOk) {
        fprintf(stderr, "load failed: %s\n", grf_last_error_message());
        return 1;
    }
    size_t frames = grf_model_frames(model);
    size_t joints = grf_model_joints(model);
    size_t channels = grf_model_in_channels(model);
    size_t len = grf_model_window_len(model);
    printf("model window: %zu frames x %zu joints x %zu channels = %zu values\n",
           frames, joints, channels, len);
    if (len != frames * joints * channels) { fprintf(stderr, "geometry mismatch\n"); return 1; }

    double *window = calloc(len, sizeof(double));
    double forces[6];
    if (grf_model_predict(model, window, len, forces) != GrfStatusOk) {
        fprintf(stderr, "predict failed: %s\n", grf_last_error_message());
        return 1;
    }
    printf("forces (N): [%f %f %f %f %f %f]\n",
           forces[0], forces[1], forces[2], forces[3], forces[4], forces[5]);

    /* wrong-length window must fail cleanly, not crash */
    if (grf_model_predict(model, window, len - 1, forces) != GrfStatusInvalidInput) {
        fprintf(stderr, "bad length not rejected\n"); return 1;
    }
    printf("bad-length rejection: %s\n", grf_last_error_message());

    double pred[40] = {0}, truth[40] = {0}, kp = -1.0;
    pred[13] = 460.0; truth[10] = 500.0;
    if (grf_mean_k_peaks(pred, truth, 40, 1, 10, &kp) != GrfStatusOk) {
        fprintf(stderr, "k-peaks failed: %s\n", grf_last_error_message());
        return 1;
    }
    printf("mean 1-peak distance: %f (expect ~40.112)\n", kp);

    free(window);
    grf_model_free(model);
    printf("ok\n");
    return 0;
}
