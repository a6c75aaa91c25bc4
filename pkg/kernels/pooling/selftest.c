/* Self-check against an analytically known case: pooling a constant
 * field must reproduce the same constant everywhere, so the output
 * checksum equals the checksum of a constant-filled buffer. */
#include <stdio.h>
#include <stdint.h>
#include "../common/harness.h"

void pooling(float* img, float* out, int h, int w, int ph, int pw);

int main(void) {
    enum { H = 8, W = 8, PH = 4, PW = 4 };
    float img[H * W];
    float out[PH * PW];
    float expect[PH * PW];
    for (int i = 0; i < H * W; i++) {
        img[i] = 2.5f;
    }
    for (int i = 0; i < PH * PW; i++) {
        expect[i] = 2.5f;
        out[i] = -1.0f;
    }
    pooling(img, out, H, W, PH, PW);
    for (int i = 0; i < PH * PW; i++) {
        if (out[i] != 2.5f) {
            printf("pooling selftest FAIL: out[%d] = %f\n", i, (double)out[i]);
            return 1;
        }
    }
    uint64_t got = km_hash(KM_FNV_INIT, out, sizeof out);
    uint64_t want = km_hash(KM_FNV_INIT, expect, sizeof expect);
    if (got != want) {
        printf("pooling selftest FAIL: checksum %016llx != %016llx\n",
               (unsigned long long)got, (unsigned long long)want);
        return 1;
    }
    printf("pooling selftest OK\n");
    return 0;
}
