#include <stdio.h>
#include <stdint.h>
#include <stdlib.h>
#include "../common/harness.h"

void pooling(float* img, float* out, int h, int w, int ph, int pw);

int main(int argc, char **argv) {
    long long size = argc > 1 ? atoll(argv[1]) : 64;
    uint64_t seed = argc > 2 ? strtoull(argv[2], 0, 10) : 1;
    int h = (int)size;
    int w = h;
    int ph = h / 2;
    int pw = w / 2;
    if (ph < 1 || pw < 1) return 2;
    float *img = km_alloc_float((size_t)h * w, seed, 1);
    float *out = km_alloc_float((size_t)ph * pw, seed, 2);
    if (!img || !out) return 2;
    uint64_t t0 = km_now_ns();
    pooling(img, out, h, w, ph, pw);
    uint64_t t1 = km_now_ns();
    uint64_t hsh = km_hash(KM_FNV_INIT, out, (size_t)ph * pw * sizeof(float));
    printf("TIME_NS=%lld\n", (long long)(t1 - t0));
    printf("CHECKSUM=%016llx\n", (unsigned long long)hsh);
    free(img); free(out);
    return 0;
}
