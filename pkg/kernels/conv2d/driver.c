#include <stdio.h>
#include <stdint.h>
#include <stdlib.h>
#include "../common/harness.h"

void conv2d(float* img, float* ker, float* out, int h, int w, int k, int oh, int ow);

int main(int argc, char **argv) {
    long long size = argc > 1 ? atoll(argv[1]) : 64;
    uint64_t seed = argc > 2 ? strtoull(argv[2], 0, 10) : 1;
    int h = (int)size;
    int w = h;
    int k = 5;
    int oh = h - k + 1;
    int ow = w - k + 1;
    if (oh < 1 || ow < 1) return 2;
    float *img = km_alloc_float((size_t)h * w, seed, 1);
    float *ker = km_alloc_float((size_t)k * k, seed, 2);
    float *out = km_alloc_float((size_t)oh * ow, seed, 3);
    if (!img || !ker || !out) return 2;
    uint64_t t0 = km_now_ns();
    conv2d(img, ker, out, h, w, k, oh, ow);
    uint64_t t1 = km_now_ns();
    uint64_t hsh = km_hash(KM_FNV_INIT, out, (size_t)oh * ow * sizeof(float));
    printf("TIME_NS=%lld\n", (long long)(t1 - t0));
    printf("CHECKSUM=%016llx\n", (unsigned long long)hsh);
    free(img); free(ker); free(out);
    return 0;
}
