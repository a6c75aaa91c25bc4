#include <stdio.h>
#include <stdint.h>
#include <stdlib.h>
#include <math.h>
#include "../common/harness.h"

void fft1d(float* re, float* im, int* rev, float* wre, float* wim, int n, int logn);

int main(int argc, char **argv) {
    long long size = argc > 1 ? atoll(argv[1]) : 64;
    uint64_t seed = argc > 2 ? strtoull(argv[2], 0, 10) : 1;
    int n = (int)size;
    int logn = 0;
    size_t count = (size_t)n;
    float *re = km_alloc_float(count, seed, 1);
    float *im = km_alloc_float(count, seed, 2);
    int *rev = km_alloc_int(count, seed, 3);
    float *wre = km_alloc_float(count, seed, 4);
    float *wim = km_alloc_float(count, seed, 5);
    if (!re || !im || !rev || !wre || !wim) return 2;
#include "driver_init.c"
    uint64_t t0 = km_now_ns();
    fft1d(re, im, rev, wre, wim, n, logn);
    uint64_t t1 = km_now_ns();
    uint64_t h = km_hash(KM_FNV_INIT, re, count * sizeof(float));
    h = km_hash(h, im, count * sizeof(float));
    printf("TIME_NS=%lld\n", (long long)(t1 - t0));
    printf("CHECKSUM=%016llx\n", (unsigned long long)h);
    free(re); free(im); free(rev); free(wre); free(wim);
    return 0;
}
