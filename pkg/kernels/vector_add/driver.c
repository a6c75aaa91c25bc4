#include <stdio.h>
#include <stdint.h>
#include <stdlib.h>
#include "../common/harness.h"

void vector_add(float* a, float* b, float* c, int n);

int main(int argc, char **argv) {
    long long size = argc > 1 ? atoll(argv[1]) : 1024;
    uint64_t seed = argc > 2 ? strtoull(argv[2], 0, 10) : 1;
    int n = (int)size;
    float *a = km_alloc_float((size_t)n, seed, 1);
    float *b = km_alloc_float((size_t)n, seed, 2);
    float *c = km_alloc_float((size_t)n, seed, 3);
    if (!a || !b || !c) return 2;
    uint64_t t0 = km_now_ns();
    vector_add(a, b, c, n);
    uint64_t t1 = km_now_ns();
    uint64_t h = km_hash(KM_FNV_INIT, c, (size_t)n * sizeof(float));
    printf("TIME_NS=%lld\n", (long long)(t1 - t0));
    printf("CHECKSUM=%016llx\n", (unsigned long long)h);
    free(a); free(b); free(c);
    return 0;
}
