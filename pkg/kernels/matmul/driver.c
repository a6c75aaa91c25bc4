#include <stdio.h>
#include <stdint.h>
#include <stdlib.h>
#include "../common/harness.h"

void matmul(float* A, float* B, float* C, int n);

int main(int argc, char **argv) {
    long long size = argc > 1 ? atoll(argv[1]) : 96;
    uint64_t seed = argc > 2 ? strtoull(argv[2], 0, 10) : 1;
    int n = (int)size;
    size_t cells = (size_t)n * (size_t)n;
    float *A = km_alloc_float(cells, seed, 1);
    float *B = km_alloc_float(cells, seed, 2);
    float *C = km_alloc_float(cells, seed, 3);
    if (!A || !B || !C) return 2;
    uint64_t t0 = km_now_ns();
    matmul(A, B, C, n);
    uint64_t t1 = km_now_ns();
    uint64_t h = km_hash(KM_FNV_INIT, C, cells * sizeof(float));
    printf("TIME_NS=%lld\n", (long long)(t1 - t0));
    printf("CHECKSUM=%016llx\n", (unsigned long long)h);
    free(A); free(B); free(C);
    return 0;
}
