#include <stdio.h>
#include <stdint.h>
#include <stdlib.h>
#include "../common/harness.h"

void pagerank(int* row, int* col, float* rank, float* tmp, float* inv_deg, int n, int iters);

int main(int argc, char **argv) {
    long long size = argc > 1 ? atoll(argv[1]) : 64;
    uint64_t seed = argc > 2 ? strtoull(argv[2], 0, 10) : 1;
    int n = (int)size;
    int iters = 20;
    int *row = km_alloc_int((size_t)n + 1, seed, 1);
    int *col = km_alloc_int((size_t)n * 2, seed, 2);
    float *rank = km_alloc_float((size_t)n, seed, 3);
    float *tmp = km_alloc_float((size_t)n, seed, 4);
    float *inv_deg = km_alloc_float((size_t)n, seed, 5);
    if (!row || !col || !rank || !tmp || !inv_deg) return 2;
#include "driver_init.c"
    uint64_t t0 = km_now_ns();
    pagerank(row, col, rank, tmp, inv_deg, n, iters);
    uint64_t t1 = km_now_ns();
    uint64_t h = km_hash(KM_FNV_INIT, rank, (size_t)n * sizeof(float));
    printf("TIME_NS=%lld\n", (long long)(t1 - t0));
    printf("CHECKSUM=%016llx\n", (unsigned long long)h);
    free(row); free(col); free(rank); free(tmp); free(inv_deg);
    return 0;
}
