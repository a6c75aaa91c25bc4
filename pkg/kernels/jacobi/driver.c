#include <stdio.h>
#include <stdint.h>
#include <stdlib.h>
#include "../common/harness.h"

void jacobi(double* b, double* u, double* tmp, int n, int iters);

int main(int argc, char **argv) {
    long long size = argc > 1 ? atoll(argv[1]) : 64;
    uint64_t seed = argc > 2 ? strtoull(argv[2], 0, 10) : 1;
    int n = (int)size;
    int iters = 10;
    size_t cells = (size_t)n * (size_t)n;
    double *b = km_alloc_double(cells, seed, 1);
    double *u = km_alloc_double(cells, seed, 2);
    double *tmp = km_alloc_double(cells, seed, 3);
    if (!b || !u || !tmp) return 2;
    uint64_t t0 = km_now_ns();
    jacobi(b, u, tmp, n, iters);
    uint64_t t1 = km_now_ns();
    uint64_t h = km_hash(KM_FNV_INIT, u, cells * sizeof(double));
    printf("TIME_NS=%lld\n", (long long)(t1 - t0));
    printf("CHECKSUM=%016llx\n", (unsigned long long)h);
    free(b); free(u); free(tmp);
    return 0;
}
