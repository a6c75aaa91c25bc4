#include <stdio.h>
#include <stdint.h>
#include <stdlib.h>
#include "../common/harness.h"

void dijkstra(int* row, int* col, int* w, int* dist, int* done, int n);

int main(int argc, char **argv) {
    long long size = argc > 1 ? atoll(argv[1]) : 64;
    uint64_t seed = argc > 2 ? strtoull(argv[2], 0, 10) : 1;
    int n = (int)size;
    int *row = km_alloc_int((size_t)n + 1, seed, 1);
    int *col = km_alloc_int((size_t)n * 2, seed, 2);
    int *w = km_alloc_int((size_t)n * 2, seed, 3);
    int *dist = km_alloc_int((size_t)n, seed, 4);
    int *done = km_alloc_int((size_t)n, seed, 5);
    if (!row || !col || !w || !dist || !done) return 2;
#include "driver_init.c"
    uint64_t t0 = km_now_ns();
    dijkstra(row, col, w, dist, done, n);
    uint64_t t1 = km_now_ns();
    uint64_t h = km_hash(KM_FNV_INIT, dist, (size_t)n * sizeof(int));
    printf("TIME_NS=%lld\n", (long long)(t1 - t0));
    printf("CHECKSUM=%016llx\n", (unsigned long long)h);
    free(row); free(col); free(w); free(dist); free(done);
    return 0;
}
