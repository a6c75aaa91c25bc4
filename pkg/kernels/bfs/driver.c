#include <stdio.h>
#include <stdint.h>
#include <stdlib.h>
#include "../common/harness.h"

void bfs(int* row, int* col, int* dist, int* queue, int n, int src);

int main(int argc, char **argv) {
    long long size = argc > 1 ? atoll(argv[1]) : 64;
    uint64_t seed = argc > 2 ? strtoull(argv[2], 0, 10) : 1;
    int n = (int)size;
    int src = 0;
    int *row = km_alloc_int((size_t)n + 1, seed, 1);
    int *col = km_alloc_int((size_t)n * 2, seed, 2);
    int *dist = km_alloc_int((size_t)n, seed, 3);
    int *queue = km_alloc_int((size_t)n, seed, 4);
    if (!row || !col || !dist || !queue) return 2;
#include "driver_init.c"
    uint64_t t0 = km_now_ns();
    bfs(row, col, dist, queue, n, src);
    uint64_t t1 = km_now_ns();
    uint64_t h = km_hash(KM_FNV_INIT, dist, (size_t)n * sizeof(int));
    printf("TIME_NS=%lld\n", (long long)(t1 - t0));
    printf("CHECKSUM=%016llx\n", (unsigned long long)h);
    free(row); free(col); free(dist); free(queue);
    return 0;
}
