#include <stdio.h>
#include <stdint.h>
#include <stdlib.h>
#include "../common/harness.h"

void attention(float* q, float* k, float* v, float* out, float* scores, int seq, int d);

int main(int argc, char **argv) {
    long long size = argc > 1 ? atoll(argv[1]) : 48;
    uint64_t seed = argc > 2 ? strtoull(argv[2], 0, 10) : 1;
    int seq = (int)size;
    int d = 16;
    float *q = km_alloc_float((size_t)seq * d, seed, 1);
    float *k = km_alloc_float((size_t)seq * d, seed, 2);
    float *v = km_alloc_float((size_t)seq * d, seed, 3);
    float *out = km_alloc_float((size_t)seq * d, seed, 4);
    float *scores = km_alloc_float((size_t)seq * seq, seed, 5);
    if (!q || !k || !v || !out || !scores) return 2;
    uint64_t t0 = km_now_ns();
    attention(q, k, v, out, scores, seq, d);
    uint64_t t1 = km_now_ns();
    uint64_t h = km_hash(KM_FNV_INIT, out, (size_t)seq * d * sizeof(float));
    h = km_hash(h, scores, (size_t)seq * seq * sizeof(float));
    printf("TIME_NS=%lld\n", (long long)(t1 - t0));
    printf("CHECKSUM=%016llx\n", (unsigned long long)h);
    free(q); free(k); free(v); free(out); free(scores);
    return 0;
}
