/* Shared driver harness for the kernel corpus.
 *
 * Every driver built on this header follows one output contract:
 *
 *     TIME_NS=<integer>     nanoseconds spent inside the kernel call
 *     CHECKSUM=<hex>        FNV-1a 64 over the output buffers
 *
 * and accepts `<size> <seed>` command-line arguments.  Input buffers are
 * filled deterministically from the seed (splitmix64), so a fixed
 * (size, seed) pair always produces the same checksum.
 */
#ifndef KM_HARNESS_H
#define KM_HARNESS_H

#include <stdint.h>
#include <stdlib.h>
#include <time.h>

#define KM_FNV_INIT 1469598103934665603ull

static inline uint64_t km_sm_next(uint64_t *state) {
    uint64_t z = (*state += 0x9E3779B97F4A7C15ull);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

static inline uint64_t km_now_ns(void) {
    struct timespec ts;
    clock_gettime(CLOCK_MONOTONIC, &ts);
    return (uint64_t)ts.tv_sec * 1000000000ull + (uint64_t)ts.tv_nsec;
}

static inline uint64_t km_hash(uint64_t h, const void *p, size_t nbytes) {
    const unsigned char *b = (const unsigned char *)p;
    for (size_t i = 0; i < nbytes; i++) {
        h ^= b[i];
        h *= 1099511628211ull;
    }
    return h;
}

/* Allocation + deterministic fill, one rng stream per buffer index. */

static inline float *km_alloc_float(size_t count, uint64_t seed, unsigned idx) {
    float *p = (float *)malloc(count * sizeof(float));
    uint64_t rng = seed * 0x9E3779B97F4A7C15ull + idx;
    if (p)
        for (size_t i = 0; i < count; i++)
            p[i] = (float)((km_sm_next(&rng) >> 40) * (1.0 / 16777216.0));
    return p;
}

static inline double *km_alloc_double(size_t count, uint64_t seed, unsigned idx) {
    double *p = (double *)malloc(count * sizeof(double));
    uint64_t rng = seed * 0x9E3779B97F4A7C15ull + idx;
    if (p)
        for (size_t i = 0; i < count; i++)
            p[i] = (double)(km_sm_next(&rng) >> 11) * (1.0 / 9007199254740992.0);
    return p;
}

static inline int *km_alloc_int(size_t count, uint64_t seed, unsigned idx) {
    int *p = (int *)malloc(count * sizeof(int));
    uint64_t rng = seed * 0x9E3779B97F4A7C15ull + idx;
    if (p)
        for (size_t i = 0; i < count; i++)
            p[i] = (int)(km_sm_next(&rng) % 100);
    return p;
}

static inline long *km_alloc_long(size_t count, uint64_t seed, unsigned idx) {
    long *p = (long *)malloc(count * sizeof(long));
    uint64_t rng = seed * 0x9E3779B97F4A7C15ull + idx;
    if (p)
        for (size_t i = 0; i < count; i++)
            p[i] = (long)(km_sm_next(&rng) % 1000);
    return p;
}

#endif /* KM_HARNESS_H */
