/* Iterative radix-2 complex FFT, decimation in time.
 *
 * The caller supplies a bit-reversal permutation table `rev` and twiddle
 * tables laid out stage-major: for the stage with half-size h, entry
 * h - 1 + t holds cos/sin(-pi * t / h).  n must be a power of two and
 * logn its base-2 logarithm.
 */
void fft1d(float* re, float* im, int* rev, float* wre, float* wim, int n, int logn) {
    for (int i = 0; i < n; i++) {
        int j = rev[i];
        if (j > i) {
            float tr = re[i];
            float ti = im[i];
            re[i] = re[j];
            im[i] = im[j];
            re[j] = tr;
            im[j] = ti;
        }
    }
    int half = 1;
    for (int s = 0; s < logn; s++) {
        int stride = half * 2;
        int blocks = n / stride;
        for (int b = 0; b < blocks; b++) {
            for (int t = 0; t < half; t++) {
                int p = b * stride + t;
                int q = p + half;
                float wr = wre[half - 1 + t];
                float wi = wim[half - 1 + t];
                float xr = re[q] * wr - im[q] * wi;
                float xi = re[q] * wi + im[q] * wr;
                re[q] = re[p] - xr;
                im[q] = im[p] - xi;
                re[p] = re[p] + xr;
                im[p] = im[p] + xi;
            }
        }
        half = stride;
    }
}
