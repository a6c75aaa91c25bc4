/* 1D 3-point box stencil over the interior of the input signal. */
void stencil(float* in, float* out, int n) {
    for (int i = 1; i < n - 1; i++) {
        out[i] = 0.33333334f * (in[i - 1] + in[i] + in[i + 1]);
    }
}
