/* Scaled-dot-product attention, naive three-phase formulation over a
 * seq x d query/key/value block.  The exponential inside the softmax is
 * approximated call-free as (1 + x/1024)^1024 by ten repeated squarings,
 * clamped away from zero so the row sums stay positive. */
void attention(float* q, float* k, float* v, float* out, float* scores, int seq, int d) {
    for (int i = 0; i < seq; i++) {
        for (int j = 0; j < seq; j++) {
            float s = 0.0f;
            for (int t = 0; t < d; t++) {
                s += q[i * d + t] * k[j * d + t];
            }
            float e = 1.0f + s * 0.0009765625f;
            if (e < 0.03125f) {
                e = 0.03125f;
            }
            float e2 = e * e;
            float e4 = e2 * e2;
            float e8 = e4 * e4;
            float e16 = e8 * e8;
            float e32 = e16 * e16;
            float e64 = e32 * e32;
            float e128 = e64 * e64;
            float e256 = e128 * e128;
            float e512 = e256 * e256;
            scores[i * seq + j] = e512 * e512;
        }
    }
    for (int i = 0; i < seq; i++) {
        float denom = 0.0f;
        for (int j = 0; j < seq; j++) {
            denom += scores[i * seq + j];
        }
        float inv = 1.0f / denom;
        for (int t = 0; t < d; t++) {
            float acc = 0.0f;
            for (int j = 0; j < seq; j++) {
                acc += scores[i * seq + j] * v[j * d + t];
            }
            out[i * d + t] = acc * inv;
        }
    }
}
