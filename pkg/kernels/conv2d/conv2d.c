/* 2D valid convolution (cross-correlation) of an h x w image with a
 * k x k filter; oh = h-k+1 and ow = w-k+1 are the output dimensions. */
void conv2d(float* img, float* ker, float* out, int h, int w, int k, int oh, int ow) {
    for (int i = 0; i < oh; i++) {
        for (int j = 0; j < ow; j++) {
            float s = 0.0f;
            for (int p = 0; p < k; p++) {
                for (int q = 0; q < k; q++) {
                    s += img[(i + p) * w + j + q] * ker[p * k + q];
                }
            }
            out[i * ow + j] = s;
        }
    }
}
