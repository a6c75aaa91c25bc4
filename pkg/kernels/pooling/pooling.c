/* 2x2 max pooling with stride 2 over an h x w image; ph = h/2 and
 * pw = w/2 are the pooled output dimensions. */
void pooling(float* img, float* out, int h, int w, int ph, int pw) {
    for (int i = 0; i < ph; i++) {
        for (int j = 0; j < pw; j++) {
            float m = img[2 * i * w + 2 * j];
            float c1 = img[2 * i * w + 2 * j + 1];
            float c2 = img[(2 * i + 1) * w + 2 * j];
            float c3 = img[(2 * i + 1) * w + 2 * j + 1];
            if (c1 > m) {
                m = c1;
            }
            if (c2 > m) {
                m = c2;
            }
            if (c3 > m) {
                m = c3;
            }
            out[i * pw + j] = m;
        }
    }
}
