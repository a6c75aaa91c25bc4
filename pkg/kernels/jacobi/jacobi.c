/* Jacobi relaxation on an n x n grid: repeated 4-neighbour averaging
 * sweeps with a forcing term, double-buffered through tmp. */
void jacobi(double* b, double* u, double* tmp, int n, int iters) {
    for (int it = 0; it < iters; it++) {
        for (int i = 1; i < n - 1; i++) {
            for (int j = 1; j < n - 1; j++) {
                tmp[i * n + j] = 0.25 * (u[(i - 1) * n + j] + u[(i + 1) * n + j] + u[i * n + j - 1] + u[i * n + j + 1] + b[i * n + j]);
            }
        }
        for (int i = 1; i < n - 1; i++) {
            for (int j = 1; j < n - 1; j++) {
                u[i * n + j] = tmp[i * n + j];
            }
        }
    }
}
