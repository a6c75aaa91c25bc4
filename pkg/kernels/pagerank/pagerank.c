/* PageRank power iteration over a CSR graph (edges stored as in-links:
 * col[e] lists the sources feeding vertex v).  inv_deg holds 1/outdegree
 * per source vertex, so each sweep computes
 *     rank'[v] = 0.15 + 0.85 * sum over in-links of rank[u]/outdeg(u)
 * double-buffered through tmp. */
void pagerank(int* row, int* col, float* rank, float* tmp, float* inv_deg, int n, int iters) {
    for (int it = 0; it < iters; it++) {
        for (int v = 0; v < n; v++) {
            float s = 0.0f;
            int beg = row[v];
            int end = row[v + 1];
            for (int e = beg; e < end; e++) {
                int u = col[e];
                s += rank[u] * inv_deg[u];
            }
            tmp[v] = 0.15f + 0.85f * s;
        }
        for (int v = 0; v < n; v++) {
            rank[v] = tmp[v];
        }
    }
}
