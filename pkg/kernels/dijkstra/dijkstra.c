/* Single-source shortest paths from vertex 0 (Dijkstra without a heap):
 * n rounds of linear minimum scan over undone vertices followed by edge
 * relaxation.  Unreachable vertices keep the INT_MAX sentinel; the
 * 2e9 guard keeps the relaxation addition from overflowing on them. */
void dijkstra(int* row, int* col, int* w, int* dist, int* done, int n) {
    for (int i = 0; i < n; i++) {
        dist[i] = 2147483647;
        done[i] = 0;
    }
    dist[0] = 0;
    for (int it = 0; it < n; it++) {
        int best = -1;
        int bestd = 2147483647;
        for (int v = 0; v < n; v++) {
            if (done[v] == 0) {
                if (dist[v] < bestd) {
                    bestd = dist[v];
                    best = v;
                }
            }
        }
        if (best >= 0) {
            if (bestd < 2000000000) {
                done[best] = 1;
                int beg = row[best];
                int end = row[best + 1];
                for (int e = beg; e < end; e++) {
                    int u = col[e];
                    int nd = bestd + w[e];
                    if (dist[u] > nd) {
                        dist[u] = nd;
                    }
                }
            }
        }
    }
}
