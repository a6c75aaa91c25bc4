/* Breadth-first search over a CSR graph using an explicit ring-free
 * queue: each vertex enters the queue at most once, so n pop steps
 * bound the traversal.  dist[v] is the hop count from src, -1 when
 * unreachable. */
void bfs(int* row, int* col, int* dist, int* queue, int n, int src) {
    for (int i = 0; i < n; i++) {
        dist[i] = -1;
    }
    dist[src] = 0;
    queue[0] = src;
    int head = 0;
    int tail = 1;
    for (int step = 0; step < n; step++) {
        if (head < tail) {
            int v = queue[head];
            head = head + 1;
            int beg = row[v];
            int end = row[v + 1];
            for (int e = beg; e < end; e++) {
                int u = col[e];
                if (dist[u] < 0) {
                    dist[u] = dist[v] + 1;
                    queue[tail] = u;
                    tail = tail + 1;
                }
            }
        }
    }
}
