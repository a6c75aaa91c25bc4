/* Setup fragment: deterministic strongly-connected CSR graph.
 * Every vertex v has out-edges to (v+1) mod n and (v+7) mod n, so each
 * row has degree 2 and the traversal reaches every vertex. */
for (int _v = 0; _v <= n; _v++) { row[_v] = 2 * _v; }
for (int _v = 0; _v < n; _v++) {
    col[2 * _v] = (_v + 1) % n;
    col[2 * _v + 1] = (_v + 7) % n;
}
