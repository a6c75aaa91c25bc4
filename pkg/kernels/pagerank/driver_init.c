/* Setup fragment: same deterministic 2-regular CSR graph family as the
 * other graph kernels, read here as in-link lists.  Every vertex has
 * outdegree 2, so 1/outdegree is a constant 0.5. */
for (int _v = 0; _v <= n; _v++) { row[_v] = 2 * _v; }
for (int _v = 0; _v < n; _v++) {
    col[2 * _v] = (_v + 1) % n;
    col[2 * _v + 1] = (_v + 7) % n;
    inv_deg[_v] = 0.5f;
}
