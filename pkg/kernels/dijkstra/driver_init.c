/* Setup fragment: the deterministic 2-regular CSR graph with small
 * positive edge weights derived from the source vertex index. */
for (int _v = 0; _v <= n; _v++) { row[_v] = 2 * _v; }
for (int _v = 0; _v < n; _v++) {
    col[2 * _v] = (_v + 1) % n;
    col[2 * _v + 1] = (_v + 7) % n;
    w[2 * _v] = 1 + (_v % 9);
    w[2 * _v + 1] = 1 + ((_v * 3) % 11);
}
