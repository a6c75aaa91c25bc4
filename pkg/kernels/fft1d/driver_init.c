/* Setup fragment: runs in the driver after the default random fills.
 * Folds n down to a power of two, recomputes logn, and builds the
 * bit-reversal and stage-major twiddle tables the kernel expects. */
while (n & (n - 1)) { n = n & (n - 1); }
logn = 0;
for (int _t = n; _t > 1; _t = _t / 2) { logn = logn + 1; }
for (int _i = 0; _i < n; _i++) {
    int _r = 0;
    int _x = _i;
    for (int _b = 0; _b < logn; _b++) {
        _r = (_r << 1) | (_x & 1);
        _x = _x >> 1;
    }
    rev[_i] = _r;
}
for (int _h = 1; _h < n; _h = _h * 2) {
    for (int _t = 0; _t < _h; _t++) {
        double _ang = -3.14159265358979323846 * (double)_t / (double)_h;
        wre[_h - 1 + _t] = (float)cos(_ang);
        wim[_h - 1 + _t] = (float)sin(_ang);
    }
}
