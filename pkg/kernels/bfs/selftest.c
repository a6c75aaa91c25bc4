/* Self-check on a hand-checkable case: an undirected path graph of 8
 * vertices (0-1-2-...-7).  From vertex 0 the hop counts are exactly
 * 0,1,2,...,7, derived by hand. */
#include <stdio.h>

void bfs(int* row, int* col, int* dist, int* queue, int n, int src);

int main(void) {
    /* degrees: ends have 1 neighbour, middles 2 -> 14 directed edges */
    int row[9] = {0, 1, 3, 5, 7, 9, 11, 13, 14};
    int col[14] = {1, 0, 2, 1, 3, 2, 4, 3, 5, 4, 6, 5, 7, 6};
    int dist[8];
    int queue[8];
    bfs(row, col, dist, queue, 8, 0);
    for (int i = 0; i < 8; i++) {
        if (dist[i] != i) {
            printf("bfs selftest FAIL: dist[%d] = %d, expected %d\n", i, dist[i], i);
            return 1;
        }
    }
    printf("bfs selftest OK\n");
    return 0;
}
