int a[64];
int b[64];
int c[64];

int main() {
    int i;
    int j;
    int k;
    int t;
    for (i = 0; i < 8; ++i) {
        for (j = 0; j < 8; ++j) {
            t = 0;
            for (k = 0; k < 8; ++k)
                t += a[i * 8 + k] * b[k * 8 + j];
            c[i * 8 + j] = t;
        }
    }
    return 0;
}
