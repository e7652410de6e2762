int main(int p) {
    int i;
    int j;
    int s;
    s = 0;
    if (p < 1)
        p = 1;
    for (i = 0; i < 4; ++i) {
        j = p;
        while (j > 1) {
            j = j / 2;
            s += 1;
        }
    }
    while (p > 1) {
        for (j = 0; j < 4; ++j)
            s += j;
        p = p / 2;
    }
    return s;
}
