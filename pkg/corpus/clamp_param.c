int main(int n) {
    int i;
    int s;
    s = 0;
    if (n < 1)
        n = 1;
    if (n > 100)
        n = 100;
    for (i = 0; i < n; ++i)
        s += 1;
    return s;
}
