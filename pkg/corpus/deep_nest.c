int main() {
    int i;
    int j;
    int k;
    int c;
    c = 0;
    for (i = 0; i < 6; ++i)
        for (j = 0; j <= i; ++j)
            for (k = j; k > 0; --k)
                c += 1;
    return c;
}
