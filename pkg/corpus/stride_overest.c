int main(int k) {
    int i;
    int s;
    s = 0;
    if (k < 2)
        k = 2;
    if (k > 4)
        k = 4;
    for (i = k; i <= 10; i += 2)
        s += 1;
    return s;
}
