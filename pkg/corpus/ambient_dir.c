int main(int c) {
    int i;
    int s;
    s = 0;
    for (i = 0; i != 100; i += c)
        s += 1;
    return s;
}
