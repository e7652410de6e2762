int main() {
    int i;
    int s;
    s = 0;
    for (i = 5; i < 20 && i > 0; ++i)
        s += 1;
    for (i = 0; i < 20 && i < 10; ++i)
        s += 1;
    return s;
}
