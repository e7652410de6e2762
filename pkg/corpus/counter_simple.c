int main() {
    int i;
    int s;
    s = 0;
    for (i = 0; i < 100; ++i)
        s += i;
    return s;
}
