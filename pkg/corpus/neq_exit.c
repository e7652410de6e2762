int main() {
    int i;
    int t;
    t = 0;
    for (i = 0; i != 9; i += 3)
        t += 1;
    for (i = 0; i != 10; i += 3)
        t += 1;
    return t;
}
