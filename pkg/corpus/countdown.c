int main() {
    int i;
    int s;
    s = 0;
    for (i = 10; i >= 1; --i)
        s += i;
    for (i = 9; i > 0; i -= 4)
        s += i;
    return s;
}
