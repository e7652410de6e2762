int main() {
    int i;
    int s;
    s = 0;
    for (i = 5; i < 5; ++i)
        s += 1;
    return s;
}
