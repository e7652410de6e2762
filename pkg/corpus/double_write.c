int main() {
    int i;
    int s;
    s = 0;
    for (i = 0; i < 10; ++i) {
        s += i;
        i = 7;
    }
    return s;
}
