int main() {
    int i;
    int k;
    int s;
    s = 0;
    for (i = 0; i < 10; i += 3)
        s += 1;
    for (k = 20; k > 0; k -= 2)
        s += 1;
    return s;
}
