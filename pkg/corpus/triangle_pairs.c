int main() {
    int i;
    int j;
    int s;
    s = 0;
    for (i = 0; i < 10; ++i)
        for (j = i; j > 0; j -= 2)
            s += 1;
    return s;
}
