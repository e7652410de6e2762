void reset(int p) {
    return;
}

int main() {
    int i;
    int s;
    s = 0;
    for (i = 0; i < 8; ++i)
        s += i;
    reset(&i);
    return s;
}
