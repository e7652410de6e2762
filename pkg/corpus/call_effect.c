int g = 10;

void bump() {
    g = g + 5;
    return;
}

int main() {
    int i;
    int s;
    s = 0;
    for (i = 0; i < g; ++i)
        s += 1;
    bump();
    for (i = 0; i < g; ++i)
        s += 1;
    return s;
}
