int acc = 0;

void work(int n) {
    if (n <= 0)
        return;
    acc += n;
    work(n - 1);
}

int main(int n) {
    if (n > 10)
        n = 10;
    work(n);
    return acc;
}
