int main() {
    int i;
    int total;
    total = 0;
    i = 0;
    while (i <= 30) {
        total += i;
        i += 5;
    }
    return total;
}
