int main(int x) {
    int flag;
    int s;
    flag = 1;
    s = 0;
    while (flag) {
        s += 1;
        x = x / 2;
        if (x == 0)
            flag = 0;
    }
    return s;
}
