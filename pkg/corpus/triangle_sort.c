int data[16];

int main() {
    int i;
    int j;
    int tmp;
    for (i = 0; i < 16; ++i)
        data[i] = 16 - i;
    for (i = 0; i < 15; ++i)
        for (j = 0; j < 15 - i; ++j)
            if (data[j] > data[j + 1]) {
                tmp = data[j];
                data[j] = data[j + 1];
                data[j + 1] = tmp;
            }
    return data[0];
}
