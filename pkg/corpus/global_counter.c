int gi = 0;
int limit = 12;

int main() {
    int s;
    s = 0;
    for (gi = 0; gi < limit; ++gi)
        s += gi;
    return s;
}
