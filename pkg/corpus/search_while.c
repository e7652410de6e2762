int main(int x) {
    int lo;
    int hi;
    int mid;
    int pos;
    int found;
    lo = 0;
    hi = 31;
    pos = -1;
    found = 0;
    while (lo <= hi && found == 0) {
        mid = (lo + hi) / 2;
        if (mid * 4 == x) {
            pos = mid;
            found = 1;
        } else {
            if (mid * 4 < x)
                lo = mid + 1;
            else
                hi = mid - 1;
        }
    }
    return pos;
}
