int main() {
  int x = 0;
#pragma omp parallel
  {
#pragma omp critical
    x = x + 1;
#pragma omp critical
    {
      x = x * 2;
    }
  }
  return x;
}
