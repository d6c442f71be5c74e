int main() {
  int x = 0;
#pragma omp parallel
  {
#pragma omp critical(lock)
    x = x + 1;
#pragma omp critical(lock)
    x = x - 3;
  }
  return x;
}
