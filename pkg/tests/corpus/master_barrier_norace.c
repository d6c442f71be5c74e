int main() {
  int x = 0, t;
#pragma omp parallel private(t)
  {
#pragma omp master
    x = 42;
#pragma omp barrier
    t = x;
  }
  return 0;
}
