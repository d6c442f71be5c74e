// master has no implicit barrier
int main() {
  int x = 0, y = 0;
#pragma omp parallel
  {
#pragma omp master
    x = 42;
    y = x;
  }
  return y;
}
