// nowait lets the single read a[9] while other threads still write a[i]
int a[100];
int main() {
  int i, error;
  int len = 100, b = 5;
#pragma omp parallel shared(b, error)
  {
#pragma omp for nowait
    for (i = 0; i < len; i++)
      a[i] = b + a[i] * 5;
#pragma omp single
    error = a[9] + 1;
  }
  return 0;
}
