int a[100];
int main() {
  int i, sum = 0;
#pragma omp parallel for
  for (i = 0; i < 100; i++)
    sum += a[i];
  return sum;
}
