// tasking is outside the supported subset: the kernel is reported as not covered
int main() {
  int x = 0;
#pragma omp parallel
  {
#pragma omp single
    {
#pragma omp task
      x = 1;
    }
  }
  return x;
}
