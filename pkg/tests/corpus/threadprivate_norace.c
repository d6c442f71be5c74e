int counter;
#pragma omp threadprivate(counter)
int main() {
#pragma omp parallel
  {
    counter = counter + 1;
  }
  return 0;
}
