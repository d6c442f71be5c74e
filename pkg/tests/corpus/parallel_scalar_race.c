int main() {
  int count = 0;
#pragma omp parallel
  {
    count = count + 1;
  }
  return count;
}
