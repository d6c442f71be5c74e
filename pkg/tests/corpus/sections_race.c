// both sections write the shared scalar x
int main() {
  int x = 0;
#pragma omp parallel shared(x)
  {
    // the first section needs no pragma
    // of its own
#pragma omp sections
    {
      { x = 1; }
#pragma omp section
      { x = 2; }
    }
  }
  return x;
}
