#include <cstdio>
int main() { std::puts("acceptance suite not implemented"); return 1; }
