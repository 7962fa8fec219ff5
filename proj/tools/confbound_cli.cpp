#include <cstdio>
int main() { std::puts("confbound: under construction"); return 0; }
