#include <cstdio>
int main() { std::printf("acceptance scaffolding\n"); return 1; }
