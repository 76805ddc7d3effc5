#include <iostream>
int main(int, char**) { std::cout << "placeholder\n"; return 0; }
