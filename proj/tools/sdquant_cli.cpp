#include "sdquant/sdquant.hpp"
int main() { return 0; }
