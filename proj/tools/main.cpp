#include "refracted/cli.hpp"

int main(int argc, char** argv) { return refracted::run(argc, argv); }
