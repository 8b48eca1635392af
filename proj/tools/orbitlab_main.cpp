#include "orbitlab/experiments.hpp"

int main(int argc, char** argv) { return orbitlab::cli_main(argc, argv); }
