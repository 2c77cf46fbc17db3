#include "semikernel/harness.hpp"

int main(int argc, char** argv) { return semikernel::cli_main(argc, argv); }
