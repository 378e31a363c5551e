#include "gcdl/cli.hpp"

int main(int argc, char** argv) { return gcdl::cli_main(argc, argv); }
