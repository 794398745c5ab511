#include "ldc/cli.hpp"

int main(int argc, char** argv) { return ldc::cli::run(argc, argv); }
