#include "pbd/cli/cli.hpp"

int main(int argc, char** argv) { return pbd::cli::run(argc, argv); }
