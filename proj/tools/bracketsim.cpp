#include "bracket/cli.hpp"

int main(int argc, char** argv) { return bracket::cli::run(argc, argv); }
