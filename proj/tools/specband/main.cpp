#include "specband/cli.hpp"

int main(int argc, char** argv) { return specband::cli::main(argc, argv); }
