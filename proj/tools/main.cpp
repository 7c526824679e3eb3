#include "cli.hpp"

int main(int argc, char** argv) { return timsrf::cli::run(argc, argv); }
