#include "cli.hpp"

int main(int argc, char** argv) { return statesel::cli::run(argc, argv); }
