#include "widthlab/cli.hpp"

int main(int argc, char** argv) { return widthlab::cli::main_entry(argc, argv); }
