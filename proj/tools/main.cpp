#include "lightcone/cli.hpp"

int main(int argc, char** argv) { return lightcone::cli::main_entry(argc, argv); }
