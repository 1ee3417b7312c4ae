#include "pdet/cli.hpp"

int main(int argc, char** argv) { return pdet::cli::run_cli(argc, argv); }
