#include "ellgamma/cli.hpp"

int main(int argc, char** argv) { return ellgamma::cli::run_cli(argc, argv); }
