#include "cuhyp/cli/commands.hpp"

int main(int argc, char** argv) { return cuhyp::cli::run_cli(argc, argv); }
