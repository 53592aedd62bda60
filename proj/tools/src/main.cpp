#include "ember_cli/cli.hpp"

int main(int argc, char** argv) { return ember_cli::run_cli(argc, argv); }
