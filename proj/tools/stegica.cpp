#include "stegica/cli/app.hpp"

int main(int argc, char** argv) { return stegica::cli::run_cli(argc, argv); }
