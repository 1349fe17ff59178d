#include "cli.hpp"

int main(int argc, char** argv) { return cpc::cli::run_cli(argc, argv); }
