#include "context_drift/cli.hpp"

int main(int argc, char** argv) { return context_drift::cli::run_cli(argc, argv); }
