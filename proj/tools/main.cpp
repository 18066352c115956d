#include "cli.hpp"

int main(int argc, char** argv) { return ledgerloop::cli::run(argc, argv); }
