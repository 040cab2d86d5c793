#include "plenome/cli.hpp"

int main(int argc, char** argv) { return plenome::run_cli(argc, argv); }
