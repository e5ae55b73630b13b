#include "flowplan/cli.hpp"

int main(int argc, char** argv) { return flowplan::run_cli(argc, argv); }
