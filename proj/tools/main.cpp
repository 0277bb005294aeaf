#include "robinp/cli.hpp"

int main(int argc, char** argv) { return robinp::run_cli(argc, argv); }
