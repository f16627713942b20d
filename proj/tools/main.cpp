#include "wwsp/cli.hpp"

int main(int argc, char** argv) { return wwsp::run_cli(argc, argv); }
