#include "fdamimo/cli.hpp"

int main(int argc, char** argv) { return fdamimo::run_cli(argc, argv); }
