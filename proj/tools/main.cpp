#include "vtn/cli.hpp"

int main(int argc, char** argv) { return vtn::cli_main(argc, argv); }
