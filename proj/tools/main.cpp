#include "iamod/cli.hpp"

int main(int argc, char** argv) { return iamod::cli_main(argc, argv); }
