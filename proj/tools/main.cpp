#include "pqosc/cli.hpp"

int main(int argc, char** argv) { return pqosc::cli_main(argc, argv); }
