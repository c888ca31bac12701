#include "selfwire/cli.hpp"

int main(int argc, char** argv) { return selfwire::cli::main(argc, argv); }
