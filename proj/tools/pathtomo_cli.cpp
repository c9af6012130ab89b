#include "pathtomo/cli/commands.hpp"

int main(int argc, char** argv) { return pathtomo::cli::run(argc, argv); }
