#include "infobound/cli/commands.hpp"

int main(int argc, char** argv) { return infobound::cli::run(argc, argv); }
