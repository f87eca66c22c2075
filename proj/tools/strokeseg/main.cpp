#include "strokeseg/commands.hpp"

int main(int argc, char** argv) { return strokeseg::cli::run(argc, argv); }
