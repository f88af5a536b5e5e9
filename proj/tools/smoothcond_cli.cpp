#include "smoothcond/cli.hpp"

int main(int argc, char** argv) { return smoothcond::cli::main(argc, argv); }
