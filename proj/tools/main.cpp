#include "hypflow/cli.hpp"

int main(int argc, char** argv) { return hypflow::cli::run(argc, argv); }
