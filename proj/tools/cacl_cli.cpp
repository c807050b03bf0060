#include "cacl/cli.hpp"

int main(int argc, char** argv) { return cacl::cli::run(argc, argv); }
