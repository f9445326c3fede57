#include "cli.hpp"

int main(int argc, char** argv) { return hhcl::cli::run({argv, argv + argc}); }
