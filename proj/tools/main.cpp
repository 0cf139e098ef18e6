#include "cli.hpp"

int main(int argc, char** argv) { return pcr::cli::run(argc, argv); }
