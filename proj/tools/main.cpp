#include "fgradar/cli.hpp"

int main(int argc, char** argv) { return fgradar::cli::run(argc, argv); }
