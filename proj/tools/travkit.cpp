#include "travkit/cli.hpp"

int main(int argc, char** argv) { return travkit::run_cli(argc, argv); }
