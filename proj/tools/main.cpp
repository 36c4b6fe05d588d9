#include <fdatest/cli.hpp>

int main(int argc, char** argv) { return fdatest::run_cli(argc, argv); }
