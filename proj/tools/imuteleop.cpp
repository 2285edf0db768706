#include "imuteleop/session/cli.hpp"

int main(int argc, char** argv) { return imuteleop::run_cli(argc, argv); }
