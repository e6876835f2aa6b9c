#include "cqe/cli.hpp"

int main(int argc, char** argv) { return cqe::run_cli(argc, argv); }
