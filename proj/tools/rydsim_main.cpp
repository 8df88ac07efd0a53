#include "rydsim/runner.hpp"

int main(int argc, char** argv) { return rydsim::runner::run_cli(argc, argv); }
