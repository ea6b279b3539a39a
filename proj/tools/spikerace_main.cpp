#include "spikerace/cli.hpp"

int main(int argc, char** argv) { return spikerace::run_cli(argc, argv); }
