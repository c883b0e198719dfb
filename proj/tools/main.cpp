#include "tct/pipeline.hpp"

int main(int argc, char** argv) { return tct::run_cli(argc, argv); }
