#include "hesslab/cli.hpp"

int main(int argc, char** argv) { return hesslab::cli::run(argc, argv); }
