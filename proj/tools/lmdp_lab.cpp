#include <lmdp/cli.hpp>

int main(int argc, char** argv) { return lmdp::cli_dispatch(argc, argv); }
