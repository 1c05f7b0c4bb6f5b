#include "vcsg/cli.hpp"

int main(int argc, char** argv) { return vcsg::cli_main(argc, argv); }
