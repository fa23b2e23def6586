#include "ipc/cli.hpp"

int main(int argc, char** argv) { return ipc::cli_main(argc, argv); }
