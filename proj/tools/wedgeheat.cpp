#include "wedgeheat/cli.hpp"

int main(int argc, char** argv) { return wedgeheat::run_command(argc, argv); }
