#include "ehsc/cli.hpp"

int main(int argc, char** argv) { return ehsc::run_cli(argc, argv); }
