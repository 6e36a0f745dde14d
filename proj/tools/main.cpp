#include <selective/cli.hpp>

int main(int argc, char** argv) { return selective::run_cli(argc, argv); }
