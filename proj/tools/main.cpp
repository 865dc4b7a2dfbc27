#include "lasernoise/cli.hpp"

int main(int argc, char** argv) { return lasernoise::run_cli(argc, argv); }
