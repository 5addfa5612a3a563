#include "mmslu/cli/commands.hpp"

int main(int argc, char** argv) { return mmslu::cli::run(argc, argv); }
