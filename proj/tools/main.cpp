#include "commands.hpp"

int main(int argc, char** argv) { return coditkit::cli::run(argc, argv); }
