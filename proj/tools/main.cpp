#include "cli.hpp"

int main(int argc, char** argv) { return ordcert::cli::run(argc, argv); }
