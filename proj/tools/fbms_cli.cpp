#include "fbms/cli.hpp"

int main(int argc, char** argv) { return fbms::cli::run(argc, argv); }
