#include "etdrd/harness.hpp"

int main(int argc, char** argv) { return etdrd::cli_main(argc, argv); }
