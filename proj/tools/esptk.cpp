#include "esp/io.hpp"

int main(int argc, char** argv) { return esp::cli_main(argc, argv); }
