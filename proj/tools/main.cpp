#include "sldsmbc/io.hpp"

int main(int argc, char** argv) { return sldsmbc::cli_main(argc, argv); }
