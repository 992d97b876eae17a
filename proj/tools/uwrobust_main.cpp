#include "uwr/cli.hpp"

int main(int argc, char** argv) { return uwr::run(argc, argv); }
