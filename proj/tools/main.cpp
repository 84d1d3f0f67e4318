#include "pmech/scenario.hpp"

int main(int argc, char** argv) { return pmech::runCli(argc, argv); }
