#include "bnpmed/run.hpp"

int main(int argc, char** argv) { return bnpmed::io::main_entry(argc, argv); }
