#include "msl/experiment.hpp"

int main(int argc, char** argv) { return msl::experiment::main_entry(argc, argv); }
