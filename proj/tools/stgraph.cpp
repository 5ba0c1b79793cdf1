#include <string>
#include <vector>

#include "stg/cli.hpp"

int main(int argc, char** argv) { return stg::cli::run(std::vector<std::string>(argv, argv + argc)); }
