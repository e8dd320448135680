#include <string>
#include <vector>

#include "pmivec/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return pmivec::run_cli(args);
}
