#include <vector>

#include "spectronet/cli.hpp"

int main(int argc, char** argv) {
    return spectronet::cli::run(
        std::vector<std::string>(argv + 1, argv + argc));
}
