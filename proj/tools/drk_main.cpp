#include "drk/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args;
    args.reserve(static_cast<std::size_t>(argc));
    for (int i = 1; i < argc; ++i)
        args.emplace_back(argv[i]);
    return drk::cli::run_command(args);
}
