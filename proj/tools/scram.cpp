#include "scram/cli.hpp"

#include <iostream>
#include <unistd.h>

extern char** environ;

int main(int argc, char** argv)
{
    scram::cli::Invocation inv;
    inv.args.assign(argv + 1, argv + argc);
    for (char** e = environ; *e; ++e) {
        const std::string entry(*e);
        const auto eq = entry.find('=');
        if (eq != std::string::npos)
            inv.env.emplace(entry.substr(0, eq), entry.substr(eq + 1));
    }
    inv.cwd = std::filesystem::current_path();
    if (isatty(STDIN_FILENO))
        inv.prompt = scram::cli::stream_prompt(std::cin, std::cerr);
    return scram::cli::dispatch(inv, std::cout, std::cerr);
}
