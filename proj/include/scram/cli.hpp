#pragma once

#include "scram/toolspec.hpp"

#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace scram::cli {

inline constexpr const char* kVersion = "1.0.0";

struct Invocation {
    std::vector<std::string> args; // without the program name
    std::map<std::string, std::string> env;
    std::filesystem::path cwd;
    toolspec::PromptCallback prompt; // unset: never ask
};

/// Runs one command. Returns 0 on success, 1 on an operational failure
/// (reported as `scram: <command>: <message>` on `err`), 2 on a usage error;
/// `build` returns the build command's status.
int dispatch(const Invocation& inv, std::ostream& out, std::ostream& err);

/// Prompt that asks on `err` and reads an answer line from `in`.
toolspec::PromptCallback stream_prompt(std::istream& in, std::ostream& err);

} // namespace scram::cli
