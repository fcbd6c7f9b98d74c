#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>

namespace scram::detail {

/// POSIX single-quoting: the result is one shell word whose value is `s`.
std::string sh_quote(const std::string& s);

struct ShellRun {
    int status = -1; // exit status, or 128+signal
    std::string output;
};

/// Runs `command` through /bin/sh -c. `env`, when given, replaces the
/// environment of the child. stdout is captured only when `capture` is set;
/// otherwise the child inherits ours.
ShellRun run_shell(const std::string& command, const std::filesystem::path& cwd = {},
                   const std::map<std::string, std::string>* env = nullptr, bool capture = false);

/// Exclusive advisory lock (flock) held for the object's lifetime. The lock
/// file is created if missing and left in place.
class FileLock {
public:
    explicit FileLock(const std::filesystem::path& file);
    ~FileLock();
    FileLock(const FileLock&) = delete;
    FileLock& operator=(const FileLock&) = delete;

private:
    int fd_ = -1;
};

/// Writes `bytes` to a temporary sibling and renames it over `file`.
void write_file_atomic(const std::filesystem::path& file, std::string_view bytes);

std::string read_file(const std::filesystem::path& file);

/// The current process environment as a map.
std::map<std::string, std::string> current_environment();

} // namespace scram::detail
