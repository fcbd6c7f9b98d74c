#pragma once

// Look-up database of central installations: a text file with one
// `project version arch location` record per line. The location is the rest
// of the line and may contain spaces.

#include "scram/config.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace scram {

struct InstallationRecord {
    std::string project;
    std::string version;
    std::string arch;
    std::filesystem::path location;

    bool operator==(const InstallationRecord&) const = default;
};

class Registry {
public:
    explicit Registry(std::filesystem::path file);

    const std::filesystem::path& file() const { return file_; }

    /// Missing file reads as empty. Blank and `#` lines are skipped;
    /// malformed lines are an error naming the line.
    std::vector<InstallationRecord> records() const;

    /// Appends `rec` under an exclusive lock. Re-registering an identical
    /// record is a no-op; the same (project, version, arch) at another
    /// location is an AreaError.
    void add(const InstallationRecord& rec) const;

    std::optional<InstallationRecord> find(const std::string& project, const std::string& version,
                                           const std::string& arch) const;

private:
    std::filesystem::path file_;
};

std::string format_record(const InstallationRecord& rec);
InstallationRecord parse_record(const std::string& line);

/// The `scram list` table for `arch`, optionally limited to one project.
std::string format_install_list(const std::vector<InstallationRecord>& records,
                                const std::optional<std::string>& project, const config::Architecture& arch);

} // namespace scram
