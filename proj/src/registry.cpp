#include "scram/registry.hpp"

#include "process.hpp"
#include "scram/error.hpp"

#include <fmt/format.h>

#include <fstream>
#include <sstream>

namespace fs = std::filesystem;

namespace scram {

Registry::Registry(fs::path file)
    : file_(std::move(file))
{
}

std::string format_record(const InstallationRecord& rec)
{
    return fmt::format("{} {} {} {}", rec.project, rec.version, rec.arch, rec.location.string());
}

InstallationRecord parse_record(const std::string& line)
{
    std::istringstream in(line);
    InstallationRecord rec;
    in >> rec.project >> rec.version >> rec.arch;
    std::string location;
    std::getline(in >> std::ws, location);
    while (!location.empty() && (location.back() == '\r' || location.back() == ' '))
        location.pop_back();
    if (rec.arch.empty() || location.empty())
        throw AreaError("malformed registry record '" + line + "'");
    rec.location = location;
    return rec;
}

std::vector<InstallationRecord> Registry::records() const
{
    std::vector<InstallationRecord> out;
    std::ifstream in(file_);
    std::string line;
    int n = 0;
    while (std::getline(in, line)) {
        ++n;
        const auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos || line[first] == '#')
            continue;
        try {
            out.push_back(parse_record(line));
        } catch (const AreaError& e) {
            throw AreaError(file_.string() + ":" + std::to_string(n) + ": " + e.what());
        }
    }
    return out;
}

std::optional<InstallationRecord> Registry::find(const std::string& project, const std::string& version,
                                                 const std::string& arch) const
{
    for (const auto& r : records()) {
        if (r.project == project && r.version == version && r.arch == arch)
            return r;
    }
    return std::nullopt;
}

void Registry::add(const InstallationRecord& rec) const
{
    if (rec.project.empty() || rec.version.empty() || rec.arch.empty() || !rec.location.is_absolute())
        throw AreaError("incomplete installation record '" + format_record(rec) + "'");
    if (file_.has_parent_path())
        fs::create_directories(file_.parent_path());
    detail::FileLock lock(fs::path(file_.string() + ".lock"));

    if (auto existing = find(rec.project, rec.version, rec.arch)) {
        if (existing->location == rec.location)
            return;
        throw AreaError(rec.project + " " + rec.version + " for " + rec.arch + " is already installed at "
                        + existing->location.string());
    }
    std::ofstream out(file_, std::ios::app);
    out << format_record(rec) << '\n';
    out.flush();
    if (!out)
        throw AreaError("cannot append to registry " + file_.string());
}

std::string format_install_list(const std::vector<InstallationRecord>& records,
                                const std::optional<std::string>& project, const config::Architecture& arch)
{
    const std::string rule(36, '-');
    std::string out = "\nListing installed projects....\n\n";
    out += rule + "\n| Project  | Version  |  Location  |\n" + rule + "\n";
    const auto canonical = arch.canonical();
    for (const auto& r : records) {
        if (r.arch != canonical || (project && r.project != *project))
            continue;
        out += fmt::format("{} {} --> {}\n", r.project, r.version, r.location.string());
    }
    out += fmt::format("Projects available for platform >> {} <<\n", canonical);
    return out;
}

} // namespace scram
