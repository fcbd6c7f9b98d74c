#pragma once

// On-disk project areas. A central area is a complete installation; a
// developer area links to one and keeps locally only what it overrides.
//
//   <root>/{src,config,lib,bin,logs,tmp}
//   <root>/.SCRAM/area                       kind, project, version, area id
//   <root>/.SCRAM/Link                       central location (developer only)
//   <root>/.SCRAM/state                      incomplete | complete
//   <root>/.SCRAM/<arch>/configuration       resolved configuration record
//   <root>/.SCRAM/<arch>/tools/<name>        resolved tool records
//
// Nothing inside an area names the area's own location, so it can be moved.

#include "scram/config.hpp"
#include "scram/toolspec.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace scram {

enum class AreaKind { Central, Developer };

std::string to_string(AreaKind k);

inline const std::vector<std::string> kAreaLayout = {"src", "config", "lib", "bin", "logs", "tmp", ".SCRAM"};

class ProjectArea {
public:
    /// Creates the layout under `root` (which must not exist yet, or be an
    /// empty directory) and writes the administration files.
    static ProjectArea create(const std::filesystem::path& root, AreaKind kind, const std::string& project,
                              const std::string& version,
                              const std::optional<std::filesystem::path>& link = std::nullopt);

    /// Opens an existing area rooted exactly at `root`.
    static ProjectArea open(const std::filesystem::path& root);

    const std::filesystem::path& root() const { return root_; }
    AreaKind kind() const { return kind_; }
    const std::string& project() const { return project_; }
    const std::string& version() const { return version_; }
    const std::string& area_id() const { return area_id_; }
    const std::optional<std::filesystem::path>& link() const { return link_; }

    /// The linked central area for a developer area, this area otherwise.
    ProjectArea central() const;
    std::filesystem::path central_root() const { return link_ ? *link_ : root_; }

    std::filesystem::path admin_dir() const { return root_ / ".SCRAM"; }
    std::filesystem::path lock_file() const { return admin_dir() / "lock"; }

    std::string state() const;
    void set_state(const std::string& state) const;

    // Records stored in this area only.
    std::optional<toolspec::ResolvedTool> local_tool(const config::Architecture& arch, const std::string& name) const;
    std::vector<std::string> local_tool_names(const config::Architecture& arch) const;
    void write_tool(const config::Architecture& arch, const toolspec::ResolvedTool& rt) const;

    std::optional<config::ResolvedConfiguration> local_configuration(const config::Architecture& arch) const;
    void write_configuration(const config::Architecture& arch, const config::ResolvedConfiguration& rc) const;

    // Local record if present, else the central area's.
    std::optional<toolspec::ResolvedTool> active_tool(const config::Architecture& arch, const std::string& name) const;
    std::optional<config::ResolvedConfiguration> configuration(const config::Architecture& arch) const;

private:
    ProjectArea() = default;
    std::filesystem::path tools_dir(const config::Architecture& arch) const;

    std::filesystem::path root_;
    AreaKind kind_ = AreaKind::Central;
    std::string project_;
    std::string version_;
    std::string area_id_;
    std::optional<std::filesystem::path> link_;
};

/// Nearest enclosing area of `cwd` (itself included). Throws AreaError when
/// there is none.
ProjectArea area_context(const std::filesystem::path& cwd);

} // namespace scram
