#include "scram/area.hpp"

#include "process.hpp"
#include "scram/error.hpp"

#include <json.hpp>

#include <algorithm>
#include <cctype>
#include <random>

namespace fs = std::filesystem;

namespace scram {

namespace {

std::string new_area_id(const std::string& project, const std::string& version)
{
    std::random_device rd;
    std::uniform_int_distribution<unsigned> nibble(0, 15);
    std::string id = project + "_" + version + "-";
    for (int i = 0; i < 16; ++i)
        id.push_back("0123456789abcdef"[nibble(rd)]);
    return id;
}

std::string trimmed(std::string s)
{
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back())))
        s.pop_back();
    return s;
}

} // namespace

std::string to_string(AreaKind k)
{
    return k == AreaKind::Central ? "central" : "developer";
}

ProjectArea ProjectArea::create(const fs::path& root, AreaKind kind, const std::string& project,
                                const std::string& version, const std::optional<fs::path>& link)
{
    if (kind == AreaKind::Developer && !link)
        throw AreaError("a developer area needs a central area to link to");
    if (fs::exists(root) && !(fs::is_directory(root) && fs::is_empty(root)))
        throw AreaError("target directory " + root.string() + " already exists");

    ProjectArea area;
    area.root_ = root;
    area.kind_ = kind;
    area.project_ = project;
    area.version_ = version;
    area.area_id_ = new_area_id(project, version);
    if (link)
        area.link_ = fs::absolute(*link).lexically_normal();

    for (const auto& dir : kAreaLayout)
        fs::create_directories(root / dir);

    nlohmann::ordered_json j;
    j["kind"] = to_string(kind);
    j["project"] = project;
    j["version"] = version;
    j["area_id"] = area.area_id_;
    detail::write_file_atomic(area.admin_dir() / "area", j.dump(2) + "\n");
    if (area.link_)
        detail::write_file_atomic(area.admin_dir() / "Link", area.link_->string() + "\n");
    area.set_state(kind == AreaKind::Central ? "incomplete" : "complete");
    return area;
}

ProjectArea ProjectArea::open(const fs::path& root)
{
    const auto meta = root / ".SCRAM" / "area";
    if (!fs::exists(meta))
        throw AreaError(root.string() + " is not a SCRAM area");
    ProjectArea area;
    area.root_ = root;
    try {
        const auto j = nlohmann::json::parse(detail::read_file(meta));
        const auto kind = j.at("kind").get<std::string>();
        if (kind == "central")
            area.kind_ = AreaKind::Central;
        else if (kind == "developer")
            area.kind_ = AreaKind::Developer;
        else
            throw AreaError("unknown area kind '" + kind + "' in " + meta.string());
        area.project_ = j.at("project").get<std::string>();
        area.version_ = j.at("version").get<std::string>();
        area.area_id_ = j.at("area_id").get<std::string>();
    } catch (const nlohmann::json::exception& e) {
        throw AreaError("malformed " + meta.string() + ": " + e.what());
    }
    if (area.kind_ == AreaKind::Developer) {
        const auto link_file = area.admin_dir() / "Link";
        if (!fs::exists(link_file))
            throw AreaError("developer area " + root.string() + " has no .SCRAM/Link");
        area.link_ = fs::path(trimmed(detail::read_file(link_file)));
    }
    return area;
}

ProjectArea ProjectArea::central() const
{
    if (!link_)
        return *this;
    try {
        return open(*link_);
    } catch (const AreaError& e) {
        throw AreaError("linked central area " + link_->string() + " is unavailable: " + e.what());
    }
}

std::string ProjectArea::state() const
{
    const auto file = admin_dir() / "state";
    return fs::exists(file) ? trimmed(detail::read_file(file)) : "incomplete";
}

void ProjectArea::set_state(const std::string& state) const
{
    detail::write_file_atomic(admin_dir() / "state", state + "\n");
}

fs::path ProjectArea::tools_dir(const config::Architecture& arch) const
{
    return admin_dir() / arch.canonical() / "tools";
}

std::optional<toolspec::ResolvedTool> ProjectArea::local_tool(const config::Architecture& arch,
                                                              const std::string& name) const
{
    const auto file = tools_dir(arch) / markup::fold(name);
    if (!fs::exists(file))
        return std::nullopt;
    return toolspec::from_record(detail::read_file(file));
}

std::vector<std::string> ProjectArea::local_tool_names(const config::Architecture& arch) const
{
    std::vector<std::string> names;
    const auto dir = tools_dir(arch);
    if (!fs::is_directory(dir))
        return names;
    for (const auto& e : fs::directory_iterator(dir)) {
        if (e.is_regular_file() && e.path().filename().string().front() != '.')
            names.push_back(e.path().filename().string());
    }
    std::sort(names.begin(), names.end());
    return names;
}

void ProjectArea::write_tool(const config::Architecture& arch, const toolspec::ResolvedTool& rt) const
{
    fs::create_directories(tools_dir(arch));
    detail::write_file_atomic(tools_dir(arch) / markup::fold(rt.name), toolspec::to_record(rt));
}

std::optional<config::ResolvedConfiguration> ProjectArea::local_configuration(const config::Architecture& arch) const
{
    const auto file = admin_dir() / arch.canonical() / "configuration";
    if (!fs::exists(file))
        return std::nullopt;
    return config::configuration_from_record(detail::read_file(file));
}

void ProjectArea::write_configuration(const config::Architecture& arch, const config::ResolvedConfiguration& rc) const
{
    fs::create_directories(admin_dir() / arch.canonical());
    detail::write_file_atomic(admin_dir() / arch.canonical() / "configuration", config::to_record(rc));
}

std::optional<toolspec::ResolvedTool> ProjectArea::active_tool(const config::Architecture& arch,
                                                               const std::string& name) const
{
    if (auto rt = local_tool(arch, name))
        return rt;
    if (!link_)
        return std::nullopt;
    return central().local_tool(arch, name);
}

std::optional<config::ResolvedConfiguration> ProjectArea::configuration(const config::Architecture& arch) const
{
    if (auto rc = local_configuration(arch))
        return rc;
    if (!link_)
        return std::nullopt;
    return central().local_configuration(arch);
}

ProjectArea area_context(const fs::path& cwd)
{
    auto dir = fs::absolute(cwd).lexically_normal();
    if (dir.filename().empty() && dir.has_parent_path())
        dir = dir.parent_path();
    while (true) {
        if (fs::exists(dir / ".SCRAM" / "area"))
            return ProjectArea::open(dir);
        if (dir == dir.root_path() || !dir.has_parent_path() || dir.parent_path() == dir)
            break;
        dir = dir.parent_path();
    }
    throw AreaError("not in a SCRAM area (no .SCRAM directory above " + fs::absolute(cwd).string() + ")");
}

} // namespace scram
