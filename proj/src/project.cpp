#include "scram/project.hpp"

#include "process.hpp"
#include "scram/error.hpp"
#include "scram/version.hpp"

#include <fmt/format.h>
#include <json.hpp>

#include <algorithm>
#include <set>

namespace fs = std::filesystem;

namespace scram {

std::optional<std::string> HostContext::getenv(const std::string& name) const
{
    auto it = env.find(name);
    if (it == env.end() || it->second.empty())
        return std::nullopt;
    return it->second;
}

namespace {

fs::path default_install_root(const HostContext& host)
{
    if (auto root = host.getenv("SCRAM_ROOT"))
        return fs::absolute(*root).lexically_normal();
    try {
        const auto area = area_context(host.cwd);
        return area.central_root().parent_path();
    } catch (const AreaError&) {
        return fs::absolute(host.cwd).lexically_normal();
    }
}

std::optional<std::string> arch_override(const HostContext& host)
{
    if (host.arch_override)
        return host.arch_override;
    return host.getenv("SCRAM_ARCH");
}

std::string join(const std::vector<std::string>& items, const std::string& sep)
{
    std::string out;
    for (std::size_t i = 0; i < items.size(); ++i)
        out += (i ? sep : "") + items[i];
    return out;
}

struct LoadedSpec {
    std::shared_ptr<const TypedDocument> doc;
    const toolspec::ToolVersionBlock* block = nullptr;
};

LoadedSpec load_spec(Workspace& ws, const std::string& name, const std::string& version, const std::string& url)
{
    LoadedSpec out;
    out.doc = ws.activator().activate(parse_url(url));
    if (out.doc->header.doc_type != toolspec::kToolDocType)
        throw ResolutionError("specification for " + name + " at " + url + " is a "
                              + out.doc->header.doc_type + ", not a tool document");
    const auto& spec = out.doc->as<toolspec::ToolSpec>();
    if (spec.name != markup::fold(name))
        throw ResolutionError("specification at " + url + " describes " + spec.display_name + ", not " + name);
    out.block = &toolspec::select_version(spec, version);
    return out;
}

std::vector<std::string> known_tools(const ProjectArea& area, const config::Architecture& arch)
{
    std::vector<std::string> names;
    auto add = [&](const std::string& n) {
        const auto f = markup::fold(n);
        if (std::find(names.begin(), names.end(), f) == names.end())
            names.push_back(f);
    };
    if (auto rc = area.configuration(arch)) {
        for (const auto& t : rc->tools)
            add(t.name);
    }
    std::vector<std::string> extra = area.local_tool_names(arch);
    if (area.link()) {
        for (const auto& n : area.central().local_tool_names(arch))
            extra.push_back(n);
    }
    std::sort(extra.begin(), extra.end());
    for (const auto& n : extra)
        add(n);
    return names;
}

toolspec::ResolvedTool resolve_against_area(Workspace& ws, const ProjectArea& area, const std::string& name,
                                            const LoadedSpec& spec, const std::string& url)
{
    std::map<std::string, toolspec::ResolvedTool> externals;
    for (const auto& ext : spec.block->externals) {
        if (auto rt = area.active_tool(ws.arch(), ext.ref))
            externals.emplace(markup::fold(ext.ref), std::move(*rt));
    }
    auto rt = toolspec::resolve_tool(name, *spec.block, ws.site(), ws.host().prober, ws.host().prompt, externals);
    rt.spec_url = url;
    return rt;
}

void write_identity(const ProjectArea& area, const std::string& config_url)
{
    nlohmann::ordered_json j;
    j["project"] = area.project();
    j["version"] = area.version();
    j["config_url"] = config_url;
    detail::write_file_atomic(area.root() / "config" / "identity.json", j.dump(2) + "\n");
}

} // namespace

Workspace::Workspace(HostContext host, std::optional<fs::path> root)
    : host_(std::move(host))
{
    if (host_.cwd.empty())
        host_.cwd = fs::current_path();
    root_ = root ? fs::absolute(*root).lexically_normal() : default_install_root(host_);
    arch_ = config::detect_architecture(arch_override(host_));
    register_standard_doc_types(types_);
}

const SiteInfo& Workspace::site() const
{
    if (!site_) {
        const auto file = host_.getenv("SCRAM_SITE").value_or((root_ / "site.cfg").string());
        site_ = std::make_unique<SiteInfo>(SiteInfo::load_if_exists(file));
    }
    return *site_;
}

Registry Workspace::registry() const
{
    return Registry(host_.getenv("SCRAM_LOOKUPDB").value_or((root_ / "scramdb").string()));
}

fs::path Workspace::cache_root() const
{
    return host_.getenv("SCRAM_CACHE").value_or((root_ / ".scram-cache").string());
}

Activator& Workspace::activator()
{
    if (!activator_) {
        SchemeRegistry schemes;
        register_builtin_schemes(schemes, site());
        fetcher_ = std::make_unique<Fetcher>(std::move(schemes), cache_root(), host_.refresh);
        activator_ = std::make_unique<Activator>(*fetcher_, types_, store_);
    }
    return *activator_;
}

ResourceUrl Workspace::user_url(const std::string& raw) const
{
    const auto base = parse_url("file:" + (fs::absolute(host_.cwd).lexically_normal() / "").generic_string());
    return parse_url(raw, &base);
}

std::vector<std::string> configure_area(Workspace& ws, const ProjectArea& area, const ResourceUrl& config_url)
{
    const auto arch = ws.arch();
    auto doc = ws.activator().activate(config_url);

    ResourceUrl anchor = config_url;
    config::ResolvedConfiguration rc;
    if (doc->header.doc_type == config::kRequirementsDocType) {
        const auto& req = doc->as<config::RequirementsDoc>();
        if (req.base)
            anchor = parse_url(*req.base, &config_url);
        rc = config::resolve_selection(req, req.included, arch);
    } else if (doc->header.doc_type == config::kConfigurationDocType) {
        const auto& cfg = doc->as<config::ConfigurationDoc>();
        config::RequirementsDoc all;
        for (const auto& e : cfg.entries) {
            if (!config::match_architecture(e.arch_scope, arch))
                continue;
            if (std::none_of(all.selects.begin(), all.selects.end(),
                             [&](const auto& s) { return markup::iequals(s.name, e.name); }))
                all.selects.push_back({e.name, ""});
        }
        rc = config::resolve_selection(all, std::span(&cfg, 1), arch);
    } else {
        throw ResolutionError(config_url.str() + " is a " + doc->header.doc_type
                              + ", not a requirements or configuration document");
    }
    for (auto& t : rc.tools)
        t.spec_url = parse_url(t.spec_url, &anchor).str();

    std::vector<LoadedSpec> specs;
    std::vector<std::pair<std::string, const toolspec::ToolVersionBlock*>> blocks;
    specs.reserve(rc.tools.size());
    for (const auto& t : rc.tools) {
        specs.push_back(load_spec(ws, t.name, t.version, t.spec_url));
        blocks.emplace_back(t.name, specs.back().block);
    }

    area.write_configuration(arch, rc);
    std::map<std::string, toolspec::ResolvedTool> done;
    std::vector<std::string> names;
    for (const auto& name : toolspec::dependency_order(blocks)) {
        const auto i = static_cast<std::size_t>(
            std::find_if(rc.tools.begin(), rc.tools.end(), [&](const auto& t) { return markup::iequals(t.name, name); })
            - rc.tools.begin());
        auto rt = toolspec::resolve_tool(name, *specs[i].block, ws.site(), ws.host().prober, ws.host().prompt,
                                         done);
        rt.spec_url = rc.tools[i].spec_url;
        area.write_tool(arch, rt);
        done.emplace(markup::fold(name), std::move(rt));
    }
    for (const auto& t : rc.tools)
        names.push_back(markup::fold(t.name));
    return names;
}

BootstrapResult bootstrap_install(Workspace& ws, const std::string& bootstrap_url, const fs::path& dest_root)
{
    const auto url = ws.user_url(bootstrap_url);
    auto doc = ws.activator().activate(url);
    if (doc->header.doc_type != kBootStrapDocType)
        throw ActivationError(url.str() + " is a " + doc->header.doc_type + ", not a bootstrap document");
    const auto& boot = doc->as<BootStrapDoc>();

    const auto root = fs::absolute(dest_root).lexically_normal() / (boot.project + "_" + boot.version);
    if (fs::exists(root))
        throw AreaError("installation directory " + root.string() + " already exists");

    std::vector<std::pair<fs::path, std::string>> files;
    for (const auto& d : boot.downloads) {
        const auto target = parse_url(d.url, &url);
        files.emplace_back(d.to, ws.activator().fetcher().fetch(target).bytes);
    }
    std::optional<ResourceUrl> config_url;
    if (boot.config_url)
        config_url = parse_url(*boot.config_url, &url);

    BootstrapResult result{ProjectArea::create(root, AreaKind::Central, boot.project, boot.version), {}};
    detail::FileLock lock(result.area.lock_file());
    for (const auto& [to, bytes] : files) {
        const auto path = root / to;
        fs::create_directories(path.parent_path());
        detail::write_file_atomic(path, bytes);
    }
    write_identity(result.area, config_url ? config_url->str() : "");
    if (config_url)
        result.tools = configure_area(ws, result.area, *config_url);
    return result;
}

InstallationRecord register_install(Workspace& ws, const ProjectArea& area, bool force)
{
    if (area.kind() != AreaKind::Central)
        throw AreaError("only a central area can be installed; " + area.root().string() + " is a developer area");
    detail::FileLock lock(area.lock_file());
    if (area.state() != "complete") {
        if (!force)
            throw AreaError("area " + area.root().string()
                            + " is incomplete; run a successful `scram build` first or use `install --force`");
        area.set_state("complete");
    }
    InstallationRecord rec{area.project(), area.version(), ws.arch().canonical(),
                           fs::absolute(area.root()).lexically_normal()};
    ws.registry().add(rec);
    return rec;
}

ProjectArea create_dev_area(Workspace& ws, const std::string& project, const std::string& version,
                            const fs::path& parent_dir)
{
    const auto arch = ws.arch().canonical();
    const auto records = ws.registry().records();
    const InstallationRecord* found = nullptr;
    std::vector<std::string> versions;
    for (const auto& r : records) {
        if (r.project != project || r.arch != arch)
            continue;
        versions.push_back(r.version);
        if (r.version == version)
            found = &r;
    }
    if (!found) {
        if (versions.empty())
            throw AreaError("no installation of " + project + " for " + arch + " (see `scram list`)");
        throw AreaError("no installation of " + project + " " + version + " for " + arch
                        + "; available versions: " + join(versions, ", "));
    }
    const auto central = ProjectArea::open(found->location);
    const auto root = fs::absolute(parent_dir).lexically_normal() / (project + "_" + version);
    if (fs::exists(root))
        throw AreaError("target directory " + root.string() + " already exists");

    auto area = ProjectArea::create(root, AreaKind::Developer, project, version, central.root());
    const auto identity = central.root() / "config" / "identity.json";
    if (fs::exists(identity))
        fs::copy_file(identity, root / "config" / "identity.json");
    return area;
}

std::string tool_list(const Workspace& ws, const ProjectArea& area)
{
    const auto& arch = ws.arch();
    std::string out = "\nTool list for location " + area.central_root().string() + "\n" + std::string(50, '+') + "\n";
    auto row = [](const std::string& name, const std::string& active, const std::string& pinned) {
        return fmt::format(" {:<20} {:<10} (default={})\n", name, active, pinned);
    };
    std::set<std::string> shown;
    const auto rc = area.configuration(arch);
    if (rc) {
        for (const auto& t : rc->tools) {
            const auto active = area.active_tool(arch, t.name);
            out += row(markup::fold(t.name), active ? active->version : "-", t.version);
            shown.insert(markup::fold(t.name));
        }
    }
    for (const auto& name : known_tools(area, arch)) {
        if (shown.contains(name))
            continue;
        const auto active = area.active_tool(arch, name);
        out += row(name, active ? active->version : "-", "none");
    }
    return out;
}

std::string tool_info(const Workspace& ws, const ProjectArea& area, const std::string& name)
{
    const auto rt = area.active_tool(ws.arch(), name);
    if (!rt) {
        const auto known = known_tools(area, ws.arch());
        throw ResolutionError("unknown tool '" + name + "'; known tools: "
                              + (known.empty() ? std::string("none") : join(known, ", ")));
    }
    std::string out = fmt::format("Tool: {}\nVersion: {}\n", rt->name, rt->version);
    if (!rt->spec_url.empty())
        out += "Specification: " + rt->spec_url + "\n";
    if (rt->info_url && !rt->info_url->empty())
        out += "Information: " + *rt->info_url + "\n";
    out += "Libraries: " + (rt->libs.empty() ? std::string("none") : join(rt->libs, " ")) + "\n";
    out += "Variables:\n";
    for (const auto& b : rt->bindings) {
        out += fmt::format("  {}={} [{}, {}]\n", b.name, b.value, toolspec::to_string(b.type),
                           toolspec::to_string(b.provenance));
        if (auto it = rt->descriptions.find(b.name); it != rt->descriptions.end() && !it->second.empty())
            out += "    " + it->second + "\n";
    }
    out += "Externals:\n";
    if (rt->externals.empty())
        out += "  none\n";
    for (const auto& e : rt->externals) {
        out += fmt::format("  {} {}\n", e.ref, e.version);
        if (!e.description.empty())
            out += "    " + e.description + "\n";
    }
    return out;
}

std::vector<SetupOutcome> setup_tool(Workspace& ws, const ProjectArea& area, const std::optional<std::string>& name,
                                     const std::optional<std::string>& version, const std::optional<std::string>& url)
{
    const auto arch = ws.arch();
    detail::FileLock lock(area.lock_file());
    const auto rc = area.configuration(arch);
    std::vector<SetupOutcome> outcomes;

    auto refresh = [&](const std::string& tool, const std::string& ver, const std::string& spec_url, bool always) {
        const auto spec = load_spec(ws, tool, ver, spec_url);
        auto rt = resolve_against_area(ws, area, tool, spec, spec_url);
        const auto active = area.active_tool(arch, tool);
        const bool write = always || !active || !active->same_resolution(rt) || active->spec_url != rt.spec_url;
        if (write)
            area.write_tool(arch, rt);
        outcomes.push_back({rt.name, rt.version, write});
    };

    if (!name) {
        if (!rc)
            return outcomes;
        std::vector<std::pair<std::string, const toolspec::ToolVersionBlock*>> blocks;
        std::vector<LoadedSpec> specs;
        specs.reserve(rc->tools.size());
        for (const auto& t : rc->tools) {
            specs.push_back(load_spec(ws, t.name, t.version, t.spec_url));
            blocks.emplace_back(t.name, specs.back().block);
        }
        for (const auto& tool : toolspec::dependency_order(blocks)) {
            const auto* t = rc->find(tool);
            // A version chosen explicitly with `setup NAME VERSION` stays.
            if (const auto local = area.local_tool(arch, tool); local && local->version != t->version) {
                outcomes.push_back({local->name, local->version, false});
                continue;
            }
            refresh(t->name, t->version, t->spec_url, false);
        }
        return outcomes;
    }

    if (url) {
        if (!version)
            throw UsageError("setup with a URL needs a version");
        refresh(*name, *version, ws.user_url(*url).str(), true);
        return outcomes;
    }

    const auto* entry = rc ? rc->find(*name) : nullptr;
    const auto active = area.active_tool(arch, *name);
    if (!entry && !active) {
        const auto known = known_tools(area, arch);
        throw ResolutionError("unknown tool '" + *name + "' (give a version and URL to add it); known tools: "
                              + (known.empty() ? std::string("none") : join(known, ", ")));
    }
    const auto ver = version.value_or(entry ? entry->version : active->version);
    const auto spec_url = entry ? entry->spec_url : active->spec_url;
    refresh(*name, ver, spec_url, version.has_value());
    return outcomes;
}

EnvDelta compute_runtime_env(const Workspace& ws, const ProjectArea& area)
{
    const auto& arch = ws.arch();
    EnvDelta delta;
    delta.area_id = area.area_id();
    delta.area_root = area.root();

    std::vector<std::string> missing;
    for (const auto& name : known_tools(area, arch)) {
        const auto rt = area.active_tool(arch, name);
        if (!rt) {
            missing.push_back(name);
            continue;
        }
        const auto part = toolspec::runtime_contribution(*rt);
        delta.prepends.insert(delta.prepends.end(), part.prepends.begin(), part.prepends.end());
        delta.sets.insert(delta.sets.end(), part.sets.begin(), part.sets.end());
    }
    if (!missing.empty())
        throw ResolutionError("no resolved record for " + join(missing, ", ") + "; run `scram setup`");

    if (area.link()) {
        delta.prepends.push_back({"PATH", (*area.link() / "bin").string(), Prepend::Anchor::Absolute});
        delta.prepends.push_back({"LD_LIBRARY_PATH", (*area.link() / "lib").string(), Prepend::Anchor::Absolute});
    }
    delta.prepends.push_back({"PATH", "bin", Prepend::Anchor::Area});
    delta.prepends.push_back({"LD_LIBRARY_PATH", "lib", Prepend::Anchor::Area});
    delta.validate();
    return delta;
}

EnvDelta load_app_env(const ProjectArea& area, const std::string& app)
{
    if (app.empty() || app.find('/') != std::string::npos || app == "." || app == "..")
        throw UsageError("invalid application name '" + app + "'");
    auto file = area.root() / "config" / "app-env" / app;
    if (!fs::exists(file) && area.link())
        file = *area.link() / "config" / "app-env" / app;
    if (!fs::exists(file))
        throw AreaError("no application environment file config/app-env/" + app);

    const auto events = markup::tokenize_markup(detail::read_file(file), file.string());
    const auto header = markup::read_doc_header(events);
    if (header.doc_type != runtime::kAppEnvDocType)
        throw ParseError(file.string() + " is a " + header.doc_type + ", not an application environment document");
    if (compare_dotted(header.doc_version, "1.0") < 0)
        throw ParseError(file.string() + ": document version " + header.doc_version + " is too old");
    const auto end = markup::header_end(events);
    return runtime::parse_app_env(std::span(events).subspan(end));
}

int run_build(Workspace& ws, const ProjectArea& area, const std::vector<std::string>& args)
{
    const auto command = ws.site().get("build.command");
    if (!command || command->empty())
        throw AreaError("no build.command in the site file");
    detail::FileLock lock(area.lock_file());

    auto prior = ws.host().env;
    prior.erase("PWD");
    auto env = runtime::evaluate(compute_runtime_env(ws, area), prior);
    env["PWD"] = (area.root() / "tmp").string();
    env["SCRAM_AREA"] = area.root().string();

    std::string line = *command;
    for (const auto& a : args)
        line += " " + detail::sh_quote(a);
    const auto run = detail::run_shell(line, area.root() / "tmp", &env, false);
    if (run.status == 0)
        area.set_state("complete");
    return run.status;
}

} // namespace scram
