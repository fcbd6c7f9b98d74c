#include "scram/cli.hpp"

#include "scram/error.hpp"
#include "scram/project.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <iostream>

namespace fs = std::filesystem;

namespace scram::cli {

namespace {

// Everything after the `build` verb goes to the build command untouched.
std::vector<std::string> split_build_args(std::vector<std::string>& args)
{
    for (std::size_t i = 0; i < args.size(); ++i) {
        const auto& a = args[i];
        if (a == "--arch") {
            ++i;
            continue;
        }
        if (a.starts_with("-"))
            continue;
        if (a != "build")
            break;
        std::vector<std::string> rest(args.begin() + static_cast<std::ptrdiff_t>(i) + 1, args.end());
        args.resize(i + 1);
        return rest;
    }
    return {};
}

std::vector<std::string> premap(const std::vector<std::string>& args)
{
    std::vector<std::string> out;
    for (const auto& a : args)
        out.push_back(a == "-csh" || a == "-sh" ? "-" + a : a);
    return out;
}

struct Options {
    std::optional<std::string> arch;
    bool refresh = false;

    std::optional<std::string> list_project;
    std::string project_name, project_version;
    std::vector<std::string> setup_args;
    std::string info_name;
    bool csh = false, sh = false;
    std::optional<std::string> app;
    bool force = false;
    std::string boot_url;
    std::optional<std::string> boot_dest;
};

HostContext host_for(const Invocation& inv, const Options& opt)
{
    HostContext host;
    host.env = inv.env;
    host.cwd = inv.cwd.empty() ? fs::current_path() : inv.cwd;
    host.arch_override = opt.arch;
    host.refresh = opt.refresh;
    host.prompt = inv.prompt;
    return host;
}

// The shell's PWD is only trusted when it really names the working directory.
runtime::EnvMap prior_environment(const HostContext& host)
{
    auto prior = host.env;
    if (auto it = prior.find("PWD"); it != prior.end()) {
        std::error_code ec;
        if (!fs::path(it->second).is_absolute() || !fs::equivalent(it->second, host.cwd, ec) || ec)
            prior.erase(it);
    }
    return prior;
}

} // namespace

toolspec::PromptCallback stream_prompt(std::istream& in, std::ostream& err)
{
    return [&in, &err](const toolspec::PromptRequest& req) -> std::optional<std::string> {
        err << "Tool " << req.tool << " " << req.version << " needs a value for " << req.variable;
        if (!req.description.empty())
            err << " (" << req.description << ")";
        err << "\n";
        for (const auto& c : req.candidates)
            err << "  candidate: " << c.string() << "\n";
        err << req.variable << "> " << std::flush;
        std::string line;
        if (!std::getline(in, line))
            return std::nullopt;
        while (!line.empty() && std::isspace(static_cast<unsigned char>(line.back())))
            line.pop_back();
        if (line.empty())
            return std::nullopt;
        return line;
    };
}

int dispatch(const Invocation& inv, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Configuration, installation and developer-area management", "scram"};
    app.set_version_flag("--version", std::string("scram ") + kVersion);
    app.require_subcommand(1);
    app.fallthrough();

    Options opt;
    app.add_option("--arch", opt.arch, "Architecture to act for (<os>__<release>), overrides SCRAM_ARCH");
    app.add_flag("--refresh", opt.refresh, "Refetch unversioned documents instead of using the cache");

    auto* list = app.add_subcommand("list", "List registered installations for this architecture");
    list->add_option("project", opt.list_project, "Only this project");

    auto* project = app.add_subcommand("project", "Create a developer area linked to an installation");
    project->add_option("name", opt.project_name)->required();
    project->add_option("version", opt.project_version)->required();

    auto* setup = app.add_subcommand("setup", "Resolve tools into the current area");
    setup->add_option("args", opt.setup_args, "[NAME [VERSION [URL]]]")->expected(0, 3);

    auto* tool = app.add_subcommand("tool", "Query the tools of the current area");
    tool->require_subcommand(1);
    auto* tool_list_cmd = tool->add_subcommand("list", "Tools with active and configured versions");
    auto* tool_info_cmd = tool->add_subcommand("info", "Details of one tool");
    tool_info_cmd->add_option("name", opt.info_name)->required();

    auto* runtime_cmd = app.add_subcommand("runtime", "Print shell commands setting up the runtime environment");
    auto* csh_flag = runtime_cmd->add_flag("--csh", opt.csh, "csh/tcsh syntax (also -csh)");
    auto* sh_flag = runtime_cmd->add_flag("--sh", opt.sh, "Bourne shell syntax (also -sh)");
    csh_flag->excludes(sh_flag);
    runtime_cmd->add_option("--app", opt.app, "Apply config/app-env/NAME on top");

    auto* build = app.add_subcommand("build", "Run the site build command in the area's tmp directory");

    auto* install = app.add_subcommand("install", "Register the current central area");
    install->add_flag("--force", opt.force, "Register even if no build has succeeded");

    auto* bootstrap = app.add_subcommand("bootstrap", "Create a central installation from a bootstrap document");
    bootstrap->add_option("url", opt.boot_url)->required();
    bootstrap->add_option("dest", opt.boot_dest, "Directory to install under (default: install root)");

    auto args = inv.args;
    const auto build_args = split_build_args(args);
    args = premap(args);
    std::reverse(args.begin(), args.end());
    try {
        app.parse(args);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return 0;
    } catch (const CLI::CallForVersion& e) {
        out << e.what() << "\n";
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "scram: usage: " << e.what() << "\n";
        return 2;
    }

    std::string context = "scram";
    for (auto* sub : app.get_subcommands()) {
        context = sub->get_name();
        for (auto* inner : sub->get_subcommands())
            context += " " + inner->get_name();
    }

    try {
        const auto host = host_for(inv, opt);

        if (list->parsed()) {
            Workspace ws(host);
            out << format_install_list(ws.registry().records(), opt.list_project, ws.arch());
            return 0;
        }
        if (bootstrap->parsed()) {
            Workspace ws(host);
            const auto dest = opt.boot_dest ? fs::absolute(host.cwd / *opt.boot_dest) : ws.install_root();
            auto result = bootstrap_install(ws, opt.boot_url, dest);
            out << "Created " << result.area.project() << " " << result.area.version() << " at "
                << result.area.root().string() << " (" << result.tools.size() << " tools resolved)\n";
            return 0;
        }
        if (project->parsed()) {
            Workspace ws(host);
            auto area = create_dev_area(ws, opt.project_name, opt.project_version, host.cwd);
            out << "Created developer area " << area.root().string() << " linked to " << area.link()->string()
                << "\n";
            return 0;
        }

        if (runtime_cmd->parsed() && !opt.csh && !opt.sh) {
            err << "scram: usage: runtime needs -csh or -sh\n";
            return 2;
        }
        const auto area = area_context(host.cwd);
        Workspace ws(host);

        if (tool_list_cmd->parsed()) {
            out << tool_list(ws, area);
            return 0;
        }
        if (tool_info_cmd->parsed()) {
            out << tool_info(ws, area, opt.info_name);
            return 0;
        }
        if (runtime_cmd->parsed()) {
            auto delta = compute_runtime_env(ws, area);
            if (opt.app)
                delta.merge(load_app_env(area, *opt.app));
            out << runtime::emit_shell(delta, prior_environment(host),
                                       opt.csh ? runtime::ShellDialect::Csh : runtime::ShellDialect::Sh);
            return 0;
        }
        if (setup->parsed()) {
            std::optional<std::string> name, version, url;
            if (!opt.setup_args.empty())
                name = opt.setup_args[0];
            if (opt.setup_args.size() > 1)
                version = opt.setup_args[1];
            if (opt.setup_args.size() > 2)
                url = opt.setup_args[2];
            for (const auto& o : setup_tool(ws, area, name, version, url))
                out << o.name << " " << o.version << (o.written ? ": set up in " : ": unchanged in ")
                    << area.root().string() << "\n";
            return 0;
        }
        if (build->parsed())
            return run_build(ws, area, build_args);
        if (install->parsed()) {
            const auto rec = register_install(ws, area, opt.force);
            out << "Installed " << rec.project << " " << rec.version << " for " << rec.arch << " at "
                << rec.location.string() << "\n";
            return 0;
        }
    } catch (const UsageError& e) {
        err << "scram: " << context << ": " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        err << "scram: " << context << ": " << e.what() << "\n";
        return 1;
    }
    err << "scram: usage: no command given\n";
    return 2;
}

} // namespace scram::cli
