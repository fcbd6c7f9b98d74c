#pragma once

// Installation and workspace lifecycle: bootstrap, install, developer areas,
// tool management, runtime environment and build pass-through.

#include "scram/activedoc.hpp"
#include "scram/area.hpp"
#include "scram/config.hpp"
#include "scram/documents.hpp"
#include "scram/registry.hpp"
#include "scram/runtime_env.hpp"
#include "scram/site.hpp"
#include "scram/toolspec.hpp"

#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace scram {

/// Everything an invocation takes from its surroundings.
struct HostContext {
    std::map<std::string, std::string> env;
    std::filesystem::path cwd;
    std::optional<std::string> arch_override; // beats SCRAM_ARCH
    bool refresh = false;
    toolspec::PromptCallback prompt;
    toolspec::LibraryProber prober = toolspec::filesystem_prober();

    std::optional<std::string> getenv(const std::string& name) const;
};

/// Install root, site file, registry, cache and document activation for one
/// invocation. The cache and schemes are set up on first use, so read-only
/// commands that never fetch touch nothing on disk.
class Workspace {
public:
    /// Install root: `root` if given, else SCRAM_ROOT, else the parent of the
    /// enclosing area's central location, else the working directory.
    explicit Workspace(HostContext host, std::optional<std::filesystem::path> root = std::nullopt);

    const HostContext& host() const { return host_; }
    const std::filesystem::path& install_root() const { return root_; }
    const config::Architecture& arch() const { return arch_; }

    /// SCRAM_SITE, else `<install-root>/site.cfg` (absent file = empty site).
    const SiteInfo& site() const;
    /// SCRAM_LOOKUPDB, else `<install-root>/scramdb`.
    Registry registry() const;
    /// SCRAM_CACHE, else `<install-root>/.scram-cache`.
    std::filesystem::path cache_root() const;

    Activator& activator();

    /// Parses a URL given on the command line; relative paths are taken
    /// relative to the working directory.
    ResourceUrl user_url(const std::string& raw) const;

private:
    HostContext host_;
    std::filesystem::path root_;
    config::Architecture arch_;
    mutable std::unique_ptr<SiteInfo> site_;
    DocTypeRegistry types_;
    ObjectStore store_;
    std::unique_ptr<Fetcher> fetcher_;
    std::unique_ptr<Activator> activator_;
};

struct BootstrapResult {
    ProjectArea area;
    std::vector<std::string> tools;
};

/// Fetches the bootstrap document and its downloads, creates
/// `<dest_root>/<project>_<version>` and resolves the configured tools.
/// The area stays `incomplete` until a successful build or `install --force`;
/// if tool resolution fails the area is left in place and the error rethrown.
BootstrapResult bootstrap_install(Workspace& ws, const std::string& bootstrap_url,
                                  const std::filesystem::path& dest_root);

/// Resolves the configuration at `config_url` for the workspace's
/// architecture, then every selected tool, and writes the records into
/// `area`. Returns the tool names in configuration order.
std::vector<std::string> configure_area(Workspace& ws, const ProjectArea& area, const ResourceUrl& config_url);

InstallationRecord register_install(Workspace& ws, const ProjectArea& area, bool force);

ProjectArea create_dev_area(Workspace& ws, const std::string& project, const std::string& version,
                            const std::filesystem::path& parent_dir);

std::string tool_list(const Workspace& ws, const ProjectArea& area);
std::string tool_info(const Workspace& ws, const ProjectArea& area, const std::string& name);

struct SetupOutcome {
    std::string name;
    std::string version;
    bool written = false;
};

/// `name`, `version` and `url` narrow what is set up; see `scram setup`.
std::vector<SetupOutcome> setup_tool(Workspace& ws, const ProjectArea& area,
                                     const std::optional<std::string>& name,
                                     const std::optional<std::string>& version,
                                     const std::optional<std::string>& url);

/// Tool runtime entries in configuration order, then the area bin/lib
/// directories (central first, developer last so it ends up in front).
EnvDelta compute_runtime_env(const Workspace& ws, const ProjectArea& area);

/// `config/app-env/<app>` of the area, falling back to the central area.
EnvDelta load_app_env(const ProjectArea& area, const std::string& app);

/// Runs the site's `build.command` in the area's tmp/ directory with the
/// area's runtime environment. A zero exit status marks the area complete.
int run_build(Workspace& ws, const ProjectArea& area, const std::vector<std::string>& args);

} // namespace scram
