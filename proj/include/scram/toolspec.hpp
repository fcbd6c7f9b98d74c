#pragma once

// Product specifications (ToolDoc documents) and their binding to the local
// system.

#include "scram/env_delta.hpp"
#include "scram/markup.hpp"
#include "scram/site.hpp"

#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace scram::toolspec {

inline constexpr const char* kToolDocType = "BuildSystem::ToolDoc";

enum class VarType { Plain, Lib, RuntimePath };

std::string to_string(VarType t);
VarType var_type_from_string(std::string_view s);

struct EnvVarDecl {
    std::string name;
    std::optional<std::string> value;
    VarType type = VarType::Plain;
    bool client = false;
    std::string description;

    bool operator==(const EnvVarDecl&) const = default;
};

struct ExternalRef {
    std::string ref;
    std::string version;
    std::string description;

    bool operator==(const ExternalRef&) const = default;
};

struct ToolVersionBlock {
    std::string version;
    std::optional<std::string> info_url;
    std::vector<std::string> libs;
    std::vector<EnvVarDecl> client_vars;
    std::vector<EnvVarDecl> derived_vars;
    std::vector<ExternalRef> externals;

    bool operator==(const ToolVersionBlock&) const = default;
};

struct ToolSpec {
    std::string name;         // case-folded
    std::string display_name; // as written in the first <Tool>
    std::vector<ToolVersionBlock> blocks;
};

/// Builds a ToolSpec from the events after the `<doc>` header.
ToolSpec parse_tool_doc(std::span<const markup::TagEvent> body);

/// Exact string match. Throws ResolutionError listing available versions.
const ToolVersionBlock& select_version(const ToolSpec& spec, const std::string& version);

enum class Provenance { SiteFile, Probe, Prompt, Substitution };

std::string to_string(Provenance p);
Provenance provenance_from_string(std::string_view s);

struct Binding {
    std::string name;
    std::string value;
    Provenance provenance = Provenance::Substitution;
    VarType type = VarType::Plain;

    bool operator==(const Binding&) const = default;
};

struct ResolvedTool {
    std::string name; // case-folded
    std::string version;
    std::vector<Binding> bindings;
    std::vector<std::pair<std::string, std::string>> runtime_entries;
    std::vector<std::string> libs;

    // Carried along so `tool info` needs no refetch.
    std::string spec_url;
    std::optional<std::string> info_url;
    std::vector<ExternalRef> externals;
    std::map<std::string, std::string> descriptions;

    const Binding* binding(std::string_view var) const;

    /// Same version, bindings and runtime entries (provenance ignored).
    bool same_resolution(const ResolvedTool& other) const;
};

/// Directories under `roots` holding a library file for at least one of
/// `libs`, in deterministic order.
using LibraryProber = std::function<std::vector<std::filesystem::path>(
    const std::vector<std::string>& libs, const std::vector<std::filesystem::path>& roots)>;

/// Walks each root (itself included) to `max_depth` levels, matching the
/// platform's library file names (lib<name>.so[.*] / .a, or .dylib on macOS).
LibraryProber filesystem_prober(int max_depth = 4);

struct PromptRequest {
    std::string tool;
    std::string version;
    std::string variable;
    VarType type = VarType::Plain;
    std::string description;
    std::vector<std::filesystem::path> candidates;
};

using PromptCallback = std::function<std::optional<std::string>(const PromptRequest&)>;

/// Binds every variable of `block`. Client variables come from the site file
/// (`tool.<name>.<VAR>`), then for lib-typed ones a library probe, then the
/// prompt; derived variables expand `$REF` / `${REF}` against what is bound
/// so far and the bindings of the block's externals, which must already be
/// in `already_resolved` (keyed by case-folded name) at the exact version.
ResolvedTool resolve_tool(const std::string& tool_name, const ToolVersionBlock& block,
                          const SiteInfo& site, const LibraryProber& prober,
                          const PromptCallback& prompt,
                          const std::map<std::string, ResolvedTool>& already_resolved);

/// Runtime_path bindings as prepends, in declaration order.
EnvDelta runtime_contribution(const ResolvedTool& rt);

/// Orders tools so that every external comes before its dependents;
/// otherwise keeps the given order. Externals outside the set are ignored.
/// Throws ResolutionError on a dependency cycle.
std::vector<std::string> dependency_order(
    const std::vector<std::pair<std::string, const ToolVersionBlock*>>& tools);

std::string to_record(const ResolvedTool& rt);
ResolvedTool from_record(std::string_view text);

} // namespace scram::toolspec
