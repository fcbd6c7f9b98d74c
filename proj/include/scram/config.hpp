#pragma once

// Configuration documents (central version pins) and project Requirements
// documents (selection by name), scoped by architecture.

#include "scram/markup.hpp"
#include "scram/url.hpp"

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace scram::config {

inline constexpr const char* kConfigurationDocType = "BuildSystem::Configuration";
inline constexpr const char* kRequirementsDocType = "BuildSystem::Requirements";

struct Architecture {
    std::string os;
    std::string release;

    std::string canonical() const { return os + "__" + release; }
    bool operator==(const Architecture&) const = default;
};

/// Parses `<os>__<release>`, e.g. `Linux__2.4`.
Architecture parse_architecture(const std::string& canonical);

/// Override (from `--arch` or SCRAM_ARCH) if given, otherwise uname's system
/// name and release truncated to major.minor.
Architecture detect_architecture(const std::optional<std::string>& override_arch = std::nullopt);

/// Empty scope matches everything; otherwise the scope must equal the
/// canonical name or be a prefix of it ending on a component boundary
/// (`SunOS__5` matches `SunOS__5.8`, not `SunOS__51`; `SunOS` matches
/// `SunOS__5.8`).
bool match_architecture(std::string_view scope, const Architecture& arch);

struct RequireEntry {
    std::string name;
    std::string version;
    std::string url; // as written; may be scheme-relative
    std::string arch_scope;

    bool operator==(const RequireEntry&) const = default;
};

struct ConfigurationDoc {
    std::string url; // identity: where it was retrieved from
    std::string version_tag;
    std::vector<RequireEntry> entries;
};

struct SelectEntry {
    std::string name;
    std::string arch_scope;

    bool operator==(const SelectEntry&) const = default;
};

struct RequirementsDoc {
    std::optional<std::string> base;
    std::vector<std::string> includes;
    std::vector<SelectEntry> selects;
    /// Configurations spliced in through `<include>` during activation, in
    /// include order. Empty when the events were parsed without splicing.
    std::vector<ConfigurationDoc> included;
};

ConfigurationDoc parse_configuration(std::span<const markup::TagEvent> body);
RequirementsDoc parse_requirements(std::span<const markup::TagEvent> body);

struct ResolvedEntry {
    std::string name; // as selected
    std::string version;
    std::string spec_url;

    bool operator==(const ResolvedEntry&) const = default;
};

struct ResolvedConfiguration {
    Architecture arch;
    std::vector<ResolvedEntry> tools; // select order
    std::string config_url;
    std::string config_version;
    std::optional<std::string> base;

    const ResolvedEntry* find(std::string_view name) const; // case-insensitive
};

/// For each select whose scope matches `arch`, binds the require of that
/// name with the longest matching scope. Throws ResolutionError for a
/// selected name with no matching require, or two equally specific ones.
ResolvedConfiguration resolve_selection(const RequirementsDoc& req,
                                        std::span<const ConfigurationDoc> configs,
                                        const Architecture& arch);

std::string to_record(const ResolvedConfiguration& rc);
ResolvedConfiguration configuration_from_record(std::string_view text);

} // namespace scram::config
