#pragma once

// The document types the tool understands, and the builders that turn their
// events into payloads.

#include "scram/activedoc.hpp"

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace scram {

inline constexpr const char* kBootStrapDocType = "BuildSystem::BootStrapDoc";

struct BootStrapDownload {
    std::string url;
    std::string to; // relative to the area root

    bool operator==(const BootStrapDownload&) const = default;
};

struct BootStrapDoc {
    std::string project;
    std::string version;
    std::vector<BootStrapDownload> downloads;
    std::optional<std::string> config_url;
};

/// Throws ParseError for a missing project, a duplicate `<project>` or
/// `<config>`, or a destination that is absolute or leaves the area.
BootStrapDoc parse_bootstrap(std::span<const markup::TagEvent> body);

/// Registers ToolDoc, Configuration, Requirements (which may include
/// Configuration), BootStrapDoc and AppEnvDoc, each from version 1.0.
/// Payloads: toolspec::ToolSpec, config::ConfigurationDoc,
/// config::RequirementsDoc, BootStrapDoc and EnvDelta.
void register_standard_doc_types(DocTypeRegistry& registry);

} // namespace scram
