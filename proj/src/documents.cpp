#include "scram/documents.hpp"

#include "scram/config.hpp"
#include "scram/error.hpp"
#include "scram/runtime_env.hpp"
#include "scram/toolspec.hpp"

#include <filesystem>

namespace scram {

namespace {

std::string checked_destination(const markup::TagEvent& ev, const std::string& to)
{
    const std::filesystem::path p(to);
    if (to.empty() || p.is_absolute())
        throw ParseError(ev.location.str() + ": download destination '" + to + "' must be a relative path");
    const auto norm = p.lexically_normal();
    if (norm.empty() || norm == "." || *norm.begin() == "..")
        throw ParseError(ev.location.str() + ": download destination '" + to + "' escapes the area");
    return norm.generic_string();
}

} // namespace

BootStrapDoc parse_bootstrap(std::span<const markup::TagEvent> body)
{
    BootStrapDoc doc;
    bool have_project = false;
    for (const auto& ev : body) {
        if (ev.is_open("project")) {
            if (have_project)
                throw ParseError(ev.location.str() + ": more than one <project>");
            doc.project = ev.attr_or("name", "");
            doc.version = ev.attr_or("version", "");
            if (doc.project.empty() || doc.version.empty())
                throw ParseError(ev.location.str() + ": <project> needs a name and a version");
            have_project = true;
        } else if (ev.is_open("download")) {
            const auto url = ev.attr_or("url", "");
            if (url.empty())
                throw ParseError(ev.location.str() + ": <download> needs a url");
            doc.downloads.push_back({url, checked_destination(ev, ev.attr_or("to", ""))});
        } else if (ev.is_open("config")) {
            if (doc.config_url)
                throw ParseError(ev.location.str() + ": more than one <config>");
            const auto url = ev.attr_or("url", "");
            if (url.empty())
                throw ParseError(ev.location.str() + ": <config> needs a url");
            doc.config_url = url;
        }
    }
    if (!have_project)
        throw ParseError("bootstrap document has no <project>");
    return doc;
}

void register_standard_doc_types(DocTypeRegistry& registry)
{
    registry.register_doc_type(toolspec::kToolDocType, "1.0", [](const DocSource& src) -> std::any {
        return toolspec::parse_tool_doc(src.body);
    });

    registry.register_doc_type(config::kConfigurationDocType, "1.0", [](const DocSource& src) -> std::any {
        auto doc = config::parse_configuration(src.body);
        doc.url = src.url.normalized();
        doc.version_tag = src.version;
        return doc;
    });

    registry.register_doc_type(
        config::kRequirementsDocType, "1.0",
        [](const DocSource& src) -> std::any {
            auto doc = config::parse_requirements(src.body);
            std::optional<ResourceUrl> base;
            if (doc.base)
                base = parse_url(*doc.base, &src.url);
            const ResourceUrl& anchor = base ? *base : src.url;
            for (std::size_t i = 0; i < doc.included.size() && i < doc.includes.size(); ++i) {
                const auto target = parse_url(doc.includes[i], &anchor);
                doc.included[i].url = target.normalized();
                doc.included[i].version_tag = target.version().value_or("HEAD");
            }
            return doc;
        },
        {config::kConfigurationDocType});

    registry.register_doc_type(kBootStrapDocType, "1.0", [](const DocSource& src) -> std::any {
        return parse_bootstrap(src.body);
    });

    registry.register_doc_type(runtime::kAppEnvDocType, "1.0", [](const DocSource& src) -> std::any {
        return runtime::parse_app_env(src.body);
    });
}

} // namespace scram
