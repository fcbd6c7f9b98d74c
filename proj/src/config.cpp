#include "scram/config.hpp"

#include "scram/error.hpp"
#include "scram/handler_map.hpp"
#include "scram/version.hpp"

#include <json.hpp>

#include <algorithm>
#include <regex>
#include <sys/utsname.h>

namespace scram::config {

using markup::TagEvent;

Architecture parse_architecture(const std::string& canonical)
{
    static const std::regex arch_re(R"(([A-Za-z0-9]+)__([0-9.]+))");
    std::smatch m;
    if (!std::regex_match(canonical, m, arch_re) || !is_dotted_version(m[2].str()))
        throw Error("malformed architecture '" + canonical + "' (expected <os>__<release>, e.g. Linux__2.4)");
    return {m[1].str(), m[2].str()};
}

Architecture detect_architecture(const std::optional<std::string>& override_arch)
{
    if (override_arch && !override_arch->empty())
        return parse_architecture(*override_arch);

    utsname u{};
    if (uname(&u) != 0)
        throw Error("cannot determine the operating system");
    std::string os;
    for (const char* p = u.sysname; *p; ++p) {
        if (std::isalnum(static_cast<unsigned char>(*p)))
            os.push_back(*p);
    }
    std::string release;
    int dots = 0;
    for (const char* p = u.release; *p; ++p) {
        if (*p == '.') {
            if (++dots == 2)
                break;
        } else if (!std::isdigit(static_cast<unsigned char>(*p))) {
            break;
        }
        release.push_back(*p);
    }
    while (!release.empty() && release.back() == '.')
        release.pop_back();
    if (os.empty() || release.empty())
        throw Error(std::string("cannot derive an architecture from ") + u.sysname + " " + u.release);
    return {os, release};
}

bool match_architecture(std::string_view scope, const Architecture& arch)
{
    if (scope.empty())
        return true;
    const auto canonical = arch.canonical();
    if (scope == canonical)
        return true;
    if (!std::string_view(canonical).starts_with(scope))
        return false;
    const auto rest = std::string_view(canonical).substr(scope.size());
    return rest.front() == '.' || rest.starts_with("__") || scope.ends_with("__") || scope.ends_with('.');
}

const ResolvedEntry* ResolvedConfiguration::find(std::string_view name) const
{
    for (const auto& t : tools) {
        if (markup::iequals(t.name, name))
            return &t;
    }
    return nullptr;
}

namespace {

const std::string& name_attr(const TagEvent& ev)
{
    const auto* v = ev.attr("name");
    if (!v || v->empty())
        throw ParseError("<" + ev.name + "> requires a name attribute");
    return *v;
}

void add_require(ConfigurationDoc& doc, const TagEvent& ev, const std::string& scope)
{
    RequireEntry e;
    e.name = name_attr(ev);
    const auto* version = ev.attr("version");
    if (!version || version->empty())
        throw ParseError("<require name=" + e.name + "> has no version");
    const auto* url = ev.attr("url");
    if (!url || url->empty())
        throw ParseError("<require name=" + e.name + "> has no url");
    e.version = *version;
    e.url = *url;
    e.arch_scope = scope;
    for (const auto& other : doc.entries) {
        if (markup::iequals(other.name, e.name) && other.arch_scope == e.arch_scope)
            throw ParseError("duplicate require for " + e.name
                             + (scope.empty() ? std::string() : " in architecture " + scope));
    }
    doc.entries.push_back(std::move(e));
}

struct ConfigParse {
    ConfigurationDoc doc;
    std::string scope;
};

markup::HandlerMap<ConfigParse> make_config_handlers()
{
    markup::HandlerMap<ConfigParse> h;
    h.on_open("config", "Architecture",
              [](const TagEvent& ev, ConfigParse& st, markup::GroupControl&) { st.scope = name_attr(ev); });
    h.on_close("config", "Architecture",
               [](const TagEvent&, ConfigParse& st, markup::GroupControl&) { st.scope.clear(); });
    h.on_open("config", "require", [](const TagEvent& ev, ConfigParse& st, markup::GroupControl&) {
        add_require(st.doc, ev, st.scope);
    });
    // Nested configuration includes restart scoping at their boundaries.
    h.on_open("config", "include",
              [](const TagEvent&, ConfigParse& st, markup::GroupControl&) { st.scope.clear(); });
    h.on_close("config", "include",
               [](const TagEvent&, ConfigParse& st, markup::GroupControl&) { st.scope.clear(); });
    h.activate("config");
    return h;
}

struct RequirementsParse {
    RequirementsDoc doc;
    std::string scope;
    std::string saved_scope;
    std::string include_scope;
    bool used = false;
    bool spliced = false;
    int include_depth = 0;
};

std::string include_identity(const RequirementsDoc& doc, const std::string& raw, std::string* version)
{
    try {
        std::optional<ResourceUrl> base;
        if (doc.base)
            base = parse_url(*doc.base);
        const auto url = parse_url(raw, base ? &*base : nullptr);
        *version = url.version().value_or("HEAD");
        return url.normalized();
    } catch (const UrlError&) {
        *version = "HEAD";
        return raw;
    }
}

markup::HandlerMap<RequirementsParse> make_requirements_handlers()
{
    markup::HandlerMap<RequirementsParse> h;
    h.on_open("req", "base", [](const TagEvent& ev, RequirementsParse& st, markup::GroupControl&) {
        if (st.used)
            throw ParseError("<base> must precede every <select> and <include>");
        const auto* url = ev.attr("url");
        if (!url || url->empty())
            throw ParseError("<base> requires a url attribute");
        st.doc.base = *url;
    });
    h.on_open("req", "include", [](const TagEvent& ev, RequirementsParse& st, markup::GroupControl& groups) {
        const auto* url = ev.attr("url");
        if (!url || url->empty())
            throw ParseError("<include> requires a url attribute");
        st.used = true;
        if (!st.spliced) {
            st.doc.includes.push_back(*url);
            return;
        }
        if (st.include_depth++ > 0) {
            st.include_scope.clear();
            return;
        }
        st.doc.includes.push_back(*url);
        ConfigurationDoc cfg;
        cfg.url = include_identity(st.doc, *url, &cfg.version_tag);
        st.doc.included.push_back(std::move(cfg));
        st.saved_scope = st.scope;
        st.include_scope.clear();
        groups.deactivate("req-arch");
        groups.activate("cfg");
    });
    h.on_close("req", "include", [](const TagEvent&, RequirementsParse& st, markup::GroupControl& groups) {
        if (st.include_depth == 0)
            return;
        st.include_scope.clear();
        if (--st.include_depth > 0)
            return;
        st.scope = st.saved_scope;
        groups.deactivate("cfg");
        groups.activate("req-arch");
    });
    h.on_open("req", "select", [](const TagEvent& ev, RequirementsParse& st, markup::GroupControl&) {
        if (st.include_depth > 0)
            return;
        st.used = true;
        SelectEntry sel{name_attr(ev), st.scope};
        for (const auto& s : st.doc.selects) {
            if (markup::iequals(s.name, sel.name) && s.arch_scope == sel.arch_scope)
                return;
        }
        st.doc.selects.push_back(std::move(sel));
    });
    h.on_open("req-arch", "Architecture",
              [](const TagEvent& ev, RequirementsParse& st, markup::GroupControl&) { st.scope = name_attr(ev); });
    h.on_close("req-arch", "Architecture",
               [](const TagEvent&, RequirementsParse& st, markup::GroupControl&) { st.scope.clear(); });

    h.on_open("cfg", "Architecture", [](const TagEvent& ev, RequirementsParse& st, markup::GroupControl&) {
        st.include_scope = name_attr(ev);
    });
    h.on_close("cfg", "Architecture",
               [](const TagEvent&, RequirementsParse& st, markup::GroupControl&) { st.include_scope.clear(); });
    h.on_open("cfg", "require", [](const TagEvent& ev, RequirementsParse& st, markup::GroupControl&) {
        add_require(st.doc.included.back(), ev, st.include_scope);
    });

    h.activate("req");
    h.activate("req-arch");
    return h;
}

} // namespace

ConfigurationDoc parse_configuration(std::span<const TagEvent> body)
{
    static const auto handlers = make_config_handlers();
    ConfigParse st;
    handlers.parse(body, st);
    return std::move(st.doc);
}

RequirementsDoc parse_requirements(std::span<const TagEvent> body)
{
    static const auto handlers = make_requirements_handlers();
    RequirementsParse st;
    st.spliced = std::any_of(body.begin(), body.end(), [](const TagEvent& ev) { return ev.is_close("include"); });
    handlers.parse(body, st);
    return std::move(st.doc);
}

ResolvedConfiguration resolve_selection(const RequirementsDoc& req,
                                        std::span<const ConfigurationDoc> configs,
                                        const Architecture& arch)
{
    ResolvedConfiguration out;
    out.arch = arch;
    out.base = req.base;
    if (!configs.empty()) {
        out.config_url = configs.front().url;
        out.config_version = configs.front().version_tag;
    }

    for (const auto& sel : req.selects) {
        if (!match_architecture(sel.arch_scope, arch))
            continue;
        if (out.find(sel.name))
            continue;

        const RequireEntry* best = nullptr;
        bool tie = false;
        for (const auto& cfg : configs) {
            for (const auto& e : cfg.entries) {
                if (!markup::iequals(e.name, sel.name) || !match_architecture(e.arch_scope, arch))
                    continue;
                if (!best || e.arch_scope.size() > best->arch_scope.size()) {
                    best = &e;
                    tie = false;
                } else if (e.arch_scope.size() == best->arch_scope.size()
                           && (e.version != best->version || e.url != best->url)) {
                    tie = true;
                }
            }
        }
        if (!best)
            throw ResolutionError("selected tool " + sel.name + " has no require in the configuration for architecture "
                                  + arch.canonical());
        if (tie)
            throw ResolutionError("selected tool " + sel.name + " has ambiguous requires for architecture "
                                  + arch.canonical());
        out.tools.push_back({sel.name, best->version, best->url});
    }
    return out;
}

std::string to_record(const ResolvedConfiguration& rc)
{
    using nlohmann::ordered_json;
    ordered_json j;
    j["arch"] = rc.arch.canonical();
    j["config_url"] = rc.config_url;
    j["config_version"] = rc.config_version;
    if (rc.base)
        j["base"] = *rc.base;
    j["tools"] = ordered_json::array();
    for (const auto& t : rc.tools)
        j["tools"].push_back({{"name", t.name}, {"version", t.version}, {"url", t.spec_url}});
    return j.dump(2) + "\n";
}

ResolvedConfiguration configuration_from_record(std::string_view text)
{
    try {
        const auto j = nlohmann::json::parse(text);
        ResolvedConfiguration rc;
        rc.arch = parse_architecture(j.at("arch").get<std::string>());
        rc.config_url = j.value("config_url", "");
        rc.config_version = j.value("config_version", "");
        if (j.contains("base"))
            rc.base = j.at("base").get<std::string>();
        for (const auto& t : j.at("tools"))
            rc.tools.push_back({t.at("name").get<std::string>(), t.at("version").get<std::string>(),
                                t.at("url").get<std::string>()});
        return rc;
    } catch (const nlohmann::json::exception& e) {
        throw Error(std::string("malformed configuration record: ") + e.what());
    }
}

} // namespace scram::config
