#include "scram/toolspec.hpp"

#include "scram/error.hpp"
#include "scram/handler_map.hpp"

#include <json.hpp>

#include <algorithm>
#include <cctype>
#include <set>

namespace scram::toolspec {

namespace fs = std::filesystem;
using markup::TagEvent;

std::string to_string(VarType t)
{
    switch (t) {
    case VarType::Plain:
        return "plain";
    case VarType::Lib:
        return "lib";
    case VarType::RuntimePath:
        return "Runtime_path";
    }
    return "plain";
}

VarType var_type_from_string(std::string_view s)
{
    if (s.empty() || markup::iequals(s, "plain"))
        return VarType::Plain;
    if (markup::iequals(s, "lib"))
        return VarType::Lib;
    if (markup::iequals(s, "Runtime_path"))
        return VarType::RuntimePath;
    throw ParseError("unknown variable type '" + std::string(s) + "'");
}

std::string to_string(Provenance p)
{
    switch (p) {
    case Provenance::SiteFile:
        return "site-file";
    case Provenance::Probe:
        return "probe";
    case Provenance::Prompt:
        return "prompt";
    case Provenance::Substitution:
        return "substitution";
    }
    return "substitution";
}

Provenance provenance_from_string(std::string_view s)
{
    if (s == "site-file")
        return Provenance::SiteFile;
    if (s == "probe")
        return Provenance::Probe;
    if (s == "prompt")
        return Provenance::Prompt;
    if (s == "substitution")
        return Provenance::Substitution;
    throw Error("unknown provenance '" + std::string(s) + "'");
}

const Binding* ResolvedTool::binding(std::string_view var) const
{
    for (const auto& b : bindings) {
        if (b.name == var)
            return &b;
    }
    return nullptr;
}

bool ResolvedTool::same_resolution(const ResolvedTool& other) const
{
    if (version != other.version || bindings.size() != other.bindings.size()
        || runtime_entries != other.runtime_entries)
        return false;
    for (std::size_t i = 0; i < bindings.size(); ++i) {
        if (bindings[i].name != other.bindings[i].name || bindings[i].value != other.bindings[i].value)
            return false;
    }
    return true;
}

// ---- parsing ----------------------------------------------------------------

namespace {

std::string collapse_space(std::string_view s)
{
    std::string out;
    bool pending = false;
    for (char c : s) {
        if (std::isspace(static_cast<unsigned char>(c))) {
            pending = !out.empty();
            continue;
        }
        if (pending)
            out.push_back(' ');
        pending = false;
        out.push_back(c);
    }
    return out;
}

void append_description(std::string& into, std::string_view text)
{
    auto t = collapse_space(text);
    if (t.empty())
        return;
    if (!into.empty())
        into.push_back(' ');
    into += t;
}

struct ToolParse {
    ToolSpec spec;
    ToolVersionBlock* block = nullptr;
    EnvVarDecl* env = nullptr;
    ExternalRef* external = nullptr;
};

const std::string& required_attr(const TagEvent& ev, std::string_view key)
{
    const auto* v = ev.attr(key);
    if (!v || v->empty())
        throw ParseError("<" + ev.name + "> requires a " + std::string(key) + " attribute");
    return *v;
}

ToolVersionBlock& current_block(ToolParse& st, const TagEvent& ev)
{
    if (!st.block)
        throw ParseError("<" + ev.name + "> outside any <Tool> block");
    return *st.block;
}

void add_variable(ToolParse& st, const TagEvent& ev, bool client)
{
    auto& block = current_block(st, ev);
    EnvVarDecl decl;
    decl.name = required_attr(ev, "name");
    if (const auto* v = ev.attr("value"))
        decl.value = *v;
    decl.type = var_type_from_string(ev.attr_or("type", ""));
    decl.client = client;
    if (client && decl.value)
        throw ParseError("client variable " + decl.name + " may not declare a value");

    auto clash = [&](const EnvVarDecl& d) { return d.name == decl.name; };
    if (std::any_of(block.client_vars.begin(), block.client_vars.end(), clash)
        || std::any_of(block.derived_vars.begin(), block.derived_vars.end(), clash))
        throw ParseError("duplicate variable " + decl.name + " in tool version " + block.version);

    auto& list = client ? block.client_vars : block.derived_vars;
    list.push_back(std::move(decl));
    st.env = &list.back();
    st.external = nullptr;
}

markup::HandlerMap<ToolParse> make_tool_handlers()
{
    markup::HandlerMap<ToolParse> h;
    h.on_open("tool", "Tool", [](const TagEvent& ev, ToolParse& st, markup::GroupControl& groups) {
        const auto& name = required_attr(ev, "name");
        const auto& version = required_attr(ev, "version");
        if (st.spec.name.empty()) {
            st.spec.name = markup::fold(name);
            st.spec.display_name = name;
        } else if (st.spec.name != markup::fold(name)) {
            throw ParseError("tool document mixes tools '" + st.spec.display_name + "' and '" + name + "'");
        }
        for (const auto& b : st.spec.blocks) {
            if (b.version == version)
                throw ParseError("duplicate version " + version + " of tool " + name);
        }
        st.spec.blocks.emplace_back().version = version;
        st.block = &st.spec.blocks.back();
        st.env = nullptr;
        st.external = nullptr;
        groups.deactivate("client-env");
        groups.activate("env");
    });
    h.on_close("tool", "Tool", [](const TagEvent&, ToolParse& st, markup::GroupControl& groups) {
        st.block = nullptr;
        st.env = nullptr;
        st.external = nullptr;
        groups.deactivate("client-env");
        groups.activate("env");
    });
    h.on_open("tool", "info", [](const TagEvent& ev, ToolParse& st, markup::GroupControl&) {
        current_block(st, ev).info_url = ev.attr_or("url", "");
    });
    h.on_open("tool", "Lib", [](const TagEvent& ev, ToolParse& st, markup::GroupControl&) {
        current_block(st, ev).libs.push_back(required_attr(ev, "name"));
    });
    h.on_open("tool", "Client", [](const TagEvent& ev, ToolParse& st, markup::GroupControl& groups) {
        current_block(st, ev);
        groups.deactivate("env");
        groups.activate("client-env");
    });
    h.on_close("tool", "Client", [](const TagEvent&, ToolParse&, markup::GroupControl& groups) {
        groups.deactivate("client-env");
        groups.activate("env");
    });
    h.on_open("tool", "External", [](const TagEvent& ev, ToolParse& st, markup::GroupControl&) {
        auto& block = current_block(st, ev);
        ExternalRef ext{required_attr(ev, "ref"), required_attr(ev, "version"), {}};
        if (markup::fold(ext.ref) == st.spec.name)
            throw ParseError("tool " + st.spec.display_name + " cannot depend on itself");
        block.externals.push_back(std::move(ext));
        st.external = &block.externals.back();
        st.env = nullptr;
    });
    h.on_text("tool", "External", [](const TagEvent& ev, ToolParse& st, markup::GroupControl&) {
        if (st.external)
            append_description(st.external->description, ev.text);
    });
    h.on_close("tool", "External", [](const TagEvent&, ToolParse& st, markup::GroupControl&) {
        st.external = nullptr;
    });

    auto env_text = [](const TagEvent& ev, ToolParse& st, markup::GroupControl&) {
        if (st.env)
            append_description(st.env->description, ev.text);
    };
    auto env_close = [](const TagEvent&, ToolParse& st, markup::GroupControl&) { st.env = nullptr; };
    h.on_open("env", "Environment",
              [](const TagEvent& ev, ToolParse& st, markup::GroupControl&) { add_variable(st, ev, false); });
    h.on_text("env", "Environment", env_text);
    h.on_close("env", "Environment", env_close);
    h.on_open("client-env", "Environment",
              [](const TagEvent& ev, ToolParse& st, markup::GroupControl&) { add_variable(st, ev, true); });
    h.on_text("client-env", "Environment", env_text);
    h.on_close("client-env", "Environment", env_close);

    h.activate("tool");
    h.activate("env");
    return h;
}

} // namespace

ToolSpec parse_tool_doc(std::span<const TagEvent> body)
{
    static const auto handlers = make_tool_handlers();
    ToolParse st;
    handlers.parse(body, st);
    if (st.spec.blocks.empty())
        throw ParseError("tool document declares no <Tool> block");
    return std::move(st.spec);
}

const ToolVersionBlock& select_version(const ToolSpec& spec, const std::string& version)
{
    for (const auto& b : spec.blocks) {
        if (b.version == version)
            return b;
    }
    std::string available;
    for (const auto& b : spec.blocks)
        available += (available.empty() ? "" : ", ") + b.version;
    throw ResolutionError("tool " + spec.name + " has no version " + version + " (available: "
                          + available + ")");
}

// ---- resolution -------------------------------------------------------------

LibraryProber filesystem_prober(int max_depth)
{
    return [max_depth](const std::vector<std::string>& libs, const std::vector<fs::path>& roots) {
        auto matches = [&](const std::string& file) {
            for (const auto& lib : libs) {
                const auto stem = "lib" + lib;
#ifdef __APPLE__
                if (file == stem + ".dylib" || file == stem + ".a")
                    return true;
#else
                if (file == stem + ".so" || file == stem + ".a" || file.starts_with(stem + ".so."))
                    return true;
#endif
            }
            return false;
        };
        auto qualifies = [&](const fs::path& dir) {
            std::error_code ec;
            for (const auto& entry : fs::directory_iterator(dir, ec)) {
                if (matches(entry.path().filename().string()))
                    return true;
            }
            return false;
        };

        std::vector<fs::path> found;
        std::set<fs::path> seen;
        for (const auto& root : roots) {
            std::error_code ec;
            if (!fs::is_directory(root, ec))
                continue;
            std::vector<fs::path> dirs{root};
            fs::recursive_directory_iterator it(root, fs::directory_options::skip_permission_denied, ec);
            for (; !ec && it != fs::recursive_directory_iterator(); it.increment(ec)) {
                if (it.depth() >= max_depth)
                    it.disable_recursion_pending();
                std::error_code ec2;
                if (it->is_directory(ec2))
                    dirs.push_back(it->path());
            }
            std::sort(dirs.begin() + 1, dirs.end());
            for (const auto& d : dirs) {
                if (qualifies(d) && seen.insert(d).second)
                    found.push_back(d);
            }
        }
        return found;
    };
}

namespace {

bool is_ident_char(char c)
{
    return std::isalnum(static_cast<unsigned char>(c)) != 0 || c == '_';
}

struct Expander {
    const std::string& tool;
    const std::vector<Binding>& own;
    std::vector<const ResolvedTool*> externals;

    const std::string* lookup(const std::string& name) const
    {
        for (const auto& b : own) {
            if (b.name == name)
                return &b.value;
        }
        for (const auto* ext : externals) {
            if (const auto* b = ext->binding(name))
                return &b->value;
        }
        return nullptr;
    }

    std::string expand(const std::string& var, const std::string& value) const
    {
        std::string out;
        for (std::size_t i = 0; i < value.size();) {
            if (value[i] != '$') {
                out.push_back(value[i++]);
                continue;
            }
            std::string name;
            std::size_t next;
            if (i + 1 < value.size() && value[i + 1] == '{') {
                const auto close = value.find('}', i + 2);
                if (close == std::string::npos)
                    throw ResolutionError("unterminated ${ in variable " + var + " of tool " + tool);
                name = value.substr(i + 2, close - i - 2);
                next = close + 1;
            } else {
                next = i + 1;
                while (next < value.size() && is_ident_char(value[next]))
                    ++next;
                name = value.substr(i + 1, next - i - 1);
            }
            if (name.empty())
                throw ResolutionError("stray '$' in variable " + var + " of tool " + tool);
            const auto* v = lookup(name);
            if (!v)
                throw ResolutionError("undefined reference $" + name + " in variable " + var
                                      + " of tool " + tool);
            out += *v;
            i = next;
        }
        return out;
    }
};

} // namespace

ResolvedTool resolve_tool(const std::string& tool_name, const ToolVersionBlock& block,
                          const SiteInfo& site, const LibraryProber& prober,
                          const PromptCallback& prompt,
                          const std::map<std::string, ResolvedTool>& already_resolved)
{
    ResolvedTool rt;
    rt.name = markup::fold(tool_name);
    rt.version = block.version;
    rt.libs = block.libs;
    rt.info_url = block.info_url;
    rt.externals = block.externals;

    Expander expander{rt.name, rt.bindings, {}};
    for (const auto& ext : block.externals) {
        auto it = already_resolved.find(markup::fold(ext.ref));
        if (it == already_resolved.end())
            throw ResolutionError("tool " + rt.name + " " + rt.version + " requires " + ext.ref
                                  + " version " + ext.version + ", which is not set up");
        if (it->second.version != ext.version)
            throw ResolutionError("tool " + rt.name + " " + rt.version + " requires " + ext.ref
                                  + " version " + ext.version + " but version "
                                  + it->second.version + " is set up");
        expander.externals.push_back(&it->second);
    }

    for (const auto& var : block.client_vars) {
        if (!var.description.empty())
            rt.descriptions[var.name] = var.description;

        if (auto v = site.tool_value(rt.name, var.name)) {
            rt.bindings.push_back({var.name, expander.expand(var.name, *v), Provenance::SiteFile, var.type});
            continue;
        }
        std::vector<fs::path> candidates;
        if (var.type == VarType::Lib && !block.libs.empty() && prober) {
            candidates = prober(block.libs, site.lib_roots());
            if (!candidates.empty()) {
                rt.bindings.push_back({var.name, candidates.front().string(), Provenance::Probe, var.type});
                continue;
            }
        }
        if (prompt) {
            PromptRequest req{rt.name, rt.version, var.name, var.type, var.description, candidates};
            if (auto answer = prompt(req); answer && !answer->empty()) {
                rt.bindings.push_back(
                    {var.name, expander.expand(var.name, *answer), Provenance::Prompt, var.type});
                continue;
            }
        }
        std::string msg = "cannot resolve variable " + var.name + " of tool " + rt.name + " "
            + rt.version + ": no site value (tool." + rt.name + "." + var.name + ")";
        if (var.type == VarType::Lib && !block.libs.empty())
            msg += ", no library found under search.libroots";
        if (!var.description.empty())
            msg += "; hint: " + var.description;
        throw ResolutionError(msg);
    }

    for (const auto& var : block.derived_vars) {
        if (!var.description.empty())
            rt.descriptions[var.name] = var.description;
        if (!var.value)
            throw ResolutionError("variable " + var.name + " of tool " + rt.name
                                  + " has no value and is not a client variable");
        rt.bindings.push_back(
            {var.name, expander.expand(var.name, *var.value), Provenance::Substitution, var.type});
        if (var.type == VarType::RuntimePath)
            rt.runtime_entries.emplace_back(var.name, rt.bindings.back().value);
    }
    return rt;
}

EnvDelta runtime_contribution(const ResolvedTool& rt)
{
    EnvDelta delta;
    for (const auto& [name, value] : rt.runtime_entries)
        delta.prepends.push_back(Prepend{name, value, Prepend::Anchor::Absolute});
    return delta;
}

std::vector<std::string> dependency_order(
    const std::vector<std::pair<std::string, const ToolVersionBlock*>>& tools)
{
    std::map<std::string, const ToolVersionBlock*> by_name;
    for (const auto& [name, block] : tools)
        by_name[markup::fold(name)] = block;

    std::vector<std::string> order;
    std::map<std::string, int> state; // 1 visiting, 2 done
    std::vector<std::string> stack;

    std::function<void(const std::string&)> visit = [&](const std::string& name) {
        auto& s = state[name];
        if (s == 2)
            return;
        if (s == 1) {
            std::string cycle;
            auto it = std::find(stack.begin(), stack.end(), name);
            for (; it != stack.end(); ++it)
                cycle += *it + " -> ";
            throw ResolutionError("external dependency cycle: " + cycle + name);
        }
        s = 1;
        stack.push_back(name);
        if (const auto* block = by_name.at(name)) {
            for (const auto& ext : block->externals) {
                const auto dep = markup::fold(ext.ref);
                if (by_name.contains(dep))
                    visit(dep);
            }
        }
        stack.pop_back();
        state[name] = 2;
        order.push_back(name);
    };
    for (const auto& [name, block] : tools)
        visit(markup::fold(name));
    return order;
}

// ---- records ----------------------------------------------------------------

std::string to_record(const ResolvedTool& rt)
{
    using nlohmann::ordered_json;
    ordered_json j;
    j["name"] = rt.name;
    j["version"] = rt.version;
    j["spec_url"] = rt.spec_url;
    if (rt.info_url)
        j["info_url"] = *rt.info_url;
    j["libs"] = rt.libs;
    j["bindings"] = ordered_json::array();
    for (const auto& b : rt.bindings) {
        j["bindings"].push_back({{"name", b.name},
                                 {"value", b.value},
                                 {"provenance", to_string(b.provenance)},
                                 {"type", to_string(b.type)}});
    }
    j["runtime"] = ordered_json::array();
    for (const auto& [name, value] : rt.runtime_entries)
        j["runtime"].push_back({{"name", name}, {"value", value}});
    j["externals"] = ordered_json::array();
    for (const auto& e : rt.externals)
        j["externals"].push_back({{"ref", e.ref}, {"version", e.version}, {"description", e.description}});
    j["descriptions"] = rt.descriptions;
    return j.dump(2) + "\n";
}

ResolvedTool from_record(std::string_view text)
{
    try {
        const auto j = nlohmann::json::parse(text);
        ResolvedTool rt;
        rt.name = j.at("name").get<std::string>();
        rt.version = j.at("version").get<std::string>();
        rt.spec_url = j.value("spec_url", "");
        if (j.contains("info_url"))
            rt.info_url = j.at("info_url").get<std::string>();
        rt.libs = j.value("libs", std::vector<std::string>{});
        for (const auto& b : j.at("bindings")) {
            rt.bindings.push_back({b.at("name").get<std::string>(), b.at("value").get<std::string>(),
                                   provenance_from_string(b.at("provenance").get<std::string>()),
                                   var_type_from_string(b.value("type", "plain"))});
        }
        for (const auto& r : j.at("runtime"))
            rt.runtime_entries.emplace_back(r.at("name").get<std::string>(), r.at("value").get<std::string>());
        for (const auto& e : j.value("externals", nlohmann::json::array())) {
            rt.externals.push_back({e.at("ref").get<std::string>(), e.at("version").get<std::string>(),
                                    e.value("description", "")});
        }
        rt.descriptions = j.value("descriptions", std::map<std::string, std::string>{});
        return rt;
    } catch (const nlohmann::json::exception& e) {
        throw Error(std::string("malformed tool record: ") + e.what());
    }
}

} // namespace scram::toolspec
