#include "scram/runtime_env.hpp"

#include "scram/error.hpp"

#include <algorithm>
#include <cctype>
#include <set>
#include <vector>

namespace scram {

std::string EnvDelta::resolve(const Prepend& p) const
{
    if (p.anchor == Prepend::Anchor::Absolute)
        return p.value;
    return (area_root / p.value).generic_string();
}

void EnvDelta::validate() const
{
    std::set<std::string> set_names;
    for (const auto& [name, value] : sets)
        set_names.insert(name);
    for (const auto& p : prepends) {
        if (set_names.contains(p.name))
            throw RuntimeEnvError("variable " + p.name + " is both set and prepended");
    }
}

void EnvDelta::merge(const EnvDelta& overlay)
{
    for (const auto& [name, value] : overlay.sets) {
        auto it = std::find_if(sets.begin(), sets.end(), [&](const auto& s) { return s.first == name; });
        if (it != sets.end())
            it->second = value;
        else
            sets.emplace_back(name, value);
    }
    for (const auto& p : overlay.prepends) {
        auto q = p;
        if (q.anchor == Prepend::Anchor::Area) {
            q.value = overlay.resolve(p);
            q.anchor = Prepend::Anchor::Absolute;
        }
        prepends.push_back(std::move(q));
    }
    validate();
}

} // namespace scram

namespace scram::runtime {

namespace {

bool valid_name(std::string_view name)
{
    if (name.empty() || !(std::isalpha(static_cast<unsigned char>(name.front())) || name.front() == '_'))
        return false;
    return std::all_of(name.begin(), name.end(),
                       [](char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; });
}

void check_names(const EnvDelta& delta)
{
    auto check = [](const std::string& name) {
        if (!valid_name(name))
            throw RuntimeEnvError("invalid environment variable name '" + name + "'");
        if (name.starts_with(kShadowPrefix) || name == "SET" || name == "PWD")
            throw RuntimeEnvError("environment variable name '" + name + "' is reserved");
    };
    for (const auto& [name, value] : delta.sets)
        check(name);
    for (const auto& p : delta.prepends)
        check(p.name);
    delta.validate();
}

// A value under construction: literal text interleaved with references to
// the shell's working directory.
struct Part {
    bool pwd = false;
    std::string text;
};
using SymValue = std::vector<Part>;

std::string concrete(const SymValue& v, const std::string& pwd)
{
    std::string out;
    for (const auto& p : v)
        out += p.pwd ? pwd : p.text;
    return out;
}

SymValue literal(std::string s)
{
    return {Part{false, std::move(s)}};
}

struct Computed {
    std::map<std::string, SymValue> values;
    std::string pwd;
};

// Area-anchored entries become ${PWD}-relative when PWD is inside the area.
SymValue prepend_value(const EnvDelta& delta, const Prepend& p, const EnvMap& prior)
{
    if (p.anchor == Prepend::Anchor::Area) {
        auto pwd_it = prior.find("PWD");
        if (pwd_it != prior.end() && !delta.area_root.empty()) {
            const std::filesystem::path pwd(pwd_it->second);
            const auto inside = pwd.lexically_normal().lexically_relative(delta.area_root.lexically_normal());
            if (pwd.is_absolute() && !inside.empty() && *inside.begin() != "..") {
                const auto up = delta.area_root.lexically_normal().lexically_relative(pwd.lexically_normal());
                std::string tail;
                if (up != ".")
                    tail = "/" + up.generic_string();
                tail += "/" + p.value;
                return {Part{true, {}}, Part{false, tail}};
            }
        }
    }
    return literal(delta.resolve(p));
}

Computed compute(const EnvDelta& delta, const EnvMap& prior)
{
    check_names(delta);
    const auto base = restore(prior);

    Computed out;
    if (auto it = prior.find("PWD"); it != prior.end())
        out.pwd = it->second;
    for (const auto& [k, v] : base)
        out.values[k] = literal(v);

    std::vector<std::string> touched;
    auto touch = [&](const std::string& name) {
        if (std::find(touched.begin(), touched.end(), name) == touched.end())
            touched.push_back(name);
    };

    for (const auto& [name, value] : delta.sets) {
        out.values[name] = literal(value);
        touch(name);
    }
    for (const auto& p : delta.prepends) {
        touch(p.name);
        auto entry = prepend_value(delta, p, prior);
        const auto entry_str = concrete(entry, out.pwd);
        auto it = out.values.find(p.name);
        if (it == out.values.end()) {
            out.values[p.name] = std::move(entry);
            continue;
        }
        const auto current = concrete(it->second, out.pwd);
        if (current == entry_str || current.starts_with(entry_str + ":"))
            continue;
        if (!current.empty()) {
            entry.push_back(Part{false, ":"});
            entry.insert(entry.end(), it->second.begin(), it->second.end());
        }
        it->second = std::move(entry);
    }

    for (const auto& name : touched) {
        auto it = base.find(name);
        out.values[std::string(kShadowPrefix) + name] = literal(it == base.end() ? "!" : "=" + it->second);
    }
    out.values[kOwnerVar] = literal(delta.area_id);
    return out;
}

bool csh_bare_safe(const std::string& s)
{
    if (s.empty())
        return false;
    return std::all_of(s.begin(), s.end(), [](char c) {
        return std::isalnum(static_cast<unsigned char>(c)) || std::string_view("_./:,+=@%-").find(c) != std::string_view::npos;
    });
}

std::string sh_word(const SymValue& v)
{
    std::string out = "\"";
    for (const auto& p : v) {
        if (p.pwd) {
            out += "${PWD}";
            continue;
        }
        for (char c : p.text) {
            if (c == '\\' || c == '"' || c == '$' || c == '`')
                out.push_back('\\');
            out.push_back(c);
        }
    }
    out += "\"";
    return out;
}

SymValue coalesce(const SymValue& v)
{
    SymValue out;
    for (const auto& p : v) {
        if (!p.pwd && !out.empty() && !out.back().pwd)
            out.back().text += p.text;
        else
            out.push_back(p);
    }
    return out;
}

std::string csh_word(const SymValue& value)
{
    const auto v = coalesce(value);
    if (v.size() == 1 && !v.front().pwd && csh_bare_safe(v.front().text))
        return v.front().text;
    std::string out;
    for (const auto& p : v) {
        if (p.pwd) {
            out += "\"${cwd}\"";
            continue;
        }
        out += "'";
        for (char c : p.text) {
            if (c == '\'')
                out += "'\\''";
            else if (c == '\n')
                out += "\\\n";
            else
                out.push_back(c);
        }
        out += "'";
    }
    return out.empty() ? "''" : out;
}

} // namespace

ShellDialect dialect_from_flag(std::string_view flag)
{
    while (flag.starts_with('-'))
        flag.remove_prefix(1);
    if (flag == "csh")
        return ShellDialect::Csh;
    if (flag == "sh")
        return ShellDialect::Sh;
    throw UsageError("unsupported shell dialect '" + std::string(flag) + "' (use -csh or -sh)");
}

RollbackState read_rollback_state(const EnvMap& env)
{
    RollbackState state;
    for (const auto& [k, v] : env) {
        if (k == kOwnerVar) {
            state.owner = v;
            continue;
        }
        if (!k.starts_with(kShadowPrefix))
            continue;
        const auto name = k.substr(kShadowPrefix.size());
        if (!v.empty() && v.front() == '=')
            state.saved[name] = v.substr(1);
        else
            state.saved[name] = std::nullopt;
    }
    return state;
}

EnvMap restore(const EnvMap& env)
{
    const auto state = read_rollback_state(env);
    EnvMap out;
    for (const auto& [k, v] : env) {
        if (!k.starts_with(kShadowPrefix))
            out.emplace(k, v);
    }
    for (const auto& [name, value] : state.saved) {
        if (value)
            out[name] = *value;
        else
            out.erase(name);
    }
    return out;
}

EnvMap evaluate(const EnvDelta& delta, const EnvMap& prior)
{
    const auto c = compute(delta, prior);
    EnvMap out;
    for (const auto& [k, v] : c.values)
        out.emplace(k, concrete(v, c.pwd));
    return out;
}

std::string emit_shell(const EnvDelta& delta, const EnvMap& prior, ShellDialect dialect)
{
    const auto c = compute(delta, prior);
    std::string out;

    for (const auto& [k, v] : prior) {
        if (c.values.contains(k))
            continue;
        out += dialect == ShellDialect::Sh ? "unset " + k + ";\n" : "unsetenv " + k + ";\n";
    }
    for (const auto& [k, v] : c.values) {
        auto it = prior.find(k);
        if (it != prior.end() && it->second == concrete(v, c.pwd))
            continue;
        if (dialect == ShellDialect::Sh)
            out += k + "=" + sh_word(v) + "; export " + k + ";\n";
        else
            out += "setenv " + k + " " + csh_word(v) + ";\n";
    }
    return out;
}

EnvDelta parse_app_env(std::span<const markup::TagEvent> body)
{
    EnvDelta delta;
    for (const auto& ev : body) {
        if (!ev.is_open("Environment"))
            continue;
        const auto* name = ev.attr("name");
        const auto* value = ev.attr("value");
        if (!name || name->empty())
            throw ParseError(ev.location.str() + ": <Environment> requires a name attribute");
        if (!value)
            throw ParseError(ev.location.str() + ": <Environment name=" + *name + "> requires a value");
        if (!valid_name(*name))
            throw ParseError(ev.location.str() + ": invalid variable name '" + *name + "'");
        const auto type = ev.attr_or("type", "");
        if (type.empty()) {
            delta.sets.emplace_back(*name, *value);
        } else if (markup::iequals(type, "Runtime_path")) {
            delta.prepends.push_back(Prepend{*name, *value, Prepend::Anchor::Absolute});
        } else {
            throw ParseError(ev.location.str() + ": unknown variable type '" + type + "'");
        }
    }
    try {
        delta.validate();
    } catch (const RuntimeEnvError& e) {
        throw ParseError(std::string("application environment: ") + e.what());
    }
    return delta;
}

} // namespace scram::runtime
