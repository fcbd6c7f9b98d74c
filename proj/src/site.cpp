#include "scram/site.hpp"

#include "scram/error.hpp"
#include "scram/markup.hpp"

#include <fstream>
#include <sstream>

namespace scram {

namespace {

std::string trim(const std::string& s)
{
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string::npos)
        return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

} // namespace

std::string SiteInfo::normalize_key(const std::string& key)
{
    if (!key.starts_with("tool."))
        return key;
    const auto dot = key.find('.', 5);
    if (dot == std::string::npos)
        return key;
    return "tool." + markup::fold(key.substr(5, dot - 5)) + key.substr(dot);
}

SiteInfo SiteInfo::parse(const std::string& text, const std::string& source)
{
    SiteInfo site;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto body = trim(line);
        if (body.empty() || body.front() == '#')
            continue;
        const auto eq = body.find('=');
        if (eq == std::string::npos)
            throw Error(source + ":" + std::to_string(lineno) + ": expected 'key = value'");
        auto key = trim(body.substr(0, eq));
        auto value = trim(body.substr(eq + 1));
        if (key.empty())
            throw Error(source + ":" + std::to_string(lineno) + ": empty key");
        if (value.size() >= 2 && value.front() == '"' && value.back() == '"')
            value = value.substr(1, value.size() - 2);
        site.set(key, std::move(value));
    }
    return site;
}

SiteInfo SiteInfo::load(const std::filesystem::path& file)
{
    std::ifstream in(file, std::ios::binary);
    if (!in)
        throw Error("cannot read site file " + file.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse(buf.str(), file.string());
}

SiteInfo SiteInfo::load_if_exists(const std::filesystem::path& file)
{
    std::error_code ec;
    if (!std::filesystem::exists(file, ec))
        return {};
    return load(file);
}

std::optional<std::string> SiteInfo::get(const std::string& key) const
{
    auto it = entries_.find(normalize_key(key));
    if (it == entries_.end())
        return std::nullopt;
    return it->second;
}

std::optional<std::string> SiteInfo::tool_value(const std::string& tool, const std::string& var) const
{
    return get("tool." + markup::fold(tool) + "." + var);
}

std::vector<std::filesystem::path> SiteInfo::lib_roots() const
{
    std::vector<std::filesystem::path> out;
    const auto v = get("search.libroots");
    if (!v)
        return out;
    std::size_t pos = 0;
    while (pos <= v->size()) {
        auto colon = v->find(':', pos);
        if (colon == std::string::npos)
            colon = v->size();
        auto item = trim(v->substr(pos, colon - pos));
        if (!item.empty())
            out.emplace_back(item);
        pos = colon + 1;
    }
    return out;
}

void SiteInfo::set(const std::string& key, std::string value)
{
    entries_[normalize_key(key)] = std::move(value);
}

} // namespace scram
