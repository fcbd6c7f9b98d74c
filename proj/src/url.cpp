#include "scram/url.hpp"

#include "scram/error.hpp"
#include "scram/markup.hpp"

#include <algorithm>
#include <cctype>
#include <filesystem>

namespace scram {

namespace {

std::size_t scheme_length(std::string_view s)
{
    if (s.empty() || !std::isalpha(static_cast<unsigned char>(s.front())))
        return 0;
    for (std::size_t i = 1; i < s.size(); ++i) {
        const char c = s[i];
        if (c == ':')
            return i;
        if (!std::isalnum(static_cast<unsigned char>(c)) && c != '+' && c != '.' && c != '-')
            return 0;
    }
    return 0;
}

QueryPairs parse_query(std::string_view q)
{
    QueryPairs out;
    std::size_t pos = 0;
    while (pos < q.size()) {
        auto amp = q.find('&', pos);
        if (amp == std::string_view::npos)
            amp = q.size();
        auto item = q.substr(pos, amp - pos);
        if (!item.empty()) {
            const auto eq = item.find('=');
            if (eq == std::string_view::npos)
                out.emplace_back(std::string(item), std::string());
            else
                out.emplace_back(std::string(item.substr(0, eq)), std::string(item.substr(eq + 1)));
        }
        pos = amp + 1;
    }
    return out;
}

void merge_query(QueryPairs& into, const QueryPairs& over)
{
    for (const auto& [k, v] : over) {
        auto it = std::find_if(into.begin(), into.end(), [&](const auto& p) { return p.first == k; });
        if (it != into.end())
            it->second = v;
        else
            into.emplace_back(k, v);
    }
}

std::string canonical_scheme(std::string_view scheme)
{
    auto s = markup::fold(scheme);
    return s == "vcs" ? std::string("cvs") : s;
}

} // namespace

std::string ResourceUrl::str() const
{
    std::string out = scheme + ":";
    if (slashes)
        out += "//";
    out += authority;
    for (std::size_t i = 0; i < query.size(); ++i) {
        out += (i == 0 ? "?" : "&");
        out += query[i].first + "=" + query[i].second;
    }
    if (!fragment.empty())
        out += "#" + fragment;
    return out;
}

const std::string* ResourceUrl::query_value(std::string_view key) const
{
    for (const auto& [k, v] : query) {
        if (k == key)
            return &v;
    }
    return nullptr;
}

std::optional<std::string> ResourceUrl::version() const
{
    if (const auto* v = query_value("version"); v && !v->empty())
        return *v;
    return std::nullopt;
}

std::string ResourceUrl::normalized() const
{
    QueryPairs kept;
    for (const auto& p : query) {
        if (p.first != "auth" && p.first != "user" && p.first != "version")
            kept.push_back(p);
    }
    std::sort(kept.begin(), kept.end());
    std::string out = canonical_scheme(scheme) + ":";
    if (slashes)
        out += "//";
    out += authority;
    for (std::size_t i = 0; i < kept.size(); ++i) {
        out += (i == 0 ? "?" : "&");
        out += kept[i].first + "=" + kept[i].second;
    }
    return out;
}

ResourceUrl parse_url(std::string_view raw_in, const ResourceUrl* base)
{
    std::string raw;
    for (char c : raw_in) {
        if (!std::isspace(static_cast<unsigned char>(c)))
            raw.push_back(c);
    }
    if (raw.empty())
        throw UrlError("empty URL");

    ResourceUrl url;
    url.raw = raw;
    std::string_view rest = raw;

    if (auto hash = rest.find('#'); hash != std::string_view::npos) {
        url.fragment = std::string(rest.substr(hash + 1));
        rest = rest.substr(0, hash);
    }

    const auto slen = scheme_length(rest);
    const bool has_scheme = slen > 0;
    if (has_scheme) {
        url.scheme = std::string(rest.substr(0, slen));
        rest = rest.substr(slen + 1);
        if (rest.starts_with("//")) {
            url.slashes = true;
            rest = rest.substr(2);
        }
    }
    std::string_view query;
    if (auto q = rest.find('?'); q != std::string_view::npos) {
        query = rest.substr(q + 1);
        rest = rest.substr(0, q);
    }
    url.authority = std::string(rest);
    url.query = parse_query(query);

    if (!has_scheme) {
        if (!base)
            throw UrlError("URL '" + raw + "' has no scheme and no base is in effect");
        ResourceUrl out = *base;
        out.raw = raw;
        out.fragment = url.fragment;
        if (!url.authority.empty()) {
            if (canonical_scheme(base->scheme) == "file" && !url.authority.starts_with('/')) {
                const std::filesystem::path parent = std::filesystem::path(base->authority).parent_path();
                out.authority = (parent / url.authority).lexically_normal().generic_string();
            } else {
                out.authority = url.authority;
            }
        }
        merge_query(out.query, url.query);
        return out;
    }

    if (url.authority.empty() && !url.slashes && base
        && canonical_scheme(base->scheme) == canonical_scheme(url.scheme)) {
        ResourceUrl out = *base;
        out.raw = raw;
        out.scheme = url.scheme;
        out.fragment = url.fragment;
        merge_query(out.query, url.query);
        return out;
    }
    if (canonical_scheme(url.scheme) == "file" && base && canonical_scheme(base->scheme) == "file"
        && !url.authority.empty() && !url.authority.starts_with('/')) {
        const std::filesystem::path parent = std::filesystem::path(base->authority).parent_path();
        url.authority = (parent / url.authority).lexically_normal().generic_string();
    }
    return url;
}

} // namespace scram
