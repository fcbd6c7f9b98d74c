#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace scram {

using QueryPairs = std::vector<std::pair<std::string, std::string>>;

/// `scheme:[//]authority[?k=v&...][#fragment]`. The authority is everything
/// between the scheme (and optional `//`) and the query, so for
/// `cvs://host/path?...` it is `host/path` and for `file:/tmp/x` it is `/tmp/x`.
struct ResourceUrl {
    std::string scheme;
    bool slashes = false;
    std::string authority;
    QueryPairs query;
    std::string fragment;
    std::string raw;

    std::string str() const;

    const std::string* query_value(std::string_view key) const;

    /// The `version` query key, if present.
    std::optional<std::string> version() const;

    /// Identity for caches and the object store: scheme lower-cased (`vcs`
    /// folded to `cvs`), query sorted, and `auth`, `user`, `version` dropped.
    std::string normalized() const;
};

/// Parses `raw` (whitespace inside it is discarded, since the documents wrap
/// long URLs across lines). A URL with a scheme but no authority
/// (`cvs:?module=M`) takes the authority of a same-scheme `base` and
/// inherits its query keys as defaults. A URL without a scheme resolves
/// against `base` and is an error when there is none.
ResourceUrl parse_url(std::string_view raw, const ResourceUrl* base = nullptr);

} // namespace scram
