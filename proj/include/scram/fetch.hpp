#pragma once

// Scheme-pluggable retrieval with a persistent on-disk content cache.
//
// Cache layout: <root>/<scheme>/<first two hex digits>/<sha256(key)> holds the
// bytes, a sibling `.meta` file (JSON) records the key, timestamp and content
// digest. The key is (ResourceUrl::normalized(), version), where the version
// is the explicit one, else the URL's `version` query key, else "HEAD".

#include "scram/url.hpp"

#include <atomic>
#include <chrono>
#include <filesystem>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <string>

namespace scram {

class SiteInfo;

using SchemeAdapter =
    std::function<std::string(const ResourceUrl& url, const std::optional<std::string>& version)>;

struct SchemeOptions {
    /// Uncached schemes go to the adapter on every fetch (used for `file:`,
    /// whose documents are edited in place).
    bool cacheable = true;
};

class SchemeRegistry {
public:
    struct Entry {
        SchemeAdapter adapter;
        SchemeOptions options;
    };

    /// Throws Error if `name` is already registered. Names are case-insensitive.
    void register_scheme(const std::string& name, SchemeAdapter adapter, SchemeOptions options = {});
    const Entry* find(const std::string& name) const;

private:
    std::map<std::string, Entry> schemes_;
};

/// `file:` adapter. The version argument is ignored.
SchemeAdapter file_adapter();
/// Plain GET for `http:` and `https:`.
SchemeAdapter http_adapter();
/// External checkout command. `{module}`, `{version}`, `{out}`, `{auth}`,
/// `{user}` and `{url}` are substituted shell-quoted. With `{out}` the bytes
/// are read back from that file, otherwise the command's stdout is used.
SchemeAdapter command_adapter(std::string command_template);

/// file (uncached), http, https, and cvs/vcs backed by `scheme.cvs.command`.
void register_builtin_schemes(SchemeRegistry& registry, const SiteInfo& site);

struct CacheEntry {
    std::string url;     // normalized
    std::string version; // "HEAD" when unversioned
    std::filesystem::path content_path;
    std::chrono::system_clock::time_point fetched_at;
    std::string content_hash; // sha256, hex
};

struct FetchResult {
    std::string bytes;
    CacheEntry entry;
};

std::string sha256_hex(std::string_view data);

class Fetcher {
public:
    Fetcher(SchemeRegistry registry, std::filesystem::path cache_root, bool refresh = false);

    /// Cache hit serves stored bytes. A miss (or an unversioned key when
    /// refresh is set, once per key per Fetcher) invokes the adapter and
    /// stores the result. Safe to call concurrently; fetches of one key are
    /// serialized through a lock file next to the entry.
    FetchResult fetch(const ResourceUrl& url, const std::optional<std::string>& version = std::nullopt);

    /// Number of adapter calls made so far.
    std::size_t adapter_invocations() const { return invocations_.load(); }

    const std::filesystem::path& cache_root() const { return root_; }
    const SchemeRegistry& schemes() const { return registry_; }

private:
    std::optional<FetchResult> read_entry(const std::filesystem::path& content,
                                          const std::filesystem::path& meta) const;

    SchemeRegistry registry_;
    std::filesystem::path root_;
    bool refresh_;
    std::atomic<std::size_t> invocations_{0};
    std::mutex refreshed_mutex_;
    std::set<std::string> refreshed_;
};

} // namespace scram
