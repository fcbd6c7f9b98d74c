#include "scram/fetch.hpp"

#include "process.hpp"
#include "scram/error.hpp"
#include "scram/markup.hpp"
#include "scram/site.hpp"

#include <httplib.h>
#include <json.hpp>
#include <openssl/evp.h>

#include <cstdlib>
#include <unistd.h>

namespace scram {

namespace fs = std::filesystem;
using json = nlohmann::json;

std::string sha256_hex(std::string_view data)
{
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1)
        throw Error("sha256 failed");
    static constexpr char hex[] = "0123456789abcdef";
    std::string out;
    out.reserve(len * 2);
    for (unsigned int i = 0; i < len; ++i) {
        out.push_back(hex[digest[i] >> 4]);
        out.push_back(hex[digest[i] & 0xf]);
    }
    return out;
}

void SchemeRegistry::register_scheme(const std::string& name, SchemeAdapter adapter,
                                     SchemeOptions options)
{
    auto key = markup::fold(name);
    if (schemes_.contains(key))
        throw Error("scheme '" + name + "' is already registered");
    schemes_.emplace(std::move(key), Entry{std::move(adapter), options});
}

const SchemeRegistry::Entry* SchemeRegistry::find(const std::string& name) const
{
    auto it = schemes_.find(markup::fold(name));
    return it == schemes_.end() ? nullptr : &it->second;
}

SchemeAdapter file_adapter()
{
    return [](const ResourceUrl& url, const std::optional<std::string>&) {
        if (url.authority.empty())
            throw FetchError("file URL '" + url.str() + "' has no path");
        std::error_code ec;
        if (!fs::is_regular_file(url.authority, ec))
            throw FetchError("no such file: " + url.authority);
        return detail::read_file(url.authority);
    };
}

SchemeAdapter http_adapter()
{
    return [](const ResourceUrl& url, const std::optional<std::string>&) -> std::string {
        const auto slash = url.authority.find('/');
        const auto host = url.authority.substr(0, slash);
        std::string path = slash == std::string::npos ? "/" : url.authority.substr(slash);
        for (std::size_t i = 0; i < url.query.size(); ++i)
            path += (i == 0 ? "?" : "&") + url.query[i].first + "=" + url.query[i].second;

        httplib::Client client(markup::fold(url.scheme) + "://" + host);
        client.set_follow_location(true);
        auto res = client.Get(path);
        if (!res)
            throw FetchError("GET " + url.str() + ": " + httplib::to_string(res.error()));
        if (res->status != 200)
            throw FetchError("GET " + url.str() + ": HTTP status " + std::to_string(res->status));
        return res->body;
    };
}

SchemeAdapter command_adapter(std::string command_template)
{
    return [tmpl = std::move(command_template)](const ResourceUrl& url,
                                                const std::optional<std::string>& version) {
        if (tmpl.empty())
            throw FetchError("no checkout command configured for scheme '" + url.scheme
                             + "' (site key scheme.cvs.command)");
        std::string module = url.authority;
        if (const auto* m = url.query_value("module"))
            module = *m;
        const auto ver = version ? *version : url.version().value_or("HEAD");
        auto field = [&](const char* key) {
            const auto* v = url.query_value(key);
            return v ? *v : std::string();
        };

        std::string out_dir;
        std::string out_path;
        const bool to_file = tmpl.find("{out}") != std::string::npos;
        if (to_file) {
            std::string pattern = (fs::temp_directory_path() / "scram-fetch-XXXXXX").string();
            if (!mkdtemp(pattern.data()))
                throw FetchError("cannot create temporary directory for " + url.str());
            out_dir = pattern;
            out_path = (fs::path(out_dir) / "checkout").string();
        }

        std::string command;
        for (std::size_t i = 0; i < tmpl.size();) {
            if (tmpl[i] == '{') {
                const auto close = tmpl.find('}', i);
                if (close != std::string::npos) {
                    const auto name = tmpl.substr(i + 1, close - i - 1);
                    std::optional<std::string> value;
                    if (name == "module")
                        value = module;
                    else if (name == "version")
                        value = ver;
                    else if (name == "out")
                        value = out_path;
                    else if (name == "auth" || name == "user")
                        value = field(name.c_str());
                    else if (name == "url")
                        value = url.str();
                    if (value) {
                        command += detail::sh_quote(*value);
                        i = close + 1;
                        continue;
                    }
                }
            }
            command.push_back(tmpl[i++]);
        }

        auto run = detail::run_shell(command, {}, nullptr, !to_file);
        std::string bytes;
        if (to_file) {
            std::error_code ec;
            const bool produced = fs::is_regular_file(out_path, ec);
            if (run.status == 0 && produced)
                bytes = detail::read_file(out_path);
            fs::remove_all(out_dir, ec);
            if (run.status == 0 && !produced)
                throw FetchError("checkout of " + url.str() + " produced no output file");
        } else {
            bytes = std::move(run.output);
        }
        if (run.status != 0)
            throw FetchError("checkout of " + url.str() + " failed with exit status "
                             + std::to_string(run.status));
        return bytes;
    };
}

void register_builtin_schemes(SchemeRegistry& registry, const SiteInfo& site)
{
    registry.register_scheme("file", file_adapter(), SchemeOptions{.cacheable = false});
    registry.register_scheme("http", http_adapter());
    registry.register_scheme("https", http_adapter());
    const auto tmpl = site.get("scheme.cvs.command").value_or("");
    registry.register_scheme("cvs", command_adapter(tmpl));
    registry.register_scheme("vcs", command_adapter(tmpl));
}

Fetcher::Fetcher(SchemeRegistry registry, fs::path cache_root, bool refresh)
    : registry_(std::move(registry))
    , root_(std::move(cache_root))
    , refresh_(refresh)
{
}

namespace {

std::int64_t to_epoch(std::chrono::system_clock::time_point t)
{
    return std::chrono::duration_cast<std::chrono::seconds>(t.time_since_epoch()).count();
}

} // namespace

std::optional<FetchResult> Fetcher::read_entry(const fs::path& content, const fs::path& meta) const
{
    std::error_code ec;
    if (!fs::exists(meta, ec) || !fs::exists(content, ec))
        return std::nullopt;
    try {
        const auto m = json::parse(detail::read_file(meta));
        FetchResult r;
        r.bytes = detail::read_file(content);
        if (sha256_hex(r.bytes) != m.at("content_hash").get<std::string>())
            return std::nullopt;
        r.entry.url = m.at("url").get<std::string>();
        r.entry.version = m.at("version").get<std::string>();
        r.entry.content_path = content;
        r.entry.fetched_at = std::chrono::system_clock::time_point(
            std::chrono::seconds(m.at("fetched_at").get<std::int64_t>()));
        r.entry.content_hash = m.at("content_hash").get<std::string>();
        return r;
    } catch (const std::exception&) {
        return std::nullopt;
    }
}

FetchResult Fetcher::fetch(const ResourceUrl& url, const std::optional<std::string>& version)
{
    const auto* scheme = registry_.find(url.scheme);
    if (!scheme)
        throw FetchError("unknown URL scheme '" + url.scheme + "' in " + url.str());

    const auto effective = version ? *version : url.version().value_or("HEAD");
    const auto normalized = url.normalized();

    auto invoke = [&] {
        ++invocations_;
        try {
            return scheme->adapter(url, version ? version : url.version());
        } catch (const FetchError&) {
            throw;
        } catch (const std::exception& e) {
            throw FetchError("fetching " + url.str() + ": " + e.what());
        }
    };

    if (!scheme->options.cacheable) {
        FetchResult r;
        r.bytes = invoke();
        r.entry = {normalized, effective, {}, std::chrono::system_clock::now(), sha256_hex(r.bytes)};
        return r;
    }

    const auto key = normalized + "\n" + effective;
    const auto hash = sha256_hex(key);
    const auto dir = root_ / markup::fold(normalized.substr(0, normalized.find(':'))) / hash.substr(0, 2);
    const auto content = dir / hash;
    auto meta = content;
    meta += ".meta";

    bool force = false;
    if (refresh_ && effective == "HEAD") {
        std::lock_guard lock(refreshed_mutex_);
        force = refreshed_.insert(key).second;
    }

    if (!force) {
        if (auto hit = read_entry(content, meta))
            return std::move(*hit);
    }

    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec)
        throw FetchError("cannot create cache directory " + dir.string() + ": " + ec.message());
    auto lock_path = content;
    lock_path += ".lock";
    detail::FileLock lock(lock_path);

    // Another process may have completed the entry while we waited.
    if (!force) {
        if (auto hit = read_entry(content, meta))
            return std::move(*hit);
    }

    FetchResult r;
    r.bytes = invoke();
    r.entry = {normalized, effective, content, std::chrono::system_clock::now(), sha256_hex(r.bytes)};
    try {
        detail::write_file_atomic(content, r.bytes);
        const json m = {{"url", r.entry.url},
                        {"version", r.entry.version},
                        {"fetched_at", to_epoch(r.entry.fetched_at)},
                        {"content_hash", r.entry.content_hash}};
        detail::write_file_atomic(meta, m.dump(2));
    } catch (const Error& e) {
        throw FetchError(std::string("cache write failed: ") + e.what());
    }
    return r;
}

} // namespace scram
