#pragma once

// Type activation: URL -> bytes -> events -> spliced events -> header ->
// registered builder -> typed payload, memoized per (normalized URL, version).

#include "scram/error.hpp"
#include "scram/fetch.hpp"
#include "scram/markup.hpp"
#include "scram/url.hpp"

#include <any>
#include <atomic>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <shared_mutex>
#include <string>
#include <typeinfo>

namespace scram {

/// What a builder sees: the header, the spliced events after it, and where
/// the document came from.
struct DocSource {
    markup::DocHeader header;
    markup::EventList body;
    ResourceUrl url;
    std::string version; // effective fetch version, "HEAD" when none
};

struct TypedDocument {
    markup::DocHeader header;
    ResourceUrl source;
    std::string version;
    std::any payload;

    template <class T>
    const T& as() const
    {
        if (const T* p = std::any_cast<T>(&payload))
            return *p;
        throw Error("document " + source.normalized() + " of type " + header.doc_type
                    + " does not hold the requested payload");
    }
};

using DocBuilder = std::function<std::any(const DocSource&)>;

class DocTypeRegistry {
public:
    struct Entry {
        std::string doc_type;
        std::string min_version;
        DocBuilder builder;
        std::set<std::string> includable;
    };

    /// `includable` lists the document types an `<include>` inside a document
    /// of this type may pull in; the type itself is always allowed.
    void register_doc_type(const std::string& doc_type, const std::string& min_version,
                           DocBuilder builder, std::set<std::string> includable = {});

    const Entry* find(const std::string& doc_type) const;

    /// Looks up the entry and applies the dotted-numeric version gate.
    const Entry& require(const markup::DocHeader& header) const;

private:
    std::map<std::string, Entry> types_;
};

class ObjectStore {
public:
    std::shared_ptr<const TypedDocument> find(const std::string& key) const;
    void put(const std::string& key, std::shared_ptr<const TypedDocument> doc);
    std::size_t size() const;

    /// Serializes activation of one key across threads.
    std::mutex& key_mutex(const std::string& key);

    static std::string key_for(const ResourceUrl& url, const std::string& version);

private:
    mutable std::shared_mutex mutex_;
    std::map<std::string, std::shared_ptr<const TypedDocument>> entries_;
    std::mutex key_mutexes_guard_;
    std::map<std::string, std::unique_ptr<std::mutex>> key_mutexes_;
};

class Activator {
public:
    Activator(Fetcher& fetcher, const DocTypeRegistry& types, ObjectStore& store);

    std::shared_ptr<const TypedDocument> activate(const ResourceUrl& url,
                                                  const std::optional<std::string>& version = std::nullopt);

    /// Fetch + tokenize + splice, without type activation or memoization.
    markup::EventList load_events(const ResourceUrl& url, const std::optional<std::string>& version);

    std::size_t fetches() const { return fetches_.load(); }
    std::size_t parses() const { return parses_.load(); }

    Fetcher& fetcher() { return fetcher_; }

private:
    markup::EventList fetch_and_tokenize(const ResourceUrl& url,
                                         const std::optional<std::string>& version);

    Fetcher& fetcher_;
    const DocTypeRegistry& types_;
    ObjectStore& store_;
    std::atomic<std::size_t> fetches_{0};
    std::atomic<std::size_t> parses_{0};
};

/// Effective version for a fetch: explicit, else the URL's `version` key,
/// else "HEAD".
std::string effective_version(const ResourceUrl& url, const std::optional<std::string>& version);

} // namespace scram
