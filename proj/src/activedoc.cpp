#include "scram/activedoc.hpp"

#include "scram/error.hpp"
#include "scram/version.hpp"

#include <algorithm>

namespace scram {

std::string effective_version(const ResourceUrl& url, const std::optional<std::string>& version)
{
    if (version)
        return *version;
    return url.version().value_or("HEAD");
}

void DocTypeRegistry::register_doc_type(const std::string& doc_type, const std::string& min_version,
                                        DocBuilder builder, std::set<std::string> includable)
{
    if (types_.contains(doc_type))
        throw Error("document type '" + doc_type + "' is already registered");
    if (!is_dotted_version(min_version))
        throw Error("malformed minimum version '" + min_version + "' for " + doc_type);
    includable.insert(doc_type);
    types_.emplace(doc_type, Entry{doc_type, min_version, std::move(builder), std::move(includable)});
}

const DocTypeRegistry::Entry* DocTypeRegistry::find(const std::string& doc_type) const
{
    auto it = types_.find(doc_type);
    return it == types_.end() ? nullptr : &it->second;
}

const DocTypeRegistry::Entry& DocTypeRegistry::require(const markup::DocHeader& header) const
{
    const auto* entry = find(header.doc_type);
    if (!entry)
        throw ActivationError("unknown document type '" + header.doc_type + "'");
    if (compare_dotted(header.doc_version, entry->min_version) < 0) {
        throw ActivationError("document version " + header.doc_version + " of type '"
                              + header.doc_type + "' is too old (need at least "
                              + entry->min_version + ")");
    }
    return *entry;
}

std::shared_ptr<const TypedDocument> ObjectStore::find(const std::string& key) const
{
    std::shared_lock lock(mutex_);
    auto it = entries_.find(key);
    return it == entries_.end() ? nullptr : it->second;
}

void ObjectStore::put(const std::string& key, std::shared_ptr<const TypedDocument> doc)
{
    std::unique_lock lock(mutex_);
    entries_[key] = std::move(doc);
}

std::size_t ObjectStore::size() const
{
    std::shared_lock lock(mutex_);
    return entries_.size();
}

std::mutex& ObjectStore::key_mutex(const std::string& key)
{
    std::lock_guard lock(key_mutexes_guard_);
    auto& m = key_mutexes_[key];
    if (!m)
        m = std::make_unique<std::mutex>();
    return *m;
}

std::string ObjectStore::key_for(const ResourceUrl& url, const std::string& version)
{
    return url.normalized() + "@" + version;
}

Activator::Activator(Fetcher& fetcher, const DocTypeRegistry& types, ObjectStore& store)
    : fetcher_(fetcher)
    , types_(types)
    , store_(store)
{
}

markup::EventList Activator::fetch_and_tokenize(const ResourceUrl& url,
                                                const std::optional<std::string>& version)
{
    ++fetches_;
    auto fetched = fetcher_.fetch(url, version);
    ++parses_;
    auto source_id = url.normalized();
    const auto ver = effective_version(url, version);
    if (ver != "HEAD")
        source_id += "@" + ver;
    return markup::tokenize_markup(fetched.bytes, source_id);
}

markup::EventList Activator::load_events(const ResourceUrl& url,
                                         const std::optional<std::string>& version)
{
    const auto root_id = ObjectStore::key_for(url, effective_version(url, version));
    auto raw = fetch_and_tokenize(url, version);

    struct Known {
        ResourceUrl url;
        std::string doc_type;
    };
    std::map<std::string, Known> known;
    auto doc_type_of = [](const markup::EventList& events) -> std::string {
        try {
            return markup::read_doc_header(events).doc_type;
        } catch (const ParseError&) {
            return {};
        }
    };
    known[root_id] = Known{url, doc_type_of(raw)};

    auto resolver = [&](const markup::InlineRequest& req) -> markup::InlineResult {
        const auto& parent = known.at(req.chain.back());
        ResourceUrl base = parent.url;
        if (req.base)
            base = parse_url(*req.base, &parent.url);
        auto target = parse_url(req.url, &base);
        const auto ver = effective_version(target, std::nullopt);
        const auto id = ObjectStore::key_for(target, ver);
        if (std::find(req.chain.begin(), req.chain.end(), id) != req.chain.end())
            return {id, {}}; // cycle; splice_inline reports it
        auto events = fetch_and_tokenize(target, std::nullopt);
        const auto type = doc_type_of(events);
        if (req.include) {
            if (type.empty())
                throw ActivationError("included document " + target.normalized() + " has no <doc> header");
            if (!parent.doc_type.empty()) {
                const auto* entry = types_.find(parent.doc_type);
                if (entry && !entry->includable.contains(type))
                    throw ActivationError("document type '" + type + "' cannot be included into '"
                                          + parent.doc_type + "'");
            }
        }
        known[id] = Known{target, type};
        return {id, std::move(events)};
    };
    return markup::splice_inline(raw, resolver, root_id);
}

std::shared_ptr<const TypedDocument> Activator::activate(const ResourceUrl& url,
                                                         const std::optional<std::string>& version)
{
    const auto ver = effective_version(url, version);
    const auto key = ObjectStore::key_for(url, ver);
    if (auto doc = store_.find(key))
        return doc;

    std::lock_guard key_lock(store_.key_mutex(key));
    if (auto doc = store_.find(key))
        return doc;

    try {
        auto events = load_events(url, version);
        const auto header = markup::read_doc_header(events);
        const auto& entry = types_.require(header);
        const auto end = markup::header_end(events);

        DocSource source{header,
                         markup::EventList(events.begin() + static_cast<std::ptrdiff_t>(end), events.end()),
                         url, ver};
        auto doc = std::make_shared<TypedDocument>();
        doc->header = header;
        doc->source = url;
        doc->version = ver;
        doc->payload = entry.builder(source);
        store_.put(key, doc);
        return doc;
    } catch (const Error& e) {
        throw ActivationError("activating " + url.normalized() + (ver == "HEAD" ? "" : "@" + ver)
                              + ": " + e.what());
    }
}

} // namespace scram
