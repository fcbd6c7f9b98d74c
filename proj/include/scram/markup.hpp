#pragma once

// Event-level reader for the document dialect: XML-looking, never required
// to be well-formed. Tags are events; nothing checks that they nest.

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace scram::markup {

struct SourceLocation {
    std::string source;
    int line = 1;
    int column = 1;

    std::string str() const;
    bool operator==(const SourceLocation&) const = default;
};

enum class EventKind { Open, Close, CharData };

using Attribute = std::pair<std::string, std::string>;

struct TagEvent {
    EventKind kind = EventKind::CharData;
    std::string name;              // Open/Close; original case
    std::vector<Attribute> attrs;  // Open only
    std::string text;              // CharData only
    SourceLocation location;

    static TagEvent open(std::string name, std::vector<Attribute> attrs = {}, SourceLocation at = {});
    static TagEvent close(std::string name, SourceLocation at = {});
    static TagEvent chardata(std::string text, SourceLocation at = {});

    bool is_open(std::string_view tag) const;
    bool is_close(std::string_view tag) const;

    /// Case-insensitive key lookup; values are returned verbatim.
    const std::string* attr(std::string_view key) const;
    std::string attr_or(std::string_view key, std::string_view fallback) const;
};

/// Equality on kind, name (case-folded), attrs and text. Locations are ignored.
bool same_event(const TagEvent& a, const TagEvent& b);
bool same_events(std::span<const TagEvent> a, std::span<const TagEvent> b);

using EventList = std::vector<TagEvent>;

/// ASCII lower-casing used for every tag/attribute name comparison.
std::string fold(std::string_view s);
bool iequals(std::string_view a, std::string_view b);

EventList tokenize_markup(std::string_view text, std::string_view source_id);

/// Inverse of tokenize_markup at event level. Throws ParseError for an
/// attribute value that cannot be written back (contains both `"` and a
/// terminator character).
std::string serialize_events(std::span<const TagEvent> events);

struct DocHeader {
    std::string doc_type;
    std::string doc_version;
    bool operator==(const DocHeader&) const = default;
};

/// Header of the first `<doc>` event; anything before it must be
/// whitespace-only character data.
DocHeader read_doc_header(std::span<const TagEvent> events);

/// Index one past the `<doc>` event located by read_doc_header.
std::size_t header_end(std::span<const TagEvent> events);

/// Events with the leading `<doc>` header (and the whitespace before it)
/// removed. Returns the input unchanged when no header is present.
EventList strip_header(std::span<const TagEvent> events);

// ---- inline splicing ------------------------------------------------------

struct InlineRequest {
    std::string url;                  // attribute value, whitespace removed
    std::optional<std::string> base;  // last `<base url=...>` seen at this level
    bool include = false;             // `<include>` rather than `<inline>`
    SourceLocation where;
    /// Identities of the enclosing documents, outermost first.
    std::span<const std::string> chain;
};

struct InlineResult {
    std::string id;   // identity used for cycle detection
    EventList events; // raw (unspliced) events of the target document
};

using InlineResolver = std::function<InlineResult(const InlineRequest&)>;

/// Replaces every `<inline url=...>` with the target's events (header
/// dropped), recursively. `<include url=...>` is spliced the same way but the
/// target must carry a header, and the body is bracketed by the original
/// Open(include) event and a synthetic Close(include) so builders can see
/// where an included document starts and ends.
///
/// `root_id` names the document being spliced; it seeds the cycle chain.
EventList splice_inline(std::span<const TagEvent> events, const InlineResolver& resolver,
                        std::string root_id = {});

} // namespace scram::markup
