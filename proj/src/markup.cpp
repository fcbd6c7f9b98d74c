#include "scram/markup.hpp"

#include "scram/error.hpp"

#include <algorithm>
#include <cctype>
#include <regex>

namespace scram::markup {

std::string SourceLocation::str() const
{
    return source + ":" + std::to_string(line) + ":" + std::to_string(column);
}

TagEvent TagEvent::open(std::string name, std::vector<Attribute> attrs, SourceLocation at)
{
    TagEvent ev;
    ev.kind = EventKind::Open;
    ev.name = std::move(name);
    ev.attrs = std::move(attrs);
    ev.location = std::move(at);
    return ev;
}

TagEvent TagEvent::close(std::string name, SourceLocation at)
{
    TagEvent ev;
    ev.kind = EventKind::Close;
    ev.name = std::move(name);
    ev.location = std::move(at);
    return ev;
}

TagEvent TagEvent::chardata(std::string text, SourceLocation at)
{
    TagEvent ev;
    ev.kind = EventKind::CharData;
    ev.text = std::move(text);
    ev.location = std::move(at);
    return ev;
}

bool TagEvent::is_open(std::string_view tag) const
{
    return kind == EventKind::Open && iequals(name, tag);
}

bool TagEvent::is_close(std::string_view tag) const
{
    return kind == EventKind::Close && iequals(name, tag);
}

const std::string* TagEvent::attr(std::string_view key) const
{
    for (const auto& [k, v] : attrs) {
        if (iequals(k, key))
            return &v;
    }
    return nullptr;
}

std::string TagEvent::attr_or(std::string_view key, std::string_view fallback) const
{
    const auto* v = attr(key);
    return v ? *v : std::string(fallback);
}

std::string fold(std::string_view s)
{
    std::string out(s);
    for (auto& c : out)
        c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return out;
}

bool iequals(std::string_view a, std::string_view b)
{
    return a.size() == b.size()
        && std::equal(a.begin(), a.end(), b.begin(), [](char x, char y) {
               return std::tolower(static_cast<unsigned char>(x))
                   == std::tolower(static_cast<unsigned char>(y));
           });
}

bool same_event(const TagEvent& a, const TagEvent& b)
{
    if (a.kind != b.kind || !iequals(a.name, b.name) || a.text != b.text
        || a.attrs.size() != b.attrs.size())
        return false;
    for (std::size_t i = 0; i < a.attrs.size(); ++i) {
        if (!iequals(a.attrs[i].first, b.attrs[i].first) || a.attrs[i].second != b.attrs[i].second)
            return false;
    }
    return true;
}

bool same_events(std::span<const TagEvent> a, std::span<const TagEvent> b)
{
    return std::equal(a.begin(), a.end(), b.begin(), b.end(), same_event);
}

namespace {

bool is_space(char c)
{
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

bool is_alpha(char c)
{
    return std::isalpha(static_cast<unsigned char>(c)) != 0;
}

bool is_name_char(char c)
{
    return std::isalnum(static_cast<unsigned char>(c)) != 0 || c == '_' || c == ':' || c == '.'
        || c == '-';
}

class Tokenizer {
public:
    Tokenizer(std::string_view text, std::string_view source)
        : text_(text)
        , source_(source)
    {
    }

    EventList run()
    {
        EventList out;
        std::string chars;
        SourceLocation chars_at;

        auto flush = [&] {
            if (!chars.empty())
                out.push_back(TagEvent::chardata(std::move(chars), chars_at));
            chars.clear();
        };

        while (!eof()) {
            if (peek() == '<' && plausible_tag()) {
                flush();
                out.push_back(read_tag());
                continue;
            }
            if (chars.empty())
                chars_at = here();
            chars.push_back(advance());
        }
        flush();
        return out;
    }

private:
    bool eof() const { return pos_ >= text_.size(); }
    char peek(std::size_t ahead = 0) const
    {
        return pos_ + ahead < text_.size() ? text_[pos_ + ahead] : '\0';
    }

    char advance()
    {
        char c = text_[pos_++];
        if (c == '\n') {
            ++line_;
            column_ = 1;
        } else {
            ++column_;
        }
        return c;
    }

    SourceLocation here() const { return {std::string(source_), line_, column_}; }

    bool plausible_tag() const
    {
        if (pos_ + 1 >= text_.size())
            return false;
        if (is_alpha(text_[pos_ + 1]))
            return true;
        return text_[pos_ + 1] == '/' && pos_ + 2 < text_.size() && is_alpha(text_[pos_ + 2]);
    }

    [[noreturn]] void fail(const SourceLocation& at, const std::string& what) const
    {
        throw ParseError(at.str() + ": " + what);
    }

    void skip_space()
    {
        while (!eof() && is_space(peek()))
            advance();
    }

    std::string read_name()
    {
        std::string name;
        while (!eof() && is_name_char(peek()))
            name.push_back(advance());
        return name;
    }

    TagEvent read_tag()
    {
        const auto start = here();
        advance(); // '<'
        if (peek() == '/') {
            advance();
            auto name = read_name();
            skip_space();
            if (eof())
                fail(start, "unterminated tag </" + name);
            if (peek() != '>')
                fail(here(), std::string("unexpected character '") + peek() + "' in close tag </"
                             + name + ">");
            advance();
            return TagEvent::close(std::move(name), start);
        }

        auto name = read_name();
        std::vector<Attribute> attrs;
        for (;;) {
            skip_space();
            if (eof())
                fail(start, "unterminated tag <" + name);
            if (peek() == '>') {
                advance();
                break;
            }
            const auto key_at = here();
            if (!is_name_char(peek()))
                fail(key_at, std::string("unexpected character '") + peek() + "' in tag <" + name);
            auto key = read_name();
            skip_space();
            std::string value;
            if (peek() == '=') {
                advance();
                skip_space();
                value = read_value(start, name);
            }
            for (const auto& [k, v] : attrs) {
                if (iequals(k, key))
                    fail(key_at, "duplicate attribute '" + key + "' in tag <" + name);
            }
            attrs.emplace_back(std::move(key), std::move(value));
        }
        return TagEvent::open(std::move(name), std::move(attrs), start);
    }

    std::string read_value(const SourceLocation& tag_at, const std::string& tag)
    {
        std::string value;
        if (eof())
            fail(tag_at, "unterminated tag <" + tag);
        if (peek() == '\'')
            fail(here(), "single-quoted attribute values are not supported");
        if (peek() == '"') {
            const auto quote_at = here();
            advance();
            while (!eof() && peek() != '"')
                value.push_back(advance());
            if (eof())
                fail(quote_at, "unterminated quoted attribute value in tag <" + tag);
            advance();
            return value;
        }
        while (!eof() && !is_space(peek()) && peek() != '>')
            value.push_back(advance());
        return value;
    }

    std::string_view text_;
    std::string_view source_;
    std::size_t pos_ = 0;
    int line_ = 1;
    int column_ = 1;
};

bool needs_quotes(const std::string& value)
{
    if (value.empty() || value.front() == '"' || value.front() == '\'')
        return true;
    return std::any_of(value.begin(), value.end(), [](char c) { return is_space(c) || c == '>'; });
}

bool whitespace_only(std::string_view s)
{
    return std::all_of(s.begin(), s.end(), is_space);
}

std::string strip_space(std::string_view s)
{
    std::string out;
    for (char c : s) {
        if (!is_space(c))
            out.push_back(c);
    }
    return out;
}

} // namespace

EventList tokenize_markup(std::string_view text, std::string_view source_id)
{
    return Tokenizer(text, source_id).run();
}

std::string serialize_events(std::span<const TagEvent> events)
{
    std::string out;
    for (const auto& ev : events) {
        switch (ev.kind) {
        case EventKind::CharData:
            out += ev.text;
            break;
        case EventKind::Close:
            out += "</" + ev.name + ">";
            break;
        case EventKind::Open:
            out += "<" + ev.name;
            for (const auto& [k, v] : ev.attrs) {
                out += " " + k + "=";
                if (needs_quotes(v)) {
                    if (v.find('"') != std::string::npos)
                        throw ParseError("attribute value of '" + k + "' cannot be serialized: " + v);
                    out += "\"" + v + "\"";
                } else {
                    out += v;
                }
            }
            out += ">";
            break;
        }
    }
    return out;
}

std::size_t header_end(std::span<const TagEvent> events)
{
    static const std::regex version_re(R"(\d+(\.\d+)*)");
    for (std::size_t i = 0; i < events.size(); ++i) {
        const auto& ev = events[i];
        if (ev.kind == EventKind::CharData) {
            if (!whitespace_only(ev.text))
                throw ParseError(ev.location.str() + ": text before <doc> header");
            continue;
        }
        if (!ev.is_open("doc")) {
            throw ParseError(ev.location.str() + ": missing <doc> header (found <"
                             + (ev.kind == EventKind::Close ? "/" : "") + ev.name + ">)");
        }
        const auto* type = ev.attr("type");
        const auto* version = ev.attr("version");
        if (!type || type->empty())
            throw ParseError(ev.location.str() + ": <doc> header has no type");
        if (!version || version->empty())
            throw ParseError(ev.location.str() + ": <doc> header has no version");
        if (!std::regex_match(*version, version_re))
            throw ParseError(ev.location.str() + ": malformed document version '" + *version + "'");
        return i + 1;
    }
    const std::string where = events.empty() ? std::string("document") : events.front().location.source;
    throw ParseError(where + ": missing <doc> header");
}

DocHeader read_doc_header(std::span<const TagEvent> events)
{
    const auto& ev = events[header_end(events) - 1];
    return {*ev.attr("type"), *ev.attr("version")};
}

EventList strip_header(std::span<const TagEvent> events)
{
    try {
        const auto end = header_end(events);
        return {events.begin() + static_cast<std::ptrdiff_t>(end), events.end()};
    } catch (const ParseError&) {
        return {events.begin(), events.end()};
    }
}

namespace {

void splice_level(std::span<const TagEvent> events, const InlineResolver& resolver,
                  std::vector<std::string>& chain, EventList& out)
{
    std::optional<std::string> base;
    for (const auto& ev : events) {
        if (ev.is_open("base")) {
            if (const auto* url = ev.attr("url"))
                base = strip_space(*url);
            out.push_back(ev);
            continue;
        }
        const bool include = ev.is_open("include");
        if (!include && !ev.is_open("inline")) {
            out.push_back(ev);
            continue;
        }
        const auto* raw = ev.attr("url");
        if (!raw)
            throw ParseError(ev.location.str() + ": <" + ev.name + "> without url");
        const auto url = strip_space(*raw);

        InlineResult target;
        try {
            target = resolver(InlineRequest{url, base, include, ev.location, chain});
        } catch (const Error& e) {
            throw ParseError(ev.location.str() + ": cannot " + (include ? "include" : "inline")
                             + " '" + url + "': " + e.what());
        }
        if (std::find(chain.begin(), chain.end(), target.id) != chain.end()) {
            std::string path;
            for (const auto& id : chain)
                path += id + " -> ";
            throw ParseError(ev.location.str() + ": inline cycle: " + path + target.id);
        }

        EventList body;
        if (include) {
            try {
                const auto end = header_end(target.events);
                body.assign(target.events.begin() + static_cast<std::ptrdiff_t>(end),
                            target.events.end());
            } catch (const ParseError& e) {
                throw ParseError(ev.location.str() + ": included document '" + url
                                 + "' is not a typed document: " + e.what());
            }
            out.push_back(ev);
        } else {
            body = strip_header(target.events);
        }

        chain.push_back(target.id);
        try {
            splice_level(body, resolver, chain, out);
        } catch (const ParseError& e) {
            throw ParseError(ev.location.str() + ": in " + (include ? "included" : "inlined") + " '"
                             + url + "': " + e.what());
        }
        chain.pop_back();

        if (include)
            out.push_back(TagEvent::close(ev.name, ev.location));
    }
}

} // namespace

EventList splice_inline(std::span<const TagEvent> events, const InlineResolver& resolver,
                        std::string root_id)
{
    std::vector<std::string> chain;
    if (!root_id.empty())
        chain.push_back(std::move(root_id));
    EventList out;
    out.reserve(events.size());
    splice_level(events, resolver, chain, out);
    return out;
}

} // namespace scram::markup
