#pragma once

// Tag -> handler dispatch over an event stream. Handlers live in named
// groups; only active groups are consulted, and a handler may switch groups
// on or off for the events that follow it.

#include "scram/error.hpp"
#include "scram/markup.hpp"

#include <functional>
#include <map>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace scram::markup {

class GroupControl {
public:
    virtual ~GroupControl() = default;
    virtual void activate(const std::string& group) = 0;
    virtual void deactivate(const std::string& group) = 0;
    virtual bool is_active(const std::string& group) const = 0;
};

template <class State>
class HandlerMap {
public:
    using Handler = std::function<void(const TagEvent&, State&, GroupControl&)>;

    /// Registers a handler. Throws if the group already has one for this
    /// (tag, kind), or if the group is active and another active group does.
    HandlerMap& add(const std::string& group, std::string_view tag, EventKind kind, Handler h)
    {
        auto& slot = groups_[group][Key{fold(tag), kind}];
        if (slot)
            throw Error("duplicate handler for <" + std::string(tag) + "> in group '" + group + "'");
        if (active_.contains(group)) {
            for (const auto& other : active_) {
                if (other != group && lookup(other, Key{fold(tag), kind}))
                    throw Error("handler for <" + std::string(tag) + "> conflicts with active group '"
                                + other + "'");
            }
        }
        slot = std::move(h);
        return *this;
    }

    HandlerMap& on_open(const std::string& group, std::string_view tag, Handler h)
    {
        return add(group, tag, EventKind::Open, std::move(h));
    }
    HandlerMap& on_close(const std::string& group, std::string_view tag, Handler h)
    {
        return add(group, tag, EventKind::Close, std::move(h));
    }
    HandlerMap& on_text(const std::string& group, std::string_view tag, Handler h)
    {
        return add(group, tag, EventKind::CharData, std::move(h));
    }

    void activate(const std::string& group) { activate_in(active_, group); }
    void deactivate(const std::string& group) { active_.erase(group); }
    bool is_active(const std::string& group) const { return active_.contains(group); }
    const std::set<std::string>& active_groups() const { return active_; }

    /// Dispatches every event in order. Group switches made by handlers apply
    /// to later events of this parse only; the map's own active set is left
    /// as it was.
    State& parse(std::span<const TagEvent> events, State& state) const
    {
        Session session(*this, active_);
        std::vector<std::string> open_stack;

        for (const auto& ev : events) {
            const Handler* h = nullptr;
            switch (ev.kind) {
            case EventKind::Open:
                open_stack.push_back(fold(ev.name));
                h = session.find(Key{fold(ev.name), EventKind::Open});
                break;
            case EventKind::Close: {
                const auto name = fold(ev.name);
                for (auto it = open_stack.rbegin(); it != open_stack.rend(); ++it) {
                    if (*it == name) {
                        open_stack.erase(std::next(it).base(), open_stack.end());
                        break;
                    }
                }
                h = session.find(Key{name, EventKind::Close});
                break;
            }
            case EventKind::CharData:
                if (!open_stack.empty())
                    h = session.find(Key{open_stack.back(), EventKind::CharData});
                break;
            }
            if (!h)
                continue;
            try {
                (*h)(ev, state, session);
            } catch (const std::exception& e) {
                throw ParseError(ev.location.str() + ": " + e.what());
            }
        }
        return state;
    }

private:
    struct Key {
        std::string tag;
        EventKind kind;
        auto operator<=>(const Key&) const = default;
    };

    const Handler* lookup(const std::string& group, const Key& key) const
    {
        auto g = groups_.find(group);
        if (g == groups_.end())
            return nullptr;
        auto h = g->second.find(key);
        return h == g->second.end() ? nullptr : &h->second;
    }

    void activate_in(std::set<std::string>& active, const std::string& group) const
    {
        if (active.contains(group))
            return;
        if (auto g = groups_.find(group); g != groups_.end()) {
            for (const auto& [key, h] : g->second) {
                for (const auto& other : active) {
                    if (lookup(other, key))
                        throw Error("activating group '" + group + "' conflicts with group '" + other
                                    + "' on <" + key.tag + ">");
                }
            }
        }
        active.insert(group);
    }

    class Session final : public GroupControl {
    public:
        Session(const HandlerMap& map, std::set<std::string> active)
            : map_(map)
            , active_(std::move(active))
        {
        }
        void activate(const std::string& group) override { map_.activate_in(active_, group); }
        void deactivate(const std::string& group) override { active_.erase(group); }
        bool is_active(const std::string& group) const override { return active_.contains(group); }

        const Handler* find(const Key& key) const
        {
            for (const auto& group : active_) {
                if (const auto* h = map_.lookup(group, key))
                    return h;
            }
            return nullptr;
        }

    private:
        const HandlerMap& map_;
        std::set<std::string> active_;
    };

    std::map<std::string, std::map<Key, Handler>> groups_;
    std::set<std::string> active_;
};

/// Free-function form: runs `handlers` over `events` and returns the state.
template <class State>
State parse_with_handlers(std::span<const TagEvent> events, const HandlerMap<State>& handlers,
                          State state)
{
    handlers.parse(events, state);
    return state;
}

} // namespace scram::markup
