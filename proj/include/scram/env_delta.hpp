#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

namespace scram {

/// One path-list prepend. Area-anchored entries hold a path relative to
/// EnvDelta::area_root and are emitted relative to the shell's working
/// directory when it lies inside that area, which keeps the output stable
/// when the area is moved.
struct Prepend {
    enum class Anchor { Absolute, Area };

    std::string name;
    std::string value;
    Anchor anchor = Anchor::Absolute;

    bool operator==(const Prepend&) const = default;
};

/// Ordered environment changes applied by one runtime invocation. Prepends
/// are applied in order, each pushing to the front, so a later entry ends up
/// ahead of an earlier one.
struct EnvDelta {
    std::vector<std::pair<std::string, std::string>> sets;
    std::vector<Prepend> prepends;
    std::string area_id;
    std::filesystem::path area_root;

    bool empty() const { return sets.empty() && prepends.empty(); }

    /// Concrete value of a prepend entry.
    std::string resolve(const Prepend& p) const;

    /// Appends `overlay` after this delta. A set in the overlay replaces a
    /// set of the same name. Throws RuntimeEnvError when a name would end up
    /// both set and prepended.
    void merge(const EnvDelta& overlay);

    /// Throws RuntimeEnvError if a name is both set and prepended.
    void validate() const;
};

} // namespace scram
