#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace scram {

/// Site description file: one `key = value` record per line, `#` comments.
/// Recognised keys:
///   tool.<name>.<VAR>   value for a client variable of a tool
///   search.libroots     `:`-separated directories probed for libraries
///   scheme.cvs.command  checkout command template for the cvs: scheme
///   build.command       command run by `scram build`
/// Tool names in `tool.*` keys are matched case-insensitively.
class SiteInfo {
public:
    SiteInfo() = default;

    static SiteInfo parse(const std::string& text, const std::string& source = "site");
    static SiteInfo load(const std::filesystem::path& file);
    /// Empty SiteInfo when the file does not exist.
    static SiteInfo load_if_exists(const std::filesystem::path& file);

    std::optional<std::string> get(const std::string& key) const;
    std::optional<std::string> tool_value(const std::string& tool, const std::string& var) const;
    std::vector<std::filesystem::path> lib_roots() const;

    void set(const std::string& key, std::string value);

    const std::map<std::string, std::string>& entries() const { return entries_; }

private:
    static std::string normalize_key(const std::string& key);

    std::map<std::string, std::string> entries_;
};

} // namespace scram
