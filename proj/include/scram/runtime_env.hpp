#pragma once

// Shell emission with cross-invocation rollback.
//
// Each emission records, for every variable it touches, the value that
// variable had before (`SCRAMRT_<NAME>`: "=" followed by the value, or "!"
// when it was unset) plus `SCRAMRT_SET=<area id>`. The next emission first
// restores those values, then applies its own delta, so switching areas
// leaves nothing of the previous one behind.

#include "scram/env_delta.hpp"
#include "scram/markup.hpp"

#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>

namespace scram::runtime {

inline constexpr const char* kAppEnvDocType = "BuildSystem::AppEnvDoc";
inline constexpr std::string_view kShadowPrefix = "SCRAMRT_";
inline constexpr const char* kOwnerVar = "SCRAMRT_SET";

using EnvMap = std::map<std::string, std::string>;

enum class ShellDialect { Csh, Sh };

/// Accepts `csh`/`-csh`/`--csh` and the `sh` equivalents.
ShellDialect dialect_from_flag(std::string_view flag);

struct RollbackState {
    std::map<std::string, std::optional<std::string>> saved;
    std::string owner;
};

RollbackState read_rollback_state(const EnvMap& env);

/// `env` with every recorded variable put back and the shadows removed.
EnvMap restore(const EnvMap& env);

/// The environment a shell ends up with after evaluating
/// emit_shell(delta, prior, ...), with area-anchored prepends resolved
/// against the prior `PWD` when it lies inside the area.
EnvMap evaluate(const EnvDelta& delta, const EnvMap& prior);

/// Shell text that restores the prior rollback state, applies `delta` and
/// records the new state. Only variables whose value changes are written.
/// Throws RuntimeEnvError for invalid or reserved variable names.
std::string emit_shell(const EnvDelta& delta, const EnvMap& prior, ShellDialect dialect);

/// `<Environment name= value= [type=Runtime_path]>` entries of an
/// application environment document (events after the header).
EnvDelta parse_app_env(std::span<const markup::TagEvent> body);

} // namespace scram::runtime
