#pragma once

#include "abrmdp/mdp.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>

namespace abrmdp {

/// Version tag of the canonical state ordering written into policy files.
inline constexpr const char* kStateOrdering = "user-major/rate/channel-v1";

/// Flat text serialization of a PolicyTable:
///
///   abrmdp-policy 1
///   M <rates>
///   K <channel states>
///   N <users>
///   T <horizon>
///   ordering user-major/rate/channel-v1
///   fingerprint <16 hex digits of the scenario the table was solved for>
///   records <T * (M K)^N>
///   <t> <state index> <rate index user 1> ... <rate index user N> <value>
///
/// Records are sorted by epoch, then canonical state index. Values use the
/// shortest round-trip decimal form so a reload is bit-exact.
void write_policy_table(std::ostream& out, const PolicyTable& table, std::uint64_t fingerprint);
void save_policy_table(const std::filesystem::path& path, const PolicyTable& table,
                       std::uint64_t fingerprint);

struct LoadedPolicy {
    PolicyTable table;
    std::uint64_t fingerprint;
};

/// Throws ConfigError on a malformed or truncated file.
LoadedPolicy read_policy_table(std::istream& in);
LoadedPolicy load_policy_table(const std::filesystem::path& path);

} // namespace abrmdp
