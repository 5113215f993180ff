#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "lutzlab/persistence.hpp"

namespace lutzlab::cli {

// Exit codes of run().
inline constexpr int kExitPass = 0;
inline constexpr int kExitAssertion = 1;
inline constexpr int kExitInput = 2;

// Entry point shared by the executable and the tests.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

// 17 significant digits, "inf"/"-inf"/"nan" for non-finite values.
std::string fmt17(double v);
std::uint64_t fnv1a64(std::string_view data, std::uint64_t seed = 14695981039346656037ull);
// JSON with doubles written by fmt17; keys in sorted order.
std::string dump_json(const nlohmann::json& j, int indent = 2);

// Parses the DGA input format; throws InputError naming the offending field.
FilteredDGA parse_dga(const nlohmann::json& j);
mpq_class parse_rational(const nlohmann::json& j, const std::string& field);

}  // namespace lutzlab::cli
