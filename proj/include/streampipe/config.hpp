#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>

namespace streampipe {

// Flat "key = value" configuration, one pair per line, '#' comments.
using KeyValues = std::map<std::string, std::string>;

KeyValues parse_key_values(const std::string& text);
KeyValues load_key_values(const std::filesystem::path& path);

// Typed lookups; the default is returned when the key is absent. Parse
// failures throw with the key name.
double kv_double(const KeyValues& kv, const std::string& key, double fallback);
std::int64_t kv_int(const KeyValues& kv, const std::string& key, std::int64_t fallback);
bool kv_bool(const KeyValues& kv, const std::string& key, bool fallback);
std::string kv_string(const KeyValues& kv, const std::string& key, std::string fallback);

}  // namespace streampipe
