#pragma once

#include <cstdint>
#include <istream>
#include <string>
#include <vector>

namespace touchbench {

// One `key = value` line of a plain config file. `#` and `;` start comments;
// `[section]` headers are ignored.
struct KeyValue {
  std::string key;
  std::string value;
  std::size_t line_no = 0;
};

std::vector<KeyValue> parse_key_values(std::istream& in);

// Typed accessors; malformed values raise ParseError with the line number.
double kv_double(const KeyValue& kv);
int kv_int(const KeyValue& kv);
std::uint64_t kv_u64(const KeyValue& kv);
bool kv_bool(const KeyValue& kv);

}  // namespace touchbench
