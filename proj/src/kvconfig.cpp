#include "touchbench/kvconfig.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>

#include "touchbench/error.hpp"

namespace touchbench {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\"");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\"");
  return std::string(s.substr(b, e - b + 1));
}

[[noreturn]] void bad(const KeyValue& kv, const char* what) {
  throw ParseError(kv.line_no, "expected " + std::string(what) + " for \"" + kv.key + "\", got \"" +
                                   kv.value + "\"");
}

template <class T>
T parse_number(const KeyValue& kv, const char* what) {
  T out{};
  const char* first = kv.value.data();
  const char* last = first + kv.value.size();
  auto [ptr, ec] = std::from_chars(first, last, out);
  if (ec != std::errc() || ptr != last) bad(kv, what);
  return out;
}

}  // namespace

std::vector<KeyValue> parse_key_values(std::istream& in) {
  std::vector<KeyValue> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find_first_of("#;");
    if (hash != std::string::npos) line.erase(hash);
    const std::string t = trim(line);
    if (t.empty() || t.front() == '[') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ParseError(line_no, "expected key = value");
    KeyValue kv{trim(std::string_view(line).substr(0, eq)),
                trim(std::string_view(line).substr(eq + 1)), line_no};
    if (kv.key.empty()) throw ParseError(line_no, "empty key");
    out.push_back(std::move(kv));
  }
  return out;
}

double kv_double(const KeyValue& kv) { return parse_number<double>(kv, "a number"); }
int kv_int(const KeyValue& kv) { return parse_number<int>(kv, "an integer"); }
std::uint64_t kv_u64(const KeyValue& kv) {
  return parse_number<std::uint64_t>(kv, "an unsigned integer");
}

bool kv_bool(const KeyValue& kv) {
  std::string v = kv.value;
  std::transform(v.begin(), v.end(), v.begin(), [](unsigned char c) { return std::tolower(c); });
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  bad(kv, "a boolean");
}

}  // namespace touchbench
