#include "fco/text.hpp"

#include <charconv>
#include <stdexcept>
#include <system_error>

namespace fco::text {

std::string format_double(double value) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  if (ec != std::errc{}) throw std::runtime_error("double formatting failed");
  return std::string(buf, end);
}

std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(sep, start);
    if (pos == std::string_view::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

namespace {

template <typename T>
T parse_number(std::string_view field, const char* kind) {
  field = trim(field);
  if (!field.empty() && field.front() == '+') field.remove_prefix(1);
  T value{};
  const auto* begin = field.data();
  const auto* end = field.data() + field.size();
  auto [ptr, ec] = std::from_chars(begin, end, value);
  if (field.empty() || ec != std::errc{} || ptr != end) {
    throw std::invalid_argument(std::string("not a valid ") + kind + ": '" + std::string(field) + "'");
  }
  return value;
}

}  // namespace

double parse_double(std::string_view field) { return parse_number<double>(field, "number"); }
long long parse_int(std::string_view field) { return parse_number<long long>(field, "integer"); }
unsigned long long parse_uint(std::string_view field) {
  return parse_number<unsigned long long>(field, "non-negative integer");
}

}  // namespace fco::text
