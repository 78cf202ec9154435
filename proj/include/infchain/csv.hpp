#pragma once

#include <charconv>
#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>

namespace infchain {

/// Shortest round-trip decimal representation of a double, so CSV bodies are
/// byte-reproducible and parse back to the exact value.
inline std::string format_double(double value) {
  char buf[40];
  const auto res = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, res.ptr);
}

/// Minimal CSV assembler: comma separator, '\n' line endings, numbers in
/// shortest round-trip form. Build in memory, then write atomically.
class CsvBuilder {
 public:
  CsvBuilder& field(std::string_view text) {
    sep();
    body_ += text;
    return *this;
  }
  CsvBuilder& field(double value) { return field(std::string_view(format_double(value))); }
  CsvBuilder& field(std::uint64_t value) { return field(std::string_view(std::to_string(value))); }
  CsvBuilder& field(std::size_t value) { return field(static_cast<std::uint64_t>(value)); }
  CsvBuilder& field(int value) { return field(std::string_view(std::to_string(value))); }
  CsvBuilder& field(bool value) { return field(std::string_view(value ? "pass" : "fail")); }

  void end_row() {
    body_ += '\n';
    at_row_start_ = true;
  }

  const std::string& str() const { return body_; }

 private:
  void sep() {
    if (!at_row_start_) body_ += ',';
    at_row_start_ = false;
  }

  std::string body_;
  bool at_row_start_ = true;
};

}  // namespace infchain
