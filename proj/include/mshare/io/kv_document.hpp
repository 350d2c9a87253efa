#pragma once

#include <cctype>
#include <charconv>
#include <cstdint>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "mshare/error.hpp"

namespace mshare::io {

/// Error carrying the 1-based line it refers to.
class ParseError : public ValidationError {
 public:
  ParseError(std::size_t line, const std::string& message)
      : ValidationError("line " + std::to_string(line) + ": " + message), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// A value of the TOML subset: number, string, boolean or array.
struct Value {
  enum class Kind { number, string, boolean, array };
  Kind kind = Kind::number;
  std::string text;  ///< number literal or string contents
  bool flag = false;
  std::vector<Value> items;
  std::size_t line = 0;

  double as_double() const {
    expect(Kind::number, "a number");
    double v = 0.0;
    const auto* first = text.data();
    const auto* last = text.data() + text.size();
    if (*first == '+') ++first;
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc{} || ptr != last) throw ParseError(line, "malformed number '" + text + "'");
    return v;
  }

  std::uint64_t as_u64() const {
    expect(Kind::number, "an integer");
    std::uint64_t v = 0;
    const auto* first = text.data();
    const auto* last = text.data() + text.size();
    if (*first == '+') ++first;
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec == std::errc{} && ptr == last) return v;
    // Exponent forms such as 5e5 are accepted when they denote an exact integer.
    const double d = as_double();
    if (d >= 0.0 && d <= 9007199254740992.0 && d == static_cast<double>(static_cast<std::uint64_t>(d))) {
      return static_cast<std::uint64_t>(d);
    }
    throw ParseError(line, "expected a nonnegative integer, got '" + text + "'");
  }

  const std::string& as_string() const {
    expect(Kind::string, "a string");
    return text;
  }

  bool as_bool() const {
    expect(Kind::boolean, "a boolean");
    return flag;
  }

  std::vector<double> as_doubles() const {
    expect(Kind::array, "an array");
    std::vector<double> out;
    for (const auto& v : items) out.push_back(v.as_double());
    return out;
  }

  std::vector<std::uint64_t> as_u64s() const {
    expect(Kind::array, "an array");
    std::vector<std::uint64_t> out;
    for (const auto& v : items) out.push_back(v.as_u64());
    return out;
  }

  std::vector<std::vector<double>> as_matrix() const {
    expect(Kind::array, "an array of arrays");
    std::vector<std::vector<double>> out;
    for (const auto& v : items) out.push_back(v.as_doubles());
    return out;
  }

  void expect(Kind k, const char* what) const {
    if (kind != k) throw ParseError(line, std::string("expected ") + what);
  }
};

struct Entry {
  std::string key;
  Value value;
  std::size_t line = 0;
};

/// A table: ordered keys, each at most once.
struct Table {
  std::string name;  ///< empty for the root table
  std::size_t line = 0;
  std::vector<Entry> entries;

  const Entry* find(std::string_view key) const {
    for (const auto& e : entries) {
      if (e.key == key) return &e;
    }
    return nullptr;
  }
};

/// Root table followed by [[array-of-tables]] sections in file order.
struct Document {
  Table root;
  std::vector<Table> sections;
};

namespace detail {

class Reader {
 public:
  explicit Reader(std::string_view text) : text_(text) {}

  Document parse() {
    Document doc;
    Table* current = &doc.root;
    for (;;) {
      skip_blank_lines();
      if (at_end()) break;
      const std::size_t line = line_;
      if (peek() == '[') {
        if (!consume("[[")) throw ParseError(line, "only [[section]] headers are supported");
        const std::string name = read_bare_key();
        if (!consume("]]")) throw ParseError(line, "expected ']]' after section name");
        finish_line();
        doc.sections.push_back(Table{name, line, {}});
        current = &doc.sections.back();
        continue;
      }
      Entry e;
      e.line = line;
      e.key = read_bare_key();
      skip_spaces();
      if (!consume("=")) throw ParseError(line, "expected '=' after key '" + e.key + "'");
      skip_spaces();
      e.value = read_value();
      finish_line();
      if (current->find(e.key)) throw ParseError(line, "duplicate key '" + e.key + "'");
      current->entries.push_back(std::move(e));
    }
    return doc;
  }

 private:
  bool at_end() const { return pos_ >= text_.size(); }
  char peek() const { return at_end() ? '\0' : text_[pos_]; }

  void advance() {
    if (text_[pos_] == '\n') ++line_;
    ++pos_;
  }

  bool consume(std::string_view token) {
    if (text_.substr(pos_, token.size()) != token) return false;
    for (std::size_t k = 0; k < token.size(); ++k) advance();
    return true;
  }

  void skip_spaces() {
    while (!at_end() && (peek() == ' ' || peek() == '\t' || peek() == '\r')) advance();
  }

  void skip_comment() {
    if (peek() == '#') {
      while (!at_end() && peek() != '\n') advance();
    }
  }

  /// Whitespace, newlines and comments (used inside arrays and between entries).
  void skip_blank_lines() {
    for (;;) {
      skip_spaces();
      skip_comment();
      if (!at_end() && peek() == '\n') {
        advance();
        continue;
      }
      return;
    }
  }

  void finish_line() {
    skip_spaces();
    skip_comment();
    if (!at_end() && peek() != '\n') throw ParseError(line_, "unexpected trailing characters");
  }

  std::string read_bare_key() {
    skip_spaces();
    std::string key;
    while (!at_end() && (std::isalnum(static_cast<unsigned char>(peek())) || peek() == '_' || peek() == '-' ||
                         peek() == '.')) {
      key.push_back(peek());
      advance();
    }
    if (key.empty()) throw ParseError(line_, "expected a key");
    return key;
  }

  Value read_value() {
    Value v;
    v.line = line_;
    const char c = peek();
    if (c == '"') {
      v.kind = Value::Kind::string;
      advance();
      while (!at_end() && peek() != '"') {
        if (peek() == '\n') throw ParseError(v.line, "unterminated string");
        if (peek() == '\\') {
          advance();
          if (at_end()) break;
          const char esc = peek();
          v.text.push_back(esc == 'n' ? '\n' : esc == 't' ? '\t' : esc);
        } else {
          v.text.push_back(peek());
        }
        advance();
      }
      if (!consume("\"")) throw ParseError(v.line, "unterminated string");
      return v;
    }
    if (c == '[') {
      v.kind = Value::Kind::array;
      advance();
      for (;;) {
        skip_blank_lines();
        if (consume("]")) break;
        v.items.push_back(read_value());
        skip_blank_lines();
        if (consume(",")) continue;
        if (consume("]")) break;
        throw ParseError(line_, "expected ',' or ']' in array");
      }
      return v;
    }
    if (consume("true")) {
      v.kind = Value::Kind::boolean;
      v.flag = true;
      return v;
    }
    if (consume("false")) {
      v.kind = Value::Kind::boolean;
      return v;
    }
    while (!at_end() && (std::isalnum(static_cast<unsigned char>(peek())) || peek() == '.' || peek() == '-' ||
                         peek() == '+' || peek() == '_')) {
      if (peek() != '_') v.text.push_back(peek());
      advance();
    }
    if (v.text.empty()) throw ParseError(v.line, "expected a value");
    return v;
  }

  std::string_view text_;
  std::size_t pos_ = 0;
  std::size_t line_ = 1;
};

}  // namespace detail

inline Document parse_document(std::string_view text) { return detail::Reader(text).parse(); }

/// Shortest decimal text that reads back as the same double.
inline std::string format_number(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc{}) throw ValidationError("cannot format number");
  return std::string(buf, ptr);
}

}  // namespace mshare::io
