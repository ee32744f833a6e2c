#include "sumer/toml_lite.hpp"

#include <cctype>
#include <charconv>
#include <set>
#include <vector>

#include "sumer/error.hpp"

namespace sumer {

namespace {

using nlohmann::json;

class Parser {
 public:
  explicit Parser(const std::string& text) : s_(text) {}

  json parse() {
    json root = json::object();
    json* table = &root;
    while (true) {
      skip_ws_comments_newlines();
      if (eof()) break;
      if (peek() == '[') {
        ++pos_;
        if (peek() == '[') fail("arrays of tables are not supported");
        skip_ws();
        auto path = key_path();
        skip_ws();
        expect(']');
        table = &root;
        for (const auto& k : path) {
          if (!table->contains(k)) (*table)[k] = json::object();
          table = &(*table)[k];
          if (!table->is_object()) fail("'" + k + "' is not a table");
        }
        if (defined_.count(joined(path))) fail("table [" + joined(path) + "] defined twice");
        defined_.insert(joined(path));
      } else {
        key_value(*table);
      }
      end_of_line();
    }
    return root;
  }

 private:
  [[noreturn]] void fail(const std::string& msg) const {
    throw ValidationError("config line " + std::to_string(line_) + ": " + msg);
  }
  bool eof() const { return pos_ >= s_.size(); }
  char peek() const { return eof() ? '\0' : s_[pos_]; }
  void expect(char c) {
    if (peek() != c) fail(std::string("expected '") + c + "'");
    ++pos_;
  }
  void skip_ws() {
    while (!eof() && (peek() == ' ' || peek() == '\t')) ++pos_;
  }
  void skip_comment() {
    if (peek() == '#')
      while (!eof() && peek() != '\n') ++pos_;
  }
  void skip_ws_comments_newlines() {
    while (!eof()) {
      skip_ws();
      skip_comment();
      if (peek() == '\r') ++pos_;
      if (peek() == '\n') {
        ++pos_;
        ++line_;
        continue;
      }
      break;
    }
  }
  void end_of_line() {
    skip_ws();
    skip_comment();
    if (peek() == '\r') ++pos_;
    if (eof()) return;
    if (peek() != '\n') fail("unexpected trailing characters");
    ++pos_;
    ++line_;
  }

  static std::string joined(const std::vector<std::string>& path) {
    std::string out;
    for (const auto& k : path) out += (out.empty() ? "" : ".") + k;
    return out;
  }

  std::string key() {
    if (peek() == '"') return basic_string();
    const auto start = pos_;
    while (!eof() && (std::isalnum(static_cast<unsigned char>(peek())) || peek() == '_' || peek() == '-')) ++pos_;
    if (pos_ == start) fail("expected a key");
    return s_.substr(start, pos_ - start);
  }

  std::vector<std::string> key_path() {
    std::vector<std::string> path{key()};
    skip_ws();
    while (peek() == '.') {
      ++pos_;
      skip_ws();
      path.push_back(key());
      skip_ws();
    }
    return path;
  }

  void key_value(json& table) {
    auto path = key_path();
    expect('=');
    skip_ws();
    json* t = &table;
    for (std::size_t i = 0; i + 1 < path.size(); ++i) {
      if (!t->contains(path[i])) (*t)[path[i]] = json::object();
      t = &(*t)[path[i]];
      if (!t->is_object()) fail("'" + path[i] + "' is not a table");
    }
    if (t->contains(path.back())) fail("key '" + path.back() + "' defined twice");
    (*t)[path.back()] = value();
  }

  std::string basic_string() {
    expect('"');
    std::string out;
    while (true) {
      if (eof() || peek() == '\n') fail("unterminated string");
      char c = s_[pos_++];
      if (c == '"') break;
      if (c != '\\') {
        out += c;
        continue;
      }
      if (eof()) fail("unterminated string");
      c = s_[pos_++];
      switch (c) {
        case 'n': out += '\n'; break;
        case 't': out += '\t'; break;
        case '"': out += '"'; break;
        case '\\': out += '\\'; break;
        default: fail(std::string("unsupported escape \\") + c);
      }
    }
    return out;
  }

  // Whitespace, comments and newlines are allowed between array items.
  void skip_in_array() { skip_ws_comments_newlines(); }

  json value() {
    const char c = peek();
    if (c == '"') return basic_string();
    if (c == '[') {
      ++pos_;
      json arr = json::array();
      skip_in_array();
      while (peek() != ']') {
        arr.push_back(value());
        skip_in_array();
        if (peek() == ',') {
          ++pos_;
          skip_in_array();
        } else if (peek() != ']') {
          fail("expected ',' or ']' in array");
        }
      }
      ++pos_;
      return arr;
    }
    if (c == '{') {
      ++pos_;
      json obj = json::object();
      skip_ws();
      while (peek() != '}') {
        key_value(obj);
        skip_ws();
        if (peek() == ',') {
          ++pos_;
          skip_ws();
        } else if (peek() != '}') {
          fail("expected ',' or '}' in inline table");
        }
      }
      ++pos_;
      return obj;
    }
    const auto start = pos_;
    while (!eof() && !std::isspace(static_cast<unsigned char>(peek())) && peek() != ',' && peek() != ']' &&
           peek() != '}' && peek() != '#')
      ++pos_;
    std::string tok = s_.substr(start, pos_ - start);
    if (tok == "true") return true;
    if (tok == "false") return false;
    if (tok.empty()) fail("expected a value");
    std::string digits;
    for (char ch : tok)
      if (ch != '_') digits += ch;
    const char* b = digits.data();
    const char* e = digits.data() + digits.size();
    if (*b == '+') ++b;
    const bool is_float = digits.find_first_of(".eE") != std::string::npos;
    if (!is_float) {
      if (*b == '-') {
        std::int64_t v = 0;
        auto [p, ec] = std::from_chars(b, e, v);
        if (ec == std::errc() && p == e) return v;
      } else {
        std::uint64_t v = 0;
        auto [p, ec] = std::from_chars(b, e, v);
        if (ec == std::errc() && p == e) return v;
      }
    } else {
      double v = 0.0;
      auto [p, ec] = std::from_chars(b, e, v);
      if (ec == std::errc() && p == e) return v;
    }
    fail("invalid value '" + tok + "'");
  }

  const std::string& s_;
  std::size_t pos_ = 0;
  std::size_t line_ = 1;
  std::set<std::string> defined_;
};

}  // namespace

nlohmann::json parse_toml(const std::string& text) { return Parser(text).parse(); }

}  // namespace sumer
