#include "parcelingam/toml_lite.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <sstream>

namespace parcelingam::toml {

std::int64_t Value::as_int() const {
  if (!is_int()) throw ParseError("expected integer value");
  return std::get<std::int64_t>(data);
}

double Value::as_float() const {
  if (is_int()) return static_cast<double>(std::get<std::int64_t>(data));
  if (!is_float()) throw ParseError("expected float value");
  return std::get<double>(data);
}

bool Value::as_bool() const {
  if (!std::holds_alternative<bool>(data)) throw ParseError("expected boolean value");
  return std::get<bool>(data);
}

const std::string& Value::as_string() const {
  if (!is_string()) throw ParseError("expected string value");
  return std::get<std::string>(data);
}

const Array& Value::as_array() const {
  if (!is_array()) throw ParseError("expected array value");
  return std::get<Array>(data);
}

namespace {

struct Cursor {
  const std::string& text;
  size_t pos = 0;
  int line = 1;

  bool done() const { return pos >= text.size(); }
  char peek() const { return text[pos]; }
  char take() {
    const char c = text[pos++];
    if (c == '\n') ++line;
    return c;
  }
  int column() const {
    size_t start = text.rfind('\n', pos == 0 ? 0 : pos - 1);
    return static_cast<int>(pos - (start == std::string::npos ? 0 : start + 1)) + 1;
  }
  void skip_ws_inline() {
    while (!done() && (peek() == ' ' || peek() == '\t')) take();
  }
  void skip_ws_and_comments() {
    while (!done()) {
      const char c = peek();
      if (c == ' ' || c == '\t' || c == '\n' || c == '\r') {
        take();
      } else if (c == '#') {
        while (!done() && peek() != '\n') take();
      } else {
        break;
      }
    }
  }
  [[noreturn]] void fail(const std::string& what) const {
    throw ParseError(what, line, column());
  }
};

Value parse_value(Cursor& c);

Value parse_array(Cursor& c) {
  c.take();  // '['
  Array items;
  while (true) {
    c.skip_ws_and_comments();
    if (c.done()) c.fail("unterminated array");
    if (c.peek() == ']') {
      c.take();
      break;
    }
    items.push_back(parse_value(c));
    c.skip_ws_and_comments();
    if (c.done()) c.fail("unterminated array");
    if (c.peek() == ',') {
      c.take();
    } else if (c.peek() != ']') {
      c.fail("expected ',' or ']' in array");
    }
  }
  return Value{std::move(items)};
}

Value parse_string(Cursor& c) {
  c.take();  // '"'
  std::string out;
  while (true) {
    if (c.done()) c.fail("unterminated string");
    const char ch = c.take();
    if (ch == '"') break;
    if (ch == '\\') {
      if (c.done()) c.fail("unterminated escape");
      const char esc = c.take();
      switch (esc) {
        case 'n': out.push_back('\n'); break;
        case 't': out.push_back('\t'); break;
        case '"': out.push_back('"'); break;
        case '\\': out.push_back('\\'); break;
        default: c.fail("unsupported escape sequence");
      }
    } else {
      out.push_back(ch);
    }
  }
  return Value{std::move(out)};
}

Value parse_scalar(Cursor& c) {
  std::string token;
  while (!c.done()) {
    const char ch = c.peek();
    if (ch == ',' || ch == ']' || ch == '\n' || ch == '#' || ch == ' ' ||
        ch == '\t' || ch == '\r')
      break;
    token.push_back(c.take());
  }
  if (token.empty()) c.fail("empty value");
  if (token == "true") return Value{true};
  if (token == "false") return Value{false};

  const bool looks_float = token.find_first_of(".eEifn") != std::string::npos;
  if (!looks_float) {
    std::int64_t iv = 0;
    const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), iv);
    if (ec == std::errc() && ptr == token.data() + token.size()) return Value{iv};
  }
  double dv = 0.0;
  const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), dv);
  if (ec == std::errc() && ptr == token.data() + token.size()) return Value{dv};
  c.fail("cannot parse value '" + token + "'");
}

Value parse_value(Cursor& c) {
  if (c.peek() == '[') return parse_array(c);
  if (c.peek() == '"') return parse_string(c);
  return parse_scalar(c);
}

std::string parse_key(Cursor& c) {
  std::string key;
  while (!c.done()) {
    const char ch = c.peek();
    if (std::isalnum(static_cast<unsigned char>(ch)) || ch == '_' || ch == '-')
      key.push_back(c.take());
    else
      break;
  }
  if (key.empty()) c.fail("expected key");
  return key;
}

}  // namespace

Document parse(const std::string& text) {
  Document doc;
  Cursor c{text};
  std::string section;

  while (true) {
    c.skip_ws_and_comments();
    if (c.done()) break;

    if (c.peek() == '[') {
      c.take();
      c.skip_ws_inline();
      section = parse_key(c);
      c.skip_ws_inline();
      if (c.done() || c.peek() != ']') c.fail("expected ']' after section name");
      c.take();
      continue;
    }

    const std::string key = parse_key(c);
    c.skip_ws_inline();
    if (c.done() || c.peek() != '=') c.fail("expected '=' after key '" + key + "'");
    c.take();
    c.skip_ws_inline();
    doc[section][key] = parse_value(c);
  }
  return doc;
}

std::string escape_string(const std::string& s) {
  std::string out = "\"";
  for (char ch : s) {
    switch (ch) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      default: out.push_back(ch);
    }
  }
  out.push_back('"');
  return out;
}

namespace {

void write_value(std::ostringstream& out, const Value& v) {
  if (v.is_int()) {
    out << std::get<std::int64_t>(v.data);
  } else if (v.is_float()) {
    const double d = std::get<double>(v.data);
    std::ostringstream num;
    num.precision(17);
    num << d;
    std::string s = num.str();
    if (s.find_first_of(".eEin") == std::string::npos) s += ".0";
    out << s;
  } else if (std::holds_alternative<bool>(v.data)) {
    out << (std::get<bool>(v.data) ? "true" : "false");
  } else if (v.is_string()) {
    out << escape_string(v.as_string());
  } else {
    out << "[";
    const auto& items = v.as_array();
    for (size_t i = 0; i < items.size(); ++i) {
      if (i) out << ", ";
      write_value(out, items[i]);
    }
    out << "]";
  }
}

void write_section(std::ostringstream& out, const std::string& name,
                   const std::map<std::string, Value>& entries) {
  if (!name.empty()) out << "[" << name << "]\n";
  for (const auto& [key, value] : entries) {
    out << key << " = ";
    write_value(out, value);
    out << "\n";
  }
}

}  // namespace

std::string serialize(const Document& doc, const std::vector<std::string>& section_order) {
  std::ostringstream out;
  std::vector<std::string> order;
  if (doc.count("")) order.push_back("");
  for (const auto& name : section_order)
    if (doc.count(name) && name != "") order.push_back(name);
  for (const auto& [name, entries] : doc)
    if (std::find(order.begin(), order.end(), name) == order.end())
      order.push_back(name);

  bool first = true;
  for (const auto& name : order) {
    if (!first) out << "\n";
    first = false;
    write_section(out, name, doc.at(name));
  }
  return out.str();
}

}  // namespace parcelingam::toml
