#include "distlab/json_out.hpp"

#include <cmath>
#include <cstdio>

namespace distlab {

void JsonWriter::comma() {
  if (after_key_) {
    after_key_ = false;
    return;
  }
  if (!need_comma_.empty()) {
    if (need_comma_.back()) out_ += ',';
    need_comma_.back() = true;
  }
}

void JsonWriter::begin_object() {
  comma();
  out_ += '{';
  need_comma_.push_back(false);
}

void JsonWriter::end_object() {
  out_ += '}';
  need_comma_.pop_back();
}

void JsonWriter::begin_array() {
  comma();
  out_ += '[';
  need_comma_.push_back(false);
}

void JsonWriter::end_array() {
  out_ += ']';
  need_comma_.pop_back();
}

void JsonWriter::key(const std::string& k) {
  comma();
  out_ += escape(k);
  out_ += ':';
  after_key_ = true;
}

void JsonWriter::value_string(const std::string& s) {
  comma();
  out_ += escape(s);
}

void JsonWriter::value_double(double v) {
  comma();
  out_ += format_double(v);
}

void JsonWriter::value_int(int64_t v) {
  comma();
  out_ += std::to_string(v);
}

void JsonWriter::value_uint(uint64_t v) {
  comma();
  out_ += std::to_string(v);
}

void JsonWriter::value_bool(bool v) {
  comma();
  out_ += v ? "true" : "false";
}

void JsonWriter::value_null() {
  comma();
  out_ += "null";
}

void JsonWriter::value_raw(const std::string& json) {
  comma();
  out_ += json;
}

std::string JsonWriter::escape(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\r': out += "\\r"; break;
      case '\t': out += "\\t"; break;
      default:
        if (static_cast<unsigned char>(c) < 0x20) {
          char buf[8];
          std::snprintf(buf, sizeof buf, "\\u%04x", c);
          out += buf;
        } else {
          out += c;
        }
    }
  }
  out += '"';
  return out;
}

std::string JsonWriter::format_double(double v) {
  // JSON has no non-finite literals; null keeps reports parseable everywhere
  if (!std::isfinite(v)) return "null";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  // ensure the token parses back as a double, not an integer
  std::string s = buf;
  if (s.find_first_of(".eE") == std::string::npos) s += ".0";
  return s;
}

}  // namespace distlab
