#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace distlab {

// Deterministic JSON emitter: keys stay in insertion order and doubles are
// printed with %.17g so identical inputs produce byte-identical reports
// regardless of the JSON library or platform defaults.
class JsonWriter {
 public:
  void begin_object();
  void end_object();
  void begin_array();
  void end_array();
  void key(const std::string& k);
  void value_string(const std::string& s);
  void value_double(double v);
  void value_int(int64_t v);
  void value_uint(uint64_t v);
  void value_bool(bool v);
  void value_null();
  void value_raw(const std::string& json);  // pre-serialized fragment
  const std::string& str() const { return out_; }

  static std::string escape(const std::string& s);
  static std::string format_double(double v);

 private:
  void comma();
  std::string out_;
  std::vector<bool> need_comma_;
  bool after_key_ = false;
};

}  // namespace distlab
