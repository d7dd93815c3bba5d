#pragma once

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "swanmech/types.hpp"

namespace swanmech {

// All emitted numbers carry 12 significant digits; infinities serialize as
// the string "inf" to stay schema-compatible with the config format.
inline std::string fmt_number(double v) {
  if (v == kInf) return "\"inf\"";
  if (v == -kInf) return "\"-inf\"";
  if (std::isnan(v)) return "null";
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

// Bare variant for CSV cells (no JSON quoting).
inline std::string fmt_cell(double v) {
  if (v == kInf) return "inf";
  if (v == -kInf) return "-inf";
  if (std::isnan(v)) return "nan";
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

inline std::string json_escape(const std::string& s) {
  std::string out;
  out.reserve(s.size() + 2);
  for (char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      default: out += c;
    }
  }
  return out;
}

// Minimal ordered JSON assembler; fields appear exactly in insertion order so
// repeated runs emit identical bytes.
class JsonObject {
 public:
  JsonObject& field(const std::string& key, double v) { return raw(key, fmt_number(v)); }
  JsonObject& field(const std::string& key, int v) { return raw(key, std::to_string(v)); }
  JsonObject& field(const std::string& key, std::int64_t v) { return raw(key, std::to_string(v)); }
  JsonObject& field(const std::string& key, bool v) { return raw(key, v ? "true" : "false"); }
  JsonObject& field(const std::string& key, const std::string& v) {
    return raw(key, "\"" + json_escape(v) + "\"");
  }
  JsonObject& field(const std::string& key, const char* v) {
    return field(key, std::string(v));
  }
  JsonObject& field(const std::string& key, const std::vector<int>& v) {
    std::string s = "[";
    for (size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + std::to_string(v[i]);
    return raw(key, s + "]");
  }
  JsonObject& field(const std::string& key, const std::vector<double>& v) {
    std::string s = "[";
    for (size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + fmt_number(v[i]);
    return raw(key, s + "]");
  }
  JsonObject& raw(const std::string& key, const std::string& value) {
    if (!body_.empty()) body_ += ",";
    body_ += "\"" + json_escape(key) + "\":" + value;
    return *this;
  }

  std::string str() const { return "{" + body_ + "}"; }

 private:
  std::string body_;
};

inline std::string json_array(const std::vector<std::string>& elements) {
  std::string s = "[";
  for (size_t i = 0; i < elements.size(); ++i) s += (i ? "," : "") + elements[i];
  return s + "]";
}

// Writes via a temp file and rename so readers never observe a partial file.
inline void write_file_atomic(const std::string& path, const std::string& content) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw ConfigError("cannot open output file: " + tmp);
    out << content;
    if (!out.good()) throw ConfigError("failed writing output file: " + tmp);
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0)
    throw ConfigError("failed to move output into place: " + path);
}

} // namespace swanmech
