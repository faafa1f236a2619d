#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace groundgap {

// Formats a double with 17 significant digits so that a correctly rounded
// parser recovers the exact bit pattern. Non-finite values are rejected
// (the on-disk formats carry only finite numbers).
std::string format_double(double v);

// Integer-valued double -> plain integer text ("-3", not "-3.0000...").
std::string format_integer(double v);

// Minimal streaming JSON writer used by every exporter so numeric
// formatting is identical across file kinds.
class JsonWriter {
 public:
  JsonWriter();

  JsonWriter& begin_object();
  JsonWriter& end_object();
  JsonWriter& begin_array();
  JsonWriter& end_array();
  JsonWriter& key(const std::string& k);
  JsonWriter& value(double v);
  JsonWriter& value(std::int64_t v);
  JsonWriter& value(int v) { return value(static_cast<std::int64_t>(v)); }
  JsonWriter& value(std::uint64_t v);
  JsonWriter& value(const std::string& s);
  JsonWriter& value(const char* s) { return value(std::string(s)); }
  JsonWriter& value(bool b);
  JsonWriter& null();
  // Splices pre-serialized JSON in value position (for nested documents).
  JsonWriter& raw(const std::string& json);

  const std::string& str() const { return out_; }

 private:
  void comma();
  std::string out_;
  std::vector<bool> needs_comma_;
  bool after_key_ = false;
};

std::string json_escape(const std::string& s);

// Writes the full content atomically enough for our purposes (truncate +
// write); throws std::runtime_error on I/O failure.
void write_text_file(const std::filesystem::path& path,
                     const std::string& content);

std::string read_text_file(const std::filesystem::path& path);

}  // namespace groundgap
