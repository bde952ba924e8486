#pragma once

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace cttl {

/// RFC-4180 CSV with '#'-prefixed comment lines carrying run provenance.
class CsvWriter {
 public:
  explicit CsvWriter(const std::string& path) : out_(path) {
    if (!out_) throw std::runtime_error("cannot open " + path);
    out_.precision(12);
  }

  void comment(const std::string& key, const std::string& value) {
    out_ << "# " << key << ": " << value << "\n";
  }

  void header(const std::vector<std::string>& cols) { write_fields(cols); }

  void row(const std::vector<std::string>& fields) { write_fields(fields); }

  template <typename... Ts>
  void row_values(Ts... vals) {
    std::vector<std::string> fields;
    (fields.push_back(format(vals)), ...);
    write_fields(fields);
  }

  static std::string format(double v) {
    std::ostringstream os;
    os.precision(12);
    os << v;
    return os.str();
  }
  static std::string format(const std::string& s) { return s; }
  static std::string format(const char* s) { return s; }
  static std::string format(long v) { return std::to_string(v); }
  static std::string format(int v) { return std::to_string(v); }
  static std::string format(unsigned long v) { return std::to_string(v); }

 private:
  void write_fields(const std::vector<std::string>& fields) {
    for (size_t k = 0; k < fields.size(); ++k) {
      if (k) out_ << ",";
      out_ << escape(fields[k]);
    }
    out_ << "\n";
  }

  static std::string escape(const std::string& f) {
    if (f.find_first_of(",\"\n") == std::string::npos) return f;
    std::string q = "\"";
    for (char c : f) {
      if (c == '"') q += '"';
      q += c;
    }
    q += '"';
    return q;
  }

  std::ofstream out_;
};

}  // namespace cttl
