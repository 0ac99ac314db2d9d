#pragma once
// CSV/JSON/report plumbing. All floating-point output is printed with 17
// significant digits so files round-trip doubles exactly.

#include <map>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace fkglab {

std::string format_double(double v);  // %.17g

// one scalar per row, or rows of comma-separated values flattened row-major;
// a non-numeric first line is treated as a header and skipped
std::vector<double> read_csv_column(const std::string& path);
std::vector<std::vector<double>> read_csv_rows(const std::string& path);
// two-column (s, t) file
void read_paired_csv(const std::string& path, std::vector<double>& s, std::vector<double>& t);

void write_csv_rows(const std::string& path, const std::vector<std::string>& header,
                    const std::vector<std::vector<double>>& rows);
void write_csv_column(const std::string& path, std::span<const double> values);

// Minimal ordered JSON value for report emission (numbers via format_double).
class Json {
 public:
  static Json object();
  static Json array();
  static Json number(double v);
  static Json integer(long long v);
  static Json boolean(bool v);
  static Json string(std::string v);

  Json& set(const std::string& key, Json v);       // object
  Json& set(const std::string& key, double v);
  Json& set(const std::string& key, long long v);
  Json& set(const std::string& key, int v);
  Json& set(const std::string& key, bool v);
  Json& set(const std::string& key, const char* v);
  Json& set(const std::string& key, const std::string& v);
  Json& push(Json v);                              // array
  Json& push(double v);

  std::string dump(int indent = 2) const;

 private:
  enum class Kind { object, array, number, integer, boolean, string };
  Kind kind_ = Kind::object;
  double num_ = 0;
  long long int_ = 0;
  bool bool_ = false;
  std::string str_;
  std::vector<std::pair<std::string, Json>> members_;
  std::vector<Json> items_;
  void dump_to(std::string& out, int indent, int level) const;
};

void write_text_file(const std::string& path, const std::string& content);

// flat key=value configuration text ('#' comments, blank lines ignored)
std::map<std::string, std::string> parse_config_text(const std::string& text);
std::map<std::string, std::string> parse_config_file(const std::string& path);

}  // namespace fkglab
