#include "fkglab/io.hpp"

#include <cctype>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace fkglab {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

namespace {

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

bool parse_double(const std::string& s, double& out) {
  const std::string t = trim(s);
  if (t.empty()) return false;
  char* end = nullptr;
  out = std::strtod(t.c_str(), &end);
  return end == t.c_str() + t.size();
}

std::vector<std::string> read_lines(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open file: " + path);
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(line);
  }
  return lines;
}

}  // namespace

std::vector<std::vector<double>> read_csv_rows(const std::string& path) {
  std::vector<std::vector<double>> rows;
  bool first = true;
  for (const auto& line : read_lines(path)) {
    if (trim(line).empty()) continue;
    std::vector<double> row;
    bool ok = true;
    for (const auto& cell : split(line, ',')) {
      double v;
      if (!parse_double(cell, v)) {
        ok = false;
        break;
      }
      row.push_back(v);
    }
    if (!ok) {
      if (first) {  // header
        first = false;
        continue;
      }
      throw std::runtime_error("non-numeric CSV row in " + path + ": " + line);
    }
    first = false;
    rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<double> read_csv_column(const std::string& path) {
  std::vector<double> out;
  for (const auto& row : read_csv_rows(path))
    for (double v : row) out.push_back(v);
  return out;
}

void read_paired_csv(const std::string& path, std::vector<double>& s, std::vector<double>& t) {
  s.clear();
  t.clear();
  for (const auto& row : read_csv_rows(path)) {
    if (row.size() != 2) throw std::runtime_error("expected two columns (s,t) in " + path);
    s.push_back(row[0]);
    t.push_back(row[1]);
  }
}

void write_csv_rows(const std::string& path, const std::vector<std::string>& header,
                    const std::vector<std::vector<double>>& rows) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write file: " + path);
  if (!header.empty()) {
    for (std::size_t i = 0; i < header.size(); ++i) out << (i ? "," : "") << header[i];
    out << "\n";
  }
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << format_double(row[i]);
    out << "\n";
  }
}

void write_csv_column(const std::string& path, std::span<const double> values) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write file: " + path);
  for (double v : values) out << format_double(v) << "\n";
}

Json Json::object() { Json j; j.kind_ = Kind::object; return j; }
Json Json::array() { Json j; j.kind_ = Kind::array; return j; }
Json Json::number(double v) { Json j; j.kind_ = Kind::number; j.num_ = v; return j; }
Json Json::integer(long long v) { Json j; j.kind_ = Kind::integer; j.int_ = v; return j; }
Json Json::boolean(bool v) { Json j; j.kind_ = Kind::boolean; j.bool_ = v; return j; }
Json Json::string(std::string v) { Json j; j.kind_ = Kind::string; j.str_ = std::move(v); return j; }

Json& Json::set(const std::string& key, Json v) {
  members_.emplace_back(key, std::move(v));
  return *this;
}
Json& Json::set(const std::string& key, double v) { return set(key, number(v)); }
Json& Json::set(const std::string& key, long long v) { return set(key, integer(v)); }
Json& Json::set(const std::string& key, int v) { return set(key, integer(v)); }
Json& Json::set(const std::string& key, bool v) { return set(key, boolean(v)); }
Json& Json::set(const std::string& key, const char* v) { return set(key, string(v)); }
Json& Json::set(const std::string& key, const std::string& v) { return set(key, string(v)); }
Json& Json::push(Json v) {
  items_.push_back(std::move(v));
  return *this;
}
Json& Json::push(double v) { return push(number(v)); }

namespace {
void json_escape(std::string& out, const std::string& s) {
  out.push_back('"');
  for (char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      default: out.push_back(c);
    }
  }
  out.push_back('"');
}
}  // namespace

void Json::dump_to(std::string& out, int indent, int level) const {
  const std::string pad(static_cast<std::size_t>(indent) * level, ' ');
  const std::string pad1(static_cast<std::size_t>(indent) * (level + 1), ' ');
  switch (kind_) {
    case Kind::number: {
      const std::string s = format_double(num_);
      // bare nan/inf are not valid JSON
      if (s.find_first_not_of("0123456789+-.eE") != std::string::npos)
        json_escape(out, s);
      else
        out += s;
      break;
    }
    case Kind::integer: out += std::to_string(int_); break;
    case Kind::boolean: out += bool_ ? "true" : "false"; break;
    case Kind::string: json_escape(out, str_); break;
    case Kind::object: {
      if (members_.empty()) {
        out += "{}";
        break;
      }
      out += "{\n";
      for (std::size_t i = 0; i < members_.size(); ++i) {
        out += pad1;
        json_escape(out, members_[i].first);
        out += ": ";
        members_[i].second.dump_to(out, indent, level + 1);
        out += (i + 1 < members_.size()) ? ",\n" : "\n";
      }
      out += pad + "}";
      break;
    }
    case Kind::array: {
      if (items_.empty()) {
        out += "[]";
        break;
      }
      out += "[\n";
      for (std::size_t i = 0; i < items_.size(); ++i) {
        out += pad1;
        items_[i].dump_to(out, indent, level + 1);
        out += (i + 1 < items_.size()) ? ",\n" : "\n";
      }
      out += pad + "]";
      break;
    }
  }
}

std::string Json::dump(int indent) const {
  std::string out;
  dump_to(out, indent, 0);
  out += "\n";
  return out;
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write file: " + path);
  out << content;
}

std::map<std::string, std::string> parse_config_text(const std::string& text) {
  std::map<std::string, std::string> kv;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw std::runtime_error("config line without '=': " + line);
    kv[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  return kv;
}

std::map<std::string, std::string> parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

}  // namespace fkglab
