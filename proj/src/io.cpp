#include "absqm/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace absqm::io {

namespace fs = std::filesystem;

namespace {

std::ofstream open_for_writing(const fs::path& file) {
  std::ofstream out(file, std::ios::binary | std::ios::trunc);
  require(out.good(), ErrorKind::io, "cannot open " + file.string() + " for writing");
  return out;
}

void close_checked(std::ofstream& out, const fs::path& file) {
  out.close();
  require(!out.fail(), ErrorKind::io, "write to " + file.string() + " failed");
}

// 1-based line and column of a byte offset.
std::pair<std::size_t, std::size_t> line_column(std::string_view text, std::size_t offset) {
  std::size_t line = 1, col = 1;
  for (std::size_t i = 0; i < offset && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return {line, col};
}

std::vector<std::string> split_path(const std::string& path) {
  std::vector<std::string> parts;
  std::string cur;
  for (char ch : path) {
    if (ch == '.') {
      if (!cur.empty()) parts.push_back(cur);
      cur.clear();
    } else {
      cur += ch;
    }
  }
  if (!cur.empty()) parts.push_back(cur);
  return parts;
}

const char* type_name(const Json& v) { return v.type_name(); }

}  // namespace

std::string format_number(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.16e", v);
  return buf;
}

void write_csv(const fs::path& file, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& columns, const std::string& comment) {
  require(header.size() == columns.size(), ErrorKind::contract_violation, "write_csv: header and column counts differ");
  const std::size_t rows = columns.empty() ? 0 : columns[0].size();
  for (const auto& c : columns)
    require(c.size() == rows, ErrorKind::contract_violation, "write_csv: columns differ in length");
  std::ofstream out = open_for_writing(file);
  if (!comment.empty()) out << "# " << comment << '\n';
  for (std::size_t k = 0; k < header.size(); ++k) out << (k ? "," : "") << header[k];
  out << '\n';
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t k = 0; k < columns.size(); ++k) out << (k ? "," : "") << format_number(columns[k][r]);
    out << '\n';
  }
  close_checked(out, file);
}

void write_snapshot_csv(const fs::path& file, const AbsoluteProcess& p, const Json& meta) {
  const std::size_t n = p.rho.size();
  std::vector<double> x(n), flags(n);
  for (std::size_t i = 0; i < n; ++i) {
    x[i] = p.grid.x(i);
    flags[i] = p.flagged[i] ? 1.0 : 0.0;
  }
  Json m = meta;
  m["time"] = p.time;
  write_csv(file, {"x", "rho", "R", "u", "eps", "s", "j", "flagged"},
            {x, p.rho, p.r_amp, p.u, p.eps, p.s, p.j, flags}, m.dump());
}

void write_snapshot_csv(const fs::path& file, const WaveField& w, const AbsoluteProcess& p, const Json& meta) {
  const std::size_t n = w.psi.size();
  require(p.rho.size() == n, ErrorKind::contract_violation, "write_snapshot_csv: field and process differ in size");
  std::vector<double> x(n), re(n), im(n), flags(n);
  for (std::size_t i = 0; i < n; ++i) {
    x[i] = w.grid.x(i);
    re[i] = w.psi[i].real();
    im[i] = w.psi[i].imag();
    flags[i] = p.flagged[i] ? 1.0 : 0.0;
  }
  Json m = meta;
  m["grid"] = Json{{"x_min", w.grid.x_min()},
                   {"x_max", w.grid.x_max()},
                   {"n", w.grid.size()},
                   {"boundary", to_string(w.grid.boundary())}};
  m["time"] = w.time;
  m["frame_velocity"] = w.frame_velocity;
  write_csv(file, {"x", "re_psi", "im_psi", "rho", "u", "eps", "s", "a0", "a1", "flagged"},
            {x, re, im, p.rho, p.u, p.eps, p.s, w.gauge.a0, w.gauge.a1, flags}, m.dump());
}

void write_snapshot_csv(const fs::path& file, const KGAbsolute& a, const Json& meta) {
  const std::size_t n = a.rho.size();
  std::vector<double> x(n), flags(n), c(n, a.c);
  for (std::size_t i = 0; i < n; ++i) {
    x[i] = a.grid.x(i);
    flags[i] = a.flagged[i] ? 1.0 : 0.0;
  }
  Json m = meta;
  m["time"] = a.time;
  write_csv(file, {"x", "rho", "R", "u", "c", "u0", "eps", "flagged"}, {x, a.rho, a.r_amp, a.u1, c, a.u0, a.eps, flags},
            m.dump());
}

void write_json(const fs::path& file, const Json& value) {
  std::ofstream out = open_for_writing(file);
  out << value.dump(2) << '\n';
  close_checked(out, file);
}

std::string read_text(const fs::path& file) {
  std::ifstream in(file, std::ios::binary);
  require(in.good(), ErrorKind::io, "cannot read " + file.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void ensure_directory(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  require(!ec && fs::is_directory(dir), ErrorKind::io, "cannot create directory " + dir.string());
}

Json parse_config(std::string_view text, const std::string& source) {
  try {
    Json j = Json::parse(text.begin(), text.end(), nullptr, true, true);
    require(j.is_object(), ErrorKind::config, source + ":1:1: config must be a JSON object");
    return j;
  } catch (const Json::parse_error& e) {
    const std::size_t at = e.byte > 0 ? e.byte - 1 : 0;
    const auto [line, col] = line_column(text, at);
    std::string what = e.what();
    // Keep only the parser's description after its own prefix.
    if (const auto pos = what.find(": "); pos != std::string::npos) what = what.substr(pos + 2);
    fail(ErrorKind::config, source + ":" + std::to_string(line) + ":" + std::to_string(col) + ": " + what);
  }
}

Json load_config(const fs::path& file) { return parse_config(read_text(file), file.string()); }

ConfigSection::ConfigSection(const Json& value, std::string path, std::string source, std::string text)
    : value_(value.is_null() ? Json::object() : value),
      path_(std::move(path)),
      source_(std::move(source)),
      text_(std::move(text)) {
  if (!value_.is_object()) reject("", "expected an object, found " + std::string(type_name(value_)));
}

const Json* ConfigSection::lookup(const std::string& key) {
  used_.insert(key);
  const auto it = value_.find(key);
  return it == value_.end() ? nullptr : &*it;
}

void ConfigSection::reject(const std::string& key, const std::string& message) const {
  const std::string full = key.empty() ? path_ : (path_.empty() ? key : path_ + "." + key);
  std::string where = source_.empty() ? std::string("config") : source_;
  if (!text_.empty()) {
    std::size_t pos = 0;
    bool found = true;
    for (const std::string& part : split_path(full)) {
      const std::size_t next = text_.find("\"" + part + "\"", pos);
      if (next == std::string::npos) {
        found = false;
        break;
      }
      pos = next;
    }
    if (found && !full.empty()) {
      const auto [line, col] = line_column(text_, pos);
      where += ":" + std::to_string(line) + ":" + std::to_string(col);
    }
  }
  fail(ErrorKind::config, where + ": " + (full.empty() ? std::string("config") : full) + ": " + message);
}

double ConfigSection::number(const std::string& key, double fallback) {
  const Json* v = lookup(key);
  if (!v) return fallback;
  if (!v->is_number()) reject(key, "expected a number, found " + std::string(type_name(*v)));
  return v->get<double>();
}

long ConfigSection::integer(const std::string& key, long fallback) {
  const Json* v = lookup(key);
  if (!v) return fallback;
  if (!v->is_number_integer()) reject(key, "expected an integer, found " + std::string(type_name(*v)));
  return v->get<long>();
}

bool ConfigSection::boolean(const std::string& key, bool fallback) {
  const Json* v = lookup(key);
  if (!v) return fallback;
  if (!v->is_boolean()) reject(key, "expected true or false, found " + std::string(type_name(*v)));
  return v->get<bool>();
}

std::string ConfigSection::string(const std::string& key, const std::string& fallback) {
  const Json* v = lookup(key);
  if (!v) return fallback;
  if (!v->is_string()) reject(key, "expected a string, found " + std::string(type_name(*v)));
  return v->get<std::string>();
}

std::vector<double> ConfigSection::numbers(const std::string& key, const std::vector<double>& fallback) {
  const Json* v = lookup(key);
  if (!v) return fallback;
  if (!v->is_array()) reject(key, "expected an array of numbers, found " + std::string(type_name(*v)));
  std::vector<double> out;
  for (const Json& e : *v) {
    if (!e.is_number()) reject(key, "expected an array of numbers, found an element of type " + std::string(type_name(e)));
    out.push_back(e.get<double>());
  }
  return out;
}

ConfigSection ConfigSection::section(const std::string& key) {
  const Json* v = lookup(key);
  const std::string child = path_.empty() ? key : path_ + "." + key;
  if (v && !v->is_object()) reject(key, "expected an object, found " + std::string(type_name(*v)));
  return ConfigSection(v ? *v : Json::object(), child, source_, text_);
}

void ConfigSection::finish() const {
  for (const auto& item : value_.items())
    if (!used_.count(item.key())) reject(item.key(), "unknown key");
}

}  // namespace absqm::io
