#pragma once

#include <filesystem>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "absqm/kleingordon.hpp"
#include "absqm/wavefield.hpp"

namespace absqm::io {

using Json = nlohmann::ordered_json;

// "%.16e"
std::string format_number(double v);

// Columns of equal length under a header row. A non-empty comment is written
// first as "# <comment>".
void write_csv(const std::filesystem::path& file, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& columns, const std::string& comment = "");

// x, rho, R, u, eps, s, j, flagged; the comment line carries meta as JSON.
void write_snapshot_csv(const std::filesystem::path& file, const AbsoluteProcess& p, const Json& meta);
// x, re_psi, im_psi, rho, u, eps, s, a0, a1, flagged; the comment line holds
// meta plus grid, time and frame_velocity.
void write_snapshot_csv(const std::filesystem::path& file, const WaveField& w, const AbsoluteProcess& p,
                        const Json& meta);
// The same layout with c, u0 and eps (= u0 + c^2) in place of eps, s and j.
void write_snapshot_csv(const std::filesystem::path& file, const KGAbsolute& a, const Json& meta);

void write_json(const std::filesystem::path& file, const Json& value);
std::string read_text(const std::filesystem::path& file);
void ensure_directory(const std::filesystem::path& dir);

// Parse errors become ErrorKind::config with "source:line:column: ..." text.
Json parse_config(std::string_view text, const std::string& source);
Json load_config(const std::filesystem::path& file);

// Typed, strict access to one object of a parsed config. Every key read is
// remembered; finish() rejects the rest. Errors name the key path and, when
// the source text is known, its line.
class ConfigSection {
 public:
  ConfigSection(const Json& value, std::string path, std::string source = {}, std::string text = {});

  double number(const std::string& key, double fallback);
  long integer(const std::string& key, long fallback);
  bool boolean(const std::string& key, bool fallback);
  std::string string(const std::string& key, const std::string& fallback);
  std::vector<double> numbers(const std::string& key, const std::vector<double>& fallback);
  // An absent key gives an empty section.
  ConfigSection section(const std::string& key);

  void finish() const;
  const std::string& path() const noexcept { return path_; }
  // Config error about one key, anchored like the parse errors.
  [[noreturn]] void reject(const std::string& key, const std::string& message) const;

 private:
  const Json* lookup(const std::string& key);

  Json value_;
  std::string path_;
  std::string source_;
  std::string text_;
  std::set<std::string> used_;
};

}  // namespace absqm::io
