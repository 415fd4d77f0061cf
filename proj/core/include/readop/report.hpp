#pragma once

// Check/table reports rendered as plain text and CSV bundles.

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

namespace readop {

struct Check {
  std::string id;
  bool passed = false;
  std::string detail;
};

struct Table {
  std::string name;  // file stem of the CSV
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

struct Report {
  std::string name;
  std::vector<std::pair<std::string, std::string>> config;
  std::vector<Check> checks;
  std::vector<Table> tables;
  std::vector<std::string> notes;

  bool passed() const;
  Check& check(std::string id, bool passed, std::string detail = {});
  Table& table(std::string name, std::vector<std::string> header);
  void note(std::string text) { notes.push_back(std::move(text)); }
  /// Appends another report's checks (ids prefixed with its name), tables and notes.
  void merge(const Report& other);

  std::string to_text() const;
  std::string checks_csv() const;
  /// Writes report.txt, checks.csv and one CSV per table into dir, each file atomically.
  void write_bundle(const std::filesystem::path& dir) const;
};

std::string csv_escape(const std::string& field);
std::string to_csv(const Table& t);
/// Write via a temporary file and rename.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

}  // namespace readop
