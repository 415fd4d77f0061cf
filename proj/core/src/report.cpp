#include "readop/report.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace readop {

bool Report::passed() const {
  for (const auto& c : checks) {
    if (!c.passed) return false;
  }
  return true;
}

Check& Report::check(std::string id, bool passed, std::string detail) {
  checks.push_back({std::move(id), passed, std::move(detail)});
  return checks.back();
}

Table& Report::table(std::string name, std::vector<std::string> header) {
  tables.push_back({std::move(name), std::move(header), {}});
  return tables.back();
}

void Report::merge(const Report& other) {
  for (const auto& c : other.checks) checks.push_back({other.name + "." + c.id, c.passed, c.detail});
  for (const auto& t : other.tables) {
    Table copy = t;
    copy.name = other.name + "." + t.name;
    tables.push_back(std::move(copy));
  }
  for (const auto& n : other.notes) notes.push_back(other.name + ": " + n);
}

std::string Report::to_text() const {
  std::ostringstream out;
  out << "# " << name << "\n";
  for (const auto& [k, v] : config) out << k << ": " << v << "\n";
  for (const auto& c : checks) {
    out << (c.passed ? "PASS " : "FAIL ") << c.id;
    if (!c.detail.empty()) out << "  " << c.detail;
    out << "\n";
  }
  for (const auto& n : notes) out << "note: " << n << "\n";
  out << "status: " << (passed() ? "pass" : "fail") << "\n";
  return out.str();
}

std::string csv_escape(const std::string& field) {
  if (field.find_first_of(",\"\n") == std::string::npos) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

std::string to_csv(const Table& t) {
  std::ostringstream out;
  auto line = [&](const std::vector<std::string>& cells) {
    for (std::size_t k = 0; k < cells.size(); ++k) {
      if (k) out << ',';
      out << csv_escape(cells[k]);
    }
    out << '\n';
  };
  line(t.header);
  for (const auto& row : t.rows) line(row);
  return out.str();
}

std::string Report::checks_csv() const {
  Table t{"checks", {"id", "passed", "detail"}, {}};
  for (const auto& c : checks) t.rows.push_back({c.id, c.passed ? "true" : "false", c.detail});
  return to_csv(t);
}

void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out << content;
    if (!out) throw std::runtime_error("write failed: " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

void Report::write_bundle(const std::filesystem::path& dir) const {
  std::filesystem::create_directories(dir);
  write_file_atomic(dir / "report.txt", to_text());
  write_file_atomic(dir / "checks.csv", checks_csv());
  for (const auto& t : tables) write_file_atomic(dir / (t.name + ".csv"), to_csv(t));
}

}  // namespace readop
