#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

#include "coarray/harness.hpp"
#include "json.hpp"

namespace coarray {

std::string format_cell(const Cell& c)
{
  if (const auto* s = std::get_if<std::string>(&c)) return *s;
  if (const auto* l = std::get_if<long>(&c)) return std::to_string(*l);
  const double d = std::get<double>(c);
  if (std::isnan(d)) return "nan";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", d);
  return buf;
}

std::string csv_field(const std::string& s)
{
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) out += c == '"' ? std::string("\"\"") : std::string(1, c);
  return out + "\"";
}

namespace {

std::string gnuplot_string(const std::string& s)
{
  std::string out;
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return "\"" + out + "\"";
}

void write_file(const std::filesystem::path& path, const std::string& content)
{
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
  out << content;
  out.close();
  if (!out) throw std::runtime_error("write to '" + path.string() + "' failed");
}

}  // namespace

std::string to_csv(const Table& t)
{
  std::ostringstream os;
  for (std::size_t c = 0; c < t.columns.size(); ++c) os << (c ? "," : "") << csv_field(t.columns[c]);
  os << '\n';
  for (const auto& row : t.rows) {
    for (std::size_t c = 0; c < row.size(); ++c) os << (c ? "," : "") << csv_field(format_cell(row[c]));
    os << '\n';
  }
  return os.str();
}

std::string to_gnuplot(const Table& t, const PlotSpec& p)
{
  // Curves in order of first appearance.
  std::vector<std::string> keys;
  std::map<std::string, std::vector<std::size_t>> members;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    std::string key;
    for (const auto& g : p.group_columns) key += (key.empty() ? "" : " ") + g + "=" + t.text(Index(r), g);
    if (!members.count(key)) keys.push_back(key);
    members[key].push_back(r);
  }

  std::ostringstream os;
  os << "# " << p.title << " (generated from " << t.name << ".csv)\n";
  os << "set title " << gnuplot_string(p.title) << "\n";
  os << "set xlabel " << gnuplot_string(p.x_column) << "\n";
  os << "set ylabel " << gnuplot_string(p.y_columns.size() == 1 ? p.y_columns[0] : "value") << "\n";
  if (p.log_x) os << "set logscale x\n";
  if (p.log_y) os << "set logscale y\n";
  os << "set key outside right\nset grid\n";
  for (std::size_t g = 0; g < keys.size(); ++g) {
    os << "$curve" << g << " << EOD\n";
    for (std::size_t r : members[keys[g]]) {
      os << t.text(Index(r), p.x_column);
      for (const auto& y : p.y_columns) os << ' ' << t.text(Index(r), y);
      os << '\n';
    }
    os << "EOD\n";
  }
  os << "plot";
  bool first = true;
  for (std::size_t g = 0; g < keys.size(); ++g)
    for (std::size_t y = 0; y < p.y_columns.size(); ++y) {
      os << (first ? " " : ", \\\n     ") << "$curve" << g << " using 1:" << y + 2 << " with linespoints title "
         << gnuplot_string(p.y_columns[y] + (keys[g].empty() ? "" : " " + keys[g]));
      first = false;
    }
  os << '\n';
  return os.str();
}

std::vector<std::string> emit_outputs(const ExperimentResult& result, const ExperimentConfig& cfg,
                                      const std::string& dir)
{
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw std::runtime_error("cannot create output directory '" + dir + "': " + ec.message());

  std::vector<std::string> files;
  for (const auto& t : result.tables) {
    const fs::path csv = fs::path(dir) / (t.name + ".csv");
    write_file(csv, to_csv(t));
    files.push_back(csv.filename().string());
    for (std::size_t i = 0; i < t.plots.size(); ++i) {
      const fs::path gp = fs::path(dir) / (t.name + "_" + std::to_string(i) + ".gp");
      write_file(gp, to_gnuplot(t, t.plots[i]));
      files.push_back(gp.filename().string());
    }
  }

  char hash[17];
  std::snprintf(hash, sizeof hash, "%016llx", static_cast<unsigned long long>(config_hash(cfg)));
  nlohmann::json m;
  m["tool"] = "coarray-lab";
  m["version"] = COARRAY_VERSION;
  m["experiment"] = to_string(cfg.kind);
  m["seed"] = cfg.seed;
  m["config_hash"] = hash;
  m["config"] = nlohmann::json::parse(config_to_json(cfg));
  m["files"] = files;
  m["notes"] = result.notes;
  const fs::path manifest = fs::path(dir) / "manifest.json";
  write_file(manifest, m.dump(2) + "\n");
  files.push_back(manifest.filename().string());

  std::vector<std::string> paths;
  for (const auto& f : files) paths.push_back((fs::path(dir) / f).string());
  return paths;
}

}  // namespace coarray
