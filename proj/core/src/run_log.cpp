#include <fstream>
#include <sstream>
#include <string>

#include "lqrq/config.hpp"
#include "lqrq/harness.hpp"

namespace lqrq {

namespace {

constexpr std::string_view kStepsHeader = "t,theta,theta_dot,y,y_dot,u,reward,gain_distance";
constexpr std::string_view kEventsHeader = "t,kind";
constexpr std::string_view kConfigPrefix = "config.";

std::ofstream open_out(const std::filesystem::path& p) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + p.string() + " for writing");
  return out;
}

std::ifstream open_in(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw IoError("cannot open " + p.string() + " for reading");
  return in;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> fields;
  std::stringstream ss(line);
  std::string f;
  while (std::getline(ss, f, ',')) fields.push_back(f);
  return fields;
}

double field_double(const std::string& s, const std::filesystem::path& file, std::size_t line) {
  try {
    return parse_double(s);
  } catch (const std::exception&) {
    throw IoError(file.string() + ":" + std::to_string(line) + ": bad number '" + s + "'");
  }
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

}  // namespace

void write_log(const RunRecord& rec, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());

  {
    std::ofstream out = open_out(dir / "steps.csv");
    out << kStepsHeader << '\n';
    for (const StepRow& r : rec.steps) {
      out << format_double(r.t);
      for (double v : r.x) out << ',' << format_double(v);
      out << ',' << format_double(r.u) << ',' << format_double(r.reward) << ','
          << format_double(r.gain_distance) << '\n';
    }
    if (!out) throw IoError("write failed: " + (dir / "steps.csv").string());
  }
  {
    std::ofstream out = open_out(dir / "events.csv");
    out << kEventsHeader << '\n';
    for (const EventRow& e : rec.events) out << format_double(e.t) << ',' << to_string(e.kind) << '\n';
    if (!out) throw IoError("write failed: " + (dir / "events.csv").string());
  }
  {
    const RunSummary& s = rec.summary;
    std::ofstream out = open_out(dir / "summary.txt");
    out << "# lqrq run summary\n";
    out << "final_gain = " << format_list(s.final_gain.k) << '\n';
    out << "oracle_gain = " << format_list(s.oracle_gain.k) << '\n';
    out << "converged_at = " << (s.converged_at ? format_double(*s.converged_at) : "none") << '\n';
    out << "seed = " << s.seed << '\n';
    out << "windows_solved = " << s.windows_solved << '\n';
    const SvecBasis basis(s.final_m.m.dim() == 0 ? kQDim : s.final_m.m.dim());
    out << "final_m = "
        << (s.final_m.m.dim() == 0 ? std::string() : format_list(basis.encode(s.final_m.m))) << '\n';
    for (const auto& [key, value] : s.config) out << kConfigPrefix << key << " = " << value << '\n';
    if (!out) throw IoError("write failed: " + (dir / "summary.txt").string());
  }
}

RunSummary read_summary(const std::filesystem::path& path) {
  const std::filesystem::path file =
      std::filesystem::is_directory(path) ? path / "summary.txt" : path;
  std::ifstream in = open_in(file);
  RunSummary s;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw IoError(file.string() + ":" + std::to_string(line_no) + ": expected key = value");
    }
    const std::string key = trim(std::string_view(line).substr(0, eq));
    const std::string value = trim(std::string_view(line).substr(eq + 1));
    try {
      if (key == "final_gain") {
        s.final_gain.k = parse_list(value);
      } else if (key == "oracle_gain") {
        s.oracle_gain.k = parse_list(value);
      } else if (key == "converged_at") {
        if (value != "none") s.converged_at = parse_double(value);
      } else if (key == "seed") {
        s.seed = std::stoull(value);
      } else if (key == "windows_solved") {
        s.windows_solved = std::stoull(value);
      } else if (key == "final_m") {
        if (!value.empty()) s.final_m.m = SvecBasis(kQDim).decode(parse_list(value));
      } else if (key.starts_with(kConfigPrefix)) {
        s.config.emplace_back(key.substr(kConfigPrefix.size()), value);
      } else {
        throw IoError("unknown key '" + key + "'");
      }
    } catch (const IoError& e) {
      throw IoError(file.string() + ":" + std::to_string(line_no) + ": " + e.what());
    } catch (const std::exception& e) {
      throw IoError(file.string() + ":" + std::to_string(line_no) + ": bad value for '" + key +
                    "'");
    }
  }
  return s;
}

RunRecord read_log(const std::filesystem::path& dir) {
  RunRecord rec;
  {
    const auto file = dir / "steps.csv";
    std::ifstream in = open_in(file);
    std::string line;
    if (!std::getline(in, line) || line != kStepsHeader) throw IoError(file.string() + ": bad header");
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
      ++line_no;
      const auto f = split_csv(line);
      if (f.size() != 8) throw IoError(file.string() + ":" + std::to_string(line_no) + ": expected 8 fields");
      StepRow r;
      r.t = field_double(f[0], file, line_no);
      for (std::size_t i = 0; i < kStateDim; ++i) r.x[i] = field_double(f[1 + i], file, line_no);
      r.u = field_double(f[5], file, line_no);
      r.reward = field_double(f[6], file, line_no);
      r.gain_distance = field_double(f[7], file, line_no);
      rec.steps.push_back(r);
    }
  }
  {
    const auto file = dir / "events.csv";
    std::ifstream in = open_in(file);
    std::string line;
    if (!std::getline(in, line) || line != kEventsHeader) throw IoError(file.string() + ": bad header");
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
      ++line_no;
      const auto f = split_csv(line);
      const auto kind = f.size() == 2 ? parse_event_kind(f[1]) : std::nullopt;
      if (!kind) throw IoError(file.string() + ":" + std::to_string(line_no) + ": bad event row");
      rec.events.push_back({field_double(f[0], file, line_no), *kind});
    }
  }
  rec.summary = read_summary(dir / "summary.txt");
  return rec;
}

}  // namespace lqrq
