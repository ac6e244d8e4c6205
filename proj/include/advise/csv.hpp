#pragma once

#include <charconv>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "advise/error.hpp"
#include "advise/experiment.hpp"

namespace advise {

namespace detail {

inline std::string format_g6(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    const auto comma = line.find(',', start);
    out.push_back(line.substr(start, comma == std::string::npos ? std::string::npos : comma - start));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  if (!out.empty() && !out.back().empty() && out.back().back() == '\r') out.back().pop_back();
  return out;
}

}  // namespace detail

inline std::string csv_header(std::size_t num_trainers) {
  std::string h = "arm,seed,episode,reward,error_rate,power_mC";
  for (std::size_t n = 0; n < num_trainers; ++n) h += ",consistency_t" + std::to_string(n);
  return h;
}

// One row per episode, runs in the order given. Reals use 6 significant
// digits; consistency fields stay empty for runs that do not estimate it.
inline void emit_csv(std::ostream& out, std::span<const RunMetrics> runs, std::size_t num_trainers) {
  out << csv_header(num_trainers) << '\n';
  for (const RunMetrics& run : runs) {
    if (run.num_trainers != num_trainers) {
      throw InvalidArgument("emit_csv: run has " + std::to_string(run.num_trainers) +
                            " consistency columns, expected " + std::to_string(num_trainers));
    }
    for (const EpisodeMetrics& m : run.episodes) {
      out << to_string(run.arm) << ',' << run.seed << ',' << m.episode << ','
          << detail::format_g6(m.reward) << ',' << detail::format_g6(m.error_rate) << ','
          << detail::format_g6(m.power_mC);
      for (std::size_t n = 0; n < num_trainers; ++n) {
        out << ',';
        if (n < m.consistency.size()) out << detail::format_g6(m.consistency[n]);
      }
      out << '\n';
    }
  }
}

inline void emit_csv(const std::string& path, std::span<const RunMetrics> runs,
                     std::size_t num_trainers) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError(path, "cannot open for writing");
  emit_csv(out, runs, num_trainers);
  out.flush();
  if (!out) throw IoError(path, "write failed");
}

struct MetricsFile {
  std::size_t num_trainers = 0;
  std::vector<RunMetrics> runs;  // grouped by (arm, seed) in order of appearance
};

inline MetricsFile parse_csv(std::istream& in, const std::string& source = "<stream>") {
  std::string line;
  if (!std::getline(in, line)) throw InvalidArgument(source + ": empty metrics file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const auto header = detail::split_csv_line(line);
  if (header.size() < 6) throw InvalidArgument(source + ": not a metrics file header");
  MetricsFile file;
  file.num_trainers = header.size() - 6;
  if (line != csv_header(file.num_trainers)) {
    throw InvalidArgument(source + ": unexpected header '" + line + "'");
  }

  auto number = [&](const std::string& text, std::size_t line_no) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(text, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != text.size()) {
      throw InvalidArgument(source + ": line " + std::to_string(line_no) + ": bad number '" +
                            text + "'");
    }
    return v;
  };

  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const auto fields = detail::split_csv_line(line);
    if (fields.size() != header.size()) {
      throw InvalidArgument(source + ": line " + std::to_string(line_no) + ": expected " +
                            std::to_string(header.size()) + " fields");
    }
    const auto arm = parse_arm(fields[0]);
    if (!arm) throw InvalidArgument(source + ": line " + std::to_string(line_no) + ": unknown arm");
    std::uint64_t seed = 0;
    {
      const auto& text = fields[1];
      const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), seed);
      if (ec != std::errc{} || ptr != text.data() + text.size()) {
        throw InvalidArgument(source + ": line " + std::to_string(line_no) + ": bad seed '" + text + "'");
      }
    }

    EpisodeMetrics m;
    m.episode = static_cast<int>(number(fields[2], line_no));
    m.reward = number(fields[3], line_no);
    m.error_rate = number(fields[4], line_no);
    m.power_mC = number(fields[5], line_no);
    std::size_t filled = 0;
    for (std::size_t n = 0; n < file.num_trainers; ++n) filled += fields[6 + n].empty() ? 0 : 1;
    if (filled != 0 && filled != file.num_trainers) {
      throw InvalidArgument(source + ": line " + std::to_string(line_no) +
                            ": consistency columns partially filled");
    }
    for (std::size_t n = 0; n < filled; ++n) m.consistency.push_back(number(fields[6 + n], line_no));

    if (file.runs.empty() || file.runs.back().arm != *arm || file.runs.back().seed != seed) {
      file.runs.push_back(RunMetrics{*arm, seed, file.num_trainers, {}});
    }
    file.runs.back().episodes.push_back(std::move(m));
  }
  return file;
}

inline MetricsFile load_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(path, "cannot open metrics file");
  return parse_csv(in, path);
}

}  // namespace advise
