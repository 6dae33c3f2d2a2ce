// Copyright 2026 The FGRL Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "fgrl/error.hpp"
#include "fgrl/harness.hpp"

namespace fgrl {
namespace {

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path);
  return out;
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> cells;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  return cells;
}

constexpr const char* kRecordsHeader =
    "generation,evaluations,best_manager_return,mean_manager_return,std_manager_return,best_worker_return,"
    "mean_worker_return";

}  // namespace

std::string provenance_line(const std::string& hash) {
  return std::string("# fgrl ") + kVersion + " config_hash=" + hash;
}

void write_records_csv(const std::string& path, const std::string& hash, const std::vector<GenerationRecord>& records) {
  std::ostringstream body;
  body << provenance_line(hash) << '\n' << kRecordsHeader << '\n';
  for (const auto& r : records) {
    body << r.generation << ',' << r.evaluations << ',' << num(r.best_manager_return) << ','
         << num(r.mean_manager_return) << ',' << num(r.std_manager_return) << ',' << num(r.best_worker_return) << ','
         << num(r.mean_worker_return) << '\n';
  }
  const std::string tmp = path + ".tmp";
  {
    auto out = open_out(tmp);
    out << body.str();
  }
  std::filesystem::rename(tmp, path);
}

std::vector<GenerationRecord> read_records_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot read " + path);
  std::vector<GenerationRecord> records;
  std::string line;
  bool header_seen = false;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (!header_seen) {
      header_seen = true;
      if (line != kRecordsHeader) throw Error(ErrorCode::kParse, path + ": unexpected header");
      continue;
    }
    const auto c = split(line);
    if (c.size() != 7) throw Error(ErrorCode::kParse, path + ": malformed row '" + line + "'");
    try {
      GenerationRecord r;
      r.generation = std::stoi(c[0]);
      r.evaluations = std::stoull(c[1]);
      r.best_manager_return = std::stod(c[2]);
      r.mean_manager_return = std::stod(c[3]);
      r.std_manager_return = std::stod(c[4]);
      r.best_worker_return = std::stod(c[5]);
      r.mean_worker_return = std::stod(c[6]);
      records.push_back(r);
    } catch (const std::exception&) {
      throw Error(ErrorCode::kParse, path + ": malformed row '" + line + "'");
    }
  }
  return records;
}

void write_eval_csv(const std::string& path, const std::string& hash, const EvaluationResult& result) {
  auto out = open_out(path);
  out << provenance_line(hash) << '\n';
  out << "# train_limbs=" << result.train_limbs << " test_limbs=" << result.test_limbs
      << " episodes=" << result.episodes.size() << " mean_manager_return=" << num(result.mean_manager_return)
      << " stderr=" << num(result.stderr_manager_return) << " mean_worker_return=" << num(result.mean_worker_return)
      << '\n';
  out << "episode,seed,manager_return,worker_return,steps,crashed\n";
  for (std::size_t k = 0; k < result.episodes.size(); ++k) {
    const auto& e = result.episodes[k];
    out << k << ',' << e.seed << ',' << num(e.manager_return) << ',' << num(e.worker_return) << ',' << e.steps << ','
        << (e.crashed ? 1 : 0) << '\n';
  }
}

void write_trajectory_csv(const std::string& path, const std::string& hash, const std::vector<StepTrace>& trace) {
  auto out = open_out(path);
  out << provenance_line(hash) << '\n';
  const std::size_t links = trace.empty() ? 0 : trace.front().angles.size();
  out << "step,com_x,com_y,env_reward";
  for (std::size_t i = 0; i < links; ++i) out << ",theta_" << i;
  for (std::size_t i = 0; i < links; ++i) out << ",omega_" << i;
  out << '\n';
  for (const auto& t : trace) {
    out << t.step << ',' << num(t.com.x()) << ',' << num(t.com.y()) << ',' << num(t.env_reward);
    for (double a : t.angles) out << ',' << num(a);
    for (double w : t.angular_velocities) out << ',' << num(w);
    out << '\n';
  }
}

void write_transfer_csv(const std::string& path, const std::string& hash, const TransferMatrix& m) {
  auto out = open_out(path);
  out << provenance_line(hash) << '\n' << "train_limbs";
  for (int t : m.test_limbs) out << ",test_" << t;
  out << ",episodes_per_cell\n";
  for (std::size_t r = 0; r < m.train_limbs.size(); ++r) {
    out << m.train_limbs[r];
    for (double v : m.mean[r]) out << ',' << num(v);
    const int episodes = m.episodes[r].empty() ? 0 : *std::min_element(m.episodes[r].begin(), m.episodes[r].end());
    out << ',' << episodes << '\n';
  }
}

std::vector<std::vector<double>> transfer_row_shades(const TransferMatrix& m) {
  std::vector<std::vector<double>> shades;
  for (const auto& row : m.mean) {
    std::vector<double> s(row.size(), 0.0);
    if (!row.empty()) {
      const auto [lo, hi] = std::minmax_element(row.begin(), row.end());
      const double span = *hi - *lo;
      for (std::size_t c = 0; c < row.size(); ++c) s[c] = span > 0.0 ? (row[c] - *lo) / span : 0.0;
    }
    shades.push_back(std::move(s));
  }
  return shades;
}

void write_transfer_html(const std::string& path, const std::string& hash, const TransferMatrix& m) {
  const auto shades = transfer_row_shades(m);
  auto out = open_out(path);
  out << "<!DOCTYPE html>\n<!-- " << provenance_line(hash).substr(2) << " -->\n"
      << "<html><head><meta charset=\"utf-8\"><title>Transfer matrix</title>\n"
      << "<style>table{border-collapse:collapse;font-family:sans-serif}"
         "td,th{border:1px solid #999;padding:4px 10px;text-align:right}</style></head><body>\n"
      << "<table>\n<tr><th>train \\ test</th>";
  for (int t : m.test_limbs) out << "<th>" << t << "</th>";
  out << "</tr>\n";
  for (std::size_t r = 0; r < m.train_limbs.size(); ++r) {
    out << "<tr><th>" << m.train_limbs[r] << "</th>";
    for (std::size_t c = 0; c < m.mean[r].size(); ++c) {
      const int rg = static_cast<int>(std::lround(255.0 - shades[r][c] * (255.0 - 122.0)));
      char cell[160];
      std::snprintf(cell, sizeof(cell), "<td style=\"background:rgb(%d,%d,255)\">%.2f</td>", rg, rg, m.mean[r][c]);
      out << cell;
    }
    out << "</tr>\n";
  }
  out << "</table>\n</body></html>\n";
}

std::vector<double> running_mean(const std::vector<double>& values, int window) {
  if (window < 1) throw Error(ErrorCode::kInvalidArgument, "window must be >= 1");
  std::vector<double> out(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    const std::size_t start = i + 1 >= static_cast<std::size_t>(window) ? i + 1 - window : 0;
    double sum = 0.0;
    for (std::size_t j = start; j <= i; ++j) sum += values[j];
    out[i] = sum / static_cast<double>(i + 1 - start);
  }
  return out;
}

void export_plot(const std::string& records_path, const std::string& out_dir, int window) {
  namespace fs = std::filesystem;
  const auto records = read_records_csv(records_path);
  if (records.empty()) throw Error(ErrorCode::kInvalidArgument, records_path + " holds no records");
  std::string hash_line;
  {
    std::ifstream in(records_path);
    std::getline(in, hash_line);
  }
  std::vector<double> best, mean, worker;
  for (const auto& r : records) {
    best.push_back(r.best_manager_return);
    mean.push_back(r.mean_manager_return);
    worker.push_back(r.mean_worker_return);
  }
  const auto sb = running_mean(best, window);
  const auto sm = running_mean(mean, window);
  const auto sw = running_mean(worker, window);
  fs::create_directories(out_dir);
  {
    auto out = open_out((fs::path(out_dir) / "records_smoothed.csv").string());
    out << hash_line << '\n' << "generation,evaluations,best_manager_return_smoothed,mean_manager_return_smoothed,"
        << "mean_worker_return_smoothed\n";
    for (std::size_t i = 0; i < records.size(); ++i) {
      out << records[i].generation << ',' << records[i].evaluations << ',' << num(sb[i]) << ',' << num(sm[i]) << ','
          << num(sw[i]) << '\n';
    }
  }

  constexpr double kW = 640, kH = 400, kPad = 50;
  const double lo = std::min(*std::min_element(sb.begin(), sb.end()), *std::min_element(sm.begin(), sm.end()));
  double hi = std::max(*std::max_element(sb.begin(), sb.end()), *std::max_element(sm.begin(), sm.end()));
  if (hi <= lo) hi = lo + 1.0;
  const double n = static_cast<double>(std::max<std::size_t>(records.size() - 1, 1));
  auto polyline = [&](const std::vector<double>& ys, const char* colour) {
    std::ostringstream s;
    s << "<polyline fill=\"none\" stroke=\"" << colour << "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < ys.size(); ++i) {
      const double x = kPad + (kW - 2 * kPad) * static_cast<double>(i) / n;
      const double y = kH - kPad - (kH - 2 * kPad) * (ys[i] - lo) / (hi - lo);
      s << x << ',' << y << ' ';
    }
    s << "\"/>\n";
    return s.str();
  };
  auto out = open_out((fs::path(out_dir) / "learning_curve.svg").string());
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kW << "\" height=\"" << kH << "\">\n"
      << "<!-- " << hash_line.substr(hash_line.empty() ? 0 : 2) << " -->\n"
      << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
      << "<line x1=\"" << kPad << "\" y1=\"" << kH - kPad << "\" x2=\"" << kW - kPad << "\" y2=\"" << kH - kPad
      << "\" stroke=\"black\"/>\n"
      << "<line x1=\"" << kPad << "\" y1=\"" << kPad << "\" x2=\"" << kPad << "\" y2=\"" << kH - kPad
      << "\" stroke=\"black\"/>\n"
      << "<text x=\"" << kW / 2 << "\" y=\"" << kH - 15 << "\" text-anchor=\"middle\" font-size=\"12\">generation</text>\n"
      << "<text x=\"" << kPad << "\" y=\"" << kPad - 10 << "\" font-size=\"12\">R_M (running mean, window " << window
      << "): best " << num(lo) << " .. " << num(hi) << "</text>\n"
      << polyline(sb, "#2050d0") << polyline(sm, "#d07020") << "</svg>\n";
}

}  // namespace fgrl
