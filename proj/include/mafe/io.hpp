#pragma once

#include <array>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "engine.hpp"
#include "evaluation.hpp"
#include "graph.hpp"
#include "types.hpp"

namespace mafe {
namespace io {

/// Shortest representation that round-trips a double exactly (17 significant digits).
inline std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

namespace detail {

inline std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : line) {
    if (ch == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (ch != '\r') {
      cur += ch;
    }
  }
  out.push_back(cur);
  return out;
}

inline double parse_double(const std::string& tok, const std::string& file, int line_no,
                           const std::string& what) {
  if (tok.empty())
    throw ValidationError(file + ":" + std::to_string(line_no) + ": empty " + what + " field");
  errno = 0;
  char* end = nullptr;
  const double v = std::strtod(tok.c_str(), &end);
  if (end != tok.c_str() + tok.size() || errno == ERANGE)
    throw ValidationError(file + ":" + std::to_string(line_no) + ": cannot parse " + what +
                          " value '" + tok + "'");
  if (!std::isfinite(v))
    throw ValidationError(file + ":" + std::to_string(line_no) + ": non-finite " + what +
                          " value '" + tok + "'");
  return v;
}

inline long parse_int(const std::string& tok, const std::string& file, int line_no,
                      const std::string& what) {
  if (tok.empty())
    throw ValidationError(file + ":" + std::to_string(line_no) + ": empty " + what + " field");
  errno = 0;
  char* end = nullptr;
  const long v = std::strtol(tok.c_str(), &end, 10);
  if (end != tok.c_str() + tok.size() || errno == ERANGE)
    throw ValidationError(file + ":" + std::to_string(line_no) + ": cannot parse " + what +
                          " value '" + tok + "'");
  return v;
}

inline std::ofstream open_out(const std::string& path) {
  std::ofstream f(path);
  if (!f) throw ValidationError("cannot open " + path + " for writing");
  return f;
}

inline std::ifstream open_in(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ValidationError("cannot open " + path + " for reading");
  return f;
}

}  // namespace detail

// ---------------------------------------------------------------- datasets

/// Header `row,col,b0,...,b{d-1}[,label]`, one pixel per line.
inline void save_dataset(const std::string& path, const PixelDataset& data) {
  data.validate();
  std::ofstream f = detail::open_out(path);
  f << "row,col";
  for (Index b = 0; b < data.n_bands(); ++b) f << ",b" << b;
  if (data.has_labels()) f << ",label";
  f << "\n";
  for (Index i = 0; i < data.n_pixels(); ++i) {
    f << fmt(data.spatial(i, 0)) << ',' << fmt(data.spatial(i, 1));
    for (Index b = 0; b < data.n_bands(); ++b) f << ',' << fmt(data.spectra(i, b));
    if (data.has_labels()) f << ',' << data.labels[i];
    f << "\n";
  }
}

inline PixelDataset load_dataset(const std::string& path) {
  std::ifstream f = detail::open_in(path);
  std::string line;
  if (!std::getline(f, line)) throw ValidationError(path + ": empty file");
  const std::vector<std::string> header = detail::split_csv(line);
  if (header.size() < 3 || header[0] != "row" || header[1] != "col")
    throw ValidationError(path + ":1: header must start with 'row,col,b0,...'");
  bool labeled = header.back() == "label";
  const std::size_t n_bands = header.size() - 2 - (labeled ? 1 : 0);
  if (n_bands < 1) throw ValidationError(path + ":1: no band columns in header");
  for (std::size_t b = 0; b < n_bands; ++b)
    if (header[2 + b] != "b" + std::to_string(b))
      throw ValidationError(path + ":1: expected band column 'b" + std::to_string(b) +
                            "', found '" + header[2 + b] + "'");

  std::vector<std::array<double, 2>> spatial;
  std::vector<std::vector<double>> spectra;
  std::vector<int> labels;
  int line_no = 1;
  while (std::getline(f, line)) {
    ++line_no;
    if (line.empty()) continue;
    const std::vector<std::string> tok = detail::split_csv(line);
    if (tok.size() != header.size())
      throw ValidationError(path + ":" + std::to_string(line_no) + ": expected " +
                            std::to_string(header.size()) + " fields, found " +
                            std::to_string(tok.size()));
    spatial.push_back({detail::parse_double(tok[0], path, line_no, "row"),
                       detail::parse_double(tok[1], path, line_no, "col")});
    std::vector<double> bands(n_bands);
    for (std::size_t b = 0; b < n_bands; ++b)
      bands[b] = detail::parse_double(tok[2 + b], path, line_no, "band");
    spectra.push_back(std::move(bands));
    if (labeled)
      labels.push_back(static_cast<int>(detail::parse_int(tok.back(), path, line_no, "label")));
  }
  if (spectra.empty()) throw ValidationError(path + ": no data rows");

  PixelDataset out;
  out.spatial.resize(spectra.size(), 2);
  out.spectra.resize(spectra.size(), n_bands);
  for (std::size_t i = 0; i < spectra.size(); ++i) {
    out.spatial(i, 0) = spatial[i][0];
    out.spatial(i, 1) = spatial[i][1];
    for (std::size_t b = 0; b < n_bands; ++b) out.spectra(i, b) = spectra[i][b];
  }
  out.labels = std::move(labels);
  out.validate();
  return out;
}

// ------------------------------------------------------------------ graphs

/// `# n <N>` comment, `i,j,w` header, then the upper triangle sorted by (i, j).
inline void save_graph(const std::string& path, const NeighborhoodGraph& g) {
  std::ofstream f = detail::open_out(path);
  f << "# n " << g.n() << "\n";
  f << "i,j,w\n";
  for (Index i = 0; i < g.n(); ++i) {
    // column-major sparse storage: walk row i via the transposed view of column i
    for (Eigen::SparseMatrix<double>::InnerIterator it(g.weights, i); it; ++it) {
      if (it.row() <= i) continue;  // keep i < j only
      f << i << ',' << it.row() << ',' << fmt(it.value()) << "\n";
    }
  }
}

inline NeighborhoodGraph load_graph(const std::string& path) {
  std::ifstream f = detail::open_in(path);
  std::string line;
  Index n = -1;
  std::vector<Eigen::Triplet<double>> trips;
  Index max_idx = -1;
  int line_no = 0;
  bool saw_header = false;
  while (std::getline(f, line)) {
    ++line_no;
    if (line.empty()) continue;
    if (line[0] == '#') {
      std::istringstream ss(line.substr(1));
      std::string key;
      long val;
      if (ss >> key >> val && key == "n") n = val;
      continue;
    }
    if (!saw_header) {
      if (line != "i,j,w")
        throw ValidationError(path + ":" + std::to_string(line_no) + ": expected header 'i,j,w'");
      saw_header = true;
      continue;
    }
    const std::vector<std::string> tok = detail::split_csv(line);
    if (tok.size() != 3)
      throw ValidationError(path + ":" + std::to_string(line_no) + ": expected i,j,w");
    const long i = detail::parse_int(tok[0], path, line_no, "index");
    const long j = detail::parse_int(tok[1], path, line_no, "index");
    const double w = detail::parse_double(tok[2], path, line_no, "weight");
    if (i < 0 || j < 0 || i >= j)
      throw ValidationError(path + ":" + std::to_string(line_no) +
                            ": edge indices must satisfy 0 <= i < j");
    trips.emplace_back(i, j, w);
    trips.emplace_back(j, i, w);
    max_idx = std::max<Index>(max_idx, j);
  }
  if (!saw_header) throw ValidationError(path + ": missing 'i,j,w' header");
  if (n < 0) n = max_idx + 1;
  if (n <= max_idx) throw ValidationError(path + ": declared n is smaller than the largest index");

  NeighborhoodGraph g;
  g.weights.resize(n, n);
  g.weights.setFromTriplets(trips.begin(), trips.end());
  return g;
}

// ------------------------------------------------------------- embeddings

/// Header `id,z1,...,zm`, one point per line in index order.
inline void save_embedding(const std::string& path, const Matrix& Z) {
  std::ofstream f = detail::open_out(path);
  f << "id";
  for (Index c = 0; c < Z.cols(); ++c) f << ",z" << (c + 1);
  f << "\n";
  for (Index i = 0; i < Z.rows(); ++i) {
    f << i;
    for (Index c = 0; c < Z.cols(); ++c) f << ',' << fmt(Z(i, c));
    f << "\n";
  }
}

inline Matrix load_embedding(const std::string& path) {
  std::ifstream f = detail::open_in(path);
  std::string line;
  if (!std::getline(f, line)) throw ValidationError(path + ": empty file");
  const std::vector<std::string> header = detail::split_csv(line);
  if (header.size() < 2 || header[0] != "id" || header[1] != "z1")
    throw ValidationError(path + ":1: header must be 'id,z1,...,zm'");
  const std::size_t m = header.size() - 1;

  std::vector<std::vector<double>> rows;
  int line_no = 1;
  while (std::getline(f, line)) {
    ++line_no;
    if (line.empty()) continue;
    const std::vector<std::string> tok = detail::split_csv(line);
    if (tok.size() != header.size())
      throw ValidationError(path + ":" + std::to_string(line_no) + ": expected " +
                            std::to_string(header.size()) + " fields");
    const long id = detail::parse_int(tok[0], path, line_no, "id");
    if (id != static_cast<long>(rows.size()))
      throw ValidationError(path + ":" + std::to_string(line_no) +
                            ": ids must be consecutive from 0");
    std::vector<double> row(m);
    for (std::size_t c = 0; c < m; ++c)
      row[c] = detail::parse_double(tok[1 + c], path, line_no, "coordinate");
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw ValidationError(path + ": no data rows");
  Matrix Z(rows.size(), m);
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t c = 0; c < m; ++c) Z(i, c) = rows[i][c];
  return Z;
}

// ------------------------------------------------------------ trajectories

/// Header `t,id,z1,...,zm,energy,gradnorm`; one line per (snapshot, point).
inline void save_trajectory(const std::string& path, const Trajectory& traj) {
  if (traj.snapshots.empty()) throw ValidationError("empty trajectory");
  std::ofstream f = detail::open_out(path);
  const Index m = traj.snapshots.front().Z.cols();
  f << "t,id";
  for (Index c = 0; c < m; ++c) f << ",z" << (c + 1);
  f << ",energy,gradnorm\n";
  for (const Snapshot& s : traj.snapshots) {
    for (Index i = 0; i < s.Z.rows(); ++i) {
      f << s.t << ',' << i;
      for (Index c = 0; c < m; ++c) f << ',' << fmt(s.Z(i, c));
      f << ',' << fmt(s.energy) << ',' << fmt(s.grad_norm) << "\n";
    }
  }
}

// ----------------------------------------------------------------- reports

/// Human-readable evaluation summary.
inline void save_report_text(const std::string& path, const EvaluationReport& rep) {
  std::ofstream f = detail::open_out(path);
  f << "runs:      " << rep.runs << "\n";
  f << "dimension: " << rep.dimension << "\n";
  f << "metric:    " << metric_name(rep.metric) << "\n";
  if (rep.frobenius) f << "frobenius residual: " << fmt(*rep.frobenius) << "\n";
  f << "overall accuracy:   " << fmt(rep.overall_accuracy) << " +/- "
    << fmt(rep.overall_accuracy_stderr) << " %\n";
  if (rep.kappa)
    f << "kappa statistic:    " << fmt(*rep.kappa) << " +/- " << fmt(rep.kappa_stderr) << "\n";
  else
    f << "kappa statistic:    undefined\n";
  f << "per-class accuracy (mean +/- stderr %):\n";
  for (std::size_t c = 0; c < rep.per_class_accuracy.size(); ++c)
    f << "  class " << (c + 1) << ": " << fmt(rep.per_class_accuracy[c]) << " +/- "
      << fmt(rep.per_class_stderr[c]) << "\n";
}

/// Machine-readable companion: `key,value` lines.
inline void save_report_csv(const std::string& path, const EvaluationReport& rep) {
  std::ofstream f = detail::open_out(path);
  f << "key,value\n";
  f << "runs," << rep.runs << "\n";
  f << "dimension," << rep.dimension << "\n";
  f << "metric," << metric_name(rep.metric) << "\n";
  if (rep.frobenius) f << "frobenius," << fmt(*rep.frobenius) << "\n";
  f << "overall_accuracy," << fmt(rep.overall_accuracy) << "\n";
  f << "overall_accuracy_stderr," << fmt(rep.overall_accuracy_stderr) << "\n";
  f << "kappa," << (rep.kappa ? fmt(*rep.kappa) : std::string("undefined")) << "\n";
  f << "kappa_stderr," << fmt(rep.kappa_stderr) << "\n";
  for (std::size_t c = 0; c < rep.per_class_accuracy.size(); ++c) {
    f << "class_" << (c + 1) << "_accuracy," << fmt(rep.per_class_accuracy[c]) << "\n";
    f << "class_" << (c + 1) << "_stderr," << fmt(rep.per_class_stderr[c]) << "\n";
  }
}

// ---------------------------------------------------------------- manifest

/// `key=value` lines recording every resolved setting of a command run.
inline void save_manifest(const std::string& path,
                          const std::vector<std::pair<std::string, std::string>>& entries) {
  std::ofstream f = detail::open_out(path);
  for (const auto& [k, v] : entries) f << k << '=' << v << "\n";
}

}  // namespace io
}  // namespace mafe
