// Command-line front end: synthesize labeled scenes, build neighborhood
// graphs, run the field-embedding descent, and score the results.
//
// Exit codes: 0 success, 1 bad input or usage, 2 numeric failure.

#include <CLI11.hpp>

#include <cctype>
#include <cmath>
#include <fstream>
#include <iostream>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "mafe/mafe.hpp"

namespace {

using mafe::FieldModel;
using mafe::Matrix;
using mafe::ValidationError;

constexpr double kUnset = std::numeric_limits<double>::quiet_NaN();

struct FieldOptions {
  std::string family = "mafe-br";
  double xi_a = kUnset;
  double xi_r = kUnset;
  double p = kUnset;
  double q = kUnset;
  double sigma = kUnset;
  double sigma_a = kUnset;
  double sigma_r = kUnset;
};

void add_field_options(CLI::App* cmd, FieldOptions& f) {
  cmd->add_option("--model", f.family, "interaction family")
      ->check(CLI::IsMember({"mafe-br", "mafe-ur", "mafee", "mafeh", "sne", "tsne", "le"}));
  cmd->add_option("--xi-a", f.xi_a, "attraction magnitude (family default if omitted)");
  cmd->add_option("--xi-r", f.xi_r, "repulsion magnitude (family default if omitted)");
  cmd->add_option("--p", f.p, "attraction exponent (family default if omitted)");
  cmd->add_option("--q", f.q, "repulsion exponent (family default if omitted)");
  cmd->add_option("--sigma", f.sigma, "bounded-repulsion width (mafe-br)");
  cmd->add_option("--sigma-a", f.sigma_a, "attraction well width (mafee)");
  cmd->add_option("--sigma-r", f.sigma_r, "repulsion well width (mafee)");
}

FieldModel resolve_field(const FieldOptions& o) {
  FieldModel f = FieldModel::defaults(mafe::family_from_name(o.family));
  if (!std::isnan(o.xi_a)) f.xi_a = o.xi_a;
  if (!std::isnan(o.xi_r)) f.xi_r = o.xi_r;
  if (!std::isnan(o.p)) f.p = o.p;
  if (!std::isnan(o.q)) f.q = o.q;
  if (!std::isnan(o.sigma)) f.sigma = o.sigma;
  if (!std::isnan(o.sigma_a)) f.sigma_a = o.sigma_a;
  if (!std::isnan(o.sigma_r)) f.sigma_r = o.sigma_r;
  f.validate();
  return f;
}

void append_field_entries(std::vector<std::pair<std::string, std::string>>& m,
                          const FieldModel& f) {
  m.emplace_back("model", mafe::family_name(f.family));
  m.emplace_back("xi_a", mafe::io::fmt(f.xi_a));
  m.emplace_back("xi_r", mafe::io::fmt(f.xi_r));
  m.emplace_back("p", mafe::io::fmt(f.p));
  m.emplace_back("q", mafe::io::fmt(f.q));
  m.emplace_back("sigma", mafe::io::fmt(f.sigma));
  m.emplace_back("sigma_a", mafe::io::fmt(f.sigma_a));
  m.emplace_back("sigma_r", mafe::io::fmt(f.sigma_r));
}

struct EngineOptions {
  mafe::EngineConfig cfg;
  bool no_backtracking = false;
};

// `with_dim_and_seed` is false for sweep, which supplies its own dimension
// list and derives per-dimension engine seeds from the master seed.
void add_engine_options(CLI::App* cmd, EngineOptions& e, bool with_dim_and_seed = true) {
  if (with_dim_and_seed) cmd->add_option("--dim", e.cfg.dim, "embedding dimension");
  cmd->add_option("--alpha0", e.cfg.alpha0, "initial learning rate");
  cmd->add_option("--alpha-min", e.cfg.alpha_min, "learning-rate lower clamp");
  cmd->add_option("--alpha-max", e.cfg.alpha_max, "learning-rate upper clamp");
  cmd->add_option("--gamma1", e.cfg.gamma1, "rate-adaptation weight of <g_{t-1}, g_t>");
  cmd->add_option("--gamma2", e.cfg.gamma2, "rate-adaptation weight of <g_{t-2}, g_{t-1}>");
  cmd->add_option("--eps", e.cfg.eps, "gradient-norm termination threshold");
  cmd->add_option("--max-iter", e.cfg.max_iter, "iteration budget");
  if (with_dim_and_seed)
    cmd->add_option("--seed", e.cfg.seed, "random seed for the initial coordinates");
  cmd->add_option("--snapshot-every", e.cfg.snapshot_every,
                  "snapshot cadence (0 = auto: 1 when N <= 100, else 10)");
  cmd->add_flag("--no-backtracking", e.no_backtracking, "disable the descent guard");
  cmd->add_option("--max-halvings", e.cfg.max_halvings, "guard budget per iteration");
}

void append_engine_entries(std::vector<std::pair<std::string, std::string>>& m,
                           const mafe::EngineConfig& cfg, int resolved_cadence) {
  m.emplace_back("dim", std::to_string(cfg.dim));
  m.emplace_back("alpha0", mafe::io::fmt(cfg.alpha0));
  m.emplace_back("alpha_min", mafe::io::fmt(cfg.alpha_min));
  m.emplace_back("alpha_max", mafe::io::fmt(cfg.alpha_max));
  m.emplace_back("gamma1", mafe::io::fmt(cfg.gamma1));
  m.emplace_back("gamma2", mafe::io::fmt(cfg.gamma2));
  m.emplace_back("eps", mafe::io::fmt(cfg.eps));
  m.emplace_back("max_iter", std::to_string(cfg.max_iter));
  m.emplace_back("seed", std::to_string(cfg.seed));
  m.emplace_back("snapshot_every", std::to_string(resolved_cadence));
  m.emplace_back("backtracking", cfg.backtracking ? "true" : "false");
  m.emplace_back("max_halvings", std::to_string(cfg.max_halvings));
}

// "2", "1,2,5" and inclusive ranges "1..20" (mixable: "1,4..6,9").
std::vector<mafe::Index> parse_dims(const std::string& spec) {
  auto parse_one = [&](const std::string& tok) -> long {
    if (tok.empty()) throw ValidationError("--dims: empty entry in '" + spec + "'");
    std::size_t used = 0;
    long v = 0;
    try {
      v = std::stol(tok, &used);
    } catch (const std::exception&) {
      throw ValidationError("--dims: cannot parse '" + tok + "'");
    }
    if (used != tok.size() || v < 1)
      throw ValidationError("--dims: dimensions must be positive integers, got '" + tok + "'");
    return v;
  };

  std::vector<mafe::Index> dims;
  std::string cur;
  auto flush = [&] {
    const std::size_t dots = cur.find("..");
    if (dots == std::string::npos) {
      dims.push_back(parse_one(cur));
    } else {
      const long lo = parse_one(cur.substr(0, dots));
      const long hi = parse_one(cur.substr(dots + 2));
      if (hi < lo) throw ValidationError("--dims: empty range '" + cur + "'");
      for (long v = lo; v <= hi; ++v) dims.push_back(v);
    }
    cur.clear();
  };
  for (char ch : spec) {
    if (ch == ',')
      flush();
    else
      cur += ch;
  }
  flush();
  return dims;
}

// Flags documented as AUTO resolve from the data unless a number is given.
std::optional<double> parse_auto(const std::string& flag, const std::string& value) {
  std::string low = value;
  for (char& ch : low) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
  if (low == "auto") return std::nullopt;
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(value, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != value.size())
    throw ValidationError(flag + ": expected a number or AUTO, got '" + value + "'");
  return v;
}

const std::vector<int>& require_labels(const mafe::PixelDataset& data, const std::string& path) {
  if (!data.has_labels())
    throw ValidationError(path + ": dataset has no label column; evaluation needs labeled pixels");
  return data.labels;
}

// ------------------------------------------------------------------- synth

struct SynthArgs {
  int classes = 3;
  int per_class = 100;
  int bands = 20;
  std::string layout = "blocks";
  double noise = 0.1;
  std::uint64_t seed = 0;
  std::string out;
  std::string manifest;
};

void run_synth(const SynthArgs& a) {
  const mafe::PixelDataset data = mafe::generate_synthetic(
      a.classes, a.per_class, a.bands, mafe::layout_from_name(a.layout), a.noise, a.seed);
  mafe::io::save_dataset(a.out, data);
  if (!a.manifest.empty())
    mafe::io::save_manifest(a.manifest, {{"command", "synth"},
                                         {"classes", std::to_string(a.classes)},
                                         {"per_class", std::to_string(a.per_class)},
                                         {"bands", std::to_string(a.bands)},
                                         {"layout", a.layout},
                                         {"noise", mafe::io::fmt(a.noise)},
                                         {"seed", std::to_string(a.seed)},
                                         {"pixels", std::to_string(data.n_pixels())},
                                         {"out", a.out}});
}

// ------------------------------------------------------------------- graph

struct GraphArgs {
  std::string data;
  std::string kernel = "bilateral";
  int k = 15;
  std::string sigma_s = "auto";        // spatial scale, or AUTO from the data
  std::string smt_rotations = "auto";  // Givens budget, or AUTO for the band count
  int pca = 0;                         // 0 = off, else reduce spectra first
  double entropy_base = std::exp(1.0);
  bool sparsify = false;
  std::string out;
  std::string manifest;
};

void run_graph(const GraphArgs& a) {
  mafe::PixelDataset data = mafe::io::load_dataset(a.data);
  if (a.pca > 0) data = mafe::pca_reduce(data, a.pca);
  mafe::NeighborhoodGraph g;
  std::vector<std::pair<std::string, std::string>> m = {
      {"command", "graph"}, {"data", a.data}, {"kernel", a.kernel}, {"k", std::to_string(a.k)}};
  m.emplace_back("pca", a.pca > 0 ? std::to_string(a.pca) : "off");

  if (a.kernel == "bilateral") {
    const std::optional<double> rot = parse_auto("--smt-rotations", a.smt_rotations);
    const int rotations =
        rot ? static_cast<int>(*rot) : mafe::smt_default_rotations(data.n_bands());
    const mafe::CovarianceModel cov =
        mafe::smt_estimate(mafe::sample_covariance(data.spectra), rotations);
    const std::optional<double> ss = parse_auto("--sigma-s", a.sigma_s);
    const double sigma_s = ss ? *ss : mafe::auto_sigma_s(data, a.k);
    g = mafe::bilateral_graph(data, a.k, sigma_s, cov);
    m.emplace_back("sigma_s", mafe::io::fmt(g.sigma_s));
    m.emplace_back("smt_rotations", std::to_string(rotations));
    m.emplace_back("rotations_applied", std::to_string(cov.n_rotations));
  } else {
    mafe::PerplexityOptions opts;
    opts.entropy_base = a.entropy_base;
    g = mafe::gaussian_perplexity_graph(data, a.k, opts);
    if (a.sparsify) {
      g.weights = mafe::knn_sparsify_and_symmetrize(Matrix(g.weights), a.k);
    }
    m.emplace_back("entropy_base", mafe::io::fmt(a.entropy_base));
    m.emplace_back("sparsify", a.sparsify ? "true" : "false");
  }
  m.emplace_back("edges", std::to_string(g.weights.nonZeros() / 2));
  m.emplace_back("out", a.out);

  mafe::io::save_graph(a.out, g);
  if (!a.manifest.empty()) mafe::io::save_manifest(a.manifest, m);
}

// ------------------------------------------------------------------- embed

struct EmbedArgs {
  std::string graph;
  FieldOptions field;
  EngineOptions engine;
  std::string out;
  std::string trajectory;
  std::string manifest;
};

void run_embed(const EmbedArgs& a) {
  const mafe::NeighborhoodGraph g = mafe::io::load_graph(a.graph);
  const FieldModel field = resolve_field(a.field);
  mafe::EngineConfig cfg = a.engine.cfg;
  cfg.backtracking = !a.engine.no_backtracking;

  const mafe::RunResult res = mafe::run(g, field, cfg);
  mafe::io::save_embedding(a.out, res.Z);
  if (!a.trajectory.empty()) mafe::io::save_trajectory(a.trajectory, res.trajectory);

  if (!a.manifest.empty()) {
    const int cadence = cfg.snapshot_every > 0 ? cfg.snapshot_every : (g.n() <= 100 ? 1 : 10);
    std::vector<std::pair<std::string, std::string>> m = {{"command", "embed"},
                                                          {"graph", a.graph}};
    append_field_entries(m, field);
    append_engine_entries(m, cfg, cadence);
    m.emplace_back("stop_reason", mafe::stop_reason_name(res.reason));
    m.emplace_back("iterations", std::to_string(res.iterations));
    m.emplace_back("final_energy", mafe::io::fmt(res.trajectory.snapshots.back().energy));
    m.emplace_back("out", a.out);
    if (!a.trajectory.empty()) m.emplace_back("trajectory", a.trajectory);
    mafe::io::save_manifest(a.manifest, m);
  }
}

// -------------------------------------------------------------------- eval

struct EvalArgs {
  std::string embedding;
  std::string data;
  int runs = 10;
  std::uint64_t seed = 0;
  std::string metric = "auto";
  double train_fraction = 0.7;
  std::string out;
  std::string csv;
  std::string manifest;
};

void run_eval(const EvalArgs& a) {
  const Matrix Z = mafe::io::load_embedding(a.embedding);
  const mafe::PixelDataset data = mafe::io::load_dataset(a.data);
  const std::vector<int>& labels = require_labels(data, a.data);
  if (Z.rows() != data.n_pixels())
    throw ValidationError("embedding has " + std::to_string(Z.rows()) + " points but " + a.data +
                          " has " + std::to_string(data.n_pixels()));

  std::optional<mafe::EvalMetric> metric;
  if (a.metric == "sam") metric = mafe::EvalMetric::SpectralAngle;
  else if (a.metric == "euclidean") metric = mafe::EvalMetric::Euclidean;

  mafe::EvaluationReport rep =
      mafe::repeated_evaluation(Z, labels, a.runs, a.seed, metric, a.train_fraction);
  rep.frobenius = mafe::frobenius_residual(mafe::pairwise_distance_matrix(data.spectra),
                                           mafe::pairwise_distance_matrix(Z));

  mafe::io::save_report_text(a.out, rep);
  if (!a.csv.empty()) mafe::io::save_report_csv(a.csv, rep);
  if (!a.manifest.empty())
    mafe::io::save_manifest(a.manifest, {{"command", "eval"},
                                         {"embedding", a.embedding},
                                         {"data", a.data},
                                         {"runs", std::to_string(a.runs)},
                                         {"seed", std::to_string(a.seed)},
                                         {"metric", mafe::metric_name(rep.metric)},
                                         {"train_fraction", mafe::io::fmt(a.train_fraction)},
                                         {"out", a.out}});
}

// ------------------------------------------------------------------- sweep

struct SweepArgs {
  std::string graph;
  std::string data;
  std::string dims = "1,2,3";
  int runs = 5;
  std::uint64_t seed = 0;
  FieldOptions field;
  EngineOptions engine;
  std::string out;
  std::string manifest;
};

void run_sweep(const SweepArgs& a) {
  const mafe::NeighborhoodGraph g = mafe::io::load_graph(a.graph);
  const mafe::PixelDataset data = mafe::io::load_dataset(a.data);
  const std::vector<int>& labels = require_labels(data, a.data);
  if (g.n() != data.n_pixels())
    throw ValidationError("graph has " + std::to_string(g.n()) + " vertices but " + a.data +
                          " has " + std::to_string(data.n_pixels()) + " pixels");
  const FieldModel field = resolve_field(a.field);
  mafe::EngineConfig base = a.engine.cfg;
  base.backtracking = !a.engine.no_backtracking;

  const std::vector<mafe::Index> dims = parse_dims(a.dims);
  const std::vector<mafe::SweepRow> rows =
      mafe::dimension_sweep(g, field, labels, dims, a.runs, a.seed, base);

  std::ofstream f(a.out);
  if (!f) throw ValidationError("cannot open " + a.out + " for writing");
  f << "dim,mean_error,std_error\n";
  for (const mafe::SweepRow& r : rows)
    f << r.dim << ',' << mafe::io::fmt(r.mean_error) << ',' << mafe::io::fmt(r.std_error) << "\n";
  f.close();

  if (!a.manifest.empty()) {
    std::vector<std::pair<std::string, std::string>> m = {{"command", "sweep"},
                                                          {"graph", a.graph},
                                                          {"data", a.data},
                                                          {"dims", a.dims},
                                                          {"runs", std::to_string(a.runs)},
                                                          {"seed", std::to_string(a.seed)}};
    append_field_entries(m, field);
    m.emplace_back("max_iter", std::to_string(base.max_iter));
    m.emplace_back("out", a.out);
    mafe::io::save_manifest(a.manifest, m);
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"spatial-spectral neighborhood embeddings under pairwise force fields"};
  app.require_subcommand(1);

  SynthArgs synth;
  CLI::App* cs = app.add_subcommand("synth", "generate a labeled synthetic scene");
  cs->add_option("--classes", synth.classes, "number of classes")->check(CLI::Range(2, 1000));
  cs->add_option("--per-class", synth.per_class, "pixels per class")->check(CLI::PositiveNumber);
  cs->add_option("--bands", synth.bands, "spectral bands")->check(CLI::PositiveNumber);
  cs->add_option("--layout", synth.layout, "spatial arrangement")
      ->check(CLI::IsMember({"blocks", "checker"}));
  cs->add_option("--noise", synth.noise, "per-band noise standard deviation");
  cs->add_option("--seed", synth.seed, "random seed");
  cs->add_option("--out", synth.out, "output dataset csv")->required();
  cs->add_option("--manifest", synth.manifest, "write resolved settings here");
  cs->callback([&] { run_synth(synth); });

  GraphArgs graph;
  CLI::App* cg = app.add_subcommand("graph", "build a neighborhood graph from a dataset");
  cg->add_option("--data", graph.data, "input dataset csv")->required();
  cg->add_option("--kernel", graph.kernel, "affinity construction")
      ->check(CLI::IsMember({"bilateral", "gaussian"}));
  cg->add_option("--k", graph.k, "neighbors per vertex / perplexity target");
  cg->add_option("--sigma-s", graph.sigma_s, "spatial scale, or AUTO to pool from the data");
  cg->add_option("--smt-rotations", graph.smt_rotations,
                 "covariance rotation budget, or AUTO for twice the band count");
  cg->add_option("--pca", graph.pca, "reduce spectra to this many components first (0 = off)");
  cg->add_option("--entropy-base", graph.entropy_base, "entropy base for the perplexity target");
  cg->add_flag("--sparsify", graph.sparsify, "top-k sparsify a gaussian graph");
  cg->add_option("--out", graph.out, "output graph csv")->required();
  cg->add_option("--manifest", graph.manifest, "write resolved settings here");
  cg->callback([&] { run_graph(graph); });

  EmbedArgs embed;
  CLI::App* ce = app.add_subcommand("embed", "descend the field energy over a graph");
  ce->add_option("--graph", embed.graph, "input graph csv")->required();
  add_field_options(ce, embed.field);
  add_engine_options(ce, embed.engine);
  ce->add_option("--out", embed.out, "output embedding csv")->required();
  ce->add_option("--trajectory", embed.trajectory, "also write the snapshot trajectory");
  ce->add_option("--manifest", embed.manifest, "write resolved settings here");
  ce->callback([&] { run_embed(embed); });

  EvalArgs eval;
  CLI::App* cv = app.add_subcommand("eval", "score an embedding against its labeled dataset");
  cv->add_option("--embedding", eval.embedding, "embedding csv")->required();
  cv->add_option("--data", eval.data, "labeled dataset csv")->required();
  cv->add_option("--runs", eval.runs, "number of stratified splits");
  cv->add_option("--seed", eval.seed, "split seed");
  cv->add_option("--metric", eval.metric, "1NN distance")
      ->check(CLI::IsMember({"auto", "sam", "euclidean"}));
  cv->add_option("--train-frac", eval.train_fraction, "stratified training fraction");
  cv->add_option("--out", eval.out, "text report path")->required();
  cv->add_option("--csv", eval.csv, "also write a key,value csv report");
  cv->add_option("--manifest", eval.manifest, "write resolved settings here");
  cv->callback([&] { run_eval(eval); });

  SweepArgs sweep;
  CLI::App* cw = app.add_subcommand("sweep", "embed at several dimensions and tabulate 1NN error");
  cw->add_option("--graph", sweep.graph, "input graph csv")->required();
  cw->add_option("--data", sweep.data, "labeled dataset csv")->required();
  cw->add_option("--dims", sweep.dims, "comma-separated embedding dimensions");
  cw->add_option("--runs", sweep.runs, "evaluation splits per dimension");
  cw->add_option("--seed", sweep.seed, "master seed");
  add_field_options(cw, sweep.field);
  add_engine_options(cw, sweep.engine, /*with_dim_and_seed=*/false);
  cw->add_option("--out", sweep.out, "output csv table")->required();
  cw->add_option("--manifest", sweep.manifest, "write resolved settings here");
  cw->callback([&] { run_sweep(sweep); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const mafe::NumericError& e) {
    std::cerr << "numeric error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
