#include "rkan/runner.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <thread>

#include "rkan/error.hpp"
#include "rkan/experiments.hpp"
#include "rkan/jacobi.hpp"
#include "rkan/layers.hpp"
#include "rkan/mapping.hpp"
#include "rkan/rng.hpp"

namespace rkan {

namespace {

double now_seconds() {
  using clock = std::chrono::steady_clock;
  return std::chrono::duration<double>(clock::now().time_since_epoch()).count();
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(line);
  while (std::getline(in, item, ',')) out.push_back(item);
  if (!line.empty() && line.back() == ',') out.push_back("");
  return out;
}

double median_of(std::vector<double> v) {
  v.erase(std::remove_if(v.begin(), v.end(),
                         [](double x) { return !std::isfinite(x); }),
          v.end());
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(v.begin(), v.end());
  const size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

bool is_pade(const std::string& layer) {
  return layer == "pade-rkan" || layer == "fpade-rkan";
}

double loss_value(const Network& net, const Tensor& x) {
  Tape tape;
  std::vector<Var> leaves = net.make_leaves(tape);
  Var y = net.forward(tape.constant(x), leaves);
  Var loss = mean(y * y);
  return loss.val().v[0];
}

std::vector<Tensor> loss_grads(const Network& net, const Tensor& x) {
  Tape tape;
  std::vector<Var> leaves = net.make_leaves(tape);
  Var y = net.forward(tape.constant(x), leaves);
  Var loss = mean(y * y);
  tape.backward(loss);
  std::vector<Tensor> grads;
  grads.reserve(leaves.size());
  for (const Var& leaf : leaves) grads.push_back(leaf.grad());
  return grads;
}

ResultRow gradcheck_one(const std::string& kind, std::uint64_t seed) {
  ResultRow row;
  row.experiment = "gradcheck";
  row.seed = seed;
  row.layer = kind;
  row.K = 3;
  const double t0 = now_seconds();

  std::vector<std::unique_ptr<Layer>> layers;
  if (kind == "jacobi-rkan") {
    MappingSpec ms;
    ms.kind = MapKind::InfAlg;
    layers.push_back(std::make_unique<JacobiRKanLayer>(2, 3, 3, ms, Squash::Identity));
    row.mapping = "inf-alg";
  } else if (kind == "fjacobi-rkan") {
    MappingSpec ms;
    ms.kind = MapKind::Fractional;
    layers.push_back(std::make_unique<JacobiRKanLayer>(2, 3, 3, ms, Squash::Sigmoid));
    row.mapping = "fractional";
  } else if (kind == "pade-rkan") {
    layers.push_back(std::make_unique<PadeRKanLayer>(2, 3, 3, 2, false, Squash::Tanh));
    row.mapping = "none";
    row.p = 2;
  } else {
    layers.push_back(std::make_unique<PadeRKanLayer>(2, 3, 3, 2, true, Squash::Sigmoid));
    row.mapping = "fractional";
    row.p = 2;
  }
  Network net(std::move(layers));
  Rng init_rng(seed, Stream::Init);
  net.init(init_rng);

  Tensor x(5, 2);
  Rng data_rng(seed, Stream::TrainData);
  for (long i = 0; i < x.size(); ++i) x.v[i] = data_rng.uniform(-2.0, 2.0);

  const std::vector<Tensor> analytic = loss_grads(net, x);
  std::vector<Tensor*> params = net.params();
  const double h = 1e-6;
  double max_rel = 0.0;
  for (size_t t = 0; t < params.size(); ++t) {
    Tensor& theta = *params[t];
    for (long i = 0; i < theta.size(); ++i) {
      const double saved = theta.v[i];
      theta.v[i] = saved + h;
      const double fp = loss_value(net, x);
      theta.v[i] = saved - h;
      const double fm = loss_value(net, x);
      theta.v[i] = saved;
      const double fd = (fp - fm) / (2.0 * h);
      const double an = analytic[t].v[i];
      const double rel =
          std::fabs(an - fd) / std::max({std::fabs(an), std::fabs(fd), 1e-8});
      max_rel = std::max(max_rel, rel);
    }
  }
  row.max_abs_err = max_rel;
  row.status = max_rel < 1e-5 ? "ok" : "fail";
  row.wall_s = now_seconds() - t0;
  return row;
}

}  // namespace

std::string fmt_g17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string csv_header() {
  return "experiment,seed,layer,K,p,mapping,train_mse,test_mse,root,root_err,"
         "max_abs_err,wall_s,status";
}

std::string csv_format(const ResultRow& row) {
  std::ostringstream out;
  out << row.experiment << ',' << row.seed << ',' << row.layer << ','
      << fmt_g17(row.K) << ',' << fmt_g17(row.p) << ',' << row.mapping << ','
      << fmt_g17(row.train_mse) << ',' << fmt_g17(row.test_mse) << ','
      << fmt_g17(row.root) << ',' << fmt_g17(row.root_err) << ','
      << fmt_g17(row.max_abs_err) << ',' << fmt_g17(row.wall_s) << ','
      << row.status;
  return out.str();
}

ResultRow csv_parse_row(const std::string& line) {
  const std::vector<std::string> f = split_csv(line);
  if (f.size() != 13)
    throw ValueError("expected 13 CSV fields, got " + std::to_string(f.size()));
  auto num = [&](int i) { return std::stod(f[size_t(i)]); };
  ResultRow row;
  row.experiment = f[0];
  row.seed = std::stoull(f[1]);
  row.layer = f[2];
  row.K = num(3);
  row.p = num(4);
  row.mapping = f[5];
  row.train_mse = num(6);
  row.test_mse = num(7);
  row.root = num(8);
  row.root_err = num(9);
  row.max_abs_err = num(10);
  row.wall_s = num(11);
  row.status = f[12];
  return row;
}

ResultRow run_one_seed(const ExperimentConfig& cfg, std::uint64_t seed) {
  ResultRow row;
  row.experiment = cfg.experiment;
  row.seed = seed;
  row.layer = cfg.layer;
  row.K = cfg.K;
  if (is_pade(cfg.layer)) row.p = cfg.p;
  row.mapping = cfg.mapping;
  row.config_hash = config_hash(cfg);

  const double t0 = now_seconds();
  try {
    Network net = build_network(cfg);
    Rng rng(seed, Stream::Init);
    net.init(rng);
    OptimConfig opt{cfg.optimizer, cfg.epochs, cfg.learning_rate};
    TrainReport rep;
    if (cfg.experiment == "regression") {
      const RegressionData data =
          generate_regression_data(target_parse(cfg.target), seed);
      rep = train_regression(net, data, opt);
    } else if (cfg.experiment == "lane-emden") {
      rep = solve_lane_emden(net, cfg.w, opt);
    } else if (cfg.experiment == "elliptic-pde") {
      rep = solve_elliptic_pde(net, opt);
    } else {
      throw ValueError("unknown experiment \"" + cfg.experiment + "\"");
    }
    row.status = rep.status;
    row.train_mse = rep.train_mse;
    row.test_mse = rep.test_mse;
    row.root = rep.root;
    row.root_err = rep.root_err;
    row.max_abs_err = rep.max_abs_err;
  } catch (const Error&) {
    row.status = "error";
  }
  row.wall_s = now_seconds() - t0;
  return row;
}

std::vector<ResultRow> gradcheck_rows(std::uint64_t seed) {
  std::vector<ResultRow> rows;
  for (const char* kind : {"jacobi-rkan", "fjacobi-rkan", "pade-rkan", "fpade-rkan"})
    rows.push_back(gradcheck_one(kind, seed));
  return rows;
}

std::vector<ResultRow> run_sweep(const ExperimentConfig& cfg, int parallel) {
  const std::uint64_t hash = config_hash(cfg);
  if (cfg.experiment == "gradcheck") {
    std::vector<ResultRow> rows;
    for (std::uint64_t seed : cfg.seeds)
      for (ResultRow& row : gradcheck_rows(seed)) {
        row.config_hash = hash;
        rows.push_back(std::move(row));
      }
    return rows;
  }
  const size_t n = cfg.seeds.size();
  std::vector<ResultRow> rows(n);
  if (parallel <= 1) {
    for (size_t i = 0; i < n; ++i) rows[i] = run_one_seed(cfg, cfg.seeds[i]);
    return rows;
  }
  std::atomic<size_t> next{0};
  auto worker = [&]() {
    for (size_t i = next.fetch_add(1); i < n; i = next.fetch_add(1))
      rows[i] = run_one_seed(cfg, cfg.seeds[i]);
  };
  std::vector<std::thread> pool;
  const size_t workers = std::min<size_t>(size_t(parallel), n);
  pool.reserve(workers);
  for (size_t t = 0; t < workers; ++t) pool.emplace_back(worker);
  for (std::thread& t : pool) t.join();
  return rows;
}

std::string summary_line(const ExperimentConfig& cfg,
                         const std::vector<ResultRow>& rows) {
  std::ostringstream out;
  if (cfg.experiment == "gradcheck") {
    double worst = 0.0;
    for (const ResultRow& r : rows) worst = std::max(worst, r.max_abs_err);
    out << "gradcheck: max rel err = " << fmt_g17(worst) << " over "
        << rows.size() << " rows";
    return out.str();
  }
  std::string metric;
  std::vector<double> values;
  for (const ResultRow& r : rows) {
    if (cfg.experiment == "regression") values.push_back(r.test_mse);
    else if (cfg.experiment == "lane-emden") values.push_back(r.root_err);
    else values.push_back(r.max_abs_err);
  }
  if (cfg.experiment == "regression") metric = "test_mse";
  else if (cfg.experiment == "lane-emden") metric = "root_err";
  else metric = "max_abs_err";

  out << cfg.experiment;
  if (cfg.experiment == "regression") out << ' ' << cfg.target;
  if (cfg.experiment == "lane-emden") out << " w=" << cfg.w;
  out << ' ' << cfg.layer << ": median " << metric << " = "
      << fmt_g17(median_of(values)) << " over " << rows.size() << " seeds";
  return out.str();
}

void override_seeds(ExperimentConfig& cfg, const std::string& cli_seeds) {
  auto parse_list = [](const std::string& text) {
    std::vector<std::uint64_t> seeds;
    std::string item;
    std::istringstream in(text);
    while (std::getline(in, item, ',')) {
      size_t pos = 0;
      std::uint64_t v = 0;
      try {
        v = std::stoull(item, &pos);
      } catch (...) {
        throw Error("malformed seed list \"" + text + "\"");
      }
      if (pos != item.size() || item.empty())
        throw Error("malformed seed list \"" + text + "\"");
      seeds.push_back(v);
    }
    if (seeds.empty()) throw Error("empty seed list");
    return seeds;
  };
  const char* env = std::getenv("RKAN_SEED");
  if (env && *env) {
    cfg.seeds = parse_list(env);
    return;
  }
  if (!cli_seeds.empty()) cfg.seeds = parse_list(cli_seeds);
}

std::vector<std::string> replicate_names() {
  return {"table1", "table2", "table3", "table5", "pde"};
}

std::vector<ExperimentConfig> replicate_bundle(const std::string& name) {
  auto cfg_from = [](const std::string& text) { return parse_config(text); };
  std::vector<ExperimentConfig> cfgs;
  if (name == "table1" || name == "table2" || name == "table3") {
    const std::string target =
        name == "table1" ? "F1" : (name == "table2" ? "F2" : "F3");
    const std::string head =
        "[experiment]\nexperiment = regression\ntarget = " + target + "\n";
    cfgs.push_back(cfg_from(head + "[network]\nlayer = jacobi-rkan\nK = 2\n"));
    cfgs.push_back(cfg_from(head + "[network]\nlayer = pade-rkan\nK = 2\np = 3\n"));
  } else if (name == "table5") {
    for (int w = 0; w <= 4; ++w) {
      std::string text = "[experiment]\nexperiment = lane-emden\nw = " +
                         std::to_string(w) + "\n[network]\nK = 6\n";
      if (w >= 2) text += "[output]\nseeds = 1\n";
      cfgs.push_back(cfg_from(text));
    }
  } else if (name == "pde") {
    cfgs.push_back(cfg_from("[experiment]\nexperiment = elliptic-pde\n"));
  } else {
    throw Error("unknown replication bundle \"" + name +
                "\" (expected table1, table2, table3, table5, or pde)");
  }
  return cfgs;
}

int run_and_report(const std::vector<ExperimentConfig>& cfgs, int parallel,
                   const std::string& out_path) {
  std::ofstream out(out_path);
  if (!out) throw Error("cannot write \"" + out_path + "\"");
  out << csv_header() << '\n';
  bool all_ok = true;
  for (const ExperimentConfig& cfg : cfgs) {
    const std::vector<ResultRow> rows = run_sweep(cfg, parallel);
    char hex[32];
    std::snprintf(hex, sizeof hex, "%016" PRIx64, config_hash(cfg));
    out << "# config_hash=" << hex << '\n';
    for (const ResultRow& row : rows) {
      out << csv_format(row) << '\n';
      if (row.status != "ok") all_ok = false;
    }
    std::cout << summary_line(cfg, rows) << std::endl;
  }
  return all_ok ? 0 : 1;
}

}  // namespace rkan
