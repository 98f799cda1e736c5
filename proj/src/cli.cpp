#include "snl/cli.hpp"

#include <algorithm>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "snl/experiments.hpp"
#include "snl/landscape.hpp"
#include "snl/random.hpp"

namespace snl::cli {

namespace {

using io::json;

struct Streams {
  std::istream& in;
  std::ostream& out;
};

std::ifstream open_input(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw InputError("cannot open " + path);
  return f;
}

Matrix load_matrix(const std::string& path, Streams io_) {
  if (path == "-") return io::read_csv_matrix(io_.in);
  auto f = open_input(path);
  return io::read_csv_matrix(f);
}

Operator load_operator(const std::string& path, Streams io_) {
  if (path == "-") return operator_from_json(io::read_json(io_.in));
  auto f = open_input(path);
  return operator_from_json(io::read_json(f));
}

void emit(const std::string& path, Streams io_, const std::function<void(std::ostream&)>& body) {
  if (path == "-") {
    body(io_.out);
    return;
  }
  std::ofstream f(path);
  if (!f) throw InputError("cannot write " + path);
  body(f);
}

// "1,2,4" (1-based) -> {0, 1, 3}
std::vector<std::size_t> parse_subset(const std::string& text) {
  std::vector<std::size_t> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t pos = 0;
    unsigned long long v = 0;
    try {
      v = std::stoull(item, &pos);
    } catch (const std::exception&) {
      throw InputError("subset: '" + item + "' is not an index");
    }
    if (pos != item.size() || v == 0) throw InputError("subset: indices are 1-based integers");
    out.push_back(static_cast<std::size_t>(v - 1));
  }
  if (out.empty()) throw InputError("subset: empty");
  return out;
}

std::string subset_tag(const std::vector<std::size_t>& s) {
  std::string tag;
  for (std::size_t i : s) tag += (tag.empty() ? "" : "-") + std::to_string(i + 1);
  return tag;
}

io::Provenance provenance(const CLI::App* leaf, std::uint64_t seed) {
  io::Provenance p;
  p.seed = seed;
  std::string canonical = leaf->get_name() + "\n" + leaf->config_to_str(true, false);
  p.config_hash = io::config_hash(canonical);
  return p;
}

// Graph construction flags shared by `graph build` and one-shot `spectrum`.
struct GraphFlags {
  std::string input;
  std::string rule = "kernel";
  std::string kernel = "gaussian";
  double eps = 0.0;
  std::size_t k = 0;
  double shift = 1.5;

  void add(CLI::App* app, bool input_required) {
    auto* opt = app->add_option("--input", input, "point cloud CSV, one point per row ('-' for stdin)");
    if (input_required) opt->required();
    app->add_option("--rule", rule, "kernel | knn | gram")
        ->check(CLI::IsMember({"kernel", "knn", "gram"}));
    app->add_option("--kernel", kernel, "indicator | gaussian | exponential")
        ->check(CLI::IsMember({"indicator", "gaussian", "exponential"}));
    app->add_option("--eps", eps, "kernel bandwidth");
    app->add_option("--k", k, "neighbours for the knn rule");
    app->add_option("--shift", shift, "diagonal shift a > 1 for graph rules");
  }

  Operator build(Streams io_) const {
    PointCloud cloud = make_cloud(load_matrix(input, io_), CloudSource::file);
    if (rule == "gram") return gram_operator(cloud);
    if (rule == "knn") {
      if (k == 0) throw InputError("graph: --k is required for the knn rule");
      return adjacency_operator(build_knn_graph(cloud, k), shift);
    }
    if (!(eps > 0.0)) throw InputError("graph: --eps must be positive for the kernel rule");
    return adjacency_operator(build_kernel_graph(cloud, eps, parse_kernel(kernel)), shift);
  }
};

struct RegionFlags {
  RegionParams p;
  void add(CLI::App* app) {
    app->add_option("--mu", p.mu, "R1 radius factor");
    app->add_option("--alpha", p.alpha, "R2 gradient factor");
    app->add_option("--beta", p.beta, "norm bound factor");
    app->add_option("--gamma", p.gamma, "Gram norm bound factor");
  }
};

json escape_json(const EscapeReport& e) {
  return {{"which", to_string(e.which)},
          {"hess_value", e.hess_value},
          {"status", to_string(e.status)},
          {"regime", e.certificate.regime}};
}

Factor initial_factor(const std::string& init, const Operator& op, const SpectralTarget& target,
                      std::size_t r, double perturb, std::uint64_t seed) {
  Rng rng(seed);
  Matrix y;
  if (init == "optimal") {
    y = target.factor.mat();
  } else if (init == "random") {
    const double scale = frobenius_norm(target.factor.mat()) /
                         std::sqrt(static_cast<double>(op.n() * r));
    return Factor(gaussian_matrix(op.n(), r, rng, scale));
  } else if (init.rfind("saddle:", 0) == 0) {
    y = enumerate_fosp(op, parse_subset(init.substr(7)), r).mat();
  } else {
    throw InputError("--init must be optimal, random or saddle:i,j,...");
  }
  if (perturb > 0.0) y += gaussian_matrix(y.rows(), y.cols(), rng, perturb);
  return Factor(std::move(y));
}

void require_seed(const CLI::Option* seed) {
  if (seed->count() == 0) throw InputError("--seed is required for experiments");
}

}  // namespace

int run(const std::vector<std::string>& args, std::istream& in, std::ostream& out,
        std::ostream& err) {
  Streams io_{in, out};
  CLI::App app{"Spectral contrastive landscape toolkit", "snl"};
  app.set_version_flag("--version", std::string(SNL_VERSION));
  app.require_subcommand(1);
  // One config file for every subcommand; keys sit under [subcommand] sections,
  // e.g. [ambient-train] or [experiment.fig1]. Subcommands fall through to it.
  app.set_config("--config", "", "INI/TOML file with [subcommand] sections");
  app.fallthrough();

  // graph build
  auto* graph = app.add_subcommand("graph", "similarity graphs and operators");
  graph->require_subcommand(1);
  auto* graph_build = graph->add_subcommand("build", "build the operator from a point cloud");
  GraphFlags gb;
  gb.add(graph_build, true);
  std::string gb_out = "-";
  graph_build->add_option("--out", gb_out, "operator JSON ('-' for stdout)");

  // spectrum
  auto* spectrum = app.add_subcommand("spectrum", "eigenvalues of an operator, descending");
  std::string sp_operator;
  std::size_t sp_top = 0;
  bool sp_json = false;
  GraphFlags sp_graph;
  spectrum->add_option("--operator", sp_operator, "operator JSON ('-' for stdin)");
  sp_graph.add(spectrum, false);
  spectrum->add_option("--top", sp_top, "number of eigenvalues (default all)");
  spectrum->add_flag("--json", sp_json, "JSON output");

  // ambient-train
  auto* ambient = app.add_subcommand("ambient-train", "gradient descent on the factor Y");
  std::string am_operator, am_out = "-", am_factor_out, am_init = "random";
  std::size_t am_r = 0;
  double am_perturb = 0.0;
  DescentConfig am_cfg;
  std::string am_schedule = "constant";
  bool am_escape = false;
  RegionFlags am_regions;
  ambient->add_option("--operator", am_operator, "operator JSON")->required();
  ambient->add_option("--r", am_r, "rank")->required();
  ambient->add_option("--init", am_init, "optimal | random | saddle:i,j,... (1-based)");
  ambient->add_option("--perturb", am_perturb, "std of Gaussian noise added to the init");
  ambient->add_option("--lr", am_cfg.lr, "learning rate");
  ambient->add_option("--iters", am_cfg.iters, "iterations");
  ambient->add_option("--schedule", am_schedule)->check(CLI::IsMember({"constant", "cosine"}));
  ambient->add_option("--record-every", am_cfg.record_every);
  ambient->add_option("--grad-tol", am_cfg.grad_tol, "stop once the gradient norm drops below");
  ambient->add_flag("--escape", am_escape, "take negative-curvature steps in R2");
  ambient->add_option("--escape-step", am_cfg.escape_step);
  ambient->add_option("--seed", am_cfg.seed);
  am_regions.add(ambient);
  ambient->add_option("--out", am_out, "trajectory CSV ('-' for stdout)");
  ambient->add_option("--factor-out", am_factor_out, "final factor CSV");

  // snn-train
  auto* snn = app.add_subcommand("snn-train", "train a ReLU net on the contrastive loss");
  std::string sn_cloud, sn_operator, sn_out, sn_traj, sn_method = "adam", sn_schedule = "constant";
  std::string sn_pretrain = "none";
  std::size_t sn_r = 0, sn_width = 64, sn_depth = 2, sn_pretrain_iters = 10000;
  std::optional<double> sn_pretrain_lr, sn_kappa;
  bool sn_clip = false;
  TrainConfig sn_cfg;
  RegionFlags sn_regions;
  snn->add_option("--cloud", sn_cloud, "point cloud CSV")->required();
  snn->add_option("--operator", sn_operator, "operator JSON")->required();
  snn->add_option("--r", sn_r, "output width")->required();
  snn->add_option("--width", sn_width, "hidden width");
  snn->add_option("--depth", sn_depth, "number of layers");
  snn->add_option("--method", sn_method)->check(CLI::IsMember({"full_gd", "minibatch_pairs", "adam"}));
  snn->add_option("--lr", sn_cfg.lr);
  snn->add_option("--iters", sn_cfg.iters);
  snn->add_option("--batch-pairs", sn_cfg.batch_pairs);
  snn->add_flag("--scale-minibatch", sn_cfg.scale_minibatch, "scale pair gradients by n^2/batch");
  snn->add_option("--schedule", sn_schedule)->check(CLI::IsMember({"constant", "cosine"}));
  snn->add_option("--record-every", sn_cfg.record_every);
  snn->add_option("--pretrain", sn_pretrain, "none | optimal | saddle:i,j,... (1-based)");
  snn->add_option("--pretrain-iters", sn_pretrain_iters);
  snn->add_option("--pretrain-lr", sn_pretrain_lr, "defaults to --lr");
  snn->add_option("--kappa", sn_kappa, "entrywise parameter bound");
  snn->add_flag("--clip", sn_clip, "clip parameters to [-kappa, kappa] after each step");
  snn->add_option("--seed", sn_cfg.seed);
  sn_regions.add(snn);
  snn->add_option("--out", sn_out, "network checkpoint JSON");
  snn->add_option("--traj", sn_traj, "trajectory CSV ('-' for stdout)");

  // landscape
  auto* landscape = app.add_subcommand("landscape", "region labels and stationary points");
  landscape->require_subcommand(1);
  auto* classify_cmd = landscape->add_subcommand("classify", "label a factor");
  std::string lc_factor, lc_operator;
  bool lc_json = false;
  RegionFlags lc_regions;
  classify_cmd->add_option("--factor", lc_factor, "factor CSV (n x r)")->required();
  classify_cmd->add_option("--operator", lc_operator, "operator JSON")->required();
  lc_regions.add(classify_cmd);
  classify_cmd->add_flag("--json", lc_json, "JSON output");
  auto* saddles_cmd = landscape->add_subcommand("saddles", "write the stationary points");
  std::string ls_operator, ls_out = ".";
  std::size_t ls_r = 0;
  bool ls_all = false;
  std::vector<std::string> ls_subsets;
  saddles_cmd->add_option("--operator", ls_operator, "operator JSON")->required();
  saddles_cmd->add_option("--r", ls_r, "rank")->required();
  saddles_cmd->add_flag("--all-subsets", ls_all, "every r-subset of eigenpairs");
  saddles_cmd->add_option("--subset", ls_subsets, "1-based indices i,j,... (repeatable)");
  saddles_cmd->add_option("--out", ls_out, "output directory");

  // experiment
  auto* experiment = app.add_subcommand("experiment", "figure pipelines");
  experiment->require_subcommand(1);
  auto* fig1 = experiment->add_subcommand("fig1", "eigenvector illustration on a sphere");
  Fig1Config f1;
  std::string f1_out = ".", f1_method = "adam";
  auto* f1_seed = fig1->add_option("--seed", f1.seed);
  fig1->add_option("--n", f1.n);
  fig1->add_option("--k", f1.k);
  fig1->add_option("--width", f1.width);
  fig1->add_option("--depth", f1.depth);
  fig1->add_option("--method", f1_method)->check(CLI::IsMember({"full_gd", "adam"}));
  fig1->add_option("--lr", f1.lr);
  fig1->add_option("--iters", f1.iters);
  fig1->add_option("--out", f1_out, "output directory");

  auto* fig23 = experiment->add_subcommand("fig2_fig3", "ambient vs network training");
  Fig23Config f23;
  std::string f23_out = ".", f23_points, f23_saddle, f23_method = "full_gd", f23_schedule = "cosine";
  std::string f23_pre_method = "adam", f23_nn_schedule = "constant";
  bool f23_skip_nn = false;
  auto* f23_seed = fig23->add_option("--seed", f23.seed);
  fig23->add_option("--points", f23_points, "point CSV (default: synthetic clusters)");
  fig23->add_option("--n", f23.n);
  fig23->add_option("--d", f23.d);
  fig23->add_option("--clusters", f23.clusters);
  fig23->add_option("--noise", f23.noise);
  fig23->add_option("--r", f23.r);
  fig23->add_option("--saddle", f23_saddle, "1-based eigenpair indices i,j,...");
  fig23->add_option("--perturb", f23.perturb);
  fig23->add_option("--ambient-lr", f23.ambient_lr);
  fig23->add_option("--ambient-iters", f23.ambient_iters);
  fig23->add_option("--width", f23.width);
  fig23->add_option("--nn-method", f23_method)->check(CLI::IsMember({"full_gd", "adam"}));
  fig23->add_option("--nn-lr", f23.nn_lr);
  fig23->add_option("--nn-iters", f23.nn_iters);
  fig23->add_option("--nn-schedule", f23_nn_schedule)->check(CLI::IsMember({"constant", "cosine"}));
  fig23->add_option("--pretrain-method", f23_pre_method)->check(CLI::IsMember({"full_gd", "adam"}));
  fig23->add_option("--pretrain-lr", f23.pretrain_lr);
  fig23->add_option("--pretrain-optimal-iters", f23.pretrain_optimal_iters);
  fig23->add_option("--pretrain-saddle-iters", f23.pretrain_saddle_iters);
  fig23->add_option("--weight-perturb", f23.weight_perturb);
  fig23->add_option("--schedule", f23_schedule)->check(CLI::IsMember({"constant", "cosine"}));
  fig23->add_option("--record-every", f23.record_every);
  fig23->add_option("--plateau-min-length", f23.plateau_min_length);
  fig23->add_flag("--skip-nn", f23_skip_nn, "run the ambient arms only");
  fig23->add_option("--out", f23_out, "output directory");

  auto fail = [&](const char* kind, const std::string& message, int code) {
    err << json{{"error", kind}, {"message", message}}.dump() << '\n';
    return code;
  };

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::Success& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    return fail("usage", e.what(), 1);
  }

  try {
    if (graph_build->parsed()) {
      const Operator op = gb.build(io_);
      json j = operator_to_json(op);
      j["provenance"] = provenance(graph_build, 0).to_json();
      emit(gb_out, io_, [&](std::ostream& o) { o << j.dump() << '\n'; });
    } else if (spectrum->parsed()) {
      if (sp_operator.empty() == sp_graph.input.empty())
        throw InputError("spectrum: give exactly one of --operator or --input");
      const Operator op = sp_operator.empty() ? sp_graph.build(io_) : load_operator(sp_operator, io_);
      const std::size_t count = sp_top == 0 ? op.n() : std::min(sp_top, op.n());
      std::vector<double> vals(op.eig.values.begin(), op.eig.values.begin() + count);
      if (sp_json) {
        out << json{{"eigenvalues", vals}}.dump() << '\n';
      } else {
        for (double v : vals) out << io::format_double(v) << '\n';
      }
    } else if (ambient->parsed()) {
      const Operator op = load_operator(am_operator, io_);
      const SpectralTarget target = optimal_factor(op, am_r);
      am_cfg.schedule = parse_schedule(am_schedule);
      am_cfg.regions = am_regions.p;
      am_cfg.escape_enabled = am_escape;
      const Factor y0 = initial_factor(am_init, op, target, am_r, am_perturb, am_cfg.seed);
      const DescentResult res = am_escape
                                    ? escape_enabled_descent(y0, op.matrix, target, am_cfg, am_regions.p)
                                    : gradient_descent(y0, op.matrix, target, am_cfg);
      const io::Provenance prov = provenance(ambient, am_cfg.seed);
      emit(am_out, io_, [&](std::ostream& o) { res.trajectory.write_csv(o, &prov); });
      if (!am_factor_out.empty()) {
        emit(am_factor_out, io_, [&](std::ostream& o) {
          o << prov.csv_comment() << '\n';
          io::write_csv_matrix(o, res.y.mat());
        });
      }
      if (am_out != "-") {
        const auto& last = res.trajectory.records.back();
        out << json{{"iterations", res.iterations},
                    {"escape_events", res.escape_events},
                    {"loss", last.loss},
                    {"grad_norm", last.grad_norm},
                    {"dist", last.dist}}
                   .dump()
            << '\n';
      }
    } else if (snn->parsed()) {
      const Matrix points = load_matrix(sn_cloud, io_);
      const Operator op = load_operator(sn_operator, io_);
      if (points.rows() != op.n()) throw InputError("snn-train: cloud and operator sizes differ");
      const SpectralTarget target = optimal_factor(op, sn_r);
      sn_cfg.method = parse_train_method(sn_method);
      sn_cfg.schedule = parse_schedule(sn_schedule);
      sn_cfg.regions = sn_regions.p;
      ReluNet net = make_relu_net(architecture(points.cols(), sn_width, sn_depth, sn_r), sn_cfg.seed);
      net.kappa = sn_kappa;
      net.clip = sn_clip;
      if (sn_clip && !sn_kappa) throw InputError("snn-train: --clip needs --kappa");
      std::optional<double> pre_residual;
      if (sn_pretrain != "none") {
        Matrix goal;
        if (sn_pretrain == "optimal") {
          goal = target.factor.mat();
        } else if (sn_pretrain.rfind("saddle:", 0) == 0) {
          goal = enumerate_fosp(op, parse_subset(sn_pretrain.substr(7)), sn_r).mat();
        } else {
          throw InputError("--pretrain must be none, optimal or saddle:i,j,...");
        }
        TrainConfig pre = sn_cfg;
        if (pre.method == TrainMethod::minibatch_pairs) pre.method = TrainMethod::adam;
        pre.iters = sn_pretrain_iters;
        pre.lr = sn_pretrain_lr.value_or(sn_cfg.lr);
        PretrainResult p = pretrain_to_target(std::move(net), points, goal, pre);
        pre_residual = p.residual;
        net = std::move(p.net);
      }
      const TrainResult res = train(std::move(net), points, op.matrix, target, sn_cfg);
      const io::Provenance prov = provenance(snn, sn_cfg.seed);
      if (!sn_traj.empty())
        emit(sn_traj, io_, [&](std::ostream& o) { res.trajectory.write_csv(o, &prov); });
      if (!sn_out.empty()) {
        json j = net_to_json(res.net);
        j["provenance"] = prov.to_json();
        emit(sn_out, io_, [&](std::ostream& o) { o << j.dump() << '\n'; });
      }
      if (sn_traj != "-" && sn_out != "-") {
        const auto& last = res.trajectory.records.back();
        json s{{"iterations", res.iterations}, {"loss", last.loss}, {"dist", last.dist}};
        if (pre_residual) s["pretrain_residual"] = *pre_residual;
        out << s.dump() << '\n';
      }
    } else if (classify_cmd->parsed()) {
      const Factor y(load_matrix(lc_factor, io_));
      const Operator op = load_operator(lc_operator, io_);
      if (y.n() != op.n()) throw InputError("classify: factor has " + std::to_string(y.n()) +
                                            " rows, operator is " + std::to_string(op.n()));
      const SpectralTarget target = optimal_factor(op, y.r());
      const Classification c = classify(y, op.matrix, target, lc_regions.p);
      json j{{"labels", c.labels.names()},
             {"grad_norm", c.grad_norm},
             {"distance_to_opt", c.distance}};
      j["escape"] = escape_json(escape_direction(y, op.matrix, target, lc_regions.p));
      if (lc_json) {
        out << j.dump() << '\n';
      } else {
        out << "labels: " << c.labels.joined() << "\ngrad_norm: " << io::format_double(c.grad_norm)
            << "\ndistance_to_opt: " << io::format_double(c.distance) << '\n';
      }
    } else if (saddles_cmd->parsed()) {
      const Operator op = load_operator(ls_operator, io_);
      std::vector<std::vector<std::size_t>> subsets;
      if (ls_all) subsets = all_subsets(op.n(), ls_r);
      for (const auto& s : ls_subsets) subsets.push_back(parse_subset(s));
      if (subsets.empty()) throw InputError("saddles: pass --all-subsets or --subset");
      const SpectralTarget target = optimal_factor(op, ls_r);
      const io::Provenance prov = provenance(saddles_cmd, 0);
      std::filesystem::create_directories(ls_out);
      json index = json::array();
      for (const auto& s : subsets) {
        const Factor y = enumerate_fosp(op, s, ls_r);
        const std::string file = "saddle_" + subset_tag(s) + ".csv";
        emit((std::filesystem::path(ls_out) / file).string(), io_, [&](std::ostream& o) {
          o << prov.csv_comment() << '\n';
          io::write_csv_matrix(o, y.mat());
        });
        std::vector<std::size_t> one_based(s);
        for (auto& i : one_based) ++i;
        index.push_back({{"subset", one_based},
                         {"file", file},
                         {"loss", loss(y, op.matrix)},
                         {"grad_norm", frobenius_norm(riem_grad(y, op.matrix).entries)},
                         {"escape", escape_json(escape_direction(y, op.matrix, target))}});
      }
      json j{{"provenance", prov.to_json()}, {"r", ls_r}, {"saddles", index}};
      io::write_json(std::filesystem::path(ls_out) / "index.json", j);
      out << j.dump() << '\n';
    } else if (fig1->parsed()) {
      require_seed(f1_seed);
      f1.method = parse_train_method(f1_method);
      const Fig1Result res = run_fig1(f1);
      write_fig1(res, f1, f1_out);
      out << json{{"relative_sup_discrepancy", res.relative_sup},
                  {"l2_discrepancy", res.l2_discrepancy},
                  {"out", f1_out}}
                 .dump()
          << '\n';
    } else if (fig23->parsed()) {
      require_seed(f23_seed);
      if (!f23_points.empty()) f23.points = load_matrix(f23_points, io_);
      if (!f23_saddle.empty()) f23.saddle = parse_subset(f23_saddle);
      f23.nn_method = parse_train_method(f23_method);
      f23.schedule = parse_schedule(f23_schedule);
      f23.pretrain_method = parse_train_method(f23_pre_method);
      f23.nn_schedule = parse_schedule(f23_nn_schedule);
      f23.run_nn = !f23_skip_nn;
      const Fig23Result res = run_fig2_fig3(f23);
      write_fig2_fig3(res, f23, f23_out);
      json arms = json::object();
      for (const auto& arm : res.arms) {
        if (!arm.ran) continue;
        arms[arm.name] = {{"grad_reduction", arm.signature.grad_reduction},
                          {"plateau_found", arm.signature.plateau.found}};
      }
      out << json{{"arms", arms}, {"out", f23_out}}.dump() << '\n';
    }
  } catch (const NumericalError& e) {
    return fail("numerical", e.what(), 2);
  } catch (const InputError& e) {
    return fail("input", e.what(), 1);
  } catch (const json::exception& e) {
    return fail("input", e.what(), 1);
  } catch (const std::filesystem::filesystem_error& e) {
    return fail("input", e.what(), 1);
  } catch (const std::exception& e) {
    return fail("numerical", e.what(), 2);
  }
  return 0;
}

}  // namespace snl::cli
