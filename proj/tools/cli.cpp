#include "cli.hpp"

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "server.hpp"
#include "uaml/edl.hpp"
#include "uaml/error.hpp"
#include "uaml/inference.hpp"
#include "uaml/json.hpp"
#include "uaml/network.hpp"
#include "uaml/oracle.hpp"
#include "uaml/problog.hpp"
#include "uaml/scenario.hpp"
#include "uaml/service.hpp"

#ifndef UAML_DEFAULT_UI_DIR
#define UAML_DEFAULT_UI_DIR ""
#endif

namespace uaml::cli {

namespace {

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot read '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIo, "cannot write '" + path + "'");
  out << text;
}

NetworkSpec load_spec(const std::string& path) {
  LoadedNetwork loaded = network_from_json(read_json_file(path));
  if (auto* pn = std::get_if<PointNetwork>(&loaded)) return dogmatic_network(*pn);
  return std::get<NetworkSpec>(std::move(loaded));
}

EvidenceSet load_evidence(const std::string& path) {
  if (path.empty()) return {};
  return evidence_from_json(read_json_file(path));
}

std::size_t edit_distance(std::string_view a, std::string_view b) {
  std::vector<std::size_t> prev(b.size() + 1), cur(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1)});
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

// "--sed" -> "--seed" among the options of the active subcommand.
std::string suggest_flag(const CLI::App& app, const std::vector<std::string>& args) {
  const CLI::App* scope = &app;
  for (const auto& a : args) {
    if (a.rfind('-', 0) == 0) continue;
    if (auto* sub = app.get_subcommand_no_throw(a)) {
      scope = sub;
      break;
    }
  }
  std::string out;
  for (const auto& a : args) {
    if (a.rfind("--", 0) != 0) continue;
    const std::string name = a.substr(0, a.find('='));
    bool known = false;
    std::string best;
    std::size_t best_d = 3;
    for (const CLI::Option* opt : scope->get_options()) {
      for (const auto& ln : opt->get_lnames()) {
        const std::string flag = "--" + ln;
        if (flag == name) known = true;
        const std::size_t d = edit_distance(name, flag);
        if (d < best_d) {
          best_d = d;
          best = flag;
        }
      }
    }
    if (!known && !best.empty()) out += "unknown flag '" + name + "'; did you mean '" + best + "'?\n";
  }
  return out;
}

void configure_logging(std::ostream& err) {
  (void)err;
  static const bool configured = [] {
    auto logger = spdlog::stderr_color_st("uaml");
    spdlog::set_default_logger(logger);
    spdlog::set_level(spdlog::level::warn);
    if (const char* env = std::getenv("UAML_LOG")) {
      spdlog::set_level(spdlog::level::from_str(env));
    }
    return true;
  }();
  (void)configured;
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

std::string inference_table(const Json& doc) {
  std::ostringstream out;
  char buf[200];
  std::snprintf(buf, sizeof buf, "%-10s %-26s %-8s %-10s %-20s\n", "node", "beliefs", "u",
                "P(first)", "90% interval");
  out << buf;
  for (const auto& [node, op] : doc.at("opinions").items()) {
    std::string beliefs;
    for (const auto& b : op.at("beliefs")) {
      if (!beliefs.empty()) beliefs += ", ";
      beliefs += fmt("%.4f", b.get<double>());
    }
    const auto& iv = op.at("interval90");
    std::snprintf(buf, sizeof buf, "%-10s %-26s %-8.4f %-10.4f [%.4f, %.4f]\n", node.c_str(),
                  ("(" + beliefs + ")").c_str(), op.at("uncertainty").get<double>(),
                  op.at("projected")[0].get<double>(), iv[0].get<double>(), iv[1].get<double>());
    out << buf;
  }
  if (doc.contains("attribution")) {
    for (const auto& entry : doc["attribution"]) {
      out << entry.at("target").get<std::string>() << " uncertainty sources:";
      std::size_t shown = 0;
      for (const auto& r : entry.at("ranking")) {
        if (shown++ == 3) break;
        out << "  " << r.at("label").get<std::string>() << " ("
            << fmt("%.4f", r.at("delta_u").get<double>()) << ")";
      }
      out << "\n";
    }
  }
  return out.str();
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, sep)) {
    if (!cur.empty()) out.push_back(cur);
  }
  return out;
}

struct Options {
  std::string format = "json";
  bool precise = false;

  Precision precision() const { return precise ? Precision::kFull : Precision::kDisplay; }
};

void add_format(CLI::App* cmd, Options& o) {
  cmd->add_option("--format", o.format, "Output format")
      ->check(CLI::IsMember({"json", "table"}))
      ->capture_default_str();
}

void add_precise(CLI::App* cmd, Options& o) {
  cmd->add_flag("--precise", o.precise, "Emit full double precision instead of 6 significant digits");
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  configure_logging(err);

  CLI::App app{"Uncertainty-aware inference with subjective opinions", "uaml"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Show help for every subcommand");

  Options common;

  // infer
  std::string model_path, evidence_path;
  bool no_attribution = false;
  auto* infer = app.add_subcommand("infer", "Infer opinions for every latent node");
  infer->add_option("--model", model_path, "Network JSON (opinion or point rows)")->required();
  infer->add_option("--evidence", evidence_path, "Evidence JSON with 'hard' and 'soft' maps");
  infer->add_flag("--no-attribution", no_attribution, "Skip uncertainty attribution");
  add_format(infer, common);
  add_precise(infer, common);

  // learn
  std::string structure_path, records_path;
  auto* learn = app.add_subcommand("learn", "Learn opinion CPTs from complete records");
  learn->add_option("--structure", structure_path, "Network JSON; only nodes/states/parents are read")
      ->required();
  learn->add_option("--records", records_path, "Records JSON (array of node -> state maps)")
      ->required();
  add_precise(learn, common);

  // sample
  std::size_t n_records = 100;
  std::uint64_t seed = 1;
  auto* sample = app.add_subcommand("sample", "Sample complete records from a point network");
  sample->add_option("--model", model_path,
                     "Point-network JSON (default: the built-in route-planning ground truth)");
  sample->add_option("--n", n_records, "Number of records")->capture_default_str();
  sample->add_option("--seed", seed, "Random seed")->capture_default_str();

  // oracle
  OracleConfig oracle_cfg;
  std::string targets;
  auto* oracle = app.add_subcommand("oracle", "Monte-Carlo reference opinions by enumeration");
  oracle->add_option("--model", model_path, "Network JSON")->required();
  oracle->add_option("--evidence", evidence_path, "Evidence JSON");
  oracle->add_option("--samples", oracle_cfg.n_samples, "Number of samples")->capture_default_str();
  oracle->add_option("--seed", oracle_cfg.seed, "Random seed")->capture_default_str();
  oracle->add_option("--threads", oracle_cfg.threads, "Worker threads (0: all cores)");
  oracle->add_option("--targets", targets, "Comma-separated target nodes (default: all latent)");
  add_format(oracle, common);
  add_precise(oracle, common);

  // scenario
  scenario::ScenarioConfig sc_cfg;
  std::string row_sel = "all";
  auto* scen = app.add_subcommand("scenario", "Reproduce the route-planning study");
  scen->add_option("--seed", sc_cfg.seed, "First seed")->capture_default_str();
  scen->add_option("--seeds", sc_cfg.n_seeds, "Number of seeds; medians are reported")
      ->capture_default_str();
  scen->add_option("--row", row_sel, "Evidence row: all or 1..5")->capture_default_str();
  scen->add_option("--n-instantiations", sc_cfg.n_instantiations, "Records per seed")
      ->capture_default_str();
  add_format(scen, common);
  add_precise(scen, common);

  // edl-demo
  edl::TrainConfig edl_cfg;
  std::string svg_path, save_model, load_model;
  bool no_reg = false;
  auto* edl_cmd = app.add_subcommand("edl-demo", "Train the toy evidential classifier and probe it");
  edl_cmd->add_option("--seed", edl_cfg.seed, "Seed for data and initialisation")->capture_default_str();
  edl_cmd->add_option("--epochs", edl_cfg.epochs, "Training epochs")->capture_default_str();
  edl_cmd->add_option("--lr", edl_cfg.learning_rate, "Learning rate")->capture_default_str();
  edl_cmd->add_option("--hidden", edl_cfg.hidden, "Hidden units")->capture_default_str();
  edl_cmd->add_flag("--no-regularizer", no_reg, "Pin the regularizer weight to 0");
  edl_cmd->add_option("--svg", svg_path, "Write a feature-space scatter plot");
  edl_cmd->add_option("--save-model", save_model, "Write the trained model JSON");
  edl_cmd->add_option("--load-model", load_model, "Probe a saved model instead of training");
  add_precise(edl_cmd, common);

  // problog
  std::string program_path, query, evidence_atoms;
  std::size_t pl_samples = 10000;
  std::uint64_t pl_seed = 1;
  auto* pl = app.add_subcommand("problog", "Success probability of a ground ProbLog query");
  pl->add_option("program", program_path, "Program file")->required();
  pl->add_option("--query", query, "Query atom")->required();
  pl->add_option("--evidence", evidence_atoms, "Evidence atoms, e.g. a=true,b=false");
  pl->add_option("--samples", pl_samples, "Samples for beta-valued facts")->capture_default_str();
  pl->add_option("--seed", pl_seed, "Random seed")->capture_default_str();
  add_precise(pl, common);

  // serve
  std::string host = "127.0.0.1";
  int port = 8080;
  std::string ui_dir = UAML_DEFAULT_UI_DIR;
  auto* serve = app.add_subcommand("serve", "Serve the JSON inference API over HTTP");
  serve->add_option("--model", model_path, "Network JSON")->required();
  serve->add_option("--host", host, "Bind address")->capture_default_str();
  serve->add_option("--port", port, "Port (0 picks a free port)")->capture_default_str();
  serve->add_option("--ui-dir", ui_dir, "Static UI bundle directory");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    const CLI::App* scope = &app;
    for (const auto* sub : app.get_subcommands()) scope = sub;
    out << scope->help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << "\n";
    err << suggest_flag(app, args);
    err << "run with --help for usage\n";
    return kExitUsage;
  }

  std::vector<std::size_t> rows;
  if (scen->parsed() && row_sel != "all") {
    try {
      const long r = std::stol(row_sel);
      if (r < 1 || r > 5) throw std::out_of_range("row");
      rows.push_back(static_cast<std::size_t>(r));
    } catch (const std::exception&) {
      err << "usage error: --row must be 'all' or 1..5, got '" << row_sel << "'\n";
      return kExitUsage;
    }
  }
  std::vector<std::pair<std::string, bool>> pl_evidence;
  if (pl->parsed()) {
    for (const auto& item : split(evidence_atoms, ',')) {
      const auto eq = item.find('=');
      const std::string atom = item.substr(0, eq);
      const std::string value = eq == std::string::npos ? "true" : item.substr(eq + 1);
      if (value != "true" && value != "false") {
        err << "usage error: evidence value for '" << atom << "' must be true or false\n";
        return kExitUsage;
      }
      pl_evidence.emplace_back(atom, value == "true");
    }
  }

  try {
    const Precision precision = common.precision();
    if (infer->parsed()) {
      const NetworkSpec net = load_spec(model_path);
      require_valid(validate_network(net));
      const EvidenceSet ev = load_evidence(evidence_path);
      spdlog::debug("infer: {} nodes, {} hard, {} soft", net.structure.size(), ev.hard.size(),
                    ev.soft.size());
      const Json doc = service::infer_document(net, ev, !no_attribution, precision);
      out << (common.format == "table" ? inference_table(doc) : dump_json(doc));
    } else if (learn->parsed()) {
      const Structure s = structure_from_json(read_json_file(structure_path));
      const auto records = records_from_json(s, read_json_file(records_path));
      out << dump_json(network_to_json(learn_conditionals(s, records), precision));
    } else if (sample->parsed()) {
      PointNetwork pn;
      if (model_path.empty()) {
        pn = scenario::build_ground_truth();
      } else {
        LoadedNetwork loaded = network_from_json(read_json_file(model_path));
        if (auto* p = std::get_if<PointNetwork>(&loaded)) {
          pn = std::move(*p);
        } else {
          pn = mean_network(std::get<NetworkSpec>(loaded));
        }
      }
      require_valid(validate_network(pn));
      out << dump_json(records_to_json(pn.structure, sample_instantiations(pn, n_records, seed)));
    } else if (oracle->parsed()) {
      const NetworkSpec net = load_spec(model_path);
      const EvidenceSet ev = load_evidence(evidence_path);
      oracle_cfg.targets = split(targets, ',');
      const auto result = oracle_infer(net, ev, oracle_cfg);
      if (common.format == "table") {
        char buf[160];
        std::snprintf(buf, sizeof buf, "%-10s %-10s %-12s %-10s %-10s\n", "node", "mean",
                      "variance", "strength", "u");
        out << buf;
        for (const auto& [node, sm] : result) {
          std::snprintf(buf, sizeof buf, "%-10s %-10.4f %-12.6f %-10.2f %-10.4f\n", node.c_str(),
                        sm.mean, sm.variance, sm.opinion.strength(), sm.opinion.uncertainty());
          out << buf;
        }
      } else {
        Json doc;
        doc["samples"] = oracle_cfg.n_samples;
        doc["seed"] = oracle_cfg.seed;
        Json ops = Json::object();
        auto r = [&](double v) { return precision == Precision::kFull ? v : round_significant(v); };
        for (const auto& [node, sm] : result) {
          Json o = to_json(sm.opinion, precision);
          o["mean"] = r(sm.mean);
          o["variance"] = r(sm.variance);
          ops[node] = std::move(o);
        }
        doc["opinions"] = std::move(ops);
        out << dump_json(doc);
      }
    } else if (scen->parsed()) {
      sc_cfg.rows = rows;
      const auto report = scenario::run_scenario(sc_cfg);
      out << (common.format == "table" ? scenario::report_to_table(report)
                                       : dump_json(scenario::report_to_json(report, precision)));
    } else if (edl_cmd->parsed()) {
      edl_cfg.regularize = !no_reg;
      const auto data = edl::make_synthetic(edl_cfg.seed);
      Json doc;
      doc["seed"] = edl_cfg.seed;
      std::optional<edl::ToyClassifier> model;
      auto r = [&](double v) { return precision == Precision::kFull ? v : round_significant(v); };
      if (!load_model.empty()) {
        model = edl::ToyClassifier::from_json(read_json_file(load_model));
      } else {
        auto trained = edl::train_toy(data.points, edl_cfg);
        doc["epochs"] = edl_cfg.epochs;
        doc["regularized"] = edl_cfg.regularize;
        doc["initial_loss"] = r(trained.loss_history.front());
        doc["final_loss"] = r(trained.model.loss(data.points, edl_cfg.regularizer_weight(edl_cfg.epochs)));
        model = std::move(trained.model);
      }
      doc["training_accuracy"] = r(edl::training_accuracy(*model, data.points));
      static constexpr std::array<const char*, 4> kProbeNames{"class-1 centroid", "class-2 centroid",
                                                             "midpoint", "far away"};
      Json probes = Json::array();
      for (std::size_t i = 0; i < data.probes.size(); ++i) {
        probes.push_back({{"name", kProbeNames[i]},
                          {"x", {data.probes[i][0], data.probes[i][1]}},
                          {"opinion", to_json(edl::classify(*model, data.probes[i]), precision)}});
      }
      doc["probes"] = std::move(probes);
      if (!svg_path.empty()) write_text_file(svg_path, edl::render_svg(*model, data));
      if (!save_model.empty()) write_text_file(save_model, dump_json(model->to_json(), 2));
      out << dump_json(doc);
    } else if (pl->parsed()) {
      const auto prog = problog::parse_program(read_text_file(program_path));
      const problog::Query q{query, pl_evidence};
      const bool uncertain = std::any_of(prog.facts().begin(), prog.facts().end(),
                                         [](const problog::Fact& f) { return f.param.is_beta; });
      if (uncertain) {
        const auto res = problog::subjective_success(prog, q, pl_samples, pl_seed);
        out << dump_json(to_json(res.opinion, precision));
      } else {
        const double p = problog::success_probability(prog, q);
        out << dump_json(Json{{"probability", precision == Precision::kFull ? p : round_significant(p)}});
      }
    } else if (serve->parsed()) {
      const service::Session session(load_spec(model_path));
      ApiServer server(session, ui_dir);
      const int bound = server.bind(host, port);
      if (bound < 0) throw Error(ErrorCode::kIo, "cannot bind " + host + ":" + std::to_string(port));
      err << "serving on http://" << host << ":" << bound << "\n";
      err.flush();
      server.listen();
    }
  } catch (const Error& e) {
    err << "error: " << error_code_name(e.code()) << ": " << e.what() << "\n";
    return kExitFailure;
  }
  return kExitOk;
}

}  // namespace uaml::cli
