#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "dissipnet/checks.hpp"
#include "dissipnet/refmodel.hpp"
#include "dissipnet/serialize.hpp"
#include "dissipnet/train.hpp"
#include "json.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

dn::UnitVector3 parse_direction(const std::string& s) {
  double x, y, z;
  char c1, c2;
  std::istringstream is(s);
  if (!(is >> x >> c1 >> y >> c2 >> z) || c1 != ',' || c2 != ',')
    throw CLI::ValidationError("--direction expects x,y,z");
  return dn::make_unit(x, y, z);
}

std::vector<int> parse_id_list(const std::string& s) {
  std::vector<int> ids;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) ids.push_back(std::stoi(tok));
  return ids;
}

std::string join_args(int argc, char** argv) {
  std::string cmd;
  for (int i = 0; i < argc; ++i) {
    if (i) cmd += ' ';
    cmd += argv[i];
  }
  return cmd;
}

int cmd_gen_data(const std::string& command, const std::string& model,
                 int paths, int steps, double dt, uint64_t seed,
                 const std::string& direction, const std::string& out) {
  dn::UnitVector3 n =
      direction.empty() ? dn::UnitVector3{1.0, 0.0, 0.0}
                        : parse_direction(direction);
  dn::Dataset ds =
      dn::generate_dataset(paths, steps, dt, model == "iso", n, seed);
  dn::write_dataset(ds, out);
  json cfg{{"model", model}, {"paths", paths},   {"steps", steps},
           {"dt", dt},       {"seed", seed},     {"out", out},
           {"direction", {n[0], n[1], n[2]}}};
  std::vector<std::string> files{(fs::path(out) / "metadata.json").string()};
  for (int p = 0; p < paths; ++p) {
    char b[32];
    std::snprintf(b, sizeof(b), "path_%03d.csv", p);
    files.push_back((fs::path(out) / b).string());
  }
  dn::write_manifest((fs::path(out) / "manifest.json").string(), command,
                     cfg.dump(), files);
  std::cout << "wrote " << paths << " paths to " << out
            << " (stress scale " << ds.stress_scale << " MPa)\n";
  return 0;
}

int cmd_train(const std::string& command, const std::string& data,
              const std::string& baseline, const dn::TrainConfig& cfg,
              const std::string& holdout, const std::string& out) {
  dn::Dataset ds = dn::read_dataset(data);
  std::vector<int> held = holdout.empty() ? std::vector<int>{}
                                          : parse_id_list(holdout);
  std::vector<int> train_ids;
  for (size_t p = 0; p < ds.paths.size(); ++p) {
    int ip = static_cast<int>(p);
    if (std::find(held.begin(), held.end(), ip) == held.end())
      train_ids.push_back(ip);
  }

  dn::FitResult fr;
  if (baseline.empty()) {
    fr = dn::fit(ds, cfg, train_ids);
    dn::write_model(fr.model, cfg.seed, out);
  } else {
    dn::BaselineModel bm;
    fr = dn::fit_baseline(ds, cfg,
                          baseline == "rnn" ? dn::BaselineModel::Kind::Rnn
                                            : dn::BaselineModel::Kind::Linn,
                          train_ids, &bm);
    dn::write_baseline_model(bm, cfg.seed, out);
  }
  std::string hist = out + ".history.csv";
  dn::write_history(fr.history, hist);

  json jc{{"data", data},
          {"baseline", baseline},
          {"epochs", cfg.epochs},
          {"lr", cfg.lr},
          {"clip", cfg.clip},
          {"lambda_evo", cfg.lambda_evo},
          {"lambda_gr", cfg.lambda_gr},
          {"pretrain_epochs", cfg.pretrain_epochs},
          {"pretrain_paths", cfg.pretrain_paths},
          {"pretrain_steps", cfg.pretrain_steps},
          {"seed", cfg.seed},
          {"holdout", holdout},
          {"out", out}};
  dn::write_manifest(out + ".manifest.json", command, jc.dump(), {out, hist});
  std::cout << "best total loss " << fr.best_loss
            << (fr.aborted_nan ? " (aborted on non-finite loss)" : "") << "\n";
  return 0;
}

int cmd_eval(const std::string& command, const std::string& data,
             const std::string& params, const std::string& paths_arg,
             const std::string& update, const std::string& out) {
  dn::Dataset ds = dn::read_dataset(data);
  std::vector<int> ids;
  if (paths_arg.empty())
    for (size_t p = 0; p < ds.paths.size(); ++p)
      ids.push_back(static_cast<int>(p));
  else
    ids = parse_id_list(paths_arg);

  std::ofstream f(out, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open " + out);
  f << "path,mse_S11,mse_S22,mse_S33,mse_S12,mse_S13,mse_S23,mse_total\n";
  std::string kind = dn::model_kind(params);
  if (kind == "consti") {
    dn::NetModel m = dn::read_model(params);
    auto rows = dn::eval_report(
        m, ds, ids,
        update == "explicit" ? dn::UpdateMode::Explicit : dn::UpdateMode::Linn);
    for (const auto& r : rows) {
      f << r.path;
      for (double v : r.mse) f << ',' << dn::format_double(v);
      f << ',' << dn::format_double(r.total) << '\n';
    }
  } else {
    dn::BaselineModel bm = dn::read_baseline_model(params);
    for (int p : ids) {
      std::array<double, 6> h{};
      std::array<double, 7> mse{};
      for (const auto& rec : ds.paths[p]) {
        double x7[7];
        for (int j = 0; j < 6; ++j) x7[j] = rec.C.a[j];
        x7[6] = rec.dt;
        auto y = dn::baseline_step(bm, bm.params, h, x7);
        for (int j = 0; j < 6; ++j) {
          double e = y[j] - rec.S.a[j] / ds.stress_scale;
          mse[j] += e * e;
        }
      }
      f << p;
      double total = 0.0;
      for (int j = 0; j < 6; ++j) {
        mse[j] /= ds.paths[p].size();
        total += mse[j] / 6.0;
        f << ',' << dn::format_double(mse[j]);
      }
      f << ',' << dn::format_double(total) << '\n';
    }
  }
  f.close();
  json jc{{"data", data}, {"params", params}, {"paths", paths_arg},
          {"update", update}, {"out", out}};
  dn::write_manifest(out + ".manifest.json", command, jc.dump(), {out});
  return 0;
}

int cmd_simulate(const std::string& command, const std::string& params,
                 const std::string& path_csv, const std::string& update,
                 const std::string& out) {
  // accept a dataset-format CSV; stress columns are optional
  std::ifstream f(path_csv);
  if (!f) throw std::runtime_error("cannot open " + path_csv);
  std::string line;
  std::getline(f, line);
  std::vector<double> ts, dts;
  std::vector<dn::SymTensor3> Cs;
  while (std::getline(f, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string tok;
    std::vector<double> v;
    while (std::getline(ss, tok, ','))
      v.push_back(std::strtod(tok.c_str(), nullptr));
    if (v.size() < 8)
      throw std::runtime_error("simulate: row needs t,dt,C11..C23");
    ts.push_back(v[0]);
    dts.push_back(v[1]);
    dn::SymTensor3 C;
    for (int j = 0; j < 6; ++j) C.a[j] = v[2 + j];
    Cs.push_back(C);
  }

  dn::NetModel m = dn::read_model(params);
  auto S = dn::simulate_path(m, Cs, dts,
                             update == "explicit" ? dn::UpdateMode::Explicit
                                                  : dn::UpdateMode::Linn);
  std::ofstream g(out, std::ios::binary);
  if (!g) throw std::runtime_error("cannot open " + out);
  g << "t,S11,S22,S33,S12,S13,S23\n";
  for (size_t k = 0; k < S.size(); ++k) {
    g << dn::format_double(ts[k]);
    for (double s : S[k].a)
      g << ',' << dn::format_double(s * m.stress_scale);  // raw MPa
    g << '\n';
  }
  g.close();
  json jc{{"params", params}, {"path", path_csv}, {"update", update},
          {"out", out}};
  dn::write_manifest(out + ".manifest.json", command, jc.dump(), {out});
  return 0;
}

int cmd_check(const std::string& suite, uint64_t seed, int samples,
              const std::string& workdir) {
  std::vector<dn::CheckResult> results;
  auto known = dn::check_suite_names();
  if (suite == "all") {
    for (const auto& name : known)
      results.push_back(dn::run_check(name, seed, samples));
  } else if (suite == "training") {
    results = dn::run_training_checks(workdir, seed);
  } else if (std::find(known.begin(), known.end(), suite) != known.end()) {
    results.push_back(dn::run_check(suite, seed, samples));
  } else {
    std::cerr << "unknown suite: " << suite << "\n";
    return 2;
  }
  bool all_pass = true;
  for (const auto& r : results) {
    std::cout << (r.pass ? "PASS" : "FAIL") << "  " << r.name << "  ["
              << r.detail << "]  (" << r.seconds << " s)\n";
    all_pass = all_pass && r.pass;
  }
  return all_pass ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"thermodynamically consistent neural constitutive models"};
  app.require_subcommand(1);
  std::string command = join_args(argc, argv);

  auto* gen = app.add_subcommand("gen-data", "generate synthetic datasets");
  std::string g_model = "iso", g_dir, g_out = "data";
  int g_paths = 8, g_steps = 120;
  double g_dt = 0.05;
  uint64_t g_seed = 7;
  gen->add_option("--model", g_model)->check(CLI::IsMember({"iso", "aniso"}));
  gen->add_option("--paths", g_paths);
  gen->add_option("--steps", g_steps);
  gen->add_option("--dt", g_dt);
  gen->add_option("--seed", g_seed);
  gen->add_option("--direction", g_dir, "structural direction x,y,z");
  gen->add_option("--out", g_out)->required();

  auto* tr = app.add_subcommand("train", "fit a model to a dataset");
  std::string t_data, t_out = "params.json", t_baseline, t_holdout;
  dn::TrainConfig cfg;
  tr->add_option("--data", t_data)->required();
  tr->add_option("--out", t_out);
  tr->add_option("--baseline", t_baseline)
      ->check(CLI::IsMember({"rnn", "linn"}));
  tr->add_option("--epochs", cfg.epochs);
  tr->add_option("--lr", cfg.lr);
  tr->add_option("--clip", cfg.clip);
  tr->add_option("--lambda-evo", cfg.lambda_evo);
  tr->add_option("--lambda-gr", cfg.lambda_gr);
  tr->add_option("--pretrain-epochs", cfg.pretrain_epochs);
  tr->add_option("--pretrain-paths", cfg.pretrain_paths);
  tr->add_option("--pretrain-steps", cfg.pretrain_steps);
  tr->add_option("--seed", cfg.seed);
  tr->add_option("--holdout", t_holdout, "path ids excluded from training");

  auto* ev = app.add_subcommand("eval", "per-path error report");
  std::string e_data, e_params, e_paths, e_update = "linn",
                                         e_out = "report.csv";
  ev->add_option("--data", e_data)->required();
  ev->add_option("--params", e_params)->required();
  ev->add_option("--paths", e_paths, "path ids, e.g. 8,9 (default: all)");
  ev->add_option("--update", e_update)
      ->check(CLI::IsMember({"linn", "explicit"}));
  ev->add_option("--out", e_out);

  auto* sim = app.add_subcommand("simulate", "stress response along a path");
  std::string s_params, s_path, s_update = "linn", s_out = "stress.csv";
  sim->add_option("--params", s_params)->required();
  sim->add_option("--path", s_path, "CSV with t,dt,C11..C23 columns")
      ->required();
  sim->add_option("--update", s_update)
      ->check(CLI::IsMember({"linn", "explicit"}));
  sim->add_option("--out", s_out);

  auto* ck = app.add_subcommand("check", "run property suites");
  std::string c_suite = "all", c_workdir = "check_work";
  uint64_t c_seed = 1;
  int c_samples = 0;
  ck->add_option("--suite", c_suite);
  ck->add_option("--seed", c_seed);
  ck->add_option("--samples", c_samples, "0 = suite default");
  ck->add_option("--workdir", c_workdir, "scratch dir for training checks");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : 2;  // usage error
  }

  try {
    if (gen->parsed())
      return cmd_gen_data(command, g_model, g_paths, g_steps, g_dt, g_seed,
                          g_dir, g_out);
    if (tr->parsed())
      return cmd_train(command, t_data, t_baseline, cfg, t_holdout, t_out);
    if (ev->parsed())
      return cmd_eval(command, e_data, e_params, e_paths, e_update, e_out);
    if (sim->parsed())
      return cmd_simulate(command, s_params, s_path, s_update, s_out);
    if (ck->parsed()) return cmd_check(c_suite, c_seed, c_samples, c_workdir);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
