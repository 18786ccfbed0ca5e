#include <cstdlib>
#include <filesystem>
#include <fstream>

#include "dissipnet/refmodel.hpp"
#include "dissipnet/serialize.hpp"
#include "doctest.h"

using namespace dn;
namespace fs = std::filesystem;

#ifndef DISSIPNET_BIN
#define DISSIPNET_BIN "./dissipnet"
#endif

namespace {
fs::path scratch() {
  fs::path p = fs::temp_directory_path() / "dissipnet_io_tests";
  fs::create_directories(p);
  return p;
}

int run_cli(const std::string& args) {
  std::string cmd = std::string(DISSIPNET_BIN) + " " + args + " > /dev/null 2>&1";
  int rc = std::system(cmd.c_str());
  return WEXITSTATUS(rc);
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  REQUIRE(f.good());
  return std::string(std::istreambuf_iterator<char>(f), {});
}
}  // namespace

TEST_CASE("dataset files round-trip bit-exactly") {
  fs::path dir = scratch() / "ds";
  fs::remove_all(dir);
  Dataset ds = generate_dataset(3, 17, 0.05, false, make_unit(1, 1, 0), 5);
  write_dataset(ds, dir.string());
  Dataset rd = read_dataset(dir.string());
  REQUIRE(rd.paths.size() == ds.paths.size());
  CHECK(rd.stress_scale == ds.stress_scale);
  CHECK(rd.model == ds.model);
  CHECK(rd.n[0] == ds.n[0]);
  for (size_t p = 0; p < ds.paths.size(); ++p)
    for (size_t k = 0; k < ds.paths[p].size(); ++k)
      for (int j = 0; j < 6; ++j) {
        CHECK(rd.paths[p][k].C.a[j] == ds.paths[p][k].C.a[j]);
        CHECK(rd.paths[p][k].S.a[j] == ds.paths[p][k].S.a[j]);
      }
  fs::path dir2 = scratch() / "ds2";
  fs::remove_all(dir2);
  write_dataset(rd, dir2.string());
  CHECK(slurp(dir / "path_000.csv") == slurp(dir2 / "path_000.csv"));
  CHECK(slurp(dir / "metadata.json") == slurp(dir2 / "metadata.json"));
}

TEST_CASE("model parameter files round-trip") {
  fs::path p1 = scratch() / "m1.json";
  NetModel m;
  m.topo = build_default_topology(m.params);
  init_params(m.params, 77);
  project_constraints(m.params);
  m.stress_scale = 321.5;
  m.n = make_unit(1, 1, 0);
  write_model(m, 77, p1.string());
  NetModel r = read_model(p1.string());
  CHECK(r.stress_scale == m.stress_scale);
  CHECK(r.n[1] == m.n[1]);
  for (size_t k = 0; k < m.params.flat.size(); ++k)
    CHECK(r.params.flat[k] == m.params.flat[k]);
  CHECK(model_kind(p1.string()) == "consti");

  fs::path p2 = scratch() / "m2.json";
  write_model(r, 77, p2.string());
  CHECK(slurp(p1) == slurp(p2));

  // baselines
  fs::path p3 = scratch() / "b1.json";
  BaselineModel bm = build_baseline(BaselineModel::Kind::Linn, 5);
  bm.stress_scale = 11.0;
  write_baseline_model(bm, 5, p3.string());
  BaselineModel br = read_baseline_model(p3.string());
  CHECK(br.kind == BaselineModel::Kind::Linn);
  for (size_t k = 0; k < bm.params.flat.size(); ++k)
    CHECK(br.params.flat[k] == bm.params.flat[k]);
  CHECK(model_kind(p3.string()) == "linn");
}

TEST_CASE("history csv") {
  fs::path p = scratch() / "h.csv";
  std::vector<EpochStats> h{{1e-3, 1e-6, 2e-3}, {5e-4, 5e-7, 1e-3}};
  write_history(h, p.string());
  std::string s = slurp(p);
  CHECK(s.rfind("epoch,loss_stress,loss_evo,loss_total\n", 0) == 0);
  CHECK(std::count(s.begin(), s.end(), '\n') == 3);
}

TEST_CASE("cli: gen-data determinism, manifest, exit codes") {
  fs::path dir = scratch();
  fs::remove_all(dir / "d1");
  fs::remove_all(dir / "d2");
  std::string base = "gen-data --model aniso --paths 2 --steps 10 --dt 0.05 "
                     "--seed 7 --direction 0.7071,0.7071,0 --out ";
  REQUIRE(run_cli(base + (dir / "d1").string()) == 0);
  REQUIRE(run_cli(base + (dir / "d2").string()) == 0);
  CHECK(slurp(dir / "d1" / "path_000.csv") ==
        slurp(dir / "d2" / "path_000.csv"));
  CHECK(slurp(dir / "d1" / "path_001.csv") ==
        slurp(dir / "d2" / "path_001.csv"));
  CHECK(slurp(dir / "d1" / "metadata.json") ==
        slurp(dir / "d2" / "metadata.json"));
  CHECK(fs::exists(dir / "d1" / "manifest.json"));
  // the manifests of identical runs differ only in the --out path; their
  // artifact fingerprints agree
  {
    std::string m1 = slurp(dir / "d1" / "manifest.json");
    std::string m2 = slurp(dir / "d2" / "manifest.json");
    auto h1 = m1.substr(m1.find("artifacts"));
    auto h2 = m2.substr(m2.find("artifacts"));
    CHECK(h1.substr(0, h1.find("config")) == h2.substr(0, h2.find("config")));
  }
  // direction recorded in metadata
  std::string meta = slurp(dir / "d1" / "metadata.json");
  CHECK(meta.find("0.7071067811865") != std::string::npos);

  // usage errors exit with 2
  CHECK(run_cli("check --suite no-such-suite") == 2);
  CHECK(run_cli("no-such-command") == 2);
  CHECK(run_cli("gen-data") == 2);  // missing required --out
}

TEST_CASE("cli: train/eval/simulate end to end at toy scale") {
  fs::path dir = scratch();
  fs::path data = dir / "toy";
  fs::remove_all(data);
  REQUIRE(run_cli("gen-data --model iso --paths 3 --steps 8 --dt 0.05 "
                  "--seed 3 --out " +
                  data.string()) == 0);

  fs::path params = dir / "toy_params.json";
  REQUIRE(run_cli("train --data " + data.string() +
                  " --epochs 2 --pretrain-epochs 1 --pretrain-steps 4 "
                  "--seed 5 --holdout 2 --out " +
                  params.string()) == 0);
  CHECK(fs::exists(params));
  CHECK(fs::exists(dir / "toy_params.json.history.csv"));
  CHECK(fs::exists(dir / "toy_params.json.manifest.json"));
  {
    std::string h = slurp(dir / "toy_params.json.history.csv");
    CHECK(std::count(h.begin(), h.end(), '\n') == 4);  // header + 1 + 2 epochs
  }

  fs::path report = dir / "report.csv";
  REQUIRE(run_cli("eval --data " + data.string() + " --params " +
                  params.string() + " --paths 2 --update linn --out " +
                  report.string()) == 0);
  std::string rep = slurp(report);
  CHECK(rep.rfind("path,mse_S11,", 0) == 0);
  CHECK(std::count(rep.begin(), rep.end(), '\n') == 2);
  REQUIRE(run_cli("eval --data " + data.string() + " --params " +
                  params.string() + " --paths 2 --update explicit --out " +
                  report.string()) == 0);

  // simulate on an identity path produces zero stresses
  fs::path idpath = dir / "identity.csv";
  {
    std::ofstream f(idpath);
    f << "t,dt,C11,C22,C33,C12,C13,C23\n";
    for (int k = 0; k < 5; ++k)
      f << 0.05 * (k + 1) << ",0.05,1,1,1,0,0,0\n";
  }
  fs::path sim = dir / "sim.csv";
  REQUIRE(run_cli("simulate --params " + params.string() + " --path " +
                  idpath.string() + " --out " + sim.string()) == 0);
  std::string body = slurp(sim);
  CHECK(body.rfind("t,S11,", 0) == 0);
  CHECK(std::count(body.begin(), body.end(), '\n') == 6);  // header + 5 rows
  {
    std::ifstream f(sim);
    std::string line;
    std::getline(f, line);
    while (std::getline(f, line)) {
      std::stringstream ss(line);
      std::string tok;
      std::getline(ss, tok, ',');
      while (std::getline(ss, tok, ','))
        CHECK(std::abs(std::strtod(tok.c_str(), nullptr)) < 1e-9);
    }
  }

  // baseline training path
  fs::path bparams = dir / "toy_rnn.json";
  REQUIRE(run_cli("train --data " + data.string() +
                  " --baseline rnn --epochs 2 --pretrain-epochs 0 "
                  "--seed 5 --holdout 2 --out " +
                  bparams.string()) == 0);
  REQUIRE(run_cli("eval --data " + data.string() + " --params " +
                  bparams.string() + " --paths 2 --out " +
                  report.string()) == 0);

  // check subcommand exit code 0 on a passing suite
  CHECK(run_cli("check --suite roots") == 0);
}
