#include "dissipnet/serialize.hpp"

#include <cinttypes>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "dissipnet/refmodel.hpp"
#include "json.hpp"

namespace dn {

namespace fs = std::filesystem;
using nlohmann::json;

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

namespace {

std::string path_file(int p) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "path_%03d.csv", p);
  return buf;
}

json ref_params_json() {
  RefParams rp;
  return json{{"a_eq", rp.a_eq},       {"b_eq", rp.b_eq},
              {"c_eq", rp.c_eq},       {"a_neq", rp.a_neq},
              {"b_neq", rp.b_neq},     {"c_neq", rp.c_neq},
              {"alpha_eq", rp.alpha_eq}, {"eta_eq", rp.eta_eq},
              {"alpha_neq", rp.alpha_neq}, {"eta_neq", rp.eta_neq},
              {"beta", rp.beta},       {"tau", rp.tau}};
}

}  // namespace

void write_dataset(const Dataset& ds, const std::string& dir) {
  fs::create_directories(dir);
  for (size_t p = 0; p < ds.paths.size(); ++p) {
    std::ofstream f(fs::path(dir) / path_file(static_cast<int>(p)),
                    std::ios::binary);
    if (!f) throw std::runtime_error("write_dataset: cannot open " + dir);
    f << "t,dt,C11,C22,C33,C12,C13,C23,S11,S22,S33,S12,S13,S23\n";
    for (const PathRecord& r : ds.paths[p]) {
      f << format_double(r.t) << ',' << format_double(r.dt);
      for (double c : r.C.a) f << ',' << format_double(c);
      for (double s : r.S.a) f << ',' << format_double(s);
      f << '\n';
    }
  }
  json meta;
  meta["model"] = ds.model;
  meta["direction"] = {ds.n[0], ds.n[1], ds.n[2]};
  meta["stress_scale"] = ds.stress_scale;
  meta["paths"] = ds.paths.size();
  meta["steps"] = ds.paths.empty() ? 0 : ds.paths[0].size();
  meta["dt"] = ds.dt;
  meta["seed"] = ds.seed;
  meta["ref_params"] = ref_params_json();
  std::ofstream mf(fs::path(dir) / "metadata.json", std::ios::binary);
  mf << meta.dump(2) << '\n';
}

Dataset read_dataset(const std::string& dir) {
  std::ifstream mf(fs::path(dir) / "metadata.json");
  if (!mf) throw std::runtime_error("read_dataset: no metadata.json in " + dir);
  json meta = json::parse(mf);
  Dataset ds;
  ds.model = meta.at("model").get<std::string>();
  auto d = meta.at("direction");
  ds.n = UnitVector3{d[0].get<double>(), d[1].get<double>(),
                     d[2].get<double>()};
  ds.stress_scale = meta.at("stress_scale").get<double>();
  ds.dt = meta.at("dt").get<double>();
  ds.seed = meta.at("seed").get<uint64_t>();
  size_t n_paths = meta.at("paths").get<size_t>();
  ds.paths.resize(n_paths);
  for (size_t p = 0; p < n_paths; ++p) {
    std::ifstream f(fs::path(dir) / path_file(static_cast<int>(p)));
    if (!f)
      throw std::runtime_error("read_dataset: missing " + path_file(p));
    std::string line;
    std::getline(f, line);  // header
    while (std::getline(f, line)) {
      if (line.empty()) continue;
      PathRecord r;
      double* slots[14] = {&r.t,     &r.dt,    &r.C.a[0], &r.C.a[1],
                           &r.C.a[2], &r.C.a[3], &r.C.a[4], &r.C.a[5],
                           &r.S.a[0], &r.S.a[1], &r.S.a[2], &r.S.a[3],
                           &r.S.a[4], &r.S.a[5]};
      std::stringstream ss(line);
      std::string tok;
      for (int k = 0; k < 14; ++k) {
        if (!std::getline(ss, tok, ','))
          throw std::runtime_error("read_dataset: short row in " +
                                   path_file(p));
        *slots[k] = std::strtod(tok.c_str(), nullptr);
      }
      ds.paths[p].push_back(r);
    }
  }
  return ds;
}

namespace {

json arrays_to_json(const ParamVector& pv) {
  json arr = json::array();
  for (size_t i = 0; i < pv.meta.size(); ++i) {
    const ArrayMeta& m = pv.meta[i];
    json e;
    e["name"] = m.name;
    e["shape"] = m.shape;
    e["constraint"] = m.constraint == Constraint::NonNeg ? "nonneg" : "free";
    e["activation"] = m.activation;
    auto span = pv.array(static_cast<int>(i));
    e["values"] = std::vector<double>(span.begin(), span.end());
    arr.push_back(e);
  }
  return arr;
}

void arrays_from_json(const json& arr, ParamVector& pv) {
  for (const json& e : arr) {
    int idx = pv.find(e.at("name").get<std::string>());
    if (idx < 0)
      throw std::runtime_error("params: unknown array " +
                               e.at("name").get<std::string>());
    auto span = pv.array(idx);
    auto vals = e.at("values").get<std::vector<double>>();
    if (vals.size() != span.size())
      throw std::runtime_error("params: shape mismatch for " +
                               pv.meta[idx].name);
    std::copy(vals.begin(), vals.end(), span.begin());
  }
}

}  // namespace

void write_model(const NetModel& m, uint64_t seed, const std::string& path) {
  json doc;
  doc["format"] = "dissipnet-params";
  doc["version"] = 1;
  doc["model"] = "consti";
  doc["seed"] = seed;
  doc["stress_scale"] = m.stress_scale;
  doc["direction"] = {m.n[0], m.n[1], m.n[2]};
  doc["lambda_gr"] = m.lambda_gr;
  doc["topology"] = {{"seam", m.topo.seam}};
  doc["arrays"] = arrays_to_json(m.params);
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("write_model: cannot open " + path);
  f << doc.dump(2) << '\n';
}

NetModel read_model(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("read_model: cannot open " + path);
  json doc = json::parse(f);
  if (doc.at("model").get<std::string>() != "consti")
    throw std::runtime_error("read_model: not a constitutive-model file");
  NetModel m;
  m.topo = build_default_topology(m.params,
                                  doc.at("topology").at("seam").get<int>());
  arrays_from_json(doc.at("arrays"), m.params);
  m.stress_scale = doc.at("stress_scale").get<double>();
  auto d = doc.at("direction");
  m.n = UnitVector3{d[0].get<double>(), d[1].get<double>(),
                    d[2].get<double>()};
  m.lambda_gr = doc.at("lambda_gr").get<double>();
  return m;
}

void write_baseline_model(const BaselineModel& m, uint64_t seed,
                          const std::string& path) {
  json doc;
  doc["format"] = "dissipnet-params";
  doc["version"] = 1;
  doc["model"] = m.kind == BaselineModel::Kind::Rnn ? "rnn" : "linn";
  doc["seed"] = seed;
  doc["stress_scale"] = m.stress_scale;
  doc["arrays"] = arrays_to_json(m.params);
  std::ofstream f(path, std::ios::binary);
  if (!f)
    throw std::runtime_error("write_baseline_model: cannot open " + path);
  f << doc.dump(2) << '\n';
}

BaselineModel read_baseline_model(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("read_baseline_model: cannot open " + path);
  json doc = json::parse(f);
  std::string kind = doc.at("model").get<std::string>();
  if (kind != "rnn" && kind != "linn")
    throw std::runtime_error("read_baseline_model: not a baseline file");
  BaselineModel m = build_baseline(kind == "rnn" ? BaselineModel::Kind::Rnn
                                                 : BaselineModel::Kind::Linn,
                                   0);
  arrays_from_json(doc.at("arrays"), m.params);
  m.stress_scale = doc.at("stress_scale").get<double>();
  return m;
}

std::string model_kind(const std::string& params_path) {
  std::ifstream f(params_path);
  if (!f) throw std::runtime_error("model_kind: cannot open " + params_path);
  json doc = json::parse(f);
  return doc.at("model").get<std::string>();
}

void write_history(const std::vector<EpochStats>& hist,
                   const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("write_history: cannot open " + path);
  f << "epoch,loss_stress,loss_evo,loss_total\n";
  for (size_t i = 0; i < hist.size(); ++i)
    f << i + 1 << ',' << format_double(hist[i].loss_stress) << ','
      << format_double(hist[i].loss_evo) << ','
      << format_double(hist[i].loss_total) << '\n';
}

std::string file_fingerprint(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("file_fingerprint: cannot open " + path);
  uint64_t h = 0xcbf29ce484222325ull;
  char buf[4096];
  while (f.read(buf, sizeof(buf)) || f.gcount() > 0) {
    for (std::streamsize i = 0; i < f.gcount(); ++i) {
      h ^= static_cast<unsigned char>(buf[i]);
      h *= 0x100000001b3ull;
    }
    if (f.eof()) break;
  }
  char out[20];
  std::snprintf(out, sizeof(out), "%016" PRIx64, h);
  return std::string("fnv1a64:") + out;
}

void write_manifest(const std::string& path, const std::string& command,
                    const std::string& config_json,
                    const std::vector<std::string>& artifacts) {
  json doc;
  doc["tool"] = "dissipnet 0.1.0";
  doc["command"] = command;
  doc["config"] = json::parse(config_json);
  json hashes = json::object();
  for (const std::string& a : artifacts)
    hashes[fs::path(a).filename().string()] = file_fingerprint(a);
  doc["artifacts"] = hashes;
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("write_manifest: cannot open " + path);
  f << doc.dump(2) << '\n';
}

}  // namespace dn
