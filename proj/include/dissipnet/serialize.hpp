#pragma once

#include <string>

#include "dissipnet/dataset.hpp"
#include "dissipnet/train.hpp"

namespace dn {

// Dataset directory layout: path_###.csv with header
//   t,dt,C11,C22,C33,C12,C13,C23,S11,S22,S33,S12,S13,S23
// (stresses raw MPa) plus metadata.json. Doubles are printed with 17
// significant digits so write -> read -> write is byte-stable.
void write_dataset(const Dataset& ds, const std::string& dir);
Dataset read_dataset(const std::string& dir);

// Parameter file: one JSON document of named arrays carrying shape,
// constraint and activation, plus the topology block and seed.
void write_model(const NetModel& m, uint64_t seed, const std::string& path);
NetModel read_model(const std::string& path);

void write_baseline_model(const BaselineModel& m, uint64_t seed,
                          const std::string& path);
BaselineModel read_baseline_model(const std::string& path);

// "consti" | "rnn" | "linn"
std::string model_kind(const std::string& params_path);

// history CSV: epoch,loss_stress,loss_evo,loss_total
void write_history(const std::vector<EpochStats>& hist,
                   const std::string& path);

// FNV-1a 64-bit content fingerprint, hex encoded
std::string file_fingerprint(const std::string& path);

// run manifest emitted alongside every output; re-running the recorded
// command reproduces the artifacts bit-identically
void write_manifest(const std::string& path, const std::string& command,
                    const std::string& config_json,
                    const std::vector<std::string>& artifacts);

std::string format_double(double v);

}  // namespace dn
