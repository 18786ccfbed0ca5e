#pragma once

#include <string>
#include <vector>

#include "dissipnet/tensor.hpp"

namespace dn {

struct PathRecord {
  double t = 0.0;
  double dt = 0.0;
  SymTensor3 C;  // right Cauchy-Green at t
  SymTensor3 S;  // second PK stress (raw MPa)
};

struct Dataset {
  std::vector<std::vector<PathRecord>> paths;
  UnitVector3 n{1.0, 0.0, 0.0};  // structural direction (metadata)
  double stress_scale = 1.0;     // S-bar = max |S| over all records (MPa)
  std::string model = "iso";     // "iso" | "aniso"
  double dt = 0.05;
  uint64_t seed = 0;

  size_t records() const {
    size_t n_rec = 0;
    for (const auto& p : paths) n_rec += p.size();
    return n_rec;
  }
};

}  // namespace dn
