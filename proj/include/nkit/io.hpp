#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "nkit/bk.hpp"
#include "nkit/theta.hpp"
#include "nkit/weyl.hpp"

namespace nkit {

inline constexpr const char* kToolName = "nkit";
inline constexpr const char* kToolVersion = "0.1.0";

// Weyl payload kept in generator form so the same instance can be rebuilt at
// any precision: weights w_j, optional coupling c_{jl} (D g_j = sum_l c_{jl}
// u^{w_j - w_l - 1} g_l), and the window depth below the heaviest weight.
struct WeylDoc {
  std::vector<int> weights;
  std::vector<std::vector<std::int64_t>> coupling;  // empty: D = 0 on generators
  int depth = 4;
};

// Theta payload: explicit layers with integer matrices.
struct FTMDoc {
  struct Layer {
    int index = 0;
    std::vector<std::vector<std::int64_t>> inclusion;  // rank x prev_rank
    std::vector<std::vector<std::int64_t>> theta;      // rank x rank
  };
  std::vector<Layer> layers;
};

// Parsed instance document: ring parameters, requested commands, and exactly
// one payload.
struct InstanceDoc {
  std::uint64_t p = 3;
  int N = 12;
  int M = 64;
  std::vector<std::string> commands;
  std::uint64_t seed = 0;
  int i_max = -1;  // <0: use the per-command default window
  std::optional<BKSpec> bk;
  std::optional<FTMDoc> ftm;
  std::optional<WeylDoc> weyl;

  const char* payload_name() const {
    return bk ? "bk" : ftm ? "theta_module" : weyl ? "weyl" : "none";
  }
};

// Throws Error(ErrorKind::schema) whose message lists one violation per line
// as "<json-pointer>: <problem>".
InstanceDoc parse_doc(const std::string& bytes);

// Canonical echo of the document (the subset parse understands); feeding the
// echo back through parse_doc yields an equal document.
nlohmann::json doc_echo(const InstanceDoc& doc);

bool doc_equal(const InstanceDoc& a, const InstanceDoc& b);

// Instantiated payloads at the document ring.
FilteredThetaModule build_ftm(const InstanceDoc& doc);
GradedWeylModule build_weyl(const InstanceDoc& doc);

// 64-bit FNV-1a of the raw input bytes, as 16 hex digits.
std::string fnv1a_hex(const std::string& bytes);

}  // namespace nkit
