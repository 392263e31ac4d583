#pragma once

#include <optional>
#include <string>
#include <vector>

namespace cgchat {

struct SalienceConfig {
  double mention_value = 1.0;
  double turn_decay = 0.1;
  double propagation_delta = 0.2;
  int cap = 100;
  double retrieval_threshold = 0.8;
  int retrieval_hops = 1;
  bool propagate_to_fixpoint = true;  // false: a single relaxation pass

  /// Throws std::invalid_argument unless reals lie in (0,1] and cap >= 1.
  void check() const;
};

struct Manifest {
  std::vector<std::string> kb;
  std::vector<std::string> rules;
  std::vector<std::string> templates;
  std::vector<std::string> lexicon;
  std::vector<std::string> fixtures;
  std::vector<std::string> goldens;
  std::vector<std::string> pinned{"user", "bot"};
  SalienceConfig salience;
  int inference_passes = 2;
  bool naive_parse = false;
  int port = 8080;
  int threads = 0;  // matcher workers; 0 = OpenMP default
};

}  // namespace cgchat
