#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>

#include "synthetic.hpp"

using namespace cgchat;

int main(int argc, char** argv) {
  int n_rules = argc > 1 ? std::atoi(argv[1]) : 1000;
  int reps = argc > 2 ? std::atoi(argv[2]) : 11;
  auto wm = synthetic::working_memory();
  auto rules = synthetic::rules(n_rules);
  std::vector<const QueryGraph*> qs;
  for (const auto& r : rules) qs.push_back(&r);

  auto reference = match_all_serial(qs, wm);
  std::size_t solutions = 0;
  for (const auto& s : reference) solutions += s.size();
  std::printf("rules=%d wm=%zu solutions=%zu\n", n_rules, wm.size(), solutions);
  std::printf("%-8s %12s %12s %10s\n", "threads", "median_ms", "min_ms", "same");

  auto time_one = [&](auto&& fn) {
    std::vector<double> ms;
    for (int i = 0; i < reps; ++i) {
      auto t0 = std::chrono::steady_clock::now();
      fn();
      ms.push_back(std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count());
    }
    std::sort(ms.begin(), ms.end());
    return std::make_pair(ms[ms.size() / 2], ms.front());
  };

  auto [sm, smin] = time_one([&] { match_all_serial(qs, wm); });
  std::printf("%-8s %12.3f %12.3f %10s\n", "serial", sm, smin, "ref");
  bool all_same = true;
  for (int t : {1, 2, 4, 8}) {
    bool same = match_all(qs, wm, t) == reference;
    all_same = all_same && same;
    auto [med, mn] = time_one([&] { match_all(qs, wm, t); });
    std::printf("%-8d %12.3f %12.3f %10s\n", t, med, mn, same ? "yes" : "NO");
  }
  return all_same ? 0 : 1;
}
