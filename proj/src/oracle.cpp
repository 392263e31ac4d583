#include "cgchat/oracle.hpp"

#include <algorithm>

namespace cgchat {

namespace {

bool satisfies(const QueryGraph& q, const ConceptGraph& data,
               const std::map<ConceptId, ConceptId>& sigma) {
  auto sub = [&](const ConceptId& c) -> const ConceptId& {
    auto it = sigma.find(c);
    return it == sigma.end() ? c : it->second;
  };
  // C_Q subset of C_K after substitution.
  for (const auto& [c, f] : q.graph.nodes())
    if (!data.contains(sub(c))) return false;
  // Predicate-argument equality and truth class.
  for (const auto& [p, sig] : q.graph.predicates()) {
    const Signature* ds = data.find_signature(sub(p));
    if (!ds) return false;
    if (sig.subject && (!ds->subject || *ds->subject != sub(*sig.subject)))
      return false;
    if (sig.object && (!ds->object || *ds->object != sub(*sig.object)))
      return false;
    if (data.features(sub(p)).truth != q.graph.features(p).truth) return false;
  }
  // tau_Q(c) subset of tau_K(c).
  for (const auto& [c, f] : q.graph.nodes()) {
    auto have = data.tau(sub(c));
    for (const auto& t : q.graph.tau(c))
      if (!have.count(sub(t))) return false;
  }
  for (const auto& [a, b] : q.distinct)
    if (q.graph.contains(a) && q.graph.contains(b) && sub(a) == sub(b))
      return false;
  return true;
}

}  // namespace

SolutionSet brute_force_oracle(const QueryGraph& query,
                               const ConceptGraph& data) {
  if (data.size() > kOracleMaxConcepts)
    throw TooLarge("oracle limited to " + std::to_string(kOracleMaxConcepts) +
                   " data concepts");
  std::vector<ConceptId> vars;
  for (const auto& v : query.variables)
    if (query.graph.contains(v)) vars.push_back(v);
  std::vector<ConceptId> domain;
  for (const auto& [c, f] : data.nodes()) domain.push_back(c);

  SolutionSet out;
  if (!vars.empty() && domain.empty()) return out;
  std::vector<std::size_t> digits(vars.size(), 0);
  for (;;) {
    std::map<ConceptId, ConceptId> sigma;
    for (std::size_t i = 0; i < vars.size(); ++i)
      sigma[vars[i]] = domain[digits[i]];
    if (satisfies(query, data, sigma)) out.push_back(Solution{sigma});
    // Odometer increment.
    std::size_t i = 0;
    while (i < digits.size() && ++digits[i] == domain.size()) digits[i++] = 0;
    if (i == digits.size()) break;
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace cgchat
