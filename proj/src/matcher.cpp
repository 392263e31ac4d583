#include "cgchat/matcher.hpp"

#include <algorithm>
#include <limits>
#include <sstream>
#include <stdexcept>

#include <omp.h>

namespace cgchat {

std::string format_solution(const Solution& s) {
  std::ostringstream os;
  bool first = true;
  for (const auto& [var, val] : s.bindings) {
    if (!first) os << ' ';
    first = false;
    os << var << '=' << val;
  }
  return os.str();
}

// ---------------------------------------------------------------------------
// DataIndex

DataIndex::DataIndex(const ConceptGraph& g) : graph_(&g) {
  names_.reserve(g.size());
  for (const auto& [c, f] : g.nodes()) {
    ids_.emplace(c, static_cast<int>(names_.size()));
    names_.push_back(c);
  }
  const int n = size();
  ancestors_.resize(n);
  instances_.resize(n);
  is_pred_.assign(n, 0);
  subject_.assign(n, -1);
  object_.assign(n, -1);
  truth_.assign(n, Truth::positive);
  by_subject_.resize(n);
  by_object_.resize(n);
  all_.resize(n);

  // Ancestor closure by memoized DFS over the acyclic ontology.
  std::vector<char> done(n, 0);
  auto closure = [&](auto&& self, int c) -> const std::vector<int>& {
    if (done[c]) return ancestors_[c];
    std::vector<int> acc;
    for (const auto& p : g.parents(names_[c])) {
      int pi = ids_.at(p);
      acc.push_back(pi);
      const auto& up = self(self, pi);
      acc.insert(acc.end(), up.begin(), up.end());
    }
    std::sort(acc.begin(), acc.end());
    acc.erase(std::unique(acc.begin(), acc.end()), acc.end());
    ancestors_[c] = std::move(acc);
    done[c] = 1;
    return ancestors_[c];
  };
  for (int c = 0; c < n; ++c) {
    all_[c] = c;
    closure(closure, c);
    for (int t : ancestors_[c]) instances_[t].push_back(c);
    const auto& f = g.features(names_[c]);
    truth_[c] = f.truth;
  }
  for (const auto& [p, sig] : g.predicates()) {
    int pi = ids_.at(p);
    is_pred_[pi] = 1;
    all_preds_.push_back(pi);
    if (sig.subject) {
      subject_[pi] = ids_.at(*sig.subject);
      by_subject_[subject_[pi]].push_back(pi);
    }
    if (sig.object) {
      object_[pi] = ids_.at(*sig.object);
      by_object_[object_[pi]].push_back(pi);
    }
  }
  std::sort(all_preds_.begin(), all_preds_.end());
}

int DataIndex::find(const ConceptId& c) const {
  auto it = ids_.find(c);
  return it == ids_.end() ? -1 : it->second;
}

bool DataIndex::has_type(int c, int t) const {
  const auto& a = ancestors_[c];
  return std::binary_search(a.begin(), a.end(), t);
}

// ---------------------------------------------------------------------------
// Matching

namespace {

struct QNode {
  ConceptId name;
  bool var = false;
  int data = -1;           // bound data id (constants, seeds)
  std::vector<int> types;  // data ids of tau_Q
  bool pred = false;
  int subj = -1;  // query node index
  int obj = -1;
  Truth truth = Truth::positive;
};

enum class Anchor { arg_of_bound_pred, pred_of_bound_arg, base };

struct Step {
  int node;
  Anchor anchor = Anchor::base;
  int via = -1;        // anchor node
  bool via_subject = true;
  std::vector<int> pred_checks;
  std::vector<std::pair<int, int>> distinct_checks;
};

class Matcher {
 public:
  Matcher(const QueryGraph& q, const DataIndex& d, const Solution& seed)
      : q_(q), d_(d) {
    ok_ = build(seed) && ok_;
  }

  SolutionSet run() {
    SolutionSet out;
    if (!ok_) return out;
    assign_.assign(nodes_.size(), -1);
    for (std::size_t i = 0; i < nodes_.size(); ++i)
      if (!nodes_[i].var) assign_[i] = nodes_[i].data;
    for (int p : ground_checks_)
      if (!check_pred(p)) return out;
    search(0, out);
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
  }

 private:
  bool build(const Solution& seed) {
    const ConceptGraph& g = q_.graph;
    std::map<ConceptId, int> index;
    for (const auto& [c, f] : g.nodes()) {
      index.emplace(c, static_cast<int>(nodes_.size()));
      QNode n;
      n.name = c;
      n.var = q_.variables.count(c) != 0;
      if (n.var) {
        auto s = seed.bindings.find(c);
        if (s != seed.bindings.end()) {
          n.var = false;
          n.data = d_.find(s->second);
          if (n.data < 0) return false;
          seeded_.emplace_back(c, s->second);
        }
      } else {
        n.data = d_.find(c);
        if (n.data < 0) return false;  // C_Q must be a subset of C_K
      }
      n.truth = f.truth;
      nodes_.push_back(std::move(n));
    }
    for (auto& n : nodes_) {
      for (const auto& t : g.tau(n.name)) {
        if (q_.variables.count(t))
          throw std::invalid_argument("query '" + q_.name +
                                      "' uses variable type '" + t + "'");
        int ti = d_.find(t);
        if (ti < 0) return false;
        n.types.push_back(ti);
      }
      if (!n.var && n.data >= 0)
        for (int t : n.types)
          if (!d_.has_type(n.data, t)) return false;
    }
    for (const auto& [p, sig] : g.predicates()) {
      QNode& n = nodes_[index.at(p)];
      n.pred = true;
      if (sig.subject) n.subj = index.at(*sig.subject);
      if (sig.object) n.obj = index.at(*sig.object);
    }
    for (const auto& n : nodes_)
      if (!n.var && n.pred && (!d_.is_predicate(n.data) ||
                               d_.truth(n.data) != n.truth))
        return false;
    plan(index);
    return true;
  }

  std::size_t base_size(const QNode& n) const {
    std::size_t best = n.pred ? d_.all_predicates().size() : d_.all().size();
    for (int t : n.types) best = std::min(best, d_.instances(t).size());
    return best;
  }

  void plan(const std::map<ConceptId, int>& index) {
    const int n = static_cast<int>(nodes_.size());
    std::vector<char> known(n, 0);
    for (int i = 0; i < n; ++i) known[i] = !nodes_[i].var;
    std::vector<int> bound_at(n, -1);

    int remaining = 0;
    for (const auto& node : nodes_) remaining += node.var ? 1 : 0;
    while (remaining-- > 0) {
      Step best{-1};
      std::size_t best_cost = std::numeric_limits<std::size_t>::max();
      for (int v = 0; v < n; ++v) {
        if (known[v]) continue;
        Step s{v};
        std::size_t cost;
        // v is an argument of a predicate whose image is known.
        for (int p = 0; p < n && s.anchor == Anchor::base; ++p) {
          if (!nodes_[p].pred || !known[p]) continue;
          if (nodes_[p].subj == v) {
            s.anchor = Anchor::arg_of_bound_pred;
            s.via = p;
            s.via_subject = true;
          } else if (nodes_[p].obj == v) {
            s.anchor = Anchor::arg_of_bound_pred;
            s.via = p;
            s.via_subject = false;
          }
        }
        if (s.anchor == Anchor::arg_of_bound_pred) {
          cost = 0;
        } else if (nodes_[v].pred && nodes_[v].subj >= 0 &&
                   known[nodes_[v].subj]) {
          s.anchor = Anchor::pred_of_bound_arg;
          s.via = nodes_[v].subj;
          s.via_subject = true;
          cost = 1;
        } else if (nodes_[v].pred && nodes_[v].obj >= 0 &&
                   known[nodes_[v].obj]) {
          s.anchor = Anchor::pred_of_bound_arg;
          s.via = nodes_[v].obj;
          s.via_subject = false;
          cost = 1;
        } else {
          cost = 2 + base_size(nodes_[v]);
        }
        if (cost < best_cost) {
          best_cost = cost;
          best = s;
        }
      }
      known[best.node] = 1;
      bound_at[best.node] = static_cast<int>(steps_.size());
      steps_.push_back(best);
    }

    // Attach each predicate check to the step that binds its last node.
    for (int p = 0; p < n; ++p) {
      if (!nodes_[p].pred) continue;
      int last = bound_at[p];
      if (nodes_[p].subj >= 0) last = std::max(last, bound_at[nodes_[p].subj]);
      if (nodes_[p].obj >= 0) last = std::max(last, bound_at[nodes_[p].obj]);
      if (last < 0)
        ground_checks_.push_back(p);
      else
        steps_[last].pred_checks.push_back(p);
    }
    for (const auto& [a, b] : q_.distinct) {
      auto ia = index.find(a), ib = index.find(b);
      if (ia == index.end() || ib == index.end()) continue;
      int last = std::max(bound_at[ia->second], bound_at[ib->second]);
      if (last < 0)
        ground_distinct_.emplace_back(ia->second, ib->second);
      else
        steps_[last].distinct_checks.emplace_back(ia->second, ib->second);
    }
    for (auto [a, b] : ground_distinct_)
      if (nodes_[a].data == nodes_[b].data) ok_ = false;
  }

  bool check_pred(int p) const {
    const QNode& n = nodes_[p];
    int dp = assign_[p];
    if (!d_.is_predicate(dp) || d_.truth(dp) != n.truth) return false;
    if (n.subj >= 0 && d_.subject(dp) != assign_[n.subj]) return false;
    if (n.obj >= 0 && d_.object(dp) != assign_[n.obj]) return false;
    return true;
  }

  bool admissible(const QNode& n, int c) const {
    for (int t : n.types)
      if (!d_.has_type(c, t)) return false;
    if (n.pred && (!d_.is_predicate(c) || d_.truth(c) != n.truth))
      return false;
    return true;
  }

  void try_candidate(std::size_t depth, const Step& s, int c,
                     SolutionSet& out) {
    if (c < 0 || !admissible(nodes_[s.node], c)) return;
    assign_[s.node] = c;
    bool ok = true;
    for (int p : s.pred_checks)
      if (!check_pred(p)) {
        ok = false;
        break;
      }
    if (ok)
      for (auto [a, b] : s.distinct_checks)
        if (assign_[a] == assign_[b]) {
          ok = false;
          break;
        }
    if (ok) search(depth + 1, out);
    assign_[s.node] = -1;
  }

  void search(std::size_t depth, SolutionSet& out) {
    if (depth == steps_.size()) {
      Solution sol;
      for (const auto& [k, v] : seeded_) sol.bindings.emplace(k, v);
      for (const auto& s : steps_)
        sol.bindings.emplace(nodes_[s.node].name, d_.name(assign_[s.node]));
      out.push_back(std::move(sol));
      return;
    }
    const Step& s = steps_[depth];
    const QNode& n = nodes_[s.node];
    switch (s.anchor) {
      case Anchor::arg_of_bound_pred: {
        int dp = assign_[s.via];
        if (!d_.is_predicate(dp)) return;
        try_candidate(depth, s, s.via_subject ? d_.subject(dp) : d_.object(dp),
                      out);
        return;
      }
      case Anchor::pred_of_bound_arg: {
        const auto& cands = s.via_subject
                                ? d_.preds_with_subject(assign_[s.via])
                                : d_.preds_with_object(assign_[s.via]);
        for (int c : cands) try_candidate(depth, s, c, out);
        return;
      }
      case Anchor::base: {
        const std::vector<int>* cands =
            n.pred ? &d_.all_predicates() : &d_.all();
        for (int t : n.types)
          if (d_.instances(t).size() < cands->size())
            cands = &d_.instances(t);
        for (int c : *cands) try_candidate(depth, s, c, out);
        return;
      }
    }
  }

  const QueryGraph& q_;
  const DataIndex& d_;
  bool ok_ = true;
  std::vector<QNode> nodes_;
  std::vector<Step> steps_;
  std::vector<int> ground_checks_;
  std::vector<std::pair<int, int>> ground_distinct_;
  std::vector<std::pair<ConceptId, ConceptId>> seeded_;
  std::vector<int> assign_;
};

}  // namespace

SolutionSet match(const QueryGraph& query, const DataIndex& data,
                  const Solution& seed) {
  return Matcher(query, data, seed).run();
}

SolutionSet match(const QueryGraph& query, const ConceptGraph& data,
                  const Solution& seed) {
  DataIndex index(data);
  return match(query, index, seed);
}

std::vector<SolutionSet> match_all(std::span<const QueryGraph* const> queries,
                                   const ConceptGraph& data, int threads) {
  DataIndex index(data);
  std::vector<SolutionSet> out(queries.size());
  const long n = static_cast<long>(queries.size());
  if (threads <= 0) threads = omp_get_max_threads();
#pragma omp parallel for schedule(dynamic, 4) num_threads(threads)
  for (long i = 0; i < n; ++i) out[i] = match(*queries[i], index);
  return out;
}

std::vector<SolutionSet> match_all(const std::vector<QueryGraph>& queries,
                                   const ConceptGraph& data, int threads) {
  std::vector<const QueryGraph*> ptrs;
  ptrs.reserve(queries.size());
  for (const auto& q : queries) ptrs.push_back(&q);
  return match_all(ptrs, data, threads);
}

std::vector<SolutionSet> match_all_serial(
    std::span<const QueryGraph* const> queries, const ConceptGraph& data) {
  DataIndex index(data);
  std::vector<SolutionSet> out;
  out.reserve(queries.size());
  for (const QueryGraph* q : queries) out.push_back(match(*q, index));
  return out;
}

}  // namespace cgchat
