#pragma once

// Reference CTL semantics evaluated straight from the definitions over
// explicit paths. No fixpoints and no basis rewriting: every operator is
// decided by depth-first search over simple paths and lassos, which is only
// feasible for the tiny structures used in tests.

#include <map>
#include <random>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "uxv/ctl.hpp"

namespace oracle {

using uxv::ctl::ExplicitKripke;
using uxv::ctl::Formula;
using uxv::ctl::Op;

class NaiveCtl {
 public:
  explicit NaiveCtl(const ExplicitKripke& k) : k_(k) {}

  bool holds(const Formula& f, std::size_t s) {
    auto key = std::make_pair(f.id(), s);
    if (auto it = memo_.find(key); it != memo_.end()) return it->second;
    const bool v = eval(f, s);
    memo_.emplace(key, v);
    keep_.push_back(f);
    return v;
  }

  bool holds_initially(const Formula& f) { return holds(f, k_.initial); }

 private:
  bool eval(const Formula& f, std::size_t s) {
    switch (f.op()) {
      case Op::True: return true;
      case Op::Atom: {
        std::size_t p = 0;
        while (k_.propositions[p] != f.atom_name()) ++p;
        return k_.labels[s][p] == f.atom_value();
      }
      case Op::Not: return !holds(f.lhs(), s);
      case Op::And: return holds(f.lhs(), s) && holds(f.rhs(), s);
      case Op::Or: return holds(f.lhs(), s) || holds(f.rhs(), s);
      case Op::Implies: return !holds(f.lhs(), s) || holds(f.rhs(), s);
      case Op::EX:
        for (auto t : k_.edges[s])
          if (holds(f.lhs(), t)) return true;
        return false;
      case Op::AX:
        for (auto t : k_.edges[s])
          if (!holds(f.lhs(), t)) return false;
        return true;
      case Op::EF: return reach(s, f.lhs());
      case Op::AG: return !reach(s, Formula::negate(f.lhs()));
      case Op::EU: {
        std::set<std::size_t> path;
        return exists_until(s, f.lhs(), f.rhs(), path);
      }
      case Op::AU: {
        std::set<std::size_t> path;
        return all_until(s, f.lhs(), f.rhs(), path);
      }
      case Op::AF: {
        std::set<std::size_t> path;
        return all_until(s, Formula::truth(), f.lhs(), path);
      }
      case Op::EG: {
        std::set<std::size_t> path;
        return exists_lasso(s, f.lhs(), path);
      }
    }
    return false;
  }

  // Some state satisfying g is reachable from s (including s).
  bool reach(std::size_t s, const Formula& g) {
    std::set<std::size_t> seen{s};
    std::vector<std::size_t> todo{s};
    while (!todo.empty()) {
      auto u = todo.back();
      todo.pop_back();
      if (holds(g, u)) return true;
      for (auto t : k_.edges[u])
        if (seen.insert(t).second) todo.push_back(t);
    }
    return false;
  }

  // A simple path s..sk with b at sk and a before it.
  bool exists_until(std::size_t s, const Formula& a, const Formula& b, std::set<std::size_t>& path) {
    if (holds(b, s)) return true;
    if (!holds(a, s) || path.contains(s)) return false;
    path.insert(s);
    bool found = false;
    for (auto t : k_.edges[s])
      if (!found && exists_until(t, a, b, path)) found = true;
    path.erase(s);
    return found;
  }

  // Every path reaches b with a holding before; revisiting a state on the
  // current path exhibits an infinite path that never meets b.
  bool all_until(std::size_t s, const Formula& a, const Formula& b, std::set<std::size_t>& path) {
    if (holds(b, s)) return true;
    if (!holds(a, s) || path.contains(s)) return false;
    path.insert(s);
    bool ok = true;
    for (auto t : k_.edges[s])
      if (ok && !all_until(t, a, b, path)) ok = false;
    path.erase(s);
    return ok;
  }

  // A lasso entirely inside g starting at s.
  bool exists_lasso(std::size_t s, const Formula& g, std::set<std::size_t>& path) {
    if (!holds(g, s)) return false;
    if (path.contains(s)) return true;
    path.insert(s);
    bool found = false;
    for (auto t : k_.edges[s])
      if (!found && exists_lasso(t, g, path)) found = true;
    path.erase(s);
    return found;
  }

  const ExplicitKripke& k_;
  std::map<std::pair<const void*, std::size_t>, bool> memo_;
  std::vector<Formula> keep_;  // keeps memo keys' nodes alive
};

// Total transition relation: every state has at least one successor.
inline ExplicitKripke random_kripke(std::mt19937_64& rng, std::size_t max_states, std::size_t max_atoms) {
  std::uniform_int_distribution<std::size_t> n_states(1, max_states), n_atoms(1, max_atoms);
  ExplicitKripke k;
  const auto n = n_states(rng), a = n_atoms(rng);
  std::uniform_int_distribution<std::size_t> pick(0, n - 1);
  std::bernoulli_distribution coin(0.5), sparse(0.3);
  for (std::size_t p = 0; p < a; ++p) k.propositions.push_back("p" + std::to_string(p));
  k.edges.resize(n);
  k.labels.assign(n, std::vector<bool>(a));
  for (std::size_t s = 0; s < n; ++s) {
    for (std::size_t t = 0; t < n; ++t)
      if (sparse(rng)) k.edges[s].push_back(t);
    if (k.edges[s].empty()) k.edges[s].push_back(pick(rng));
    for (std::size_t p = 0; p < a; ++p) k.labels[s][p] = coin(rng);
  }
  k.initial = pick(rng);
  return k;
}

// Formula with depth() <= max_depth.
inline Formula random_formula(std::mt19937_64& rng, const std::vector<std::string>& atoms, std::size_t max_depth) {
  static constexpr Op kOps[] = {Op::Not, Op::And, Op::Or, Op::Implies, Op::EX, Op::EF, Op::EG,
                                Op::EU,  Op::AX,  Op::AF, Op::AG,      Op::AU};
  std::uniform_int_distribution<std::size_t> leaf(0, atoms.size()), op(0, std::size(kOps) - 1);
  std::bernoulli_distribution stop(0.25), polarity(0.5);
  if (max_depth == 0 || stop(rng)) {
    const auto i = leaf(rng);
    if (i == atoms.size()) return Formula::truth();
    return polarity(rng) ? Formula::atom(atoms[i]) : Formula::var(atoms[i], false);
  }
  const Op o = kOps[op(rng)];
  if (uxv::ctl::is_unary(o)) return Formula::unary(o, random_formula(rng, atoms, max_depth - 1));
  return Formula::binary(o, random_formula(rng, atoms, max_depth - 1), random_formula(rng, atoms, max_depth - 1));
}

}  // namespace oracle
