#pragma once

#include <algorithm>
#include <cctype>
#include <concepts>
#include <cstddef>
#include <deque>
#include <memory>
#include <optional>
#include <ranges>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "uxv/error.hpp"

namespace uxv::ctl {

enum class Op { True, Atom, Not, And, Or, Implies, EX, EF, EG, EU, AX, AF, AG, AU };

inline std::string_view to_string(Op op) {
  switch (op) {
    case Op::True: return "true";
    case Op::Atom: return "atom";
    case Op::Not: return "!";
    case Op::And: return "&";
    case Op::Or: return "|";
    case Op::Implies: return "->";
    case Op::EX: return "EX";
    case Op::EF: return "EF";
    case Op::EG: return "EG";
    case Op::EU: return "EU";
    case Op::AX: return "AX";
    case Op::AF: return "AF";
    case Op::AG: return "AG";
    case Op::AU: return "AU";
  }
  return "?";
}

inline bool is_unary(Op op) {
  return op == Op::Not || op == Op::EX || op == Op::EF || op == Op::EG || op == Op::AX ||
         op == Op::AF || op == Op::AG;
}

inline bool is_binary(Op op) {
  return op == Op::And || op == Op::Or || op == Op::Implies || op == Op::EU || op == Op::AU;
}

// Immutable CTL formula; subtrees are shared.
class Formula {
 public:
  struct Node {
    Op op = Op::True;
    std::string atom;        // proposition name for Op::Atom
    bool value = true;       // atom compares against this value
    bool comparison = false; // atom was written as `name==value`
    std::shared_ptr<const Node> lhs, rhs;
  };

  Formula() : node_(std::make_shared<Node>()) {}

  static Formula truth() { return Formula{}; }
  static Formula falsity() { return negate(truth()); }

  static Formula atom(std::string name, bool value = true, bool comparison = false) {
    auto n = std::make_shared<Node>();
    n->op = Op::Atom;
    n->atom = std::move(name);
    n->value = value;
    n->comparison = comparison || !value;
    return Formula(std::move(n));
  }
  static Formula var(std::string name, bool value) { return atom(std::move(name), value, true); }
  static Formula step(int id) { return atom("step_" + std::to_string(id)); }

  static Formula unary(Op op, const Formula& f) {
    auto n = std::make_shared<Node>();
    n->op = op;
    n->lhs = f.node_;
    return Formula(std::move(n));
  }
  static Formula binary(Op op, const Formula& a, const Formula& b) {
    auto n = std::make_shared<Node>();
    n->op = op;
    n->lhs = a.node_;
    n->rhs = b.node_;
    return Formula(std::move(n));
  }

  static Formula negate(const Formula& f) { return unary(Op::Not, f); }
  static Formula conj(const Formula& a, const Formula& b) { return binary(Op::And, a, b); }
  static Formula disj(const Formula& a, const Formula& b) { return binary(Op::Or, a, b); }
  static Formula implies(const Formula& a, const Formula& b) { return binary(Op::Implies, a, b); }
  static Formula EX(const Formula& f) { return unary(Op::EX, f); }
  static Formula EF(const Formula& f) { return unary(Op::EF, f); }
  static Formula EG(const Formula& f) { return unary(Op::EG, f); }
  static Formula AX(const Formula& f) { return unary(Op::AX, f); }
  static Formula AF(const Formula& f) { return unary(Op::AF, f); }
  static Formula AG(const Formula& f) { return unary(Op::AG, f); }
  static Formula EU(const Formula& a, const Formula& b) { return binary(Op::EU, a, b); }
  static Formula AU(const Formula& a, const Formula& b) { return binary(Op::AU, a, b); }

  Op op() const { return node_->op; }
  const std::string& atom_name() const { return node_->atom; }
  bool atom_value() const { return node_->value; }
  bool atom_comparison() const { return node_->comparison; }
  Formula lhs() const { return Formula(node_->lhs); }
  Formula rhs() const { return Formula(node_->rhs); }
  const Node* id() const { return node_.get(); }

  std::size_t depth() const {
    if (is_unary(op())) return 1 + lhs().depth();
    if (is_binary(op())) return 1 + std::max(lhs().depth(), rhs().depth());
    return 0;
  }

  friend bool operator==(const Formula& a, const Formula& b) {
    if (a.node_ == b.node_) return true;
    if (a.op() != b.op()) return false;
    if (a.op() == Op::Atom)
      return a.atom_name() == b.atom_name() && a.atom_value() == b.atom_value() &&
             a.atom_comparison() == b.atom_comparison();
    if (is_unary(a.op())) return a.lhs() == b.lhs();
    if (is_binary(a.op())) return a.lhs() == b.lhs() && a.rhs() == b.rhs();
    return true;
  }

 private:
  explicit Formula(std::shared_ptr<const Node> n) : node_(std::move(n)) {}
  std::shared_ptr<const Node> node_;
};

// Canonical text; parse_ctl(to_string(f)) == f.
inline std::string to_string(const Formula& f) {
  switch (f.op()) {
    case Op::True: return "true";
    case Op::Atom:
      if (!f.atom_comparison()) return f.atom_name();
      return f.atom_name() + (f.atom_value() ? "==true" : "==false");
    case Op::Not: return "!" + to_string(f.lhs());
    case Op::And: return "(" + to_string(f.lhs()) + " & " + to_string(f.rhs()) + ")";
    case Op::Or: return "(" + to_string(f.lhs()) + " | " + to_string(f.rhs()) + ")";
    case Op::Implies: return "(" + to_string(f.lhs()) + " -> " + to_string(f.rhs()) + ")";
    case Op::EU: return "E[" + to_string(f.lhs()) + " U " + to_string(f.rhs()) + "]";
    case Op::AU: return "A[" + to_string(f.lhs()) + " U " + to_string(f.rhs()) + "]";
    default: {
      auto operand = to_string(f.lhs());
      std::string name{to_string(f.op())};
      return name + (operand.front() == '(' ? "" : " ") + operand;
    }
  }
}

// ---------------------------------------------------------------------------
// Parsing

namespace detail {

class Parser {
 public:
  explicit Parser(std::string_view text) : text_(text) {}

  Formula parse() {
    auto f = parse_implies();
    skip_ws();
    if (pos_ != text_.size()) fail("unexpected trailing input");
    return f;
  }

 private:
  [[noreturn]] void fail(const std::string& msg) const { throw CtlParseError(pos_, msg); }

  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool accept(std::string_view tok) {
    skip_ws();
    if (text_.substr(pos_, tok.size()) == tok) {
      pos_ += tok.size();
      return true;
    }
    return false;
  }

  void expect(std::string_view tok) {
    if (!accept(tok)) fail("expected '" + std::string(tok) + "'");
  }

  static bool ident_start(char c) {
    return std::isalpha(static_cast<unsigned char>(c)) || c == '_';
  }
  static bool ident_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
  }

  std::string peek_ident() {
    skip_ws();
    std::size_t p = pos_;
    if (p >= text_.size() || !ident_start(text_[p])) return {};
    while (p < text_.size() && ident_char(text_[p])) ++p;
    return std::string(text_.substr(pos_, p - pos_));
  }

  Formula parse_implies() {
    auto lhs = parse_or();
    if (accept("->") || accept("\xE2\x86\x92")) return Formula::implies(lhs, parse_implies());
    return lhs;
  }

  Formula parse_or() {
    auto lhs = parse_and();
    while (accept("||") || accept("|") || accept("\xE2\x88\xA8")) lhs = Formula::disj(lhs, parse_and());
    return lhs;
  }

  Formula parse_and() {
    auto lhs = parse_unary();
    while (accept("&&") || accept("&") || accept("\xE2\x88\xA7")) lhs = Formula::conj(lhs, parse_unary());
    return lhs;
  }

  Formula parse_until(bool universal) {
    expect("[");
    auto a = parse_implies();
    if (peek_ident() != "U") fail("expected 'U'");
    pos_ += 1;
    auto b = parse_implies();
    expect("]");
    return universal ? Formula::AU(a, b) : Formula::EU(a, b);
  }

  Formula parse_unary() {
    skip_ws();
    if (accept("!") || accept("\xC2\xAC")) return Formula::negate(parse_unary());
    const auto word = peek_ident();
    static constexpr std::pair<std::string_view, Op> temporal[] = {
        {"AG", Op::AG}, {"AF", Op::AF}, {"AX", Op::AX},
        {"EG", Op::EG}, {"EF", Op::EF}, {"EX", Op::EX}};
    for (auto [name, op] : temporal) {
      if (word == name) {
        pos_ += name.size();
        return Formula::unary(op, parse_unary());
      }
    }
    if (word == "A" || word == "E") {
      pos_ += 1;
      return parse_until(word == "A");
    }
    return parse_primary();
  }

  Formula parse_primary() {
    skip_ws();
    if (accept("(")) {
      auto f = parse_implies();
      expect(")");
      return f;
    }
    const auto word = peek_ident();
    if (word.empty()) fail(pos_ < text_.size() ? "unexpected character" : "unexpected end of input");
    pos_ += word.size();
    if (word == "true") return Formula::truth();
    if (word == "false") return Formula::falsity();
    if (word == "U" || word == "A" || word == "E") fail("reserved word '" + word + "'");
    if (accept("==")) {
      const auto value = peek_ident();
      if (value != "true" && value != "false") fail("expected 'true' or 'false'");
      pos_ += value.size();
      return Formula::var(word, value == "true");
    }
    return Formula::atom(word);
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

}  // namespace detail

inline Formula parse_ctl(std::string_view text) { return detail::Parser(text).parse(); }

// Rewrites a formula into the basis {true, atom, !, &, EX, EU, EG}.
inline Formula to_basis(const Formula& f) {
  using F = Formula;
  switch (f.op()) {
    case Op::True:
    case Op::Atom: return f;
    case Op::Not: return F::negate(to_basis(f.lhs()));
    case Op::And: return F::conj(to_basis(f.lhs()), to_basis(f.rhs()));
    case Op::Or:
      return F::negate(F::conj(F::negate(to_basis(f.lhs())), F::negate(to_basis(f.rhs()))));
    case Op::Implies:
      return F::negate(F::conj(to_basis(f.lhs()), F::negate(to_basis(f.rhs()))));
    case Op::EX: return F::EX(to_basis(f.lhs()));
    case Op::EG: return F::EG(to_basis(f.lhs()));
    case Op::EU: return F::EU(to_basis(f.lhs()), to_basis(f.rhs()));
    case Op::EF: return F::EU(F::truth(), to_basis(f.lhs()));
    case Op::AX: return F::negate(F::EX(F::negate(to_basis(f.lhs()))));
    case Op::AG: return F::negate(F::EU(F::truth(), F::negate(to_basis(f.lhs()))));
    case Op::AF: return F::negate(F::EG(F::negate(to_basis(f.lhs()))));
    case Op::AU: {
      // A[a U b] = !(E[!b U (!a & !b)] | EG !b)
      auto a = to_basis(f.lhs());
      auto b = to_basis(f.rhs());
      auto nb = F::negate(b);
      auto bad = F::EU(nb, F::conj(F::negate(a), nb));
      return F::conj(F::negate(bad), F::negate(F::EG(nb)));
    }
  }
  return f;
}

// ---------------------------------------------------------------------------
// Kripke structures

template <class K>
concept KripkeStructure = requires(const K& k, std::size_t s, const std::string& name) {
  { k.state_count() } -> std::convertible_to<std::size_t>;
  { k.initial_state() } -> std::convertible_to<std::size_t>;
  { k.successors(s) } -> std::ranges::forward_range;
  { k.proposition(name) } -> std::same_as<std::optional<std::size_t>>;
  { k.holds(s, std::size_t{}) } -> std::convertible_to<bool>;
};

// Plain adjacency-list Kripke structure with a total edge relation.
struct ExplicitKripke {
  std::vector<std::vector<std::size_t>> edges;
  std::size_t initial = 0;
  std::vector<std::string> propositions;
  std::vector<std::vector<bool>> labels;  // labels[state][proposition]

  std::size_t state_count() const { return edges.size(); }
  std::size_t initial_state() const { return initial; }
  const std::vector<std::size_t>& successors(std::size_t s) const { return edges[s]; }
  std::optional<std::size_t> proposition(const std::string& name) const {
    for (std::size_t i = 0; i < propositions.size(); ++i)
      if (propositions[i] == name) return i;
    return std::nullopt;
  }
  bool holds(std::size_t s, std::size_t p) const { return labels[s][p]; }
};

// Finite path through a Kripke structure. With `loop_start` set, the last
// state has an edge back to states[*loop_start] (a lasso).
struct Evidence {
  enum class Kind { Witness, Counterexample };
  Kind kind = Kind::Witness;
  std::vector<std::size_t> states;
  std::optional<std::size_t> loop_start;
};

struct CheckResult {
  bool holds = false;
  std::vector<bool> satisfied;  // indexed by state
  std::optional<Evidence> evidence;

  std::vector<std::size_t> sat_states() const {
    std::vector<std::size_t> out;
    for (std::size_t s = 0; s < satisfied.size(); ++s)
      if (satisfied[s]) out.push_back(s);
    return out;
  }
};

template <KripkeStructure K>
class Checker {
 public:
  using StateSet = std::vector<bool>;

  explicit Checker(const K& k) : k_(k), n_(k.state_count()), preds_(n_) {
    for (std::size_t s = 0; s < n_; ++s)
      for (std::size_t t : k_.successors(s)) preds_[t].push_back(s);
  }

  // Throws UnknownAtom for propositions outside the structure's alphabet.
  void check_atoms(const Formula& f) const {
    if (f.op() == Op::Atom && !k_.proposition(f.atom_name())) throw UnknownAtom(f.atom_name());
    if (is_unary(f.op())) check_atoms(f.lhs());
    if (is_binary(f.op())) {
      check_atoms(f.lhs());
      check_atoms(f.rhs());
    }
  }

  StateSet sat(const Formula& f) const {
    check_atoms(f);
    return label(to_basis(f));
  }

  CheckResult check(const Formula& f) const {
    CheckResult r;
    r.satisfied = sat(f);
    r.holds = n_ > 0 && r.satisfied[k_.initial_state()];
    r.evidence = evidence(f, r.holds);
    return r;
  }

 private:
  StateSet label(const Formula& f) const {
    switch (f.op()) {
      case Op::True: return StateSet(n_, true);
      case Op::Atom: {
        const auto p = *k_.proposition(f.atom_name());
        StateSet out(n_);
        for (std::size_t s = 0; s < n_; ++s) out[s] = (k_.holds(s, p) == f.atom_value());
        return out;
      }
      case Op::Not: {
        auto out = label(f.lhs());
        out.flip();
        return out;
      }
      case Op::And: {
        auto a = label(f.lhs());
        auto b = label(f.rhs());
        for (std::size_t s = 0; s < n_; ++s) a[s] = a[s] && b[s];
        return a;
      }
      case Op::EX: return pre_exists(label(f.lhs()));
      case Op::EU: return exists_until(label(f.lhs()), label(f.rhs()));
      case Op::EG: return exists_globally(label(f.lhs()));
      default: return label(to_basis(f));
    }
  }

  StateSet pre_exists(const StateSet& target) const {
    StateSet out(n_);
    for (std::size_t t = 0; t < n_; ++t)
      if (target[t])
        for (std::size_t s : preds_[t]) out[s] = true;
    return out;
  }

  // Least fixpoint: b | (a & EX Z), computed by backward search from b.
  StateSet exists_until(const StateSet& a, const StateSet& b) const {
    StateSet out = b;
    std::deque<std::size_t> work;
    for (std::size_t s = 0; s < n_; ++s)
      if (b[s]) work.push_back(s);
    while (!work.empty()) {
      auto t = work.front();
      work.pop_front();
      for (std::size_t s : preds_[t]) {
        if (!out[s] && a[s]) {
          out[s] = true;
          work.push_back(s);
        }
      }
    }
    return out;
  }

  // Greatest fixpoint: a & EX Z. States lose membership once no successor
  // remains inside the candidate set.
  StateSet exists_globally(const StateSet& a) const {
    StateSet out = a;
    std::vector<std::size_t> live(n_, 0);
    std::deque<std::size_t> work;
    for (std::size_t s = 0; s < n_; ++s) {
      if (!out[s]) continue;
      for (std::size_t t : k_.successors(s)) live[s] += out[t] ? 1 : 0;
      if (live[s] == 0) work.push_back(s);
    }
    while (!work.empty()) {
      auto t = work.front();
      work.pop_front();
      if (!out[t]) continue;
      out[t] = false;
      for (std::size_t s : preds_[t]) {
        if (!out[s]) continue;
        if (--live[s] == 0) work.push_back(s);
      }
    }
    return out;
  }

  // Shortest path from the initial state to a state in `goal`, moving only
  // through `via` states (the goal state itself need not be in `via`).
  std::optional<std::vector<std::size_t>> path_to(const StateSet& via, const StateSet& goal) const {
    const auto init = k_.initial_state();
    std::vector<std::size_t> parent(n_, n_);
    std::vector<bool> seen(n_);
    std::deque<std::size_t> work{init};
    seen[init] = true;
    while (!work.empty()) {
      auto s = work.front();
      work.pop_front();
      if (goal[s]) {
        std::vector<std::size_t> path;
        for (auto v = s; v != n_; v = parent[v]) path.push_back(v);
        std::reverse(path.begin(), path.end());
        return path;
      }
      if (!via[s]) continue;
      for (std::size_t t : k_.successors(s)) {
        if (seen[t]) continue;
        seen[t] = true;
        parent[t] = s;
        work.push_back(t);
      }
    }
    return std::nullopt;
  }

  // Lasso inside `set` starting at the initial state; `set` must be an EG
  // fixpoint containing the initial state.
  Evidence lasso(const StateSet& set, Evidence::Kind kind) const {
    Evidence e{kind, {}, std::nullopt};
    std::vector<std::size_t> index(n_, n_);
    std::size_t s = k_.initial_state();
    while (index[s] == n_) {
      index[s] = e.states.size();
      e.states.push_back(s);
      for (std::size_t t : k_.successors(s)) {
        if (set[t]) {
          s = t;
          break;
        }
      }
    }
    e.loop_start = index[s];
    return e;
  }

  std::optional<Evidence> evidence(const Formula& f, bool holds) const {
    if (n_ == 0) return std::nullopt;
    using Kind = Evidence::Kind;
    auto finite = [](std::optional<std::vector<std::size_t>> p, Kind kind) -> std::optional<Evidence> {
      if (!p) return std::nullopt;
      return Evidence{kind, std::move(*p), std::nullopt};
    };
    const StateSet all(n_, true);
    switch (f.op()) {
      case Op::EF:
        if (holds) return finite(path_to(all, sat(f.lhs())), Kind::Witness);
        break;
      case Op::AG:
        if (!holds) {
          auto bad = sat(f.lhs());
          bad.flip();
          return finite(path_to(all, bad), Kind::Counterexample);
        }
        break;
      case Op::EU:
        if (holds) return finite(path_to(sat(f.lhs()), sat(f.rhs())), Kind::Witness);
        break;
      case Op::EX:
      case Op::AX: {
        const bool want_witness = f.op() == Op::EX;
        if (want_witness != holds) break;
        const auto inner = sat(f.lhs());
        const auto init = k_.initial_state();
        for (std::size_t t : k_.successors(init))
          if (inner[t] == want_witness)
            return Evidence{want_witness ? Kind::Witness : Kind::Counterexample, {init, t}, std::nullopt};
        break;
      }
      case Op::EG:
        if (holds) return lasso(sat(f), Kind::Witness);
        break;
      case Op::AF:
        if (!holds) return lasso(sat(Formula::EG(Formula::negate(f.lhs()))), Kind::Counterexample);
        break;
      case Op::AU:
        if (!holds) {
          auto nb = Formula::negate(f.rhs());
          auto eg = sat(Formula::EG(nb));
          if (eg[k_.initial_state()]) return lasso(eg, Kind::Counterexample);
          auto via = sat(nb);
          auto goal = sat(Formula::conj(Formula::negate(f.lhs()), nb));
          return finite(path_to(via, goal), Kind::Counterexample);
        }
        break;
      default: break;
    }
    return std::nullopt;
  }

  const K& k_;
  std::size_t n_;
  std::vector<std::vector<std::size_t>> preds_;
};

template <KripkeStructure K>
CheckResult check(const K& k, const Formula& f) {
  return Checker<K>(k).check(f);
}

// ---------------------------------------------------------------------------
// Property files: [{name, formula, expect: "hold"|"fail"|"report"}]

enum class Expectation { Hold, Fail, Report };

inline std::string_view to_string(Expectation e) {
  switch (e) {
    case Expectation::Hold: return "hold";
    case Expectation::Fail: return "fail";
    case Expectation::Report: return "report";
  }
  return "?";
}

struct PropertySpec {
  std::string name;
  Formula formula;
  Expectation expect = Expectation::Hold;
};

inline std::vector<PropertySpec> parse_property_file(std::string_view text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw MalformedJson(e.what());
  }
  if (!doc.is_array()) throw SchemaViolation("$", "property file must be a JSON array");
  std::vector<PropertySpec> out;
  for (std::size_t i = 0; i < doc.size(); ++i) {
    const auto& p = doc[i];
    const std::string path = "[" + std::to_string(i) + "]";
    if (!p.is_object() || !p.contains("formula") || !p["formula"].is_string())
      throw SchemaViolation(path, "expected an object with a string 'formula'");
    PropertySpec spec;
    spec.name = p.value("name", "property" + std::to_string(i));
    spec.formula = parse_ctl(p["formula"].get<std::string>());
    const auto expect = p.value("expect", std::string("hold"));
    if (expect == "hold")
      spec.expect = Expectation::Hold;
    else if (expect == "fail")
      spec.expect = Expectation::Fail;
    else if (expect == "report")
      spec.expect = Expectation::Report;
    else
      throw SchemaViolation(path + ".expect", "expected hold, fail or report");
    out.push_back(std::move(spec));
  }
  return out;
}

}  // namespace uxv::ctl
