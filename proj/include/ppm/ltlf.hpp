#pragma once

#include <cstddef>
#include <memory>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace ppm {

/// Immutable LTLf syntax tree. Copies share structure.
class LtlfFormula {
public:
  enum class Op { True, False, Atom, Not, And, Or, Implies, Next, Always, Eventually, Until };

  LtlfFormula();  // the constant `true`

  Op op() const noexcept;
  const std::string& atom() const noexcept;  // empty unless op() == Atom
  LtlfFormula lhs() const;  // operand of unary operators
  LtlfFormula rhs() const;

  std::string to_string() const;
  std::size_t size() const noexcept;  // number of nodes

  friend bool operator==(const LtlfFormula& a, const LtlfFormula& b);

  struct Node;

private:
  explicit LtlfFormula(std::shared_ptr<const Node> node) : node_(std::move(node)) {}
  std::shared_ptr<const Node> node_;

  friend LtlfFormula make_node(Op, std::string, const LtlfFormula*, const LtlfFormula*);
};

namespace ltlf {
LtlfFormula truth();
LtlfFormula falsity();
LtlfFormula atom(std::string activity);
LtlfFormula next(const LtlfFormula& f);
LtlfFormula always(const LtlfFormula& f);
LtlfFormula eventually(const LtlfFormula& f);
LtlfFormula until(const LtlfFormula& lhs, const LtlfFormula& rhs);
LtlfFormula implies(const LtlfFormula& lhs, const LtlfFormula& rhs);
}  // namespace ltlf

LtlfFormula operator!(const LtlfFormula& f);
LtlfFormula operator&&(const LtlfFormula& a, const LtlfFormula& b);
LtlfFormula operator||(const LtlfFormula& a, const LtlfFormula& b);

struct LtlfParse {
  LtlfFormula formula;
  std::vector<std::string> warnings;  // one per atom outside the alphabet
};

/// Grammar, loosest to tightest binding:
///   f := f -> f (right assoc) | f || f | f && f | f U f (right assoc)
///      | !f | X f | G f | F f | (f) | true | false | atom
/// Atoms are bare identifiers or quoted strings. A bare identifier that is
/// not in the alphabet but matches one after replacing '_' with ' ' resolves
/// to that activity.
LtlfParse parse_ltlf(std::string_view text, const std::set<std::string>& alphabet);

/// Finite-trace semantics; each position carries exactly one activity.
/// `position == trace.size()` is the empty suffix. X is strong: it is false
/// where no next position exists.
bool ltlf_eval(const LtlfFormula& formula, std::span<const std::string> trace,
               std::size_t position = 0);

}  // namespace ppm
