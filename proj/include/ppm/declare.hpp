#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>

#include "ppm/ltlf.hpp"

namespace ppm {

enum class Template : std::uint8_t {
  Existence,
  Absence,
  Exactly,
  Init,
  Choice,
  ExclusiveChoice,
  RespondedExistence,
  Response,
  AlternateResponse,
  ChainResponse,
  Precedence,
  AlternatePrecedence,
  ChainPrecedence,
  NotRespondedExistence,
  NotResponse,
  NotPrecedence,
  NotChainResponse,
  NotChainPrecedence,
};

inline constexpr std::size_t kTemplateCount = 18;
/// Declaration order, which is also column order in a constraint universe.
std::span<const Template> all_templates();

enum class Family : std::uint8_t { E, C, PR, NR };

Family family_of(Template t);
int arity(Template t);
/// existence, absence and exactly carry a count parameter.
bool takes_n(Template t);
std::string_view template_name(Template t);
std::optional<Template> template_from_name(std::string_view name);
std::string_view family_name(Family f);
std::optional<Family> family_from_name(std::string_view name);

/// A template instantiated over activities. For absence, `n` is the exclusive
/// bound: absence(n=2, a) means a occurs at most once.
struct Constraint {
  Template tmpl = Template::Existence;
  std::string activation;
  std::string target;  // empty for unary templates
  int n = 0;           // 0 unless takes_n(tmpl)

  static Constraint unary(Template t, std::string a, int n = 1);
  static Constraint binary(Template t, std::string a, std::string b);

  /// "response(a, b)", "existence(n=1, ER Triage)", "init(a)".
  std::string to_string() const;
  /// Inverse of to_string; '_' is accepted in place of ' ' in template names.
  static Constraint parse(std::string_view text);
  /// The LTLf reading of the constraint.
  LtlfFormula formula() const;

  auto operator<=>(const Constraint&) const = default;
  bool operator==(const Constraint&) const = default;
};

struct ActivationStats {
  int a = 0;  // activations
  int f = 0;  // fulfillments
  int v = 0;  // violations
  int p = 0;  // pendings
  bool done = false;

  bool operator==(const ActivationStats&) const = default;
};

enum class RVState : std::uint8_t {
  Violated = 0,
  Satisfied = 1,
  PossiblyViolated = 2,
  PossiblySatisfied = 3,
};

std::string_view rv_name(RVState s);
constexpr std::uint8_t code(RVState s) { return static_cast<std::uint8_t>(s); }

/// Constraint with activities resolved to integer ids. Ids < 0 never match an event.
struct CompiledConstraint {
  Template tmpl;
  int n;
  int activation;
  int target;
};

/// Core counting over integer-coded traces.
ActivationStats count_stats(const CompiledConstraint& c, std::span<const int> trace, bool done);
ActivationStats count_stats(const Constraint& c, std::span<const std::string> trace, bool done);

/// Applies the criteria rows in the order Violated, Satisfied, PossiblyViolated,
/// PossiblySatisfied. Throws InvalidStats when no row matches.
RVState rv_state(Template t, int n, const ActivationStats& s);
RVState rv_state(const Constraint& c, const ActivationStats& s);

/// rv_state of the complete trace is Satisfied.
bool holds_complete(const Constraint& c, std::span<const std::string> trace);

}  // namespace ppm
