#include "ppm/declare.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <vector>

#include "ppm/error.hpp"

namespace ppm {

namespace {

constexpr std::array<Template, kTemplateCount> kTemplates{
    Template::Existence,          Template::Absence,           Template::Exactly,
    Template::Init,               Template::Choice,            Template::ExclusiveChoice,
    Template::RespondedExistence, Template::Response,          Template::AlternateResponse,
    Template::ChainResponse,      Template::Precedence,        Template::AlternatePrecedence,
    Template::ChainPrecedence,    Template::NotRespondedExistence, Template::NotResponse,
    Template::NotPrecedence,      Template::NotChainResponse,  Template::NotChainPrecedence,
};

constexpr std::array<std::string_view, kTemplateCount> kNames{
    "existence",          "absence",
    "exactly",            "init",
    "choice",             "exclusive choice",
    "responded existence", "response",
    "alternate response", "chain response",
    "precedence",         "alternate precedence",
    "chain precedence",   "not responded existence",
    "not response",       "not precedence",
    "not chain response", "not chain precedence",
};

std::string trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return std::string(s);
}

}  // namespace

std::span<const Template> all_templates() { return kTemplates; }

Family family_of(Template t) {
  switch (t) {
    case Template::Existence:
    case Template::Absence:
    case Template::Exactly:
    case Template::Init: return Family::E;
    case Template::Choice:
    case Template::ExclusiveChoice: return Family::C;
    case Template::NotRespondedExistence:
    case Template::NotResponse:
    case Template::NotPrecedence:
    case Template::NotChainResponse:
    case Template::NotChainPrecedence: return Family::NR;
    default: return Family::PR;
  }
}

int arity(Template t) { return family_of(t) == Family::E ? 1 : 2; }

bool takes_n(Template t) {
  return t == Template::Existence || t == Template::Absence || t == Template::Exactly;
}

std::string_view template_name(Template t) { return kNames[static_cast<std::size_t>(t)]; }

std::optional<Template> template_from_name(std::string_view name) {
  std::string norm = trim(name);
  for (char& c : norm) {
    if (c == '_') c = ' ';
    c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  }
  for (std::size_t i = 0; i < kNames.size(); ++i)
    if (kNames[i] == norm) return kTemplates[i];
  return std::nullopt;
}

std::string_view family_name(Family f) {
  switch (f) {
    case Family::E: return "E";
    case Family::C: return "C";
    case Family::PR: return "PR";
    case Family::NR: return "NR";
  }
  return "E";
}

std::optional<Family> family_from_name(std::string_view name) {
  for (Family f : {Family::E, Family::C, Family::PR, Family::NR})
    if (family_name(f) == name) return f;
  return std::nullopt;
}

std::string_view rv_name(RVState s) {
  switch (s) {
    case RVState::Violated: return "Violated";
    case RVState::Satisfied: return "Satisfied";
    case RVState::PossiblyViolated: return "PossiblyViolated";
    case RVState::PossiblySatisfied: return "PossiblySatisfied";
  }
  return "Violated";
}

// ---------------------------------------------------------------------------
// Constraint

Constraint Constraint::unary(Template t, std::string a, int n) {
  if (arity(t) != 1) throw Error(ErrorKind::InvalidArgument, std::string(template_name(t)) + " is binary");
  if (a.empty()) throw Error(ErrorKind::InvalidArgument, "empty activity");
  if (takes_n(t) && n < 1) throw Error(ErrorKind::InvalidArgument, "n must be positive");
  return Constraint{t, std::move(a), {}, takes_n(t) ? n : 0};
}

Constraint Constraint::binary(Template t, std::string a, std::string b) {
  if (arity(t) != 2) throw Error(ErrorKind::InvalidArgument, std::string(template_name(t)) + " is unary");
  if (a.empty() || b.empty()) throw Error(ErrorKind::InvalidArgument, "empty activity");
  if (a == b) throw Error(ErrorKind::InvalidArgument, "activation and target must differ");
  return Constraint{t, std::move(a), std::move(b), 0};
}

std::string Constraint::to_string() const {
  std::string out(template_name(tmpl));
  out += '(';
  if (takes_n(tmpl)) out += "n=" + std::to_string(n) + ", ";
  out += activation;
  if (arity(tmpl) == 2) out += ", " + target;
  out += ')';
  return out;
}

Constraint Constraint::parse(std::string_view text) {
  const auto open = text.find('(');
  const auto close = text.rfind(')');
  if (open == std::string_view::npos) throw SyntaxError(text.size(), "'('");
  if (close == std::string_view::npos || close < open) throw SyntaxError(text.size(), "')'");
  if (!trim(text.substr(close + 1)).empty()) throw SyntaxError(close + 1, "end of input");
  auto tmpl = template_from_name(text.substr(0, open));
  if (!tmpl) throw SyntaxError(0, "template name");

  std::vector<std::string> args;
  std::string_view body = text.substr(open + 1, close - open - 1);
  int n = 1;
  if (takes_n(*tmpl)) {
    std::string head = trim(body);
    if (head.starts_with("n=") || head.starts_with("n =")) {
      const auto comma = body.find(',');
      if (comma == std::string_view::npos) throw SyntaxError(open + 1 + body.size(), "','");
      std::string num = trim(body.substr(body.find('=') + 1, comma - body.find('=') - 1));
      auto [ptr, ec] = std::from_chars(num.data(), num.data() + num.size(), n);
      if (ec != std::errc() || ptr != num.data() + num.size() || n < 1)
        throw SyntaxError(open + 1, "positive integer n");
      body.remove_prefix(comma + 1);
    }
  }
  if (arity(*tmpl) == 1) {
    args.push_back(trim(body));
  } else {
    // Split on the last comma so activation names may contain commas.
    const auto comma = body.rfind(',');
    if (comma == std::string_view::npos) throw SyntaxError(close, "','");
    args.push_back(trim(body.substr(0, comma)));
    args.push_back(trim(body.substr(comma + 1)));
  }
  for (const auto& a : args)
    if (a.empty()) throw SyntaxError(close, "activity name");
  return arity(*tmpl) == 1 ? unary(*tmpl, args[0], n) : binary(*tmpl, args[0], args[1]);
}

namespace {

LtlfFormula existence_formula(const LtlfFormula& a, int n) {
  using namespace ltlf;
  LtlfFormula f = eventually(a);
  for (int i = 1; i < n; ++i) f = eventually(a && next(f));
  return f;
}

}  // namespace

LtlfFormula Constraint::formula() const {
  using namespace ltlf;
  const LtlfFormula A = atom(activation);
  const LtlfFormula B = arity(tmpl) == 2 ? atom(target) : falsity();
  switch (tmpl) {
    case Template::Existence: return existence_formula(A, n);
    case Template::Absence: return !existence_formula(A, n);
    case Template::Exactly: return existence_formula(A, n) && !existence_formula(A, n + 1);
    case Template::Init: return A;
    case Template::Choice: return eventually(A) || eventually(B);
    case Template::ExclusiveChoice:
      return (eventually(A) && !eventually(B)) || (!eventually(A) && eventually(B));
    case Template::RespondedExistence: return implies(eventually(A), eventually(B));
    case Template::Response: return always(implies(A, eventually(B)));
    case Template::AlternateResponse: return always(implies(A, next(until(!A, B))));
    case Template::ChainResponse: return always(implies(A, next(B)));
    case Template::Precedence: return until(!B, A) || always(!B);
    case Template::AlternatePrecedence:
      return until(!B, A) && always(implies(B, next(until(!B, A) || always(!B))));
    case Template::ChainPrecedence: return always(implies(next(B), A));
    case Template::NotRespondedExistence: return implies(eventually(A), !eventually(B));
    case Template::NotResponse: return always(implies(A, !eventually(B)));
    case Template::NotPrecedence: return always(implies(eventually(B), !A));
    case Template::NotChainResponse: return always(implies(A, next(!B)));
    case Template::NotChainPrecedence: return always(implies(next(B), !A));
  }
  return truth();
}

// ---------------------------------------------------------------------------
// Counting

ActivationStats count_stats(const CompiledConstraint& c, std::span<const int> t, bool done) {
  ActivationStats s;
  s.done = done;
  const int n = static_cast<int>(t.size());
  const int A = c.activation;
  const int B = c.target;
  auto is = [&](int i, int id) { return id >= 0 && t[static_cast<std::size_t>(i)] == id; };
  auto count = [&](int id) {
    int k = 0;
    for (int i = 0; i < n; ++i) k += is(i, id);
    return k;
  };

  switch (c.tmpl) {
    case Template::Existence:
      s.a = count(A);
      s.f = std::min(s.a, c.n);
      s.v = done && s.a < c.n;
      break;
    case Template::Absence:
      s.a = count(A);
      s.v = std::max(0, s.a - (c.n - 1));
      s.f = s.a - s.v;
      break;
    case Template::Exactly:
      s.a = count(A);
      s.v = (s.a > c.n ? s.a - c.n : 0) + (done && s.a < c.n);
      s.f = std::min(s.a, c.n);
      break;
    case Template::Init:
      s.a = n > 0;
      s.f = n > 0 && is(0, A);
      s.v = (n > 0 && !is(0, A)) || (done && n == 0);
      break;
    case Template::Choice:
      s.a = count(A) + count(B);
      s.f = s.a;
      s.v = done && s.a == 0;
      break;
    case Template::ExclusiveChoice: {
      int first_a = -1, first_b = -1, na = 0, nb = 0;
      for (int i = 0; i < n; ++i) {
        if (is(i, A)) {
          ++na;
          if (first_a < 0) first_a = i;
        } else if (is(i, B)) {
          ++nb;
          if (first_b < 0) first_b = i;
        }
      }
      s.a = na + nb;
      // Occurrences of whichever activity appeared second are violations.
      if (na > 0 && nb > 0) s.v = first_a < first_b ? nb : na;
      else if (done && s.a == 0) s.v = 1;
      s.f = s.a - (s.a > 0 ? s.v : 0);
      break;
    }
    case Template::RespondedExistence: {
      const bool has_b = count(B) > 0;
      s.a = count(A);
      if (has_b) s.f = s.a;
      else s.p = s.a;
      if (done) s.v = s.p;
      break;
    }
    case Template::Response: {
      bool later_b = false;
      for (int i = n - 1; i >= 0; --i) {
        if (is(i, A)) {
          ++s.a;
          if (later_b) ++s.f;
          else ++s.p;
        }
        if (is(i, B)) later_b = true;
      }
      if (done) s.v = s.p;
      break;
    }
    case Template::AlternateResponse: {
      bool open = false;
      for (int i = 0; i < n; ++i) {
        if (is(i, A)) {
          ++s.a;
          if (open) ++s.v;
          open = true;
        } else if (is(i, B) && open) {
          ++s.f;
          open = false;
        }
      }
      if (open) {
        s.p = 1;
        if (done) ++s.v;
      }
      break;
    }
    case Template::ChainResponse:
      for (int i = 0; i < n; ++i) {
        if (!is(i, A)) continue;
        ++s.a;
        if (i + 1 < n) {
          if (is(i + 1, B)) ++s.f;
          else ++s.v;
        } else {
          s.p = 1;
          if (done) ++s.v;
        }
      }
      break;
    case Template::Precedence: {
      bool seen_a = false;
      for (int i = 0; i < n; ++i) {
        if (is(i, A)) seen_a = true;
        if (is(i, B)) {
          ++s.a;
          if (seen_a) ++s.f;
          else ++s.v;
        }
      }
      break;
    }
    case Template::AlternatePrecedence: {
      bool armed = false, any_a = false;
      for (int i = 0; i < n; ++i) {
        if (is(i, A)) armed = any_a = true;
        if (is(i, B)) {
          ++s.a;
          if (armed) ++s.f;
          else ++s.v;
          armed = false;
        }
      }
      // The (!B U A) conjunct needs an A; the strong X after each B needs a successor.
      if (done && (n == 0 || !any_a || is(n - 1, B))) ++s.v;
      break;
    }
    case Template::ChainPrecedence:
      for (int i = 1; i < n; ++i) {
        if (!is(i, B)) continue;
        ++s.a;
        if (is(i - 1, A)) ++s.f;
        else ++s.v;
      }
      break;
    case Template::NotRespondedExistence: {
      const bool has_b = count(B) > 0;
      s.a = count(A);
      if (has_b) s.v = s.a;
      else s.f = s.a;
      break;
    }
    case Template::NotResponse: {
      bool later_b = false;
      for (int i = n - 1; i >= 0; --i) {
        if (is(i, A)) {
          ++s.a;
          if (later_b) ++s.v;
          else ++s.f;
        }
        if (is(i, B)) later_b = true;
      }
      break;
    }
    case Template::NotPrecedence: {
      bool seen_a = false;
      for (int i = 0; i < n; ++i) {
        if (is(i, B)) {
          ++s.a;
          if (seen_a) ++s.v;
          else ++s.f;
        }
        if (is(i, A)) seen_a = true;
      }
      break;
    }
    case Template::NotChainResponse:
      for (int i = 0; i < n; ++i) {
        if (!is(i, A)) continue;
        ++s.a;
        if (i + 1 < n) {
          if (is(i + 1, B)) ++s.v;
          else ++s.f;
        } else {
          s.p = 1;
          if (done) ++s.v;
        }
      }
      break;
    case Template::NotChainPrecedence:
      for (int i = 1; i < n; ++i) {
        if (!is(i, B)) continue;
        ++s.a;
        if (is(i - 1, A)) ++s.v;
        else ++s.f;
      }
      break;
  }
  return s;
}

ActivationStats count_stats(const Constraint& c, std::span<const std::string> trace, bool done) {
  // Ids: 0 = activation, 1 = target, -1 = any other activity.
  std::vector<int> ids(trace.size());
  for (std::size_t i = 0; i < trace.size(); ++i) {
    if (trace[i] == c.activation) ids[i] = 0;
    else if (arity(c.tmpl) == 2 && trace[i] == c.target) ids[i] = 1;
    else ids[i] = -1;
  }
  return count_stats(CompiledConstraint{c.tmpl, c.n, 0, arity(c.tmpl) == 2 ? 1 : -1}, ids, done);
}

RVState rv_state(Template t, int n, const ActivationStats& s) {
  const bool d = s.done;
  bool viol = false, sat = false, pviol = false, psat = false;
  switch (t) {
    case Template::Response:
    case Template::RespondedExistence:
      viol = d && s.p > 0;
      sat = d && s.p == 0;
      pviol = !d && s.p > 0;
      psat = !d && s.p == 0;
      break;
    case Template::NotResponse:
    case Template::NotChainResponse:
    case Template::Precedence:
    case Template::NotPrecedence:
    case Template::Absence:
    case Template::ChainPrecedence:
    case Template::NotChainPrecedence:
    case Template::AlternatePrecedence:
    case Template::NotRespondedExistence:
      viol = s.v > 0;
      sat = d && s.v == 0;
      psat = !d && s.v == 0;
      break;
    case Template::Init:
      viol = s.v > 0;
      sat = s.f > 0;
      break;
    case Template::Existence:
      viol = d && s.a < n;
      sat = s.a >= n;
      pviol = !d && s.a < n;
      break;
    case Template::Exactly:
      viol = s.a > n || (d && s.a < n);
      sat = d && s.a == n;
      pviol = !d && s.a < n;
      psat = !d && s.a == n;
      break;
    case Template::ChainResponse:
    case Template::AlternateResponse:
      viol = s.v > 0 || (d && s.p > 0);
      sat = d && s.v == 0 && s.p == 0;
      pviol = !d && s.v == 0 && s.p > 0;
      psat = !d && s.v == 0 && s.p == 0;
      break;
    case Template::Choice:
      viol = d && s.a == 0;
      sat = s.a > 0;
      pviol = !d && s.a == 0;
      break;
    case Template::ExclusiveChoice:
      viol = s.v > 0 || (d && s.a == 0);
      sat = d && s.v == 0 && s.a > 0;
      pviol = !d && s.a == 0;
      psat = !d && s.v == 0 && s.a > 0;
      break;
  }
  if (viol) return RVState::Violated;
  if (sat) return RVState::Satisfied;
  if (pviol) return RVState::PossiblyViolated;
  if (psat) return RVState::PossiblySatisfied;
  throw Error(ErrorKind::InvalidStats,
              std::string(template_name(t)) + " a=" + std::to_string(s.a) + " f=" + std::to_string(s.f) +
                  " v=" + std::to_string(s.v) + " p=" + std::to_string(s.p) + " done=" + (d ? "true" : "false"));
}

RVState rv_state(const Constraint& c, const ActivationStats& s) { return rv_state(c.tmpl, c.n, s); }

bool holds_complete(const Constraint& c, std::span<const std::string> trace) {
  return rv_state(c, count_stats(c, trace, true)) == RVState::Satisfied;
}

}  // namespace ppm
