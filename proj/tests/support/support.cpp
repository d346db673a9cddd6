#include "support.hpp"

#include <cctype>
#include <cmath>
#include <random>
#include <stdexcept>

namespace ppm::testing {

// ---------------------------------------------------------------------------
// Sepsis running example

std::vector<std::string> sepsis_activities() {
  return {"ER Registration", "ER Triage",      "ER Sepsis Triage", "CRP",       "LacticAcid", "Leucocytes",
          "IV Liquid",       "IV Antibiotics", "Admission NC",     "Release A", "Return ER",  "Release B"};
}

ConstraintUniverse sepsis_universe() {
  const auto E = [](const char* a) { return Constraint::unary(Template::Existence, a, 1); };
  const auto Ab = [](const char* a) { return Constraint::unary(Template::Absence, a, 2); };
  const auto I = [](const char* a) { return Constraint::unary(Template::Init, a); };
  const auto Ex = [](const char* a) { return Constraint::unary(Template::Exactly, a, 1); };
  ConstraintUniverse u;
  u.constraints = {E("ER Registration"), E("ER Triage"),      E("ER Sepsis Triage"), I("CRP"),
                   Ex("CRP"),            Ab("LacticAcid"),    Ab("Leucocytes"),      Ex("Leucocytes"),
                   Ex("IV Liquid"),      E("IV Antibiotics"), E("Admission NC"),     Ab("Admission NC"),
                   Ex("Admission NC"),   E("Release A"),      Ab("Release A"),       I("Release A"),
                   Ex("Release A"),      E("Return ER"),      Ab("Return ER"),       I("Return ER"),
                   Ex("Return ER"),      E("Release B"),      Ab("Release B"),       Ex("Release B")};
  u.families = {Family::E};
  const auto acts = sepsis_activities();
  u.alphabet = {acts.begin(), acts.end()};
  return u;
}

namespace {

double entropy_bits(int pos, int neg) {
  const double n = pos + neg;
  double h = 0;
  for (int c : {pos, neg})
    if (c > 0) h -= (c / n) * std::log2(c / n);
  return h;
}

// Appends nodes in pre-order; returns the index of the subtree root.
struct TreeBuilder {
  DecisionTree& t;

  int leaf(int depth, int pos, int neg) {
    TreeNode n;
    n.depth = depth;
    n.pos = pos;
    n.neg = neg;
    n.impurity = entropy_bits(pos, neg);
    n.polarity = pos > neg ? 1 : 0;
    t.nodes.push_back(n);
    return static_cast<int>(t.nodes.size()) - 1;
  }

  template <class TrueFn, class FalseFn>
  int split(int depth, const Constraint& c, TrueFn on_true, FalseFn on_false) {
    const int id = static_cast<int>(t.nodes.size());
    t.nodes.emplace_back();
    const int tc = on_true(depth + 1);
    const int fc = on_false(depth + 1);
    TreeNode& n = t.nodes[static_cast<std::size_t>(id)];
    n.feature = static_cast<int>(*t.universe.index_of(c));
    n.true_child = tc;
    n.false_child = fc;
    n.depth = depth;
    n.pos = t.nodes[static_cast<std::size_t>(tc)].pos + t.nodes[static_cast<std::size_t>(fc)].pos;
    n.neg = t.nodes[static_cast<std::size_t>(tc)].neg + t.nodes[static_cast<std::size_t>(fc)].neg;
    n.impurity = entropy_bits(n.pos, n.neg);
    n.polarity = n.pos > n.neg ? 1 : 0;
    return id;
  }
};

}  // namespace

DecisionTree sepsis_tree() {
  DecisionTree t;
  t.universe = sepsis_universe();
  t.hp.criterion = Criterion::Entropy;
  t.hp.top_h = TopH::Half;
  TreeBuilder b{t};
  const auto E = [](const char* a) { return Constraint::unary(Template::Existence, a, 1); };
  // 625 training traces, 540 of them positive.
  b.split(0, E("Release A"), [&](int d) { return b.leaf(d, 460, 0); },
          [&](int d) {
            return b.split(d, E("Admission NC"),
                           [&](int d2) {
                             return b.split(d2, Constraint::unary(Template::Exactly, "Release B", 1),
                                            [&](int d3) { return b.leaf(d3, 37, 0); },
                                            [&](int d3) {
                                              return b.split(d3, E("ER Registration"),
                                                             [&](int d4) { return b.leaf(d4, 36, 15); },
                                                             [&](int d4) { return b.leaf(d4, 2, 27); });
                                            });
                           },
                           [&](int d2) { return b.leaf(d2, 5, 43); });
          });
  return t;
}

ModelBundle sepsis_model() {
  ModelBundle m;
  m.tree = sepsis_tree();
  m.lambda = {0.4, 0.4, 0.2};
  m.th_fit = 0.75;
  m.min_path_samples = 3;
  m.alphabet = m.tree.universe.alphabet;
  m.families = {Family::E};
  m.dataset_name = "sepsis_cases_2";
  m.trained_at = "2015-01-01T00:00:00.000Z";
  m.prefix_cap = 13;
  m.cv_f_score = 0;
  m.label.kind = LabelKind::Attribute;
  m.label.attribute_name = "label";
  return m;
}

std::vector<std::string> sigma15() {
  return {"ER Sepsis Triage", "ER Registration", "ER Triage",    "CRP",        "LacticAcid",
          "Leucocytes",       "IV Antibiotics",  "IV Liquid",    "Admission NC", "CRP",
          "Leucocytes",       "Admission NC",    "CRP",          "Leucocytes", "Release B"};
}

std::vector<std::string> sigma5() {
  return {"IV Liquid", "ER Registration", "ER Triage", "ER Sepsis Triage", "IV Antibiotics"};
}

std::filesystem::path fixture_dir() { return PPM_FIXTURE_DIR; }

// ---------------------------------------------------------------------------
// Synthetic log

std::vector<std::string> synthetic_activities() {
  return {"start", "check", "test", "treat", "review", "escalate", "release", "close"};
}

EventLog synthetic_log(const SyntheticSpec& spec) {
  std::mt19937_64 rng(spec.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<std::size_t> len(spec.min_len, spec.max_len);
  const std::vector<std::string> middle{"check", "test", "treat", "review", "escalate", "release"};
  const std::vector<double> weights{4, 4, 3, 2, 1.5, 1};
  std::discrete_distribution<std::size_t> pick(weights.begin(), weights.end());

  EventLog log;
  const Timestamp base = std::chrono::sys_days{std::chrono::year{2020} / 1 / 1};
  for (std::size_t i = 0; i < spec.traces; ++i) {
    Trace t;
    t.case_id = "case" + std::to_string(i);
    std::vector<std::string> acts;
    if (unit(rng) < 0.9) acts.push_back("start");
    const std::size_t body = len(rng);
    for (std::size_t j = 0; j < body; ++j) acts.push_back(middle[pick(rng)]);
    if (unit(rng) < 0.8) acts.push_back("close");

    bool escalated = false, reviewed_after = false;
    for (const auto& a : acts) {
      if (a == "escalate") escalated = true, reviewed_after = false;
      else if (a == "review" && escalated) reviewed_after = true;
    }
    int label = (!escalated || reviewed_after) ? 1 : 0;
    if (unit(rng) < spec.noise) label = 1 - label;

    Timestamp ts = base + std::chrono::hours(static_cast<long>(i));
    for (const auto& a : acts) {
      Event e;
      e.activity = a;
      e.case_id = t.case_id;
      e.timestamp = ts;
      ts += std::chrono::minutes(5);
      t.push_back(std::move(e));
    }
    t.attributes["label"] = std::to_string(label);
    t.label = label;
    log.traces.push_back(std::move(t));
  }
  log.recompute_alphabet();
  return log;
}

// ---------------------------------------------------------------------------
// Reference LTLf evaluator

struct OracleFormula::Node {
  char op;  // 'a' atom, 't' true, 'f' false, '!', '&', '|', '>', 'X', 'F', 'G', 'U'
  std::string atom;
  std::shared_ptr<const Node> l, r;
};

namespace {

using NodeP = std::shared_ptr<const OracleFormula::Node>;

class OracleParser {
public:
  explicit OracleParser(const std::string& s) : s_(s) {}

  NodeP parse() {
    NodeP n = implication();
    skip();
    if (i_ != s_.size()) throw std::runtime_error("oracle: trailing input in " + s_);
    return n;
  }

private:
  void skip() {
    while (i_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[i_]))) ++i_;
  }
  bool eat(const std::string& tok) {
    skip();
    if (s_.compare(i_, tok.size(), tok) != 0) return false;
    i_ += tok.size();
    return true;
  }
  static NodeP mk(char op, NodeP l = nullptr, NodeP r = nullptr, std::string atom = {}) {
    return std::make_shared<const OracleFormula::Node>(OracleFormula::Node{op, std::move(atom), l, r});
  }

  NodeP implication() {
    NodeP l = disjunction();
    if (eat("->")) return mk('>', l, implication());
    return l;
  }
  NodeP disjunction() {
    NodeP l = conjunction();
    while (eat("||")) l = mk('|', l, conjunction());
    return l;
  }
  NodeP conjunction() {
    NodeP l = until();
    while (eat("&&")) l = mk('&', l, until());
    return l;
  }
  NodeP until() {
    NodeP l = unary();
    skip();
    if (i_ < s_.size() && s_[i_] == 'U' && (i_ + 1 == s_.size() || !std::isalnum(static_cast<unsigned char>(s_[i_ + 1])))) {
      ++i_;
      return mk('U', l, until());
    }
    return l;
  }
  NodeP unary() {
    skip();
    if (eat("!")) return mk('!', unary());
    for (char op : {'X', 'F', 'G'}) {
      if (i_ + 1 < s_.size() && s_[i_] == op && (s_[i_ + 1] == '(' || std::isspace(static_cast<unsigned char>(s_[i_ + 1])))) {
        ++i_;
        return mk(op, unary());
      }
    }
    return primary();
  }
  NodeP primary() {
    skip();
    if (eat("(")) {
      NodeP n = implication();
      if (!eat(")")) throw std::runtime_error("oracle: expected ')' in " + s_);
      return n;
    }
    if (eat("true")) return mk('t');
    if (eat("false")) return mk('f');
    if (eat("'")) {
      const auto end = s_.find('\'', i_);
      if (end == std::string::npos) throw std::runtime_error("oracle: unterminated atom in " + s_);
      std::string name = s_.substr(i_, end - i_);
      i_ = end + 1;
      return mk('a', nullptr, nullptr, std::move(name));
    }
    throw std::runtime_error("oracle: unexpected input at " + std::to_string(i_) + " in " + s_);
  }

  const std::string& s_;
  std::size_t i_ = 0;
};

bool eval(const OracleFormula::Node& n, const std::vector<std::string>& t, std::size_t i) {
  const std::size_t len = t.size();
  switch (n.op) {
    case 't': return true;
    case 'f': return false;
    case 'a': return i < len && t[i] == n.atom;
    case '!': return !eval(*n.l, t, i);
    case '&': return eval(*n.l, t, i) && eval(*n.r, t, i);
    case '|': return eval(*n.l, t, i) || eval(*n.r, t, i);
    case '>': return !eval(*n.l, t, i) || eval(*n.r, t, i);
    case 'X': return i + 1 < len && eval(*n.l, t, i + 1);
    case 'F':
      for (std::size_t j = i; j < len; ++j)
        if (eval(*n.l, t, j)) return true;
      return false;
    case 'G':
      for (std::size_t j = i; j < len; ++j)
        if (!eval(*n.l, t, j)) return false;
      return true;
    case 'U':
      for (std::size_t j = i; j < len; ++j) {
        if (eval(*n.r, t, j)) return true;
        if (!eval(*n.l, t, j)) return false;
      }
      return false;
  }
  throw std::logic_error("oracle: bad node");
}

std::string existence_text(int n) {
  std::string f = "F(A)";
  for (int i = 1; i < n; ++i) f = "F(A && X(" + f + "))";
  return f;
}

}  // namespace

OracleFormula::OracleFormula(const std::string& text) : root_(OracleParser(text).parse()) {}

bool OracleFormula::holds(const std::vector<std::string>& trace) const { return eval(*root_, trace, 0); }

std::string oracle_formula_text(Template t, int n) {
  switch (t) {
    case Template::Existence: return existence_text(n);
    case Template::Absence: return "!(" + existence_text(n) + ")";
    case Template::Exactly: return existence_text(n) + " && !(" + existence_text(n + 1) + ")";
    case Template::Init: return "A";
    case Template::Choice: return "F(A) || F(B)";
    case Template::ExclusiveChoice: return "(F(A) && !F(B)) || (!F(A) && F(B))";
    case Template::RespondedExistence: return "F(A) -> F(B)";
    case Template::Response: return "G(A -> F(B))";
    case Template::AlternateResponse: return "G(A -> X(!A U B))";
    case Template::ChainResponse: return "G(A -> X(B))";
    case Template::Precedence: return "(!B U A) || G(!B)";
    case Template::AlternatePrecedence: return "(!B U A) && G(B -> X((!B U A) || G(!B)))";
    case Template::ChainPrecedence: return "G(X(B) -> A)";
    case Template::NotRespondedExistence: return "F(A) -> !F(B)";
    case Template::NotResponse: return "G(A -> !(F(B)))";
    case Template::NotPrecedence: return "G(F(B) -> !A)";
    case Template::NotChainResponse: return "G(A -> X(!B))";
    case Template::NotChainPrecedence: return "G(X(B) -> !A)";
  }
  throw std::logic_error("unknown template");
}

std::string instantiate(const std::string& pattern, const std::string& a, const std::string& b) {
  std::string out;
  for (char c : pattern) {
    if (c == 'A') out += "'" + a + "'";
    else if (c == 'B') out += "'" + b + "'";
    else out += c;
  }
  return out;
}

}  // namespace ppm::testing
