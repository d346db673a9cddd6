#include "ppm/ltlf.hpp"

#include <cctype>
#include <stdexcept>

#include "ppm/error.hpp"

namespace ppm {

struct LtlfFormula::Node {
  Op op;
  std::string name;
  std::shared_ptr<const Node> lhs;  // null for leaves
  std::shared_ptr<const Node> rhs;  // null unless binary
  std::size_t size;
};

LtlfFormula make_node(LtlfFormula::Op op, std::string name, const LtlfFormula* lhs,
                      const LtlfFormula* rhs) {
  std::size_t size = 1 + (lhs ? lhs->size() : 0) + (rhs ? rhs->size() : 0);
  return LtlfFormula(std::make_shared<const LtlfFormula::Node>(LtlfFormula::Node{
      op, std::move(name), lhs ? lhs->node_ : nullptr, rhs ? rhs->node_ : nullptr, size}));
}

LtlfFormula::LtlfFormula() {
  static const auto truth_node = std::make_shared<const Node>(Node{Op::True, {}, nullptr, nullptr, 1});
  node_ = truth_node;
}

LtlfFormula::Op LtlfFormula::op() const noexcept { return node_->op; }
const std::string& LtlfFormula::atom() const noexcept { return node_->name; }
std::size_t LtlfFormula::size() const noexcept { return node_->size; }

LtlfFormula LtlfFormula::lhs() const {
  if (!node_->lhs) throw std::logic_error("leaf formula has no operand");
  return LtlfFormula(node_->lhs);
}

LtlfFormula LtlfFormula::rhs() const {
  if (!node_->rhs) throw std::logic_error("formula has no right operand");
  return LtlfFormula(node_->rhs);
}

bool operator==(const LtlfFormula& a, const LtlfFormula& b) {
  if (a.node_ == b.node_) return true;
  if (a.op() != b.op()) return false;
  switch (a.op()) {
    case LtlfFormula::Op::True:
    case LtlfFormula::Op::False: return true;
    case LtlfFormula::Op::Atom: return a.atom() == b.atom();
    case LtlfFormula::Op::Not:
    case LtlfFormula::Op::Next:
    case LtlfFormula::Op::Always:
    case LtlfFormula::Op::Eventually: return a.lhs() == b.lhs();
    default: return a.lhs() == b.lhs() && a.rhs() == b.rhs();
  }
}

std::string LtlfFormula::to_string() const {
  auto quote = [](const std::string& s) {
    bool bare = !s.empty() && (std::isalpha(static_cast<unsigned char>(s[0])) || s[0] == '_');
    for (char c : s)
      if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_') bare = false;
    if (s == "X" || s == "G" || s == "F" || s == "U" || s == "true" || s == "false") bare = false;
    if (bare) return s;
    std::string out = "\"";
    for (char c : s) {
      if (c == '"' || c == '\\') out += '\\';
      out += c;
    }
    return out + "\"";
  };
  switch (op()) {
    case Op::True: return "true";
    case Op::False: return "false";
    case Op::Atom: return quote(atom());
    case Op::Not: return "!(" + lhs().to_string() + ")";
    case Op::Next: return "X(" + lhs().to_string() + ")";
    case Op::Always: return "G(" + lhs().to_string() + ")";
    case Op::Eventually: return "F(" + lhs().to_string() + ")";
    case Op::And: return "(" + lhs().to_string() + " && " + rhs().to_string() + ")";
    case Op::Or: return "(" + lhs().to_string() + " || " + rhs().to_string() + ")";
    case Op::Implies: return "(" + lhs().to_string() + " -> " + rhs().to_string() + ")";
    case Op::Until: return "(" + lhs().to_string() + " U " + rhs().to_string() + ")";
  }
  return {};
}

namespace ltlf {
LtlfFormula truth() { return LtlfFormula(); }
LtlfFormula falsity() { return make_node(LtlfFormula::Op::False, {}, nullptr, nullptr); }
LtlfFormula atom(std::string activity) {
  return make_node(LtlfFormula::Op::Atom, std::move(activity), nullptr, nullptr);
}
LtlfFormula next(const LtlfFormula& f) { return make_node(LtlfFormula::Op::Next, {}, &f, nullptr); }
LtlfFormula always(const LtlfFormula& f) { return make_node(LtlfFormula::Op::Always, {}, &f, nullptr); }
LtlfFormula eventually(const LtlfFormula& f) {
  return make_node(LtlfFormula::Op::Eventually, {}, &f, nullptr);
}
LtlfFormula until(const LtlfFormula& lhs, const LtlfFormula& rhs) {
  return make_node(LtlfFormula::Op::Until, {}, &lhs, &rhs);
}
LtlfFormula implies(const LtlfFormula& lhs, const LtlfFormula& rhs) {
  return make_node(LtlfFormula::Op::Implies, {}, &lhs, &rhs);
}
}  // namespace ltlf

LtlfFormula operator!(const LtlfFormula& f) { return make_node(LtlfFormula::Op::Not, {}, &f, nullptr); }
LtlfFormula operator&&(const LtlfFormula& a, const LtlfFormula& b) {
  return make_node(LtlfFormula::Op::And, {}, &a, &b);
}
LtlfFormula operator||(const LtlfFormula& a, const LtlfFormula& b) {
  return make_node(LtlfFormula::Op::Or, {}, &a, &b);
}

// ---------------------------------------------------------------------------
// Parser

namespace {

enum class Tok { Atom, Quoted, Not, And, Or, Implies, Next, Always, Eventually, Until, LParen, RParen, True, False, End };

struct Token {
  Tok kind;
  std::string text;
  std::size_t pos;
};

bool ident_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.' || c == ':' || c == '-' ||
         static_cast<unsigned char>(c) >= 0x80;
}

std::vector<Token> tokenize(std::string_view s) {
  std::vector<Token> out;
  std::size_t i = 0;
  while (i < s.size()) {
    char c = s[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
      continue;
    }
    const std::size_t start = i;
    auto two = s.substr(i, 2);
    if (two == "&&") { out.push_back({Tok::And, "&&", start}); i += 2; continue; }
    if (two == "||") { out.push_back({Tok::Or, "||", start}); i += 2; continue; }
    if (two == "->") { out.push_back({Tok::Implies, "->", start}); i += 2; continue; }
    switch (c) {
      case '!':
      case '~': out.push_back({Tok::Not, "!", start}); ++i; continue;
      case '&': out.push_back({Tok::And, "&", start}); ++i; continue;
      case '|': out.push_back({Tok::Or, "|", start}); ++i; continue;
      case '(': out.push_back({Tok::LParen, "(", start}); ++i; continue;
      case ')': out.push_back({Tok::RParen, ")", start}); ++i; continue;
      case '"':
      case '\'': {
        const char q = c;
        std::string text;
        ++i;
        while (i < s.size() && s[i] != q) {
          if (s[i] == '\\' && i + 1 < s.size()) ++i;
          text += s[i++];
        }
        if (i >= s.size()) throw SyntaxError(i, "closing quote");
        ++i;
        out.push_back({Tok::Quoted, std::move(text), start});
        continue;
      }
      default: break;
    }
    if (!ident_char(c) || c == '-') throw SyntaxError(i, "atom or operator");
    while (i < s.size() && ident_char(s[i])) {
      if (s.substr(i, 2) == "->") break;
      ++i;
    }
    std::string word(s.substr(start, i - start));
    Tok kind = Tok::Atom;
    if (word == "X") kind = Tok::Next;
    else if (word == "G") kind = Tok::Always;
    else if (word == "F") kind = Tok::Eventually;
    else if (word == "U") kind = Tok::Until;
    else if (word == "true") kind = Tok::True;
    else if (word == "false") kind = Tok::False;
    out.push_back({kind, std::move(word), start});
  }
  out.push_back({Tok::End, "", s.size()});
  return out;
}

class Parser {
public:
  Parser(std::vector<Token> tokens, const std::set<std::string>& alphabet)
      : toks_(std::move(tokens)), alphabet_(alphabet) {}

  LtlfParse run() {
    LtlfParse out;
    out.formula = implication();
    if (peek().kind != Tok::End) throw SyntaxError(peek().pos, "end of input");
    out.warnings = std::move(warnings_);
    return out;
  }

private:
  const Token& peek() const { return toks_[i_]; }
  Token take() { return toks_[i_++]; }

  LtlfFormula implication() {
    LtlfFormula lhs = disjunction();
    if (peek().kind == Tok::Implies) {
      take();
      return ltlf::implies(lhs, implication());
    }
    return lhs;
  }

  LtlfFormula disjunction() {
    LtlfFormula f = conjunction();
    while (peek().kind == Tok::Or) {
      take();
      f = f || conjunction();
    }
    return f;
  }

  LtlfFormula conjunction() {
    LtlfFormula f = until_expr();
    while (peek().kind == Tok::And) {
      take();
      f = f && until_expr();
    }
    return f;
  }

  LtlfFormula until_expr() {
    LtlfFormula lhs = unary();
    if (peek().kind == Tok::Until) {
      take();
      return ltlf::until(lhs, until_expr());
    }
    return lhs;
  }

  LtlfFormula unary() {
    switch (peek().kind) {
      case Tok::Not: take(); return !unary();
      case Tok::Next: take(); return ltlf::next(unary());
      case Tok::Always: take(); return ltlf::always(unary());
      case Tok::Eventually: take(); return ltlf::eventually(unary());
      default: return primary();
    }
  }

  LtlfFormula primary() {
    Token t = take();
    switch (t.kind) {
      case Tok::LParen: {
        LtlfFormula f = implication();
        if (peek().kind != Tok::RParen) throw SyntaxError(peek().pos, "')'");
        take();
        return f;
      }
      case Tok::True: return ltlf::truth();
      case Tok::False: return ltlf::falsity();
      case Tok::Quoted: return resolve(t.text, false);
      case Tok::Atom: return resolve(t.text, true);
      default: throw SyntaxError(t.pos, "formula");
    }
  }

  LtlfFormula resolve(const std::string& name, bool bare) {
    if (alphabet_.count(name)) return ltlf::atom(name);
    if (bare) {
      std::string spaced = name;
      for (char& c : spaced)
        if (c == '_') c = ' ';
      if (alphabet_.count(spaced)) return ltlf::atom(spaced);
    }
    warnings_.push_back("unknown atom '" + name + "' (never holds)");
    return ltlf::atom(name);
  }

  std::vector<Token> toks_;
  std::size_t i_ = 0;
  const std::set<std::string>& alphabet_;
  std::vector<std::string> warnings_;
};

// Bottom-up evaluation: one truth vector over positions [0, n] per node.
class Evaluator {
public:
  explicit Evaluator(std::span<const std::string> trace) : trace_(trace), n_(trace.size()) {}

  std::vector<char> eval(const LtlfFormula& f) {
    std::vector<char> v(n_ + 1, 0);
    using Op = LtlfFormula::Op;
    switch (f.op()) {
      case Op::True: std::fill(v.begin(), v.end(), 1); break;
      case Op::False: break;
      case Op::Atom:
        for (std::size_t i = 0; i < n_; ++i) v[i] = trace_[i] == f.atom();
        break;
      case Op::Not: {
        auto a = eval(f.lhs());
        for (std::size_t i = 0; i <= n_; ++i) v[i] = !a[i];
        break;
      }
      case Op::And:
      case Op::Or:
      case Op::Implies: {
        auto a = eval(f.lhs());
        auto b = eval(f.rhs());
        for (std::size_t i = 0; i <= n_; ++i) {
          if (f.op() == Op::And) v[i] = a[i] && b[i];
          else if (f.op() == Op::Or) v[i] = a[i] || b[i];
          else v[i] = !a[i] || b[i];
        }
        break;
      }
      case Op::Next: {
        auto a = eval(f.lhs());
        for (std::size_t i = 0; i + 1 < n_; ++i) v[i] = a[i + 1];
        break;
      }
      case Op::Eventually: {
        auto a = eval(f.lhs());
        for (std::size_t i = n_; i-- > 0;) v[i] = a[i] || v[i + 1];
        break;
      }
      case Op::Always: {
        auto a = eval(f.lhs());
        v[n_] = 1;
        for (std::size_t i = n_; i-- > 0;) v[i] = a[i] && v[i + 1];
        break;
      }
      case Op::Until: {
        auto a = eval(f.lhs());
        auto b = eval(f.rhs());
        for (std::size_t i = n_; i-- > 0;) v[i] = b[i] || (a[i] && v[i + 1]);
        break;
      }
    }
    return v;
  }

private:
  std::span<const std::string> trace_;
  std::size_t n_;
};

}  // namespace

LtlfParse parse_ltlf(std::string_view text, const std::set<std::string>& alphabet) {
  return Parser(tokenize(text), alphabet).run();
}

bool ltlf_eval(const LtlfFormula& formula, std::span<const std::string> trace, std::size_t position) {
  if (position > trace.size()) throw Error(ErrorKind::InvalidArgument, "position past end of trace");
  return Evaluator(trace).eval(formula)[position] != 0;
}

}  // namespace ppm
