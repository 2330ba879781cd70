#include "kpp/expression.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <numbers>

#include <fmt/format.h>

#include "kpp/errors.hpp"

namespace kpp {

struct Expression::Node {
  enum class Kind { Number, Variable, Add, Sub, Mul, Div, Neg, Sin, Cos, Exp };

  Kind kind;
  double value = 0.0;
  std::unique_ptr<Node> lhs;
  std::unique_ptr<Node> rhs;

  double eval(double x) const {
    switch (kind) {
      case Kind::Number: return value;
      case Kind::Variable: return x;
      case Kind::Add: return lhs->eval(x) + rhs->eval(x);
      case Kind::Sub: return lhs->eval(x) - rhs->eval(x);
      case Kind::Mul: return lhs->eval(x) * rhs->eval(x);
      case Kind::Div: {
        const double den = rhs->eval(x);
        if (den == 0.0) {
          throw PreconditionError(fmt::format("division by zero at x = {:.17g}", x));
        }
        return lhs->eval(x) / den;
      }
      case Kind::Neg: return -lhs->eval(x);
      case Kind::Sin: return std::sin(lhs->eval(x));
      case Kind::Cos: return std::cos(lhs->eval(x));
      case Kind::Exp: return std::exp(lhs->eval(x));
    }
    return 0.0;
  }
};

namespace {

using Node = Expression::Node;
using NodePtr = std::unique_ptr<Node>;

NodePtr make_leaf(Node::Kind kind, double value = 0.0) {
  auto n = std::make_unique<Node>();
  n->kind = kind;
  n->value = value;
  return n;
}

NodePtr make_node(Node::Kind kind, NodePtr lhs, NodePtr rhs = nullptr) {
  auto n = std::make_unique<Node>();
  n->kind = kind;
  n->lhs = std::move(lhs);
  n->rhs = std::move(rhs);
  return n;
}

// Parses a floating-point literal starting at text[pos]; returns the number of
// characters consumed (0 if none).
std::size_t scan_number(std::string_view text, std::size_t pos, double& out) {
  std::size_t end = pos;
  auto digits = [&] {
    std::size_t start = end;
    while (end < text.size() && std::isdigit(static_cast<unsigned char>(text[end]))) ++end;
    return end - start;
  };
  std::size_t mantissa = digits();
  if (end < text.size() && text[end] == '.') {
    ++end;
    mantissa += digits();
  }
  if (mantissa == 0) return 0;
  if (end < text.size() && (text[end] == 'e' || text[end] == 'E')) {
    std::size_t save = end++;
    if (end < text.size() && (text[end] == '+' || text[end] == '-')) ++end;
    if (digits() == 0) end = save;
  }
  const auto res = std::from_chars(text.data() + pos, text.data() + end, out);
  if (res.ec != std::errc()) return 0;
  return end - pos;
}

class Parser {
 public:
  explicit Parser(std::string_view text) : text_(text) {}

  NodePtr parse() {
    auto root = expression();
    skip_space();
    if (pos_ < text_.size()) fail(fmt::format("unexpected '{}'", text_[pos_]));
    return root;
  }

 private:
  [[noreturn]] void fail(const std::string& what) const { throw ParseError(what, pos_ + 1); }

  void skip_space() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip_space();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  void expect(char c) {
    if (!accept(c)) {
      if (pos_ >= text_.size()) fail(fmt::format("expected '{}' before end of input", c));
      fail(fmt::format("expected '{}'", c));
    }
  }

  NodePtr expression() {
    auto lhs = term();
    for (;;) {
      if (accept('+')) {
        lhs = make_node(Node::Kind::Add, std::move(lhs), term());
      } else if (accept('-')) {
        lhs = make_node(Node::Kind::Sub, std::move(lhs), term());
      } else {
        return lhs;
      }
    }
  }

  NodePtr term() {
    auto lhs = factor();
    for (;;) {
      if (accept('*')) {
        lhs = make_node(Node::Kind::Mul, std::move(lhs), factor());
      } else if (accept('/')) {
        lhs = make_node(Node::Kind::Div, std::move(lhs), factor());
      } else {
        return lhs;
      }
    }
  }

  NodePtr factor() {
    skip_space();
    if (pos_ >= text_.size()) fail("unexpected end of input");
    if (accept('-')) return make_node(Node::Kind::Neg, factor());
    if (accept('(')) {
      auto inner = expression();
      expect(')');
      return inner;
    }
    double number = 0.0;
    if (std::size_t n = scan_number(text_, pos_, number); n > 0) {
      pos_ += n;
      return make_leaf(Node::Kind::Number, number);
    }
    if (std::isalpha(static_cast<unsigned char>(text_[pos_]))) {
      const std::size_t start = pos_;
      while (pos_ < text_.size() && std::isalpha(static_cast<unsigned char>(text_[pos_]))) ++pos_;
      const std::string_view word = text_.substr(start, pos_ - start);
      if (word == "x") return make_leaf(Node::Kind::Variable);
      if (word == "pi") return make_leaf(Node::Kind::Number, std::numbers::pi);
      Node::Kind kind;
      if (word == "sin") {
        kind = Node::Kind::Sin;
      } else if (word == "cos") {
        kind = Node::Kind::Cos;
      } else if (word == "exp") {
        kind = Node::Kind::Exp;
      } else {
        pos_ = start;
        fail(fmt::format("unknown identifier '{}'", word));
      }
      expect('(');
      auto arg = expression();
      expect(')');
      return make_node(kind, std::move(arg));
    }
    fail(fmt::format("unexpected '{}'", text_[pos_]));
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

}  // namespace

Expression::Expression(std::string text, std::shared_ptr<const Node> root)
    : text_(std::move(text)), root_(std::move(root)) {}

Expression Expression::parse(std::string_view text) {
  Parser parser(text);
  std::shared_ptr<const Node> root = parser.parse();
  return Expression(std::string(text), std::move(root));
}

double Expression::operator()(double x) const { return root_->eval(x); }

double FourierRecord::evaluate(double x, double period) const {
  double sum = a0;
  const double w = 2.0 * std::numbers::pi * x / period;
  for (std::size_t k = 0; k < cos_coeffs.size(); ++k) {
    const double arg = static_cast<double>(k + 1) * w;
    sum += cos_coeffs[k] * std::cos(arg) + sin_coeffs[k] * std::sin(arg);
  }
  return sum;
}

namespace {

class PayloadScanner {
 public:
  PayloadScanner(std::string_view text, std::size_t offset) : text_(text), offset_(offset) {}

  [[noreturn]] void fail(const std::string& what) const {
    throw ParseError(what, offset_ + pos_ + 1);
  }

  void skip_space() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool at_end() {
    skip_space();
    return pos_ >= text_.size();
  }

  bool accept(char c) {
    skip_space();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  void expect(char c) {
    if (!accept(c)) fail(fmt::format("expected '{}'", c));
  }

  double number() {
    skip_space();
    const bool negative = pos_ < text_.size() && text_[pos_] == '-';
    std::size_t start = pos_ + (negative ? 1 : 0);
    if (pos_ < text_.size() && text_[pos_] == '+') start = pos_ + 1;
    double value = 0.0;
    const std::size_t n = scan_number(text_, start, value);
    if (n == 0) fail("expected a number");
    pos_ = start + n;
    return negative ? -value : value;
  }

 private:
  std::string_view text_;
  std::size_t offset_;
  std::size_t pos_ = 0;
};

}  // namespace

FourierRecord parse_fourier_payload(std::string_view payload, std::size_t offset) {
  PayloadScanner scan(payload, offset);
  FourierRecord rec;
  rec.a0 = scan.number();
  while (!scan.at_end()) {
    scan.expect(',');
    scan.expect('[');
    const double a = scan.number();
    scan.expect(',');
    const double b = scan.number();
    scan.expect(']');
    rec.cos_coeffs.push_back(a);
    rec.sin_coeffs.push_back(b);
  }
  return rec;
}

std::string format_fourier_payload(const FourierRecord& record) {
  std::string out = fmt::format("{:.17g}", record.a0);
  for (std::size_t k = 0; k < record.cos_coeffs.size(); ++k) {
    out += fmt::format(", [{:.17g}, {:.17g}]", record.cos_coeffs[k], record.sin_coeffs[k]);
  }
  return out;
}

}  // namespace kpp
