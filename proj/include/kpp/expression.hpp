#pragma once

#include <memory>
#include <string>
#include <string_view>
#include <vector>

namespace kpp {

// Compiled form of a coefficient expression in the variable x.
//
//   expression := term (('+'|'-') term)*
//   term       := factor (('*'|'/') factor)*
//   factor     := number | 'x' | 'pi' | '(' expression ')'
//               | func '(' expression ')' | '-' factor
//   func       := sin | cos | exp
//
// Parsing throws ParseError with a 1-based character position. Evaluation
// throws PreconditionError on division by exactly zero.
class Expression {
 public:
  static Expression parse(std::string_view text);

  double operator()(double x) const;
  const std::string& text() const noexcept { return text_; }

  struct Node;

 private:
  Expression(std::string text, std::shared_ptr<const Node> root);

  std::string text_;
  std::shared_ptr<const Node> root_;
};

// a0 + sum_k a_k cos(2 pi k x / L) + b_k sin(2 pi k x / L)
struct FourierRecord {
  double a0 = 0.0;
  std::vector<double> cos_coeffs;
  std::vector<double> sin_coeffs;

  double evaluate(double x, double period) const;
};

// Parses the payload after `fourier:` / `reciprocal_fourier:`, e.g.
// "1, [0.5, 0], [0, 0.25]".
FourierRecord parse_fourier_payload(std::string_view payload, std::size_t offset = 0);

// Inverse of parse_fourier_payload; numbers are printed with 17 significant
// digits so a reparse reproduces every coefficient bit for bit.
std::string format_fourier_payload(const FourierRecord& record);

}  // namespace kpp
