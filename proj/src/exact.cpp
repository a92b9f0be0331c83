#include "markerlab/exact.hpp"

#include <stdexcept>

namespace markerlab {

Rational parse_rational(const std::string& text) {
  if (text.empty()) throw std::invalid_argument("empty rational");
  const auto dot = text.find('.');
  if (dot == std::string::npos) {
    Rational q;
    if (q.set_str(text, 10) != 0 || q.get_den() == 0) throw std::invalid_argument("not a rational: " + text);
    q.canonicalize();
    return q;
  }
  std::string digits = text.substr(0, dot) + text.substr(dot + 1);
  const std::size_t frac = text.size() - dot - 1;
  if (digits.empty() || digits == "-" || digits == "+") throw std::invalid_argument("not a rational: " + text);
  if (digits[0] == '+') digits.erase(0, 1);
  Integer num;
  if (num.set_str(digits, 10) != 0) throw std::invalid_argument("not a rational: " + text);
  Integer den;
  mpz_ui_pow_ui(den.get_mpz_t(), 10, frac);
  Rational q(num, den);
  q.canonicalize();
  return q;
}

}  // namespace markerlab
