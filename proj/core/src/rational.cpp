#include "nsbox/rational.hpp"

#include <cctype>
#include <string>

#include "nsbox/errors.hpp"

namespace nsbox {
namespace {

bool is_integer_literal(std::string_view text) {
  if (text.empty()) return false;
  std::size_t start = (text.front() == '-' || text.front() == '+') ? 1 : 0;
  if (start == text.size()) return false;
  for (std::size_t i = start; i < text.size(); ++i) {
    if (!std::isdigit(static_cast<unsigned char>(text[i]))) return false;
  }
  return true;
}

boost::multiprecision::mpz_int parse_integer(std::string_view text,
                                             std::string_view whole) {
  if (!is_integer_literal(text)) {
    throw ValidationError("malformed rational \"" + std::string(whole) + "\"");
  }
  if (text.front() == '+') text.remove_prefix(1);
  return boost::multiprecision::mpz_int(std::string(text));
}

}  // namespace

Rational parse_rational(std::string_view text) {
  const auto slash = text.find('/');
  if (slash == std::string_view::npos) {
    return Rational(parse_integer(text, text));
  }
  const auto num = parse_integer(text.substr(0, slash), text);
  const auto den = parse_integer(text.substr(slash + 1), text);
  if (den == 0) {
    throw ValidationError("zero denominator in \"" + std::string(text) + "\"");
  }
  return Rational(num, den);
}

std::string to_string(const Rational& value) {
  return boost::multiprecision::numerator(value).str() + "/" +
         boost::multiprecision::denominator(value).str();
}

double to_double(const Rational& value) { return value.convert_to<double>(); }

bool is_probability(const Rational& value) { return value >= 0 && value <= 1; }

}  // namespace nsbox
