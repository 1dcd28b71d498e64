#pragma once

#include <string>
#include <string_view>

#include <boost/multiprecision/gmp.hpp>

namespace nsbox {

/// Exact rational number. All probabilities, weights and verification
/// quantities in the library are carried in this type.
using Rational = boost::multiprecision::mpq_rational;

/// A Rational used as a probability or convex weight. Range [0,1] is enforced
/// by the containers that hold it (LocalBox, BipartiteBox, ensembles).
using Prob = Rational;

/// Parses "num/den" or a bare integer "num". Throws ValidationError on
/// malformed input or a zero denominator.
Rational parse_rational(std::string_view text);

/// Canonical "num/den" form, always with an explicit denominator ("1/1").
std::string to_string(const Rational& value);

double to_double(const Rational& value);

bool is_probability(const Rational& value);

}  // namespace nsbox
