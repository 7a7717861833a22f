#pragma once

#include "pimex/matkernels.hpp"

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace pimex {

enum class AbscissaeChoice {
  unit_interval,  // c_i = (i-1)/(s-1)
  integer_tail,   // c_i = 1 - s + i
  custom,
};

inline std::string_view to_string(AbscissaeChoice choice) {
  switch (choice) {
    case AbscissaeChoice::unit_interval: return "unit";
    case AbscissaeChoice::integer_tail: return "integer";
    case AbscissaeChoice::custom: return "custom";
  }
  return "unknown";
}

/// Accepts the CLI spellings "unit"/"integer" and the long names.
inline AbscissaeChoice parse_abscissae_choice(std::string_view text) {
  if (text == "unit" || text == "unit_interval") return AbscissaeChoice::unit_interval;
  if (text == "integer" || text == "integer_tail") return AbscissaeChoice::integer_tail;
  if (text == "custom") return AbscissaeChoice::custom;
  throw std::invalid_argument("unknown abscissae choice '" + std::string(text) + "'");
}

/// unit_interval up to order four, integer_tail from order five on.
inline AbscissaeChoice default_abscissae(int order) {
  return order <= 4 ? AbscissaeChoice::unit_interval : AbscissaeChoice::integer_tail;
}

/// Abscissae for an s-stage method. Both conventions degenerate to c = [1]
/// when s = 1 so that the last abscissa is always one.
template <typename Scalar = double>
Vector<Scalar> make_abscissae(int s, AbscissaeChoice choice,
                              const std::vector<double>& custom = {}) {
  if (s < 1) throw std::invalid_argument("make_abscissae: order must be >= 1");
  Vector<Scalar> c(s);
  switch (choice) {
    case AbscissaeChoice::unit_interval:
      if (s == 1) {
        c(0) = Scalar(1);
      } else {
        for (int i = 0; i < s; ++i) c(i) = Scalar(i) / Scalar(s - 1);
      }
      break;
    case AbscissaeChoice::integer_tail:
      for (int i = 1; i <= s; ++i) c(i - 1) = Scalar(1 - s + i);
      break;
    case AbscissaeChoice::custom:
      if (int(custom.size()) != s)
        throw std::invalid_argument("make_abscissae: custom abscissae count " +
                                    std::to_string(custom.size()) + " != order " +
                                    std::to_string(s));
      for (int i = 0; i < s; ++i) c(i) = Scalar(custom[std::size_t(i)]);
      break;
  }
  require_distinct(c, "make_abscissae");
  return c;
}

}  // namespace pimex
