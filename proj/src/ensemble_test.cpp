#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "pimex/ensemble.hpp"
#include "pimex/high_precision.hpp"

#include <string>

using namespace pimex;

namespace {

ImexGlmTableau build(int s, AbscissaeChoice c = AbscissaeChoice::unit_interval,
                     double lambda = 1.0) {
  EnsembleSpec spec;
  spec.order = s;
  spec.abscissae = c;
  spec.lambda = lambda;
  return build_parallel_ensemble<HighPrecision>(spec).cast<double>();
}

}  // namespace

TEST_CASE("constructed orders 2-4 match the transcribed golden tableaux") {
  for (int s = 2; s <= 4; ++s) {
    CAPTURE(s);
    const ImexGlmTableau golden =
        load_tableau(std::string(PIMEX_GOLDEN_DIR) + "/ensemble" + std::to_string(s) + ".json");
    const ImexGlmTableau t = build(s);
    CHECK((t.c - golden.c).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((t.B - golden.B).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((t.Bhat - golden.Bhat).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((t.V - golden.V).cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("third-order explicit weights start with Simpson's rule") {
  const ImexGlmTableau t = build(3);
  CHECK(t.B(0, 0) == doctest::Approx(1.0 / 6));
  CHECK(t.B(0, 1) == doctest::Approx(2.0 / 3));
  CHECK(t.B(0, 2) == doctest::Approx(1.0 / 6));
}

TEST_CASE("order conditions hold for orders 1-8, both abscissae, several lambda") {
  for (int s = 1; s <= 8; ++s)
    for (auto choice : {AbscissaeChoice::unit_interval, AbscissaeChoice::integer_tail})
      for (double lambda : {1.0, 0.5, 2.0}) {
        CAPTURE(s);
        const ImexGlmTableau t = build(s, choice, lambda);
        CHECK(verify_order_conditions(t).max_abs <= order_condition_tolerance(t));
        CHECK_NOTHROW(validate_tableau(t));
      }
}

TEST_CASE("order one is IMEX Euler") {
  const ImexGlmTableau t = build(1);
  CHECK(t.c(0) == 1.0);
  CHECK(t.B(0, 0) == 1.0);
  CHECK(t.Bhat(0, 0) == 1.0);
  CHECK(t.V(0, 0) == 1.0);
}

TEST_CASE("rows of B and Bhat sum to one (consistency)") {
  for (int s = 2; s <= 7; ++s) {
    const ImexGlmTableau t = build(s, AbscissaeChoice::integer_tail, 0.7);
    for (Index i = 0; i < s; ++i) {
      CHECK(t.B.row(i).sum() == doctest::Approx(1.0).epsilon(1e-10));
      CHECK(t.Bhat.row(i).sum() == doctest::Approx(1.0).epsilon(1e-10));
    }
  }
}

TEST_CASE("B - Bhat is lambda times a fixed matrix") {
  const ImexGlmTableau a = build(4, AbscissaeChoice::unit_interval, 1.0);
  const ImexGlmTableau b = build(4, AbscissaeChoice::unit_interval, 2.5);
  CHECK((a.B - b.B).cwiseAbs().maxCoeff() == 0.0);
  const Matrix<double> da = a.B - a.Bhat, db = b.B - b.Bhat;
  CHECK((2.5 * da - db).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("max coefficient grows with order and is smaller for integer abscissae") {
  double prev = 0.0;
  for (int s = 2; s <= 8; ++s) {
    const double unit = double(ensemble_max_coefficient<HighPrecision>(s, AbscissaeChoice::unit_interval));
    const double tail = double(ensemble_max_coefficient<HighPrecision>(s, AbscissaeChoice::integer_tail));
    CHECK(unit > prev);
    CHECK(tail <= unit);
    prev = unit;
  }
}
