#include <doctest.h>

#include <cmath>
#include <vector>

#include "pfkit/integrators.hpp"
#include "pfkit/stepcontrol.hpp"

using namespace pfkit;
using doctest::Approx;

namespace {

// du/dt = lambda_i u_i, no phase block.
class Dahlquist : public OdeSystem {
 public:
  explicit Dahlquist(Eigen::ArrayXd lambda) : lambda_(std::move(lambda)) {}
  Layout layout() const override { return Layout{{}, lambda_.size()}; }
  void rhs(const Eigen::ArrayXd& u, Eigen::ArrayXd& du) override { du = lambda_ * u; }

 private:
  Eigen::ArrayXd lambda_;
};

class ConstantRate : public OdeSystem {
 public:
  Layout layout() const override { return Layout{{}, 3}; }
  void rhs(const Eigen::ArrayXd& u, Eigen::ArrayXd& du) override {
    du.resize(u.size());
    du << 1.5, -2.0, 0.25;
  }
};

// 1D periodic heat equation, D = 1, dx = 1.
class Heat : public OdeSystem {
 public:
  explicit Heat(Index n) : n_(n) {}
  Layout layout() const override { return Layout{{}, n_}; }
  void rhs(const Eigen::ArrayXd& u, Eigen::ArrayXd& du) override {
    du.resize(n_);
    for (Index i = 0; i < n_; ++i) du[i] = u[(i + 1) % n_] - 2.0 * u[i] + u[(i + n_ - 1) % n_];
  }

 private:
  Index n_;
};

Eigen::ArrayXd z_grid(double lo, int n) { return Eigen::ArrayXd::LinSpaced(n, lo, 0.0); }

double ssp2_poly(double z, int n) {
  return 1.0 / n + (n - 1.0) / n * std::pow(1.0 + z / (n - 1.0), n);
}

double ssp104_scalar(double z) {
  double q1 = 1.0, q2 = 1.0;
  for (int i = 0; i < 5; ++i) q1 += z / 6.0 * q1;
  q2 = q2 / 25.0 + 9.0 * q1 / 25.0;
  q1 = 15.0 * q2 - 5.0 * q1;
  for (int i = 0; i < 4; ++i) q1 += z / 6.0 * q1;
  return q2 + 0.6 * q1 + z / 10.0 * q1;
}

double rkl1_poly(double z, int s) { return std::legendre(s, 1.0 + 2.0 * z / (s * s + s)); }

double rkl2_poly(double z, int s) {
  const double b = (s * s + s - 2.0) / (2.0 * s * (s + 1.0));
  return 1.0 - b + b * std::legendre(s, 1.0 + 4.0 * z / (s * s + s - 2.0));
}

template <class Step>
double global_error(Step step, double dt) {
  Dahlquist sys(Eigen::ArrayXd::Constant(1, -1.0));
  Eigen::ArrayXd u = Eigen::ArrayXd::Ones(1);
  const int n = static_cast<int>(std::lround(1.0 / dt));
  for (int k = 0; k < n; ++k) u = step(sys, u, dt);
  return std::abs(u[0] - std::exp(-1.0));
}

template <class Step>
double observed_order(Step step, double dt) {
  return std::log2(global_error(step, dt) / global_error(step, 0.5 * dt));
}

void check_poly(const Eigen::ArrayXd& got, const Eigen::ArrayXd& z, double (*poly)(double, int), int n) {
  for (Index i = 0; i < z.size(); ++i) {
    const double want = poly(z[i], n);
    CHECK(std::abs(got[i] - want) <= 1e-12 * std::max(1.0, std::abs(want)));
  }
}

}  // namespace

TEST_SUITE("method names") {
  TEST_CASE("round trip") {
    for (Method m : {Method::feuler, Method::ssp2, Method::ssp104, Method::sts1, Method::sts2}) {
      CHECK(method_from_string(to_string(m)) == m);
    }
    CHECK(method_order(Method::ssp104) == 4);
    CHECK(is_sts(Method::sts1));
    CHECK_FALSE(is_sts(Method::ssp2));
    CHECK_THROWS_AS(method_from_string("rk4"), std::invalid_argument);
  }
}

TEST_SUITE("feuler") {
  TEST_CASE("one step") {
    Dahlquist sys(Eigen::ArrayXd::Constant(1, -1.0));
    RhsCounter c;
    CHECK(feuler_step(sys, Eigen::ArrayXd::Ones(1), 0.5, c)[0] == 0.5);
    CHECK(c.count == 1);
  }

  TEST_CASE("stability limit oscillates with constant magnitude") {
    Dahlquist sys(Eigen::ArrayXd::Constant(1, -4.0));
    RhsCounter c;
    Eigen::ArrayXd u = Eigen::ArrayXd::Ones(1);
    for (int k = 1; k <= 10; ++k) {
      u = feuler_step(sys, u, 0.5, c);
      CHECK(u[0] == (k % 2 ? -1.0 : 1.0));
    }
  }

  TEST_CASE("first order") {
    auto step = [](OdeSystem& s, const Eigen::ArrayXd& u, double dt) {
      RhsCounter c;
      return feuler_step(s, u, dt, c);
    };
    CHECK(observed_order(step, 0.001) == Approx(1.0).epsilon(5e-2));
  }
}

TEST_SUITE("ssp2") {
  TEST_CASE("stability polynomial") {
    for (int n : {2, 3, 5, 8}) {
      const Eigen::ArrayXd z = z_grid(-2.0 * (n - 1), 101);
      Dahlquist sys(z);
      RhsCounter c;
      const auto u = ssp2_step(sys, Eigen::ArrayXd::Ones(z.size()), 1.0, n, c);
      check_poly(u, z, ssp2_poly, n);
      CHECK((u.abs() <= 1.0 + 1e-12).all());
      CHECK(c.count == n);
    }
  }

  TEST_CASE("heun value") {
    Dahlquist sys(Eigen::ArrayXd::Constant(1, -1.0));
    RhsCounter c;
    CHECK(ssp2_step(sys, Eigen::ArrayXd::Ones(1), 1.0, 2, c)[0] == Approx(0.5));
  }

  TEST_CASE("second order") {
    auto step = [](OdeSystem& s, const Eigen::ArrayXd& u, double dt) {
      RhsCounter c;
      return ssp2_step(s, u, dt, 5, c);
    };
    CHECK(observed_order(step, 0.01) == Approx(2.0).epsilon(5e-2 / 2));
  }

  TEST_CASE("stage derivatives are reported") {
    Dahlquist sys(Eigen::ArrayXd::Constant(1, -1.0));
    RhsCounter c;
    std::vector<Eigen::ArrayXd> st;
    ssp2_step(sys, Eigen::ArrayXd::Ones(1), 0.1, 5, c, &st);
    REQUIRE(st.size() == 5);
    CHECK(st[0][0] == -1.0);
  }
}

TEST_SUITE("ssp104") {
  TEST_CASE("stability polynomial") {
    const Eigen::ArrayXd z = z_grid(-12.0, 121);
    Dahlquist sys(z);
    RhsCounter c;
    const auto u = ssp104_step(sys, Eigen::ArrayXd::Ones(z.size()), 1.0, c);
    for (Index i = 0; i < z.size(); ++i) {
      const double want = ssp104_scalar(z[i]);
      CHECK(std::abs(u[i] - want) <= 1e-12 * std::max(1.0, std::abs(want)));
    }
    CHECK((u.abs() <= 1.0 + 1e-12).all());
    CHECK(c.count == 10);
  }

  TEST_CASE("fourth order") {
    auto step = [](OdeSystem& s, const Eigen::ArrayXd& u, double dt) {
      RhsCounter c;
      return ssp104_step(s, u, dt, c);
    };
    CHECK(observed_order(step, 0.1) == Approx(4.0).epsilon(5e-2 / 4));
  }

  TEST_CASE("constant rates are integrated exactly") {
    ConstantRate sys;
    RhsCounter c;
    const Eigen::ArrayXd u0 = Eigen::ArrayXd::Zero(3);
    const auto u = ssp104_step(sys, u0, 3.0, c);
    CHECK(u[0] == Approx(4.5));
    CHECK(u[1] == Approx(-6.0));
    CHECK(u[2] == Approx(0.75));
  }
}

TEST_SUITE("rkl") {
  TEST_CASE("coefficients reject even stage counts") {
    CHECK_THROWS_AS(sts_coeffs(4, 2), std::invalid_argument);
    CHECK_THROWS_AS(sts_coeffs(1, 2), std::invalid_argument);
    CHECK_NOTHROW(sts_coeffs(1, 1));
  }

  TEST_CASE("stability polynomials match Legendre forms") {
    for (int s : {1, 3, 5, 9, 21}) {
      const Eigen::ArrayXd z = z_grid(-2.0 * sts_stability_factor(s, 1), 201);
      Dahlquist sys(z);
      RhsCounter c;
      const auto r = sts_step(sys, Eigen::ArrayXd::Ones(z.size()), 1.0, sts_coeffs(s, 1), c);
      check_poly(r.state, z, rkl1_poly, s);
      CHECK((r.state.abs() <= 1.0 + 1e-12).all());
      CHECK(c.count == s);
    }
    for (int s : {3, 5, 9, 21}) {
      const Eigen::ArrayXd z = z_grid(-2.0 * sts_stability_factor(s, 2), 201);
      Dahlquist sys(z);
      RhsCounter c;
      const auto r = sts_step(sys, Eigen::ArrayXd::Ones(z.size()), 1.0, sts_coeffs(s, 2), c);
      check_poly(r.state, z, rkl2_poly, s);
      CHECK((r.state.abs() <= 1.0 + 1e-12).all());
    }
  }

  TEST_CASE("one stage of order one is forward euler") {
    const Eigen::ArrayXd z = z_grid(-3.0, 7);
    Dahlquist sys(z);
    RhsCounter c;
    const Eigen::ArrayXd u0 = Eigen::ArrayXd::LinSpaced(7, 0.5, 2.0);
    const auto a = sts_step(sys, u0, 0.3, sts_coeffs(1, 1), c).state;
    const auto b = feuler_step(sys, u0, 0.3, c);
    CHECK((a == b).all());
  }

  TEST_CASE("constant rates are integrated exactly") {
    ConstantRate sys;
    RhsCounter c;
    for (int s : {3, 7}) {
      const auto r = sts_step(sys, Eigen::ArrayXd::Zero(3), 2.0, sts_coeffs(s, 2), c);
      CHECK(r.state[0] == Approx(3.0));
      CHECK(r.state[1] == Approx(-4.0));
    }
  }

  TEST_CASE("orders at fixed stage count") {
    auto rkl1 = [](OdeSystem& s, const Eigen::ArrayXd& u, double dt) {
      RhsCounter c;
      return sts_step(s, u, dt, sts_coeffs(5, 1), c).state;
    };
    auto rkl2 = [](OdeSystem& s, const Eigen::ArrayXd& u, double dt) {
      RhsCounter c;
      return sts_step(s, u, dt, sts_coeffs(5, 2), c).state;
    };
    CHECK(observed_order(rkl1, 0.001) == Approx(1.0).epsilon(5e-2));
    CHECK(observed_order(rkl2, 0.01) == Approx(2.0).epsilon(5e-2 / 2));
  }

  TEST_CASE("heat equation far beyond the euler limit") {
    const Index n = 64;
    Heat sys(n);
    const double dt_e = 2.0 / 4.0;
    const double dt = 50.0 * dt_e;
    const int s = sts_stage_count(dt, dt_e, 2);
    const auto coeffs = sts_coeffs(s, 2);
    Eigen::ArrayXd u(n);
    for (Index i = 0; i < n; ++i) u[i] = (i % 2 ? 1.0 : -1.0) + std::sin(0.3 * i) + (i == 5 ? 3.0 : 0.0);
    u -= u.mean();
    RhsCounter c;
    double prev = u.matrix().norm();
    for (int k = 0; k < 1000; ++k) {
      u = sts_step(sys, u, dt, coeffs, c).state;
      const double norm = u.matrix().norm();
      REQUIRE(std::isfinite(norm));
      CHECK(norm <= prev * (1.0 + 1e-12));
      prev = norm;
    }
  }
}

TEST_SUITE("simplex handling") {
  TEST_CASE("projection after every stage") {
    const std::vector<std::int32_t> off{0, 2, 3};
    const Layout layout{off, 1};
    Eigen::ArrayXd u(4);
    u << 1.2, -0.2, 0.7, 5.0;
    project_simplex(layout, u);
    CHECK(u[0] == 1.0);
    CHECK(u[1] == 0.0);
    CHECK(u[2] == 1.0);
    CHECK(u[3] == 5.0);
  }

  TEST_CASE("fixup example") {
    const std::vector<std::int32_t> off{0, 2, 4};
    const Layout layout{off, 0};
    Eigen::ArrayXd u0(4), rhs0(4), raw(4);
    u0 << 0.9, 0.1, 0.5, 0.5;
    rhs0 << 0.6, -0.6, 0.2, -0.2;
    raw = u0 + 0.5 * rhs0;
    const auto fixed = sts2_simplex_fixup(layout, u0, raw, rhs0, 0.5);
    CHECK(fixed[0] == Approx(0.2));
    CHECK(fixed[1] == Approx(-0.2));
    CHECK(fixed[2] == rhs0[2]);
    CHECK(fixed[3] == rhs0[3]);

    Eigen::ArrayXd replay = u0 + 0.5 * fixed;
    Eigen::ArrayXd projected = raw;
    project_simplex(layout, projected);
    CHECK(replay[0] == Approx(projected[0]));
    CHECK(replay[1] == Approx(projected[1]));
  }

  TEST_CASE("fixup leaves feasible stages alone") {
    const std::vector<std::int32_t> off{0, 2};
    const Layout layout{off, 1};
    Eigen::ArrayXd u0(3), rhs0(3);
    u0 << 0.4, 0.6, 3.0;
    rhs0 << 0.1, -0.1, 100.0;
    const Eigen::ArrayXd raw = u0 + 0.5 * rhs0;
    CHECK((sts2_simplex_fixup(layout, u0, raw, rhs0, 0.5) == rhs0).all());
  }
}

TEST_SUITE("error estimation") {
  TEST_CASE("sommeijer vanishes on linear trends") {
    const Layout layout{{}, 3};
    Eigen::ArrayXd un(3), r(3);
    un << 1.0, 2.0, 3.0;
    r << 0.5, -1.0, 2.0;
    const Eigen::ArrayXd unp1 = un + 0.3 * r;
    CHECK((sommeijer_error(layout, un, unp1, r, r, 0.3).abs() < 1e-15).all());
  }

  TEST_CASE("sommeijer is third order on exact propagation") {
    const Layout layout{{}, 1};
    auto est = [&](double dt) {
      Eigen::ArrayXd un = Eigen::ArrayXd::Ones(1);
      Eigen::ArrayXd unp1 = Eigen::ArrayXd::Constant(1, std::exp(-dt));
      return std::abs(sommeijer_error(layout, un, unp1, -un, -unp1, dt)[0]);
    };
    CHECK(std::log2(est(0.02) / est(0.01)) == Approx(3.0).epsilon(0.02));
  }

  TEST_CASE("phase components leaving the unit interval are filtered") {
    const std::vector<std::int32_t> off{0, 2};
    const Layout layout{off, 0};
    Eigen::ArrayXd un(2), unp1(2), r0(2), r1(2);
    un << 1.0, 0.0;
    unp1 << 1.0, 0.0;
    r0 << 0.5, -0.5;
    r1 << 0.5, -0.5;
    // trapezoid trial values 1.05 and -0.05
    const auto e = sommeijer_error(layout, un, unp1, r0, r1, 0.1);
    CHECK(e[0] == 0.0);
    CHECK(e[1] == 0.0);
  }

  TEST_CASE("weighted norm") {
    const int v = 10;
    std::vector<std::int32_t> off(v + 1);
    for (int i = 0; i <= v; ++i) off[i] = i;
    const Layout layout{off, 0};
    const Eigen::ArrayXd zero = Eigen::ArrayXd::Zero(v);
    Tolerances tol;
    tol.phase_abs = 1e-3;
    CHECK(weighted_error_norm(layout, zero, zero, zero, tol) == 0.0);
    Eigen::ArrayXd e = zero;
    e[3] = tol.phase_abs;
    const double expect = std::sqrt(1.0 / (1.0 + 2.0 * (v - 1)));
    CHECK(weighted_error_norm(layout, e, zero, zero, tol) == Approx(expect));
    Tolerances twice = tol;
    twice.phase_abs *= 2.0;
    CHECK(weighted_error_norm(layout, e, zero, zero, twice) == Approx(0.5 * expect));
  }

  TEST_CASE("embedded euler pair") {
    const auto t = ssp2_euler_pair(5);
    REQUIRE(t.weights.size() == 5);
    CHECK(t.weights[0] == Approx(0.2 - 1.0));
    CHECK(t.weights[4] == Approx(0.2));
    CHECK(t.order == 1);
  }
}

TEST_SUITE("attempt_step") {
  TEST_CASE("evaluation counts") {
    Dahlquist sys(Eigen::ArrayXd::Constant(2, -1.0));
    const Eigen::ArrayXd u = Eigen::ArrayXd::Ones(2);
    RhsCounter c;
    StepSpec spec;
    CHECK(attempt_step(sys, u, 0.1, spec, c).rhs_evals == 1);
    spec.method = Method::ssp2;
    CHECK(attempt_step(sys, u, 0.1, spec, c).rhs_evals == 5);
    spec.adaptive = true;
    CHECK(attempt_step(sys, u, 0.1, spec, c).rhs_evals == 15);
    const auto pair = ssp2_euler_pair(5);
    spec.embedded = &pair;
    auto out = attempt_step(sys, u, 0.1, spec, c);
    CHECK(out.rhs_evals == 5);
    CHECK(out.estimate_order == 1);
    spec.embedded = nullptr;
    spec.method = Method::sts2;
    spec.sts_stages = 7;
    CHECK(attempt_step(sys, u, 0.1, spec, c).rhs_evals == 8);
    spec.adaptive = false;
    CHECK(attempt_step(sys, u, 0.1, spec, c).rhs_evals == 7);
  }

  TEST_CASE("adaptive acceptance follows the tolerance") {
    Dahlquist sys(Eigen::ArrayXd::Constant(1, -1.0));
    const Eigen::ArrayXd u = Eigen::ArrayXd::Ones(1);
    RhsCounter c;
    StepSpec spec;
    spec.method = Method::sts2;
    spec.sts_stages = 5;
    spec.adaptive = true;
    spec.tol.field_abs = spec.tol.field_rel = 1e-3;
    CHECK(attempt_step(sys, u, 0.01, spec, c).accepted);
    CHECK_FALSE(attempt_step(sys, u, 1.0, spec, c).accepted);
  }

  TEST_CASE("step halving estimate tracks the true error") {
    Dahlquist sys(Eigen::ArrayXd::Constant(1, -1.0));
    const Eigen::ArrayXd u = Eigen::ArrayXd::Ones(1);
    RhsCounter c;
    StepSpec spec;
    spec.method = Method::ssp104;
    spec.adaptive = true;
    spec.tol.field_abs = 1.0;
    spec.tol.field_rel = 0.0;
    const double dt = 0.2;
    const auto out = attempt_step(sys, u, dt, spec, c);
    const double truth = std::abs(out.state[0] - std::exp(-dt));
    CHECK(out.error == Approx(truth).epsilon(0.2));
  }
}
