#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <random>
#include <string>
#include <utility>
#include <variant>

#include "nsdt/errors.hpp"
#include "nsdt/rational.hpp"

namespace nsdt {

// A point of the 4-dimensional coordinate chart (x^0,x^1,x^2,x^3).
struct ChartPoint {
  std::array<double, 4> x{};

  double operator[](int i) const { return x[static_cast<size_t>(i)]; }
  double& operator[](int i) { return x[static_cast<size_t>(i)]; }

  bool finite() const {
    for (double c : x)
      if (!std::isfinite(c)) return false;
    return true;
  }
};

using Exponents = std::array<unsigned, 4>;

// Multivariate polynomial over Q in the four chart coordinates.
// Terms are keyed by exponent tuple; zero coefficients are never stored.
class Polynomial {
 public:
  using TermMap = std::map<Exponents, Rational>;

  Polynomial() = default;

  static Polynomial constant(const Rational& c) {
    Polynomial p;
    p.add_term(c, {0, 0, 0, 0});
    return p;
  }

  static Polynomial variable(int axis) {
    Polynomial p;
    Exponents e{0, 0, 0, 0};
    e[static_cast<size_t>(axis)] = 1;
    p.add_term(1, e);
    return p;
  }

  void add_term(const Rational& coeff, const Exponents& exps) {
    if (coeff == 0) return;
    auto it = terms_.find(exps);
    if (it == terms_.end()) {
      terms_.emplace(exps, coeff);
    } else {
      it->second += coeff;
      if (it->second == 0) terms_.erase(it);
    }
  }

  const TermMap& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }

  Polynomial operator+(const Polynomial& o) const {
    Polynomial r = *this;
    for (const auto& [e, c] : o.terms_) r.add_term(c, e);
    return r;
  }

  Polynomial operator-() const {
    Polynomial r;
    for (const auto& [e, c] : terms_) r.terms_.emplace(e, -c);
    return r;
  }

  Polynomial operator-(const Polynomial& o) const { return *this + (-o); }

  Polynomial operator*(const Polynomial& o) const {
    Polynomial r;
    for (const auto& [ea, ca] : terms_)
      for (const auto& [eb, cb] : o.terms_) {
        Exponents e{ea[0] + eb[0], ea[1] + eb[1], ea[2] + eb[2], ea[3] + eb[3]};
        r.add_term(ca * cb, e);
      }
    return r;
  }

  Polynomial scaled(const Rational& c) const {
    Polynomial r;
    if (c == 0) return r;
    for (const auto& [e, coeff] : terms_) r.terms_.emplace(e, c * coeff);
    return r;
  }

  Polynomial derivative(int axis) const {
    Polynomial r;
    auto a = static_cast<size_t>(axis);
    for (const auto& [e, c] : terms_) {
      if (e[a] == 0) continue;
      Exponents d = e;
      d[a] -= 1;
      r.add_term(c * Rational(e[a]), d);
    }
    return r;
  }

  double evaluate(const ChartPoint& p) const {
    double acc = 0.0;
    for (const auto& [e, c] : terms_) {
      double m = to_double(c);
      for (size_t i = 0; i < 4; ++i)
        for (unsigned k = 0; k < e[i]; ++k) m *= p.x[i];
      acc += m;
    }
    return acc;
  }

  // Exact rational evaluation at a rational point (used by identity tests).
  Rational evaluate_exact(const std::array<Rational, 4>& p) const {
    Rational acc = 0;
    for (const auto& [e, c] : terms_) {
      Rational m = c;
      for (size_t i = 0; i < 4; ++i)
        for (unsigned k = 0; k < e[i]; ++k) m *= p[i];
      acc += m;
    }
    return acc;
  }

  bool operator==(const Polynomial& o) const { return terms_ == o.terms_; }

  unsigned degree() const {
    unsigned d = 0;
    for (const auto& [e, c] : terms_) d = std::max(d, e[0] + e[1] + e[2] + e[3]);
    return d;
  }

 private:
  TermMap terms_;
};

// A real scalar field on the chart: either an exact polynomial or a
// numeric callback differentiated by central finite differences of step h.
class ScalarField {
 public:
  using Callback = std::function<double(const ChartPoint&)>;

  static constexpr double kDefaultStep = 1e-5;

  ScalarField() : backend_(Polynomial{}) {}
  ScalarField(Polynomial p) : backend_(std::move(p)) {}
  ScalarField(Callback f, double h = kDefaultStep) : backend_(CallbackRep{std::move(f), h}) {}

  static ScalarField zero() { return ScalarField(); }
  static ScalarField constant(const Rational& c) { return ScalarField(Polynomial::constant(c)); }
  static ScalarField variable(int axis) { return ScalarField(Polynomial::variable(axis)); }

  bool is_polynomial() const { return std::holds_alternative<Polynomial>(backend_); }
  const Polynomial& poly() const { return std::get<Polynomial>(backend_); }
  double step() const {
    return is_polynomial() ? kDefaultStep : std::get<CallbackRep>(backend_).h;
  }

  double evaluate(const ChartPoint& p) const {
    if (!p.finite()) throw EvaluationError("evaluation at non-finite point");
    if (is_polynomial()) return poly().evaluate(p);
    double v = std::get<CallbackRep>(backend_).f(p);
    if (!std::isfinite(v)) throw EvaluationError("callback produced non-finite value");
    return v;
  }

  double operator()(const ChartPoint& p) const { return evaluate(p); }

  ScalarField derivative(int axis) const {
    if (is_polynomial()) return ScalarField(poly().derivative(axis));
    const auto rep = std::get<CallbackRep>(backend_);
    return ScalarField(
        [rep, axis](const ChartPoint& p) {
          ChartPoint hi = p, lo = p;
          hi[axis] += rep.h;
          lo[axis] -= rep.h;
          return (rep.f(hi) - rep.f(lo)) / (2.0 * rep.h);
        },
        rep.h);
  }

  ScalarField operator+(const ScalarField& o) const {
    if (is_polynomial() && o.is_polynomial()) return ScalarField(poly() + o.poly());
    return combine(*this, o, [](double a, double b) { return a + b; });
  }

  ScalarField operator-(const ScalarField& o) const {
    if (is_polynomial() && o.is_polynomial()) return ScalarField(poly() - o.poly());
    return combine(*this, o, [](double a, double b) { return a - b; });
  }

  ScalarField operator-() const {
    if (is_polynomial()) return ScalarField(-poly());
    ScalarField self = *this;
    return ScalarField([self](const ChartPoint& p) { return -self.evaluate(p); }, step());
  }

  ScalarField operator*(const ScalarField& o) const {
    if (is_polynomial() && o.is_polynomial()) return ScalarField(poly() * o.poly());
    return combine(*this, o, [](double a, double b) { return a * b; });
  }

  ScalarField scaled(const Rational& c) const {
    if (is_polynomial()) return ScalarField(poly().scaled(c));
    ScalarField self = *this;
    double cd = to_double(c);
    return ScalarField([self, cd](const ChartPoint& p) { return cd * self.evaluate(p); }, step());
  }

  // Exact decision on the polynomial backend; seeded probe sampling on
  // the callback backend.
  bool is_identically_zero(double tolerance = 0.0, int probe_points = 32,
                           uint64_t seed = 20060711) const {
    if (is_polynomial()) return poly().is_zero();
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    for (int k = 0; k < probe_points; ++k) {
      ChartPoint p;
      for (int i = 0; i < 4; ++i) p[i] = dist(rng);
      if (std::abs(evaluate(p)) > tolerance) return false;
    }
    return true;
  }

  // Largest |value| over a deterministic probe cloud (0 exactly for the
  // zero polynomial without sampling).
  double max_abs_on_probes(int probe_points = 32, uint64_t seed = 20060711) const {
    if (is_polynomial() && poly().is_zero()) return 0.0;
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    double m = 0.0;
    for (int k = 0; k < probe_points; ++k) {
      ChartPoint p;
      for (int i = 0; i < 4; ++i) p[i] = dist(rng);
      m = std::max(m, std::abs(evaluate(p)));
    }
    return m;
  }

 private:
  struct CallbackRep {
    Callback f;
    double h;
  };

  template <class Op>
  static ScalarField combine(const ScalarField& a, const ScalarField& b, Op op) {
    double h = std::min(a.step(), b.step());
    return ScalarField([a, b, op](const ChartPoint& p) { return op(a.evaluate(p), b.evaluate(p)); },
                       h);
  }

  std::variant<Polynomial, CallbackRep> backend_;
};

inline ScalarField operator*(const Rational& c, const ScalarField& f) { return f.scaled(c); }

}  // namespace nsdt
