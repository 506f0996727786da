#include "shelab/coefficients.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "shelab/errors.hpp"

namespace shelab {

CoefficientField CoefficientField::constant(double value) {
  if (!std::isfinite(value)) throw ConfigError("coefficient: constant must be finite");
  CoefficientField c;
  c.kind_ = Kind::Constant;
  c.value_ = value;
  c.sup_ = std::abs(value);
  c.sup_grad_ = 0.0;
  return c;
}

CoefficientField CoefficientField::from_function(const SpatialGrid& grid, const TimeMesh& mesh, Function fn) {
  auto table = std::make_shared<std::vector<Field>>();
  auto grads = std::make_shared<std::vector<Field>>();
  double sup = 0.0, sup_grad = 0.0;
  for (int k = 0; k <= mesh.steps; ++k) {
    const double t = mesh.time(k);
    Field v(grid.size()), g(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const Point x = grid.coord(i);
      v[i] = fn(t, x);
      if (!std::isfinite(v[i])) throw ConfigError("coefficient: function returned a non-finite value");
      double g2 = 0.0;
      for (int a = 0; a < grid.dimension(); ++a) {
        const double d = grid.spacing(a) * 1e-2;
        Point xp = x, xm = x;
        xp[a] += d;
        xm[a] -= d;
        const double da = (fn(t, xp) - fn(t, xm)) / (2.0 * d);
        g2 += da * da;
      }
      g[i] = std::sqrt(g2);
      sup = std::max(sup, std::abs(v[i]));
      sup_grad = std::max(sup_grad, g[i]);
    }
    table->push_back(std::move(v));
    grads->push_back(std::move(g));
  }
  CoefficientField c;
  c.kind_ = Kind::Table;
  c.table_ = std::move(table);
  c.grad_norm_ = std::move(grads);
  c.sup_ = sup;
  c.sup_grad_ = sup_grad;
  return c;
}

CoefficientField CoefficientField::adapted(Adapted fn, double sup, double sup_grad) {
  if (!fn) throw ConfigError("coefficient: empty adapted callback");
  if (!(sup >= 0.0) || !(sup_grad >= 0.0)) throw ConfigError("coefficient: bounds must be nonnegative");
  CoefficientField c;
  c.kind_ = Kind::Adapted;
  c.fn_ = std::move(fn);
  c.sup_ = sup;
  c.sup_grad_ = sup_grad;
  return c;
}

void CoefficientField::evaluate(int k, std::span<const double> history, std::span<double> out) const {
  switch (kind_) {
    case Kind::Constant:
      std::fill(out.begin(), out.end(), value_);
      return;
    case Kind::Table: {
      if (k < 0 || k >= static_cast<int>(table_->size())) throw DomainError("coefficient: step out of range");
      const Field& row = (*table_)[k];
      if (row.size() != out.size()) throw ShapeError("coefficient: table size does not match grid");
      for (std::size_t i = 0; i < out.size(); ++i) out[i] = factor_ * row[i];
      return;
    }
    case Kind::Adapted:
      if (static_cast<int>(history.size()) < k) throw ShapeError("coefficient: history shorter than step");
      fn_(k, history.first(k), out);
      for (double& v : out) v *= factor_;
      return;
  }
}

Field CoefficientField::at(int k, std::size_t nodes) const {
  if (!deterministic()) throw PreconditionError("coefficient: adapted field has no deterministic table");
  Field out(nodes);
  evaluate(k, {}, out);
  return out;
}

double CoefficientField::sup_on(const std::vector<unsigned char>& mask) const {
  if (kind_ != Kind::Table) return sup_;
  double s = 0.0;
  for (const Field& row : *table_) {
    if (row.size() != mask.size()) throw ShapeError("coefficient: mask size does not match grid");
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (mask[i]) s = std::max(s, std::abs(factor_ * row[i]));
    }
  }
  return s;
}

double CoefficientField::w1inf_on(const std::vector<unsigned char>& mask) const {
  if (kind_ != Kind::Table) return w1inf();
  double g = 0.0;
  for (const Field& row : *grad_norm_) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (mask[i]) g = std::max(g, std::abs(factor_) * row[i]);
    }
  }
  return std::max(sup_on(mask), g);
}

CoefficientField CoefficientField::scaled(double factor) const {
  if (kind_ == Kind::Constant) return constant(factor * value_);
  CoefficientField c = *this;
  c.factor_ *= factor;
  c.sup_ *= std::abs(factor);
  c.sup_grad_ *= std::abs(factor);
  return c;
}

CoefficientField random_smooth_field(const SpatialGrid& grid, const TimeMesh& mesh, double bound,
                                     std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  struct Term {
    double w, fx, ox, fy, oy, g;
  };
  std::vector<Term> terms(3);
  double norm = 0.0;
  for (Term& term : terms) {
    term.w = 2.0 * unit(rng) - 1.0;
    term.fx = 1.0 + 2.0 * unit(rng);
    term.ox = unit(rng);
    term.fy = 1.0 + 2.0 * unit(rng);
    term.oy = unit(rng);
    term.g = 4.0 * unit(rng);
    norm += std::abs(term.w);
  }
  const int n = grid.dimension();
  auto fn = [terms, norm, bound, n](double t, const Point& x) {
    double s = 0.0;
    for (const Term& term : terms) {
      double v = std::sin(std::numbers::pi * (term.fx * x[0] + term.ox));
      if (n == 2) v *= std::sin(std::numbers::pi * (term.fy * x[1] + term.oy));
      s += term.w * v * std::cos(term.g * t);
    }
    return bound * s / norm;
  };
  return CoefficientField::from_function(grid, mesh, fn);
}

}  // namespace shelab
