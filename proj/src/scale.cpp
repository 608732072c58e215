#include "chainkit/scale.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace chainkit {

namespace {

constexpr double kRangeSlack = 1e-12;

std::vector<double> split_numbers(const std::string& s, char sep) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, sep)) {
    if (tok.empty()) continue;
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(tok, &used);
    } catch (const std::exception&) {
      throw InputError("malformed number '" + tok + "' in scale spec");
    }
    if (tok.find_first_not_of(" \t\r", used) != std::string::npos)
      throw InputError("malformed number '" + tok + "' in scale spec");
    out.push_back(v);
  }
  return out;
}

}  // namespace

ScaleFunction ScaleFunction::power(double beta) {
  if (!(beta > 0.0) || !std::isfinite(beta)) throw DomainError("power scale exponent must be positive");
  ScaleFunction f;
  f.kind_ = Kind::Power;
  f.beta_ = beta;
  f.beta1_ = f.beta2_ = beta;
  f.c_reg_ = 1.0;
  return f;
}

ScaleFunction ScaleFunction::piecewise(std::vector<std::pair<double, double>> segments) {
  if (segments.empty()) throw InputError("piecewise scale needs at least one segment");
  if (segments.front().first != 0.0) throw InputError("first piecewise breakpoint must be 0");
  ScaleFunction f;
  f.kind_ = Kind::PiecewisePower;
  for (std::size_t i = 0; i < segments.size(); ++i) {
    const auto [r, b] = segments[i];
    if (!(b > 0.0)) throw DomainError("piecewise exponents must be positive");
    if (i > 0 && !(r > segments[i - 1].first)) throw InputError("piecewise breakpoints must increase");
    f.exps_.push_back(b);
    if (i > 0) f.knots_.push_back(r);
  }
  // Psi at each knot, continuing the previous segment.
  double prev_r = 0.0, prev_v = 0.0;
  for (std::size_t i = 0; i < f.knots_.size(); ++i) {
    const double r = f.knots_[i];
    const double v = i == 0 ? std::pow(r, f.exps_[0]) : prev_v * std::pow(r / prev_r, f.exps_[i]);
    f.values_.push_back(v);
    prev_r = r;
    prev_v = v;
  }
  f.beta1_ = *std::min_element(f.exps_.begin(), f.exps_.end());
  f.beta2_ = *std::max_element(f.exps_.begin(), f.exps_.end());
  f.c_reg_ = 1.0;
  f.beta_ = f.exps_.front();
  return f;
}

ScaleFunction ScaleFunction::tabulated(std::vector<double> r, std::vector<double> values) {
  if (r.size() != values.size() || r.size() < 2) throw InputError("tabulated scale needs at least two (r, Psi) rows");
  for (std::size_t i = 0; i < r.size(); ++i) {
    if (!(r[i] > 0.0) || !(values[i] > 0.0)) throw InputError("tabulated scale samples must be positive");
    if (i > 0 && (!(r[i] > r[i - 1]) || !(values[i] > values[i - 1])))
      throw InputError("tabulated scale must be strictly increasing in r and Psi(r)");
  }
  ScaleFunction f;
  f.kind_ = Kind::Tabulated;
  f.knots_ = std::move(r);
  f.values_ = std::move(values);
  double lo = kInfinity, hi = -kInfinity;
  for (std::size_t i = 0; i + 1 < f.knots_.size(); ++i) {
    const double slope = std::log(f.values_[i + 1] / f.values_[i]) / std::log(f.knots_[i + 1] / f.knots_[i]);
    lo = std::min(lo, slope);
    hi = std::max(hi, slope);
  }
  f.beta1_ = lo;
  f.beta2_ = hi;
  f.c_reg_ = 1.0;
  return f;
}

ScaleFunction ScaleFunction::parse(const std::string& spec) {
  const auto colon = spec.find(':');
  if (colon == std::string::npos) throw InputError("scale spec must look like power:BETA, piecewise:..., or table:PATH");
  const std::string head = spec.substr(0, colon);
  const std::string body = spec.substr(colon + 1);
  if (head == "power") {
    const auto v = split_numbers(body, ',');
    if (v.size() != 1) throw InputError("power scale spec takes exactly one exponent");
    return power(v[0]);
  }
  if (head == "piecewise") {
    std::vector<std::pair<double, double>> segs;
    std::stringstream ss(body);
    std::string part;
    while (std::getline(ss, part, ';')) {
      if (part.empty()) continue;
      const auto v = split_numbers(part, ',');
      if (v.size() != 2) throw InputError("piecewise segment must be 'r,b', got '" + part + "'");
      segs.emplace_back(v[0], v[1]);
    }
    return piecewise(std::move(segs));
  }
  if (head == "table") {
    std::ifstream in(body);
    if (!in) throw InputError("cannot open scale table '" + body + "'");
    std::vector<double> r, v;
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
      if (line.empty() || line[0] == '#') continue;
      std::vector<double> row;
      try {
        row = split_numbers(line, ',');
      } catch (const InputError&) {
        if (first) {  // header row
          first = false;
          continue;
        }
        throw;
      }
      first = false;
      if (row.size() != 2) throw InputError("scale table rows must have two columns: " + line);
      r.push_back(row[0]);
      v.push_back(row[1]);
    }
    return tabulated(std::move(r), std::move(v));
  }
  throw InputError("unknown scale kind '" + head + "'");
}

double ScaleFunction::operator()(double r) const {
  if (!(r > 0.0)) throw DomainError("Psi is defined for r > 0");
  switch (kind_) {
    case Kind::Power:
      return std::pow(r, beta_);
    case Kind::PiecewisePower: {
      if (knots_.empty() || r <= knots_.front()) return std::pow(r, exps_.front());
      const auto it = std::upper_bound(knots_.begin(), knots_.end(), r);
      const std::size_t i = static_cast<std::size_t>(it - knots_.begin()) - 1;
      return values_[i] * std::pow(r / knots_[i], exps_[i + 1]);
    }
    case Kind::Tabulated: {
      const double lo = knots_.front(), hi = knots_.back();
      if (r < lo * (1 - kRangeSlack) || r > hi * (1 + kRangeSlack)) {
        std::ostringstream os;
        os << "r=" << r << " outside tabulated range [" << lo << ", " << hi << "]";
        throw RangeError(os.str());
      }
      r = std::clamp(r, lo, hi);
      auto it = std::upper_bound(knots_.begin(), knots_.end(), r);
      std::size_t i = static_cast<std::size_t>(it - knots_.begin());
      i = std::clamp<std::size_t>(i, 1, knots_.size() - 1) - 1;
      const double w = std::log(r / knots_[i]) / std::log(knots_[i + 1] / knots_[i]);
      return std::exp(std::log(values_[i]) + w * std::log(values_[i + 1] / values_[i]));
    }
  }
  return 0.0;
}

double ScaleFunction::inverse(double v) const {
  if (!(v > 0.0)) throw DomainError("Psi^-1 is defined for v > 0");
  switch (kind_) {
    case Kind::Power:
      return std::pow(v, 1.0 / beta_);
    case Kind::PiecewisePower: {
      if (values_.empty() || v <= values_.front()) return std::pow(v, 1.0 / exps_.front());
      const auto it = std::upper_bound(values_.begin(), values_.end(), v);
      const std::size_t i = static_cast<std::size_t>(it - values_.begin()) - 1;
      return knots_[i] * std::pow(v / values_[i], 1.0 / exps_[i + 1]);
    }
    case Kind::Tabulated: {
      const double lo = values_.front(), hi = values_.back();
      if (v < lo * (1 - kRangeSlack) || v > hi * (1 + kRangeSlack)) {
        std::ostringstream os;
        os << "v=" << v << " outside tabulated range [" << lo << ", " << hi << "]";
        throw RangeError(os.str());
      }
      v = std::clamp(v, lo, hi);
      auto it = std::upper_bound(values_.begin(), values_.end(), v);
      std::size_t i = static_cast<std::size_t>(it - values_.begin());
      i = std::clamp<std::size_t>(i, 1, values_.size() - 1) - 1;
      const double w = std::log(v / values_[i]) / std::log(values_[i + 1] / values_[i]);
      return std::exp(std::log(knots_[i]) + w * std::log(knots_[i + 1] / knots_[i]));
    }
  }
  return 0.0;
}

ScaleFunction ScaleFunction::with_regularity(double beta1, double beta2, double c_reg) const {
  if (!(beta1 > 0.0) || !(beta2 >= beta1)) throw DomainError("need 0 < beta1 <= beta2");
  if (!(c_reg >= 1.0)) throw DomainError("regularity constant must be >= 1");
  ScaleFunction f = *this;
  f.beta1_ = beta1;
  f.beta2_ = beta2;
  f.c_reg_ = c_reg;
  return f;
}

std::pair<double, double> ScaleFunction::domain() const {
  if (kind_ == Kind::Tabulated) return {knots_.front(), knots_.back()};
  return {0.0, kInfinity};
}

std::string ScaleFunction::describe() const {
  std::ostringstream os;
  os.precision(17);
  switch (kind_) {
    case Kind::Power:
      os << "power:" << beta_;
      break;
    case Kind::PiecewisePower:
      os << "piecewise:0," << exps_[0];
      for (std::size_t i = 0; i < knots_.size(); ++i) os << ";" << knots_[i] << "," << exps_[i + 1];
      break;
    case Kind::Tabulated:
      os << "table:" << knots_.size() << " samples";
      break;
  }
  return os.str();
}

std::vector<double> log_grid(double lo, double hi, int points_per_decade) {
  if (!(lo > 0.0) || !(hi >= lo)) throw DomainError("log grid needs 0 < lo <= hi");
  if (points_per_decade < 1) throw DomainError("grid density must be positive");
  if (hi == lo) return {lo};
  const double decades = std::log10(hi / lo);
  const auto m = static_cast<std::size_t>(std::max(1.0, std::ceil(points_per_decade * decades - 1e-9)));
  std::vector<double> g(m + 1);
  for (std::size_t i = 0; i <= m; ++i) g[i] = lo * std::pow(hi / lo, static_cast<double>(i) / static_cast<double>(m));
  g.front() = lo;
  g.back() = hi;
  return g;
}

namespace {

// Smallest C >= 1 with C^-1 q^lower <= ratio <= C q^upper over all grid pairs,
// computed in logs.
template <class F>
double best_two_sided_constant(const std::vector<double>& grid, F&& f, double lower, double upper) {
  std::vector<double> logf(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) logf[i] = std::log(f(grid[i]));
  double worst = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    for (std::size_t j = i; j < grid.size(); ++j) {
      const double lq = std::log(grid[j] / grid[i]);
      const double lr = logf[j] - logf[i];
      worst = std::max({worst, lower * lq - lr, lr - upper * lq});
    }
  }
  return std::exp(worst);
}

constexpr double kCertificateSlack = 1e-9;

}  // namespace

RegularityCertificate verify_regularity(const ScaleFunction& psi, double r_min, double r_max, GridOptions grid) {
  if (!(r_min > 0.0) || !(r_max > r_min)) throw DomainError("regularity window needs 0 < r_min < r_max");
  const auto [dlo, dhi] = psi.domain();
  if (r_min < dlo * (1 - kRangeSlack) || r_max > dhi * (1 + kRangeSlack))
    throw RangeError("regularity window exceeds the represented range of Psi");
  const auto g = log_grid(r_min, r_max, grid.points_per_decade);
  RegularityCertificate c;
  c.lower_exponent = psi.beta1();
  c.upper_exponent = psi.beta2();
  c.claimed_constant = psi.regularity_constant();
  c.grid_points = g.size();
  c.best_constant = best_two_sided_constant(g, psi, psi.beta1(), psi.beta2());
  c.ok = c.best_constant <= c.claimed_constant * (1 + kCertificateSlack);
  return c;
}

double phi_power_closed_form(double beta, double s) {
  if (!(s > 0.0)) throw DomainError("Phi is evaluated at s > 0");
  if (!(beta > 1.0)) throw DomainError("Phi is finite only for beta > 1");
  const double e = 1.0 / (beta - 1.0);
  return std::pow(s, beta * e) * std::pow(beta, -e) * (1.0 - 1.0 / beta);
}

double phi_numeric_sup(const ScaleFunction& psi, double s) {
  if (!(s > 0.0)) throw DomainError("Phi is evaluated at s > 0");
  if (!(psi.beta1() > 1.0)) throw DomainError("Phi is finite only when Psi grows faster than linearly (beta1 > 1)");
  auto objective = [&](double log_r) {
    const double r = std::exp(log_r);
    return s / r - 1.0 / psi(r);
  };
  // Stationary point of s/r - r^-beta sits at r = (beta/s)^(1/(beta-1)); bracket
  // it for both regularity exponents with three decades of margin either side.
  double lo = kInfinity, hi = 0.0;
  for (double b : {psi.beta1(), psi.beta2()}) {
    const double r_star = std::pow(b / s, 1.0 / (b - 1.0));
    lo = std::min(lo, r_star);
    hi = std::max(hi, r_star);
  }
  lo /= 1e3;
  hi *= 1e3;
  const auto [dlo, dhi] = psi.domain();
  const bool clipped_lo = lo <= dlo, clipped_hi = hi >= dhi;
  lo = std::max(lo, dlo > 0 ? dlo : lo);
  hi = std::min(hi, dhi);

  double a = std::log(lo), b = std::log(hi);
  double best_u = a, best_v = -kInfinity;
  for (int expand = 0; expand < 20; ++expand) {
    const int n = std::max(64, static_cast<int>(std::ceil((b - a) / std::log(10.0) * 64)));
    const double h = (b - a) / n;
    int best_k = 0;
    best_v = -kInfinity;
    for (int k = 0; k <= n; ++k) {
      const double v = objective(a + h * k);
      if (v > best_v) {
        best_v = v;
        best_k = k;
      }
    }
    best_u = a + h * best_k;
    const bool at_lo = best_k == 0 && !clipped_lo;
    const bool at_hi = best_k == n && !clipped_hi;
    if (!at_lo && !at_hi) {
      // Golden-section refinement on the neighbouring grid cells.
      double x0 = std::max(a, best_u - h), x3 = std::min(b, best_u + h);
      const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
      double x1 = x3 - inv_phi * (x3 - x0), x2 = x0 + inv_phi * (x3 - x0);
      double f1 = objective(x1), f2 = objective(x2);
      while (x3 - x0 > 1e-13 * std::max(1.0, std::abs(x0))) {
        if (f1 < f2) {
          x0 = x1;
          x1 = x2;
          f1 = f2;
          x2 = x0 + inv_phi * (x3 - x0);
          f2 = objective(x2);
        } else {
          x3 = x2;
          x2 = x1;
          f2 = f1;
          x1 = x3 - inv_phi * (x3 - x0);
          f1 = objective(x1);
        }
      }
      best_v = std::max({best_v, f1, f2});
      break;
    }
    if (at_lo) a -= 3 * std::log(10.0);
    if (at_hi) b += 3 * std::log(10.0);
  }
  return std::max(best_v, 0.0);
}

PhiTransform::PhiTransform(ScaleFunction psi)
    : PhiTransform(psi, psi.kind() == ScaleFunction::Kind::Power ? Method::ClosedForm : Method::NumericSup) {}

PhiTransform::PhiTransform(ScaleFunction psi, Method method) : psi_(std::move(psi)), method_(method) {
  if (method_ == Method::ClosedForm && psi_.kind() != ScaleFunction::Kind::Power)
    throw DomainError("closed-form Phi is available for power scale functions only");
}

double PhiTransform::operator()(double s) const {
  if (method_ == Method::ClosedForm) return phi_power_closed_form(psi_.beta(), s);
  return phi_numeric_sup(psi_, s);
}

RegularityCertificate verify_phi_regularity(const PhiTransform& phi, double s_min, double s_max, GridOptions grid) {
  const ScaleFunction& psi = phi.source();
  if (!(psi.beta1() > 1.0)) throw HypothesisError("Phi regularity requires 1 < beta1 <= beta2");
  if (!(s_min > 0.0) || !(s_max >= s_min)) throw DomainError("Phi regularity window needs 0 < s_min <= s_max");
  const auto g = log_grid(s_min, s_max, grid.points_per_decade);
  RegularityCertificate c;
  c.lower_exponent = psi.beta2() / (psi.beta2() - 1.0);
  c.upper_exponent = psi.beta1() / (psi.beta1() - 1.0);
  // Tracing the constants through the rescaling argument gives C1^(1 + beta1/(beta1-1)).
  c.claimed_constant = std::pow(psi.regularity_constant(), 1.0 + c.upper_exponent);
  c.grid_points = g.size();
  c.best_constant = best_two_sided_constant(g, phi, c.lower_exponent, c.upper_exponent);
  c.ok = c.best_constant <= c.claimed_constant * (1 + kCertificateSlack);
  return c;
}

WalkDimensionCertificate walk_dimension_lower_check(const ScaleFunction& psi, double space_diameter, double r_min,
                                                    double r_max, double cap, GridOptions grid) {
  if (!(r_min > 0.0) || !(r_max > r_min) || !(r_max < space_diameter))
    throw DomainError("walk-dimension window must lie inside (0, diam)");
  const auto g = log_grid(r_min, r_max, grid.points_per_decade);
  std::vector<double> logf(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) logf[i] = std::log(psi(g[i]));
  WalkDimensionCertificate c;
  c.cap = cap;
  double worst = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    bool decade_seen = false;
    for (std::size_t j = i; j < g.size(); ++j) {
      const double lq = std::log(g[j] / g[i]);
      const double lr = logf[j] - logf[i];
      worst = std::max(worst, 2.0 * lq - lr);
      if (!decade_seen && g[j] >= 10.0 * g[i] * (1 - 1e-9)) {
        decade_seen = true;
        c.min_decade_exponent = std::min(c.min_decade_exponent, lr / lq);
      }
    }
  }
  c.best_constant = std::exp(worst);
  c.ok = c.best_constant <= cap && !(c.min_decade_exponent < 2.0 - 1e-9);
  return c;
}

}  // namespace chainkit
