#pragma once

#include <cmath>
#include <functional>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "motionopt/uncertainty.hpp"

namespace motionopt {

// Shannon entropy in nats, with 0*log(0) = 0. Input must be a valid
// distribution (non-negative, summing to 1 within 1e-12).
inline double discrete_entropy(std::span<const double> p) {
  double total = 0.0;
  for (double x : p) {
    if (x < 0.0 || !std::isfinite(x))
      throw std::domain_error("entropy: probabilities must be non-negative, got " +
                              std::to_string(x));
    total += x;
  }
  if (std::abs(total - 1.0) > 1e-12)
    throw std::domain_error("entropy: probabilities sum to " + std::to_string(total) +
                            ", expected 1");
  double h = 0.0;
  for (double x : p)
    if (x > 0.0) h -= x * std::log(x);
  return h;
}

// Joint distribution over (x, f) cells, row-major with x as the slow index.
struct DiscreteJoint {
  int n_x = 0, n_f = 0;
  std::vector<double> p;

  DiscreteJoint() = default;
  DiscreteJoint(int nx, int nf, std::vector<double> probs)
      : n_x(nx), n_f(nf), p(std::move(probs)) {
    validate();
  }

  void validate() const {
    if (n_x < 1 || n_f < 1) throw std::domain_error("joint: dimensions must be >= 1");
    if (p.size() != std::size_t(n_x) * n_f)
      throw std::domain_error("joint: cell count does not match dimensions");
    double total = 0.0;
    for (double x : p) {
      if (x < 0.0 || !std::isfinite(x))
        throw std::domain_error("joint: entries must be non-negative");
      total += x;
    }
    if (std::abs(total - 1.0) > 1e-12)
      throw std::domain_error("joint: entries sum to " + std::to_string(total) +
                              ", expected 1");
  }

  std::vector<double> marginal_x() const {
    std::vector<double> m(n_x, 0.0);
    for (int i = 0; i < n_x; ++i)
      for (int j = 0; j < n_f; ++j) m[i] += p[std::size_t(i) * n_f + j];
    return m;
  }
  std::vector<double> marginal_f() const {
    std::vector<double> m(n_f, 0.0);
    for (int i = 0; i < n_x; ++i)
      for (int j = 0; j < n_f; ++j) m[j] += p[std::size_t(i) * n_f + j];
    return m;
  }
};

struct IndependenceBound {
  double h_joint;
  double h_x;
  double h_f;
  double slack;  // h_x + h_f - h_joint, non-negative up to FP noise
  bool independent;
};

// H(X,F) <= H(X) + H(F); equality holds exactly for product joints. The
// independent flag is set when the joint matches the outer product of its
// marginals within 1e-10 element-wise.
inline IndependenceBound independence_bound(const DiscreteJoint& joint) {
  joint.validate();
  const auto mx = joint.marginal_x();
  const auto mf = joint.marginal_f();
  const double hj = discrete_entropy(joint.p);
  const double hx = discrete_entropy(mx);
  const double hf = discrete_entropy(mf);
  bool independent = true;
  for (int i = 0; i < joint.n_x && independent; ++i)
    for (int j = 0; j < joint.n_f; ++j)
      if (std::abs(joint.p[std::size_t(i) * joint.n_f + j] - mx[i] * mf[j]) > 1e-10) {
        independent = false;
        break;
      }
  return {hj, hx, hf, hx + hf - hj, independent};
}

// Worst-case measurement uncertainty of the max-entropy argument: the sum
// of the two marginal variances. This is the quantity the minimax step
// minimizes over sensor scale.
inline double worst_case_uncertainty(double sigma_x, double sigma_f) {
  if (sigma_x < 0.0 || sigma_f < 0.0 || !std::isfinite(sigma_x) || !std::isfinite(sigma_f))
    throw std::domain_error("worst_case_uncertainty: sigmas must be non-negative");
  return sigma_x * sigma_x + sigma_f * sigma_f;
}

namespace detail {
// Differential entropy -int p ln p by midpoint rule on [lo, hi]. Midpoint
// nodes never land on a support edge, so densities with jumps (uniform)
// integrate exactly.
template <typename Density>
inline double entropy_quadrature(Density&& pdf, double lo, double hi, int n = 200000) {
  const double h = (hi - lo) / n;
  double acc = 0.0;
  for (int k = 0; k < n; ++k) {
    const double x = lo + (k + 0.5) * h;
    const double p = pdf(x);
    acc += p > 0.0 ? -p * std::log(p) : 0.0;
  }
  return acc * h;
}
}  // namespace detail

struct MaxEntropyReport {
  double sigma;
  // Closed-form differential entropies of the three variance-matched densities.
  double gaussian;  // 0.5*ln(2*pi*e*sigma^2)
  double uniform;   // 0.5*ln(12*sigma^2)
  double laplace;   // 1 + 0.5*ln(2*sigma^2)
  // Same three by high-resolution quadrature, for cross-checking.
  double gaussian_quadrature;
  double uniform_quadrature;
  double laplace_quadrature;
  bool gaussian_strictly_largest;
};

// Boltzmann max-entropy check: among densities with variance sigma^2 the
// Gaussian has the strictly largest differential entropy. Closed forms:
// uniform on width w = sigma*sqrt(12) has entropy ln w; Laplace with scale
// b = sigma/sqrt(2) has entropy 1 + ln(2b).
inline MaxEntropyReport max_entropy_check(double sigma) {
  detail::require_positive(sigma, "sigma");
  const double pi = std::numbers::pi;
  MaxEntropyReport r;
  r.sigma = sigma;
  r.gaussian = 0.5 * std::log(2.0 * pi * std::numbers::e * sigma * sigma);
  r.uniform = 0.5 * std::log(12.0 * sigma * sigma);
  r.laplace = 1.0 + 0.5 * std::log(2.0 * sigma * sigma);

  const double gauss_norm = 1.0 / (sigma * std::sqrt(2.0 * pi));
  r.gaussian_quadrature = detail::entropy_quadrature(
      [&](double x) { return gauss_norm * std::exp(-x * x / (2.0 * sigma * sigma)); },
      -12.0 * sigma, 12.0 * sigma);
  const double half_width = sigma * std::sqrt(3.0);
  r.uniform_quadrature = detail::entropy_quadrature(
      [&](double x) { return std::abs(x) <= half_width ? 1.0 / (2.0 * half_width) : 0.0; },
      -half_width, half_width);
  const double b = sigma / std::sqrt(2.0);
  r.laplace_quadrature = detail::entropy_quadrature(
      [&](double x) { return std::exp(-std::abs(x) / b) / (2.0 * b); }, -40.0 * b,
      40.0 * b);

  r.gaussian_strictly_largest = r.gaussian > r.uniform && r.gaussian > r.laplace;
  return r;
}

class SpectrumHoleError : public std::domain_error {
 public:
  SpectrumHoleError(double omega, double magnitude_sq)
      : std::domain_error("kernel spectrum hole at omega=" + std::to_string(omega) +
                          " (|psi_hat|^2=" + std::to_string(magnitude_sq) +
                          " < 1e-12)"),
        omega(omega) {}
  double omega;
};

// Sampling function psi(s): an unnormalized Gaussian exp(-s^2/(2*sigma^2))
// or a user tabulation on a uniform grid (linearly interpolated, zero
// outside). Its Fourier transform must stay away from zero wherever it is
// queried (the no-holes condition of the replica expansion).
struct SamplerKernel {
  enum class Kind { gaussian, tabulated };
  Kind kind = Kind::gaussian;
  double sigma = 1.0;            // gaussian width
  std::vector<double> samples;   // tabulated values
  double x0 = 0.0, dx = 0.0;     // tabulation grid: x0 + k*dx

  static SamplerKernel gaussian(double sigma) {
    detail::require_positive(sigma, "kernel sigma");
    SamplerKernel k;
    k.kind = Kind::gaussian;
    k.sigma = sigma;
    return k;
  }

  static SamplerKernel tabulated(std::vector<double> samples, double x0, double dx) {
    if (samples.size() < 2) throw std::domain_error("tabulated kernel needs >= 2 samples");
    detail::require_positive(dx, "kernel dx");
    SamplerKernel k;
    k.kind = Kind::tabulated;
    k.samples = std::move(samples);
    k.x0 = x0;
    k.dx = dx;
    return k;
  }

  double operator()(double s) const {
    if (kind == Kind::gaussian) return std::exp(-s * s / (2.0 * sigma * sigma));
    const double u = (s - x0) / dx;
    if (u < 0.0 || u > double(samples.size() - 1)) return 0.0;
    const std::size_t k = std::min(samples.size() - 2, std::size_t(u));
    const double frac = u - double(k);
    return samples[k] + frac * (samples[k + 1] - samples[k]);
  }

  bool operator==(const SamplerKernel&) const = default;
};

struct Spectrum {
  double a;  // Re psi_hat(omega)
  double b;  // Im psi_hat(omega)
};

// psi_hat(omega) = int psi(s) e^{-i omega s} ds by midpoint rule on a
// window wide enough for the kernel's tails (gaussian) or its tabulation
// support. Nodes are evaluated in mirrored pairs about the window center
// with shared trig factors, so a kernel even about 0 gets an exactly zero
// imaginary part. Throws SpectrumHoleError when |psi_hat|^2 < 1e-12.
inline Spectrum kernel_spectrum(const SamplerKernel& kernel, double omega) {
  double lo, hi;
  int half;
  if (kernel.kind == SamplerKernel::Kind::gaussian) {
    lo = -12.0 * kernel.sigma;
    hi = 12.0 * kernel.sigma;
    half = 2048;
  } else {
    lo = kernel.x0;
    hi = kernel.x0 + kernel.dx * double(kernel.samples.size() - 1);
    half = std::max<int>(2048, int(kernel.samples.size()) * 2);
  }
  const double center = 0.5 * (lo + hi);
  const double h = (hi - lo) / (2.0 * half);
  const double cc = std::cos(omega * center);
  const double sc = std::sin(omega * center);
  double re = 0.0, im = 0.0;
  for (int k = 0; k < half; ++k) {
    const double x = (k + 0.5) * h;
    const double cx = std::cos(omega * x);
    const double sx = std::sin(omega * x);
    const double sum = kernel(center + x) + kernel(center - x);
    const double diff = kernel(center + x) - kernel(center - x);
    re += cc * cx * sum - sc * sx * diff;
    im += -(sc * cx * sum) - cc * sx * diff;
  }
  re *= h;
  im *= h;
  const double mag_sq = re * re + im * im;
  if (mag_sq < 1e-12) throw SpectrumHoleError(omega, mag_sq);
  return {re, im};
}

// Weighted shifted replicas of a base kernel: reconstruction(u) =
// sum_j c_j * psi(u + d_j).
struct Expansion {
  std::vector<double> coefficients;
  std::vector<double> shifts;
  SamplerKernel base;
  std::string target;       // descriptor of what is being reconstructed
  double omega0 = 0.0;      // cosine target frequency, 0 for composites
  double achieved_residual = 0.0;  // sup |reconstruction - target| on the report window

  double reconstruct(double upsilon) const {
    double acc = 0.0;
    for (std::size_t k = 0; k < coefficients.size(); ++k)
      acc += coefficients[k] * base(upsilon + shifts[k]);
    return acc;
  }
};

namespace detail {
// Midpoint nodes x_k over [-half_range_x, half_range_x] with the replica
// coefficient pattern; taking omega = omega0 makes the shifts x_k/omega0.
inline void append_harmonic_terms(Expansion& e, double amplitude, double omega0,
                                  double extra_shift, int n_points, double half_range_x) {
  const Spectrum spec = kernel_spectrum(e.base, omega0);
  const double denom = spec.a * spec.a + spec.b * spec.b;
  const double step = 2.0 * half_range_x / n_points;
  for (int k = 0; k < n_points; ++k) {
    const double x = -half_range_x + (k + 0.5) * step;
    const double c =
        amplitude * (step / omega0) * (spec.a * std::cos(x) - spec.b * std::sin(x)) / denom;
    e.coefficients.push_back(c);
    e.shifts.push_back(x / omega0 + extra_shift);
  }
}

inline double sup_residual(const Expansion& e, const std::function<double(double)>& target,
                           double window, int n_eval) {
  double worst = 0.0;
  for (int k = 0; k < n_eval; ++k) {
    const double u = -window + 2.0 * window * double(k) / double(n_eval - 1);
    worst = std::max(worst, std::abs(e.reconstruct(u) - target(u)));
  }
  return worst;
}
}  // namespace detail

// Expands cos(omega0 * u) into shifted replicas of the kernel: midpoint
// discretization of the inverse-transform identity, nodes over
// [-half_range, half_range], shifts x_k/omega0, coefficients
// (step/omega0) * (a cos x_k - b sin x_k) / (a^2 + b^2). The achieved
// residual is measured on [-3, 3]. Requires a non-vanishing spectrum at
// omega0.
inline Expansion cosine_expansion(double omega0, const SamplerKernel& kernel, int n_points,
                                  double half_range) {
  detail::require_positive(omega0, "omega0");
  detail::require_positive(half_range, "half_range");
  if (n_points < 2) throw std::domain_error("n_points must be >= 2");
  Expansion e;
  e.base = kernel;
  e.target = "cos";
  e.omega0 = omega0;
  detail::append_harmonic_terms(e, 1.0, omega0, 0.0, n_points, half_range);
  e.achieved_residual = detail::sup_residual(
      e, [omega0](double u) { return std::cos(omega0 * u); }, 3.0, 1201);
  return e;
}

struct EmulationResult {
  Expansion expansion;
  double sup_error;  // on the evaluation window [-half_range/4, half_range/4]
};

// Emulates one sampling function with replicas of another: the target is
// approximated by a truncated cosine (+ sine, for asymmetric tabulations)
// series with half-period half_range/2, each harmonic is expanded against
// the base via the replica identity, and the coefficient lists are summed.
// The sine branch reuses the cosine expansion through the quarter-period
// phase shift sin(w u) = cos(w (u - pi/(2w))). A spectrum hole at any used
// harmonic raises SpectrumHoleError naming the frequency. When target and
// base coincide the expansion degenerates to the single replica c=1, d=0.
inline EmulationResult emulate_sampler(const SamplerKernel& target,
                                       const SamplerKernel& base, int n_harmonics,
                                       int n_points, double half_range) {
  detail::require_positive(half_range, "half_range");
  if (n_harmonics < 0) throw std::domain_error("n_harmonics must be >= 0");
  if (n_points < 2) throw std::domain_error("n_points must be >= 2");
  const double window = half_range / 4.0;

  if (target == base) {
    Expansion e;
    e.base = base;
    e.target = "identity";
    e.coefficients = {1.0};
    e.shifts = {0.0};
    e.achieved_residual =
        detail::sup_residual(e, [&](double u) { return target(u); }, window, 801);
    return {e, e.achieved_residual};
  }

  const double half_period = half_range / 2.0;
  const int n_quad = 8192;
  const double hq = 2.0 * half_period / n_quad;
  auto series_coef = [&](double omega, bool sine) {
    double acc = 0.0;
    for (int k = 0; k < n_quad; ++k) {
      const double u = -half_period + (k + 0.5) * hq;
      acc += target(u) * (sine ? std::sin(omega * u) : std::cos(omega * u));
    }
    return acc * hq / half_period;
  };

  Expansion e;
  e.base = base;
  e.target = "composite";

  // DC term: int psi(u + t) dt = psi_hat(0), so constant K expands with
  // coefficients K * step / a(0) at midpoint shifts over the node window.
  const double dc = 0.5 * series_coef(0.0, false);
  const Spectrum s0 = kernel_spectrum(base, 0.0);
  const double step = 2.0 * half_range / n_points;
  for (int k = 0; k < n_points; ++k) {
    const double t = -half_range + (k + 0.5) * step;
    e.coefficients.push_back(dc * step / s0.a);
    e.shifts.push_back(t);
  }

  for (int m = 1; m <= n_harmonics; ++m) {
    const double omega_m = double(m) * std::numbers::pi / half_period;
    const double am = series_coef(omega_m, false);
    const double bm = series_coef(omega_m, true);
    // Node window in x units scales with the harmonic so replica shifts
    // always span [-half_range, half_range].
    detail::append_harmonic_terms(e, am, omega_m, 0.0, n_points, omega_m * half_range);
    if (std::abs(bm) > 1e-14)
      detail::append_harmonic_terms(e, bm, omega_m,
                                    -std::numbers::pi / (2.0 * omega_m), n_points,
                                    omega_m * half_range);
  }

  const double sup =
      detail::sup_residual(e, [&](double u) { return target(u); }, window, 801);
  e.achieved_residual = sup;
  return {e, sup};
}

}  // namespace motionopt
