#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "mshare/engine.hpp"
#include "mshare/error.hpp"
#include "mshare/parameters.hpp"
#include "mshare/policy.hpp"

namespace mshare::oracle {

/// Default bound on the number of entries any exact enumeration may touch.
inline constexpr std::uint64_t kDefaultCap = 100'000;

/// A single market over a finite type space, small enough to enumerate.
///
/// States are words x in atoms^n, encoded as base-A integers with coordinate 0
/// as the least significant digit.
struct FiniteInstance {
  std::vector<double> atoms;
  std::vector<double> weights;
  double theta = 1.0;
  std::size_t n = 2;
  std::vector<double> beta;  ///< per-atom selection weight; empty means beta == 1

  std::size_t atom_count() const noexcept { return atoms.size(); }
  double beta_of(std::size_t a) const { return beta.empty() ? 1.0 : beta[a]; }
  bool unit_beta() const {
    return std::all_of(beta.begin(), beta.end(), [](double b) { return b == 1.0; });
  }

  /// Uniform base weights over `atom_count` evenly spread atoms.
  static FiniteInstance uniform(std::size_t atom_count, std::size_t n, double theta) {
    FiniteInstance inst;
    for (std::size_t a = 0; a < atom_count; ++a) {
      inst.atoms.push_back((static_cast<double>(a) + 0.5) / static_cast<double>(atom_count));
      inst.weights.push_back(1.0 / static_cast<double>(atom_count));
    }
    inst.n = n;
    inst.theta = theta;
    return inst;
  }

  void validate() const {
    if (atoms.empty() || atoms.size() != weights.size()) throw ValidationError("instance needs matching atoms and weights");
    if (n == 0) throw ValidationError("instance needs n >= 1");
    if (!(theta >= 0.0) || !std::isfinite(theta)) throw ValidationError("instance theta must be finite and >= 0");
    if (!beta.empty() && beta.size() != atoms.size()) throw ValidationError("beta table must cover every atom");
    for (double b : beta) {
      if (!(b > 0.0) || !std::isfinite(b)) throw ValidationError("beta table entries must be positive");
    }
    mshare::validate(BaseMeasure(DiscreteBase{atoms, weights}));
  }

  BaseMeasure base() const { return DiscreteBase{atoms, weights}; }
};

/// a^k, or a value above `cap` if that would overflow.
inline std::uint64_t capped_power(std::uint64_t a, std::size_t k, std::uint64_t cap) {
  std::uint64_t out = 1;
  for (std::size_t i = 0; i < k; ++i) {
    if (out > cap / std::max<std::uint64_t>(a, 1)) return cap + 1;
    out *= a;
  }
  return out;
}

inline std::size_t state_count(const FiniteInstance& inst, std::uint64_t cap = kDefaultCap) {
  const std::uint64_t s = capped_power(inst.atom_count(), inst.n, cap);
  if (s > cap) throw CapacityError("state space of " + std::to_string(inst.atom_count()) + "^" + std::to_string(inst.n) + " exceeds cap " + std::to_string(cap));
  return static_cast<std::size_t>(s);
}

/// Atom indices of state `index`.
inline std::vector<std::size_t> decode(const FiniteInstance& inst, std::size_t index) {
  std::vector<std::size_t> x(inst.n);
  for (std::size_t i = 0; i < inst.n; ++i) {
    x[i] = index % inst.atom_count();
    index /= inst.atom_count();
  }
  return x;
}

inline std::size_t encode(const FiniteInstance& inst, const std::vector<std::size_t>& x) {
  std::size_t index = 0;
  for (std::size_t i = inst.n; i-- > 0;) index = index * inst.atom_count() + x[i];
  return index;
}

/// Probability of the word `x` under the sequential Polya urn with atom masses
/// `masses`. When the total mass is 0 the first draw follows `fallback`.
inline double polya_word(const std::vector<double>& masses, const std::vector<double>& fallback,
                         const std::vector<std::size_t>& x) {
  double total = 0.0;
  for (double m : masses) total += m;
  std::vector<double> seen(masses.size(), 0.0);
  double p = 1.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double denom = total + static_cast<double>(i);
    p *= denom == 0.0 ? fallback[x[i]] : (masses[x[i]] + seen[x[i]]) / denom;
    seen[x[i]] += 1.0;
  }
  return p;
}

/// Joint law of (X_1..X_n) under the (optionally beta-tilted) Polya urn.
///
/// With beta == 1 this is the product of sequential predictives. Otherwise it
/// is that product times prod_k beta(x_k), renormalized.
inline std::vector<double> exact_joint(const FiniteInstance& inst, std::uint64_t cap = kDefaultCap) {
  inst.validate();
  const std::size_t states = state_count(inst, cap);
  std::vector<double> masses(inst.atom_count());
  for (std::size_t a = 0; a < masses.size(); ++a) masses[a] = inst.theta * inst.weights[a];
  std::vector<double> p(states);
  double total = 0.0;
  for (std::size_t s = 0; s < states; ++s) {
    const auto x = decode(inst, s);
    double v = polya_word(masses, inst.weights, x);
    for (std::size_t a : x) v *= inst.beta_of(a);
    p[s] = v;
    total += v;
  }
  for (double& v : p) v /= total;
  return p;
}

/// Largest |sum_x M^{alpha_x}(y) M^alpha(x) - M^alpha(y)| over all words y,
/// where alpha_x = alpha + sum_k delta_{x_k}.
inline double check_lemma1(const FiniteInstance& inst, std::uint64_t cap = kDefaultCap) {
  inst.validate();
  if (capped_power(inst.atom_count(), 2 * inst.n, cap) > cap) {
    throw CapacityError("marginal invariance check needs " + std::to_string(inst.atom_count()) + "^" +
                        std::to_string(2 * inst.n) + " terms, above cap " + std::to_string(cap));
  }
  FiniteInstance plain = inst;
  plain.beta.clear();
  const auto prior = exact_joint(plain, cap);
  const std::size_t states = prior.size();
  std::vector<double> mixed(states, 0.0);
  std::vector<double> masses(inst.atom_count());
  for (std::size_t xs = 0; xs < states; ++xs) {
    const auto x = decode(inst, xs);
    for (std::size_t a = 0; a < masses.size(); ++a) masses[a] = inst.theta * inst.weights[a];
    for (std::size_t a : x) masses[a] += 1.0;
    for (std::size_t ys = 0; ys < states; ++ys) mixed[ys] += polya_word(masses, inst.weights, decode(inst, ys)) * prior[xs];
  }
  double worst = 0.0;
  for (std::size_t ys = 0; ys < states; ++ys) worst = std::max(worst, std::abs(mixed[ys] - prior[ys]));
  return worst;
}

/// Row-major square matrix.
struct DenseMatrix {
  std::size_t dim = 0;
  std::vector<double> data;

  explicit DenseMatrix(std::size_t d = 0) : dim(d), data(d * d, 0.0) {}
  double& operator()(std::size_t i, std::size_t j) { return data[i * dim + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data[i * dim + j]; }
};

/// Probability that the removal policy vacates coordinate i of word x: the
/// firm-level weight split evenly over the firm's units.
inline std::vector<double> unit_removal_probabilities(const FiniteInstance& inst, const std::vector<std::size_t>& x,
                                                      const RemovalPolicy& policy) {
  std::vector<double> gamma(inst.n, 1.0 / static_cast<double>(inst.n));
  if (policy.kind == RemovalPolicy::Kind::uniform_unit) return gamma;
  std::vector<std::size_t> count(inst.atom_count(), 0);
  for (std::size_t a : x) ++count[a];
  std::vector<std::size_t> present, counts;
  for (std::size_t a = 0; a < count.size(); ++a) {
    if (count[a] > 0) {
      present.push_back(a);
      counts.push_back(count[a]);
    }
  }
  const auto firm_w = removal_weights(policy, counts, inst.n);
  for (std::size_t i = 0; i < inst.n; ++i) {
    const auto j = static_cast<std::size_t>(std::find(present.begin(), present.end(), x[i]) - present.begin());
    gamma[i] = firm_w[j] / static_cast<double>(counts[j]);
  }
  return gamma;
}

/// One-step kernel of the random-scan Gibbs sampler:
/// T = sum_i gamma_i * (resample coordinate i from its full conditional).
inline DenseMatrix transition_matrix(const FiniteInstance& inst, const RemovalPolicy& policy = {},
                                     std::uint64_t cap = kDefaultCap) {
  inst.validate();
  const std::size_t states = state_count(inst, cap);
  if (capped_power(states, 2, cap) > cap) {
    throw CapacityError("transition matrix with " + std::to_string(states) + " states exceeds cap " +
                        std::to_string(cap));
  }
  const std::size_t atoms = inst.atom_count();
  double base_mass = 0.0;
  for (std::size_t a = 0; a < atoms; ++a) base_mass += inst.theta * inst.weights[a] * inst.beta_of(a);

  DenseMatrix t(states);
  std::vector<std::size_t> y;
  for (std::size_t s = 0; s < states; ++s) {
    const auto x = decode(inst, s);
    const auto gamma = unit_removal_probabilities(inst, x, policy);
    for (std::size_t i = 0; i < inst.n; ++i) {
      if (gamma[i] == 0.0) continue;
      std::vector<double> others(atoms, 0.0);
      for (std::size_t k = 0; k < inst.n; ++k) {
        if (k != i) others[x[k]] += 1.0;
      }
      double denom = base_mass;
      for (std::size_t a = 0; a < atoms; ++a) denom += inst.beta_of(a) * others[a];
      if (!(denom > 0.0)) throw DegenerateConditionalError("full conditional has no mass");
      y = x;
      for (std::size_t a = 0; a < atoms; ++a) {
        const double num = inst.beta_of(a) * (inst.theta * inst.weights[a] + others[a]);
        if (num == 0.0) continue;
        y[i] = a;
        t(s, encode(inst, y)) += gamma[i] * num / denom;
      }
    }
  }
  return t;
}

/// max_y |(pi T)(y) - pi(y)|
inline double stationarity_error(const std::vector<double>& pi, const DenseMatrix& t) {
  double worst = 0.0;
  for (std::size_t y = 0; y < t.dim; ++y) {
    double acc = 0.0;
    for (std::size_t x = 0; x < t.dim; ++x) acc += pi[x] * t(x, y);
    worst = std::max(worst, std::abs(acc - pi[y]));
  }
  return worst;
}

/// max_{x,y} |pi(x) T(x,y) - pi(y) T(y,x)|
inline double detailed_balance_error(const std::vector<double>& pi, const DenseMatrix& t) {
  double worst = 0.0;
  for (std::size_t x = 0; x < t.dim; ++x) {
    for (std::size_t y = x + 1; y < t.dim; ++y) {
      worst = std::max(worst, std::abs(pi[x] * t(x, y) - pi[y] * t(y, x)));
    }
  }
  return worst;
}

/// max_x |sum_y T(x,y) - 1|
inline double row_sum_error(const DenseMatrix& t) {
  double worst = 0.0;
  for (std::size_t x = 0; x < t.dim; ++x) {
    double acc = 0.0;
    for (std::size_t y = 0; y < t.dim; ++y) acc += t(x, y);
    worst = std::max(worst, std::abs(acc - 1.0));
  }
  return worst;
}

struct DriftReport {
  double max_discrepancy = 0.0;  ///< between the two routes, on the generator scale
  double rate = 0.0;             ///< lambda_n = n^2
  bool sign_consistent = true;   ///< drift > 0 wherever n_B / n < nu_0(B) (theta > 0)
  std::vector<double> drift;     ///< per state, matrix route
};

/// Generator of f(x) = #{k : x_k in B} for the single-market chain with
/// beta == 1 and uniform unit removal, computed from the transition matrix
/// and from the closed form
///   (1/n) sum_i [(theta nu_0(B) + n_B - 1{x_i in B}) / (theta + n - 1) - 1{x_i in B}].
inline DriftReport one_step_drift_check(const FiniteInstance& inst, const std::vector<bool>& in_b,
                                        std::uint64_t cap = kDefaultCap) {
  if (!inst.unit_beta()) throw ValidationError("drift check is defined for beta == 1 only");
  if (in_b.size() != inst.atom_count()) throw ValidationError("set B must flag every atom");
  const auto t = transition_matrix(inst, RemovalPolicy{}, cap);
  const double n = static_cast<double>(inst.n);
  double p = 0.0;
  for (std::size_t a = 0; a < in_b.size(); ++a) p += in_b[a] ? inst.weights[a] : 0.0;

  DriftReport rep;
  rep.rate = n * n;
  rep.drift.resize(t.dim);
  std::vector<double> f(t.dim);
  for (std::size_t s = 0; s < t.dim; ++s) {
    double c = 0.0;
    for (std::size_t a : decode(inst, s)) c += in_b[a] ? 1.0 : 0.0;
    f[s] = c;
  }
  for (std::size_t s = 0; s < t.dim; ++s) {
    double matrix_route = 0.0;
    for (std::size_t y = 0; y < t.dim; ++y) matrix_route += t(s, y) * (f[y] - f[s]);
    double closed = 0.0;
    for (std::size_t a : decode(inst, s)) {
      const double removed = in_b[a] ? 1.0 : 0.0;
      closed += (inst.theta * p + f[s] - removed) / (inst.theta + n - 1.0) - removed;
    }
    closed /= n;
    rep.drift[s] = rep.rate * matrix_route;
    rep.max_discrepancy = std::max(rep.max_discrepancy, std::abs(rep.rate * (matrix_route - closed)));
    if (inst.theta > 0.0 && f[s] / n < p && !(matrix_route > 0.0)) rep.sign_consistent = false;
  }
  return rep;
}

struct MomentCheckConfig {
  std::size_t n = 50;
  double theta = 2.0;
  double p = 0.3;  ///< nu_0(B) with B = [0, p) under a Beta(1,1) base
  std::uint64_t steps = 2'000'000;
  std::uint64_t burn_in = 100'000;
  std::uint64_t seed = 1;
  InitSpec init = InitSpec::competitive(50);
};

struct MomentReport {
  double mean = 0.0;
  double variance = 0.0;
  double target_mean = 0.0;
  double target_variance = 0.0;
  double mean_error = 0.0;
  double variance_error = 0.0;
  double relative_variance_error = 0.0;
  double relaxation_steps = 0.0;     ///< n (theta + n - 1) / theta
  double predicted_mean_se = 0.0;    ///< sqrt(var * 2 relaxation / steps)
  std::string warning;
};

/// Runs the single-market chain and compares the time-averaged mean and
/// variance of n_B / n with the beta-binomial stationary moments
/// p and p (1 - p) (theta + n) / (n (theta + 1)).
inline MomentReport stationary_moment_check(const MomentCheckConfig& cfg, double mean_tolerance = 0.01) {
  EngineConfig ec;
  ec.name = "stationary-moments";
  ec.n = cfg.n;
  ec.markets = {{"m", cfg.init}};
  ec.params = ParameterSet::homogeneous(1, cfg.theta, 1.0, BetaBase{1.0, 1.0});
  ec.params.removal = RemovalPolicy{};
  ec.iterations = cfg.burn_in + cfg.steps;
  ec.retention.points = {ec.iterations};
  ec.seed = cfg.seed;
  Engine engine(ec);

  auto in_b = [&](FirmLabel x) { return x.value() < cfg.p; };
  double count = 0.0;
  for (FirmLabel x : engine.state().markets[0].units()) count += in_b(x) ? 1.0 : 0.0;
  for (std::uint64_t t = 0; t < cfg.burn_in; ++t) {
    const auto rec = engine.step();
    count += (in_b(rec.outcome.label) ? 1.0 : 0.0) - (in_b(rec.removed) ? 1.0 : 0.0);
  }
  const double n = static_cast<double>(cfg.n);
  double sum = 0.0, sum_sq = 0.0;
  for (std::uint64_t t = 0; t < cfg.steps; ++t) {
    const auto rec = engine.step();
    count += (in_b(rec.outcome.label) ? 1.0 : 0.0) - (in_b(rec.removed) ? 1.0 : 0.0);
    const double f = count / n;
    sum += f;
    sum_sq += f * f;
  }
  MomentReport rep;
  const double steps = static_cast<double>(cfg.steps);
  rep.mean = sum / steps;
  rep.variance = std::max(0.0, sum_sq / steps - rep.mean * rep.mean);
  rep.target_mean = cfg.p;
  rep.target_variance = cfg.p * (1.0 - cfg.p) * (cfg.theta + n) / (n * (cfg.theta + 1.0));
  rep.mean_error = std::abs(rep.mean - rep.target_mean);
  rep.variance_error = std::abs(rep.variance - rep.target_variance);
  rep.relative_variance_error = rep.target_variance > 0.0 ? rep.variance_error / rep.target_variance : 0.0;
  if (cfg.theta > 0.0) {
    rep.relaxation_steps = n * (cfg.theta + n - 1.0) / cfg.theta;
    rep.predicted_mean_se = std::sqrt(rep.target_variance * 2.0 * rep.relaxation_steps / steps);
    if (rep.predicted_mean_se > mean_tolerance / 2.0) {
      rep.warning = "predicted standard error " + std::to_string(rep.predicted_mean_se) +
                    " exceeds half the mean tolerance; increase steps";
    }
    if (static_cast<double>(cfg.burn_in) < 10.0 * rep.relaxation_steps) {
      rep.warning += (rep.warning.empty() ? "" : "; ") + std::string("burn-in shorter than 10 relaxation times");
    }
  } else {
    rep.relaxation_steps = std::numeric_limits<double>::infinity();
    rep.predicted_mean_se = std::numeric_limits<double>::infinity();
    rep.warning = "theta = 0: the chain does not mix; moments describe a single absorbed path";
  }
  return rep;
}

}  // namespace mshare::oracle
