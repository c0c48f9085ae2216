// src/verify.cc

// Copyright 2026  The ldmi Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#include "ldmi/verify.h"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <numeric>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "ldmi/losses.h"

namespace ldmi {

namespace {

// Sparse-ish positive weights: squared exponentials spread the mass more
// than plain uniforms, so the random matrices are not all near rank one.
double weight(Rng &rng) {
  const double e = -std::log(1.0 - uniform01(rng));
  return e * e + 1e-3;
}

Matrix mix_identity(Matrix m, double w) {
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) m(i, j) = (1.0 - w) * m(i, j) + (i == j ? w : 0.0);
  return m;
}

std::size_t classes_for(std::size_t trial) { return 2 + trial % 9; }

double rel_err(double got, double want) {
  const double scale = std::max(std::abs(want), std::numeric_limits<double>::min());
  return std::abs(got - want) / scale;
}

void record(PropertyCheck &c, double err, const std::string &dump) {
  ++c.instances;
  if (std::isnan(err)) err = std::numeric_limits<double>::infinity();
  c.max_error = std::max(c.max_error, err);
  if (err > c.tolerance && c.passed) {
    c.passed = false;
    c.failing_instance = dump;
  }
}

std::string dump(std::initializer_list<std::pair<const char *, const Matrix *>> items) {
  std::ostringstream os;
  for (const auto &[name, m] : items) os << name << " =\n" << to_string(*m, 17) << '\n';
  return os.str();
}

Matrix permutation_matrix(std::vector<std::size_t> perm) {
  Matrix p(perm.size(), perm.size());
  for (std::size_t i = 0; i < perm.size(); ++i) p(i, perm[i]) = 1.0;
  return p;
}

std::vector<std::size_t> random_permutation(std::size_t n, Rng &rng) {
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  shuffle_in_place(perm, rng);
  return perm;
}

EmpiricalJoint as_empirical(const Matrix &m) { return EmpiricalJoint(m); }

PropertyCheck counterexample_values() {
  PropertyCheck c{"counterexample_values", true, 0, 0.0, 1e-4, {}};
  const CounterexampleReport r = counterexample();
  const double want[] = {2.4157e-2, 2.2367e-2, 3.2085e-3, 3.2268e-3};
  const double got[] = {r.mi_clean_h, r.mi_clean_h_prime, r.mi_noisy_h, r.mi_noisy_h_prime};
  const double dmi_want[] = {0.05, 0.04, 0.02, 0.016};
  const double dmi_got[] = {r.dmi_clean_h, r.dmi_clean_h_prime, r.dmi_noisy_h, r.dmi_noisy_h_prime};
  for (int k = 0; k < 4; ++k) {
    record(c, std::abs(got[k] - want[k]), "MI value " + std::to_string(k) + " = " + std::to_string(got[k]));
    record(c, std::abs(dmi_got[k] - dmi_want[k]), "DMI value " + std::to_string(k) + " = " + std::to_string(dmi_got[k]));
  }
  record(c, r.shannon_order_flips ? 0.0 : 1.0, "Shannon MI ordering did not flip");
  record(c, r.dmi_order_consistent ? 0.0 : 1.0, "DMI ordering changed");
  return c;
}

PropertyCheck nonnegative_symmetric(Rng &rng, std::size_t trials) {
  PropertyCheck c{"dmi_nonnegative_symmetric", true, 0, 0.0, 1e-12, {}};
  for (std::size_t i = 0; i < trials; ++i) {
    const auto q = random_joint(classes_for(i), rng, 0.5);
    const double d = dmi(q);
    const double err = d < 0.0 ? std::numeric_limits<double>::infinity() : rel_err(dmi(q.transposed()), d);
    record(c, err, dump({{"q", &q.matrix()}}));
  }
  return c;
}

PropertyCheck relative_invariance(Rng &rng, std::size_t trials) {
  PropertyCheck c{"relative_invariance", true, 0, 0.0, 1e-10, {}};
  for (std::size_t i = 0; i < trials; ++i) {
    const std::size_t k = classes_for(i);
    const auto q = random_joint(k, rng);
    const auto t = random_channel(k, rng);
    const double want = dmi(q) * std::abs(lu_det(t.matrix()));
    record(c, rel_err(dmi(push_through_channel(q, t)), want), dump({{"q", &q.matrix()}, {"t", &t.matrix()}}));
  }
  return c;
}

PropertyCheck information_monotone(Rng &rng, std::size_t trials) {
  PropertyCheck c{"information_monotone", true, 0, 0.0, 1e-12, {}};
  for (std::size_t i = 0; i < trials; ++i) {
    const std::size_t k = classes_for(i);
    const auto q = random_joint(k, rng, 0.5);
    const auto t = random_channel(k, rng);
    const double before = dmi(q);
    const double after = dmi(push_through_channel(q, t));
    // excess of after over before, relative to before
    record(c, std::max(0.0, after - before) / before, dump({{"q", &q.matrix()}, {"t", &t.matrix()}}));
  }
  return c;
}

PropertyCheck permutation_invariance(Rng &rng, std::size_t trials) {
  PropertyCheck c{"permutation_invariance", true, 0, 0.0, 1e-12, {}};
  for (std::size_t i = 0; i < trials; ++i) {
    const std::size_t k = classes_for(i);
    const auto q = random_joint(k, rng, 0.5);
    const Matrix p = permutation_matrix(random_permutation(k, rng));
    const JointDistribution qp(matmul(q.matrix(), p));
    record(c, rel_err(dmi(qp), dmi(q)), dump({{"q", &q.matrix()}, {"P", &p}}));
  }
  return c;
}

PropertyCheck ordering_consistency(Rng &rng, std::size_t trials) {
  PropertyCheck c{"ordering_consistency", true, 0, 0.0, 0.0, {}};
  for (std::size_t i = 0; i < trials; ++i) {
    const std::size_t k = classes_for(i);
    const auto q1 = random_joint(k, rng, 0.3);
    const auto q2 = random_joint(k, rng, 0.3);
    const auto t = random_channel(k, rng, 0.3);
    const double a = dmi(q1), b = dmi(q2);
    if (rel_err(a, b) < 1e-9) continue;  // a floating tie decides nothing
    const bool clean = a > b;
    const bool noisy = dmi(push_through_channel(q1, t)) > dmi(push_through_channel(q2, t));
    record(c, clean == noisy ? 0.0 : 1.0, dump({{"q1", &q1.matrix()}, {"q2", &q2.matrix()}, {"t", &t.matrix()}}));
  }
  return c;
}

// Joints whose determinants stay above the loss floor before and after the
// channel, so the -ln is taken of the true determinant.
bool above_floor(const Matrix &u) { return std::abs(lu_det(u)) > 10.0 * kDegenerateDet; }

PropertyCheck loss_shift(Rng &rng, std::size_t trials) {
  PropertyCheck c{"loss_shift", true, 0, 0.0, 1e-10, {}};
  for (std::size_t i = 0; i < trials; ++i) {
    const std::size_t k = classes_for(i);
    const auto t = random_channel(k, rng, 0.6);
    const double shift = -std::log(std::abs(lu_det(t.matrix())));
    if (shift < 0.0) record(c, -shift, dump({{"t", &t.matrix()}}));
    std::optional<double> first;
    for (int rep = 0; rep < 3; ++rep) {
      Matrix u = random_joint(k, rng, 0.7).matrix();
      const Matrix ut = matmul(u, t.matrix());
      if (!above_floor(u) || !above_floor(ut)) continue;
      const double delta = dmi_loss(as_empirical(ut)).value - dmi_loss(as_empirical(u)).value;
      record(c, std::abs(delta - shift), dump({{"u", &u}, {"t", &t.matrix()}}));
      if (first) record(c, std::abs(delta - *first), dump({{"u", &u}, {"t", &t.matrix()}}));
      else first = delta;
    }
  }
  return c;
}

PropertyCheck argmin_invariance(Rng &rng, std::size_t trials) {
  PropertyCheck c{"argmin_invariance", true, 0, 0.0, 0.0, {}};
  for (std::size_t i = 0; i < trials; ++i) {
    const std::size_t k = 2 + i % 4;
    const auto t = random_channel(k, rng, 0.5);
    std::vector<Matrix> us;
    for (int j = 0; j < 8; ++j) us.push_back(random_joint(k, rng, 0.4 * uniform01(rng)).matrix());
    auto argmin = [&](bool noisy) {
      std::size_t best = 0;
      double best_v = std::numeric_limits<double>::infinity();
      for (std::size_t j = 0; j < us.size(); ++j) {
        const double v = dmi_loss(as_empirical(noisy ? matmul(us[j], t.matrix()) : us[j])).value;
        if (v < best_v) best = j, best_v = v;
      }
      return best;
    };
    const std::size_t a = argmin(false), b = argmin(true);
    record(c, a == b ? 0.0 : 1.0, dump({{"argmin clean", &us[a]}, {"argmin noisy", &us[b]}, {"t", &t.matrix()}}));
  }
  return c;
}

// Finite domain X = {0, 1, 2, 3} with prior p, ground truth y = g(x) for
// g = (0, 0, 1, 1).  The joint of a deterministic classifier h with the
// label pushed through t.
Matrix finite_joint(const std::vector<Label> &h, const std::vector<Label> &g, const std::vector<double> &p,
                    const Matrix &t) {
  Matrix q(2, 2);
  for (std::size_t x = 0; x < h.size(); ++x) q(h[x], g[x]) += p[x];
  return matmul(q, t);
}

PropertyCheck legal_enumeration(Rng &rng, std::size_t trials) {
  PropertyCheck c{"legal_enumeration", true, 0, 0.0, 0.0, {}};
  const std::vector<Label> g = {0, 0, 1, 1};
  const std::vector<double> p = {0.1, 0.2, 0.3, 0.4};
  std::vector<Matrix> channels = {Matrix::identity(2)};
  for (std::size_t i = 0; i < std::min<std::size_t>(trials, 50); ++i) {
    auto t = random_channel(2, rng);
    if (is_informative(t)) channels.push_back(t.matrix());
  }
  for (const Matrix &t : channels) {
    double best = std::numeric_limits<double>::infinity();
    std::vector<unsigned> winners;
    for (unsigned code = 0; code < 16; ++code) {
      std::vector<Label> h(4);
      for (int x = 0; x < 4; ++x) h[x] = (code >> x) & 1u;
      const double v = dmi_loss(as_empirical(finite_joint(h, g, p, t))).value;
      if (v < best - 1e-12) {
        best = v;
        winners = {code};
      } else if (std::abs(v - best) <= 1e-12) {
        winners.push_back(code);
      }
    }
    // g encodes as 0b1100, its class swap as 0b0011
    std::sort(winners.begin(), winners.end());
    const bool ok = winners == std::vector<unsigned>{0b0011u, 0b1100u};
    std::ostringstream os;
    os << "minimizers:";
    for (unsigned w : winners) os << ' ' << w;
    os << '\n' << dump({{"t", &t}});
    record(c, ok ? 0.0 : 1.0, os.str());
  }
  return c;
}

PropertyCheck permutation_degeneracy(Rng &rng, std::size_t trials) {
  PropertyCheck c{"permutation_degeneracy", true, 0, 0.0, 1e-10, {}};
  for (std::size_t i = 0; i < trials; ++i) {
    const std::size_t k = 2 + i % 4, n = 64;
    Matrix o(k, n);
    std::vector<Label> labels(n);
    for (std::size_t col = 0; col < n; ++col) {
      labels[col] = static_cast<Label>(col % k);
      double s = 0.0;
      for (std::size_t r = 0; r < k; ++r) s += o(r, col) = weight(rng) + (r == col % k ? 2.0 : 0.0);
      for (std::size_t r = 0; r < k; ++r) o(r, col) /= s;
    }
    const Matrix po = matmul(permutation_matrix(random_permutation(k, rng)), o);
    const LabelMatrix l(labels, k);
    const double a = dmi_loss(empirical_joint(OutputBatch(o), l)).value;
    const double b = dmi_loss(empirical_joint(OutputBatch(po), l)).value;
    record(c, std::abs(a - b), dump({{"O", &o}}));
  }
  return c;
}

// The gradient of -ln(c |det U|) in U is -(U^-1)^T for every c > 0.
PropertyCheck scaling_invariance(Rng &rng, std::size_t trials) {
  PropertyCheck c{"scaling_invariance", true, 0, 0.0, 1e-6, {}};
  const double h = 1e-6;
  for (std::size_t i = 0; i < std::min<std::size_t>(trials, 100); ++i) {
    const std::size_t k = 2 + i % 4;
    const Matrix u = random_joint(k, rng, 0.5).matrix();
    const Matrix want = scale(transpose(inverse(u)), -1.0);
    for (double scale_c : {1e-3, 1.0, 1e3}) {
      auto f = [&](const Matrix &m) { return -std::log(scale_c * std::abs(lu_det(m))); };
      Matrix fd(k, k);
      for (std::size_t a = 0; a < k; ++a)
        for (std::size_t b = 0; b < k; ++b) {
          Matrix up = u, dn = u;
          up(a, b) += h;
          dn(a, b) -= h;
          fd(a, b) = (f(up) - f(dn)) / (2 * h);
        }
      record(c, max_abs_diff(fd, want) / std::max(1.0, max_abs(want)), dump({{"u", &u}}));
    }
  }
  return c;
}

// Soft classifier on the finite domain; U from N draws against the
// closed-form joint of (h(X), noisy label).
PropertyCheck monte_carlo_joint(Rng &rng) {
  PropertyCheck c{"monte_carlo_joint", true, 0, 0.0, 0.01, {}};
  const std::vector<double> p = {0.1, 0.2, 0.3, 0.4};
  const std::vector<Label> g = {0, 0, 1, 1};
  const Matrix soft{{0.9, 0.7, 0.2, 0.4}, {0.1, 0.3, 0.8, 0.6}};  // column x = h(x)
  const TransitionMatrix t(Matrix{{0.8, 0.2}, {0.4, 0.6}});
  Matrix closed(2, 2);
  for (std::size_t x = 0; x < 4; ++x)
    for (std::size_t a = 0; a < 2; ++a)
      for (std::size_t b = 0; b < 2; ++b) closed(a, b) += p[x] * soft(a, x) * t(g[x], b);

  const std::size_t n = 100000;
  for (int s = 0; s < 20; ++s) {
    Rng draw(derive_seed(rng(), {static_cast<std::uint64_t>(s)}));
    std::vector<std::size_t> xs(n);
    std::vector<Label> clean(n);
    for (std::size_t i = 0; i < n; ++i) {
      const double u = uniform01(draw);
      std::size_t x = 0;
      for (double acc = p[0]; x + 1 < p.size() && u >= acc; acc += p[++x]) {
      }
      xs[i] = x;
      clean[i] = g[x];
    }
    const auto noisy = corrupt_labels(clean, t, draw());
    Matrix o(2, n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t a = 0; a < 2; ++a) o(a, i) = soft(a, xs[i]);
    const Matrix u = empirical_joint(OutputBatch(o), LabelMatrix(noisy, 2)).matrix();
    record(c, max_abs_diff(u, closed), dump({{"U", &u}, {"closed form", &closed}}));
  }
  return c;
}

PropertyCheck corrupt_frequencies(Rng &rng) {
  PropertyCheck c{"corrupt_frequencies", true, 0, 0.0, 3.0, {}};
  const std::size_t k = 3, n = 100000;
  const auto t = random_channel(k, rng, 0.3);
  std::vector<Label> labels(n);
  for (std::size_t i = 0; i < n; ++i) labels[i] = static_cast<Label>(i % k);
  const auto noisy = corrupt_labels(labels, t, rng());
  Matrix counts(k, k);
  for (std::size_t i = 0; i < n; ++i) counts(labels[i], noisy[i]) += 1.0;
  for (std::size_t y = 0; y < k; ++y) {
    double row = 0.0;
    for (std::size_t j = 0; j < k; ++j) row += counts(y, j);
    for (std::size_t j = 0; j < k; ++j) {
      const double pr = t(y, j);
      const double sigma = std::sqrt(row * pr * (1.0 - pr));
      const double dev = std::abs(counts(y, j) - row * pr);
      // error in units of sigma; a zero-mass cell must stay empty
      record(c, sigma > 0 ? dev / sigma : (dev > 0 ? 1e300 : 0.0), dump({{"t", &t.matrix()}, {"counts", &counts}}));
    }
  }
  return c;
}

PropertyCheck det_multiplicative(Rng &rng, std::size_t trials) {
  PropertyCheck c{"det_multiplicative", true, 0, 0.0, 1e-10, {}};
  for (std::size_t i = 0; i < trials; ++i) {
    const std::size_t n = 1 + i % 8;
    Matrix a(n, n), b(n, n);
    for (std::size_t r = 0; r < n; ++r)
      for (std::size_t col = 0; col < n; ++col) {
        a(r, col) = 2 * uniform01(rng) - 1 + (r == col ? 1.0 : 0.0);
        b(r, col) = 2 * uniform01(rng) - 1 + (r == col ? 1.0 : 0.0);
      }
    record(c, rel_err(lu_det(matmul(a, b)), lu_det(a) * lu_det(b)), dump({{"A", &a}, {"B", &b}}));
  }
  return c;
}

}  // namespace

JointDistribution random_joint(std::size_t classes, Rng &rng, double diagonal_weight) {
  Matrix q(classes, classes);
  double s = 0.0;
  for (std::size_t i = 0; i < classes; ++i)
    for (std::size_t j = 0; j < classes; ++j) s += q(i, j) = weight(rng);
  q = scale(q, 1.0 / s);
  if (diagonal_weight > 0.0) {
    // identity part carries the row marginals of the random part
    Matrix d(classes, classes);
    for (std::size_t i = 0; i < classes; ++i)
      for (std::size_t j = 0; j < classes; ++j) d(i, i) += q(i, j);
    q = add(scale(q, 1.0 - diagonal_weight), scale(d, diagonal_weight));
  }
  return JointDistribution(std::move(q));
}

TransitionMatrix random_channel(std::size_t classes, Rng &rng, double diagonal_weight) {
  Matrix t(classes, classes);
  for (std::size_t i = 0; i < classes; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < classes; ++j) s += t(i, j) = weight(rng);
    for (std::size_t j = 0; j < classes; ++j) t(i, j) /= s;
  }
  return TransitionMatrix(mix_identity(std::move(t), diagonal_weight));
}

bool VerificationReport::passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const PropertyCheck &c) { return c.passed; });
}

VerificationReport verify_theorems(std::uint64_t seed, std::size_t trials) {
  if (trials == 0) throw std::invalid_argument("verify_theorems: trials must be at least 1");
  auto stream = [&](const char *name) { return make_rng(seed, name); };
  VerificationReport report;
  auto &v = report.checks;
  v.push_back(counterexample_values());
  { auto r = stream("nonnegative"); v.push_back(nonnegative_symmetric(r, trials)); }
  { auto r = stream("relative_invariance"); v.push_back(relative_invariance(r, trials)); }
  { auto r = stream("monotone"); v.push_back(information_monotone(r, trials)); }
  { auto r = stream("permutation"); v.push_back(permutation_invariance(r, trials)); }
  { auto r = stream("ordering"); v.push_back(ordering_consistency(r, trials)); }
  { auto r = stream("loss_shift"); v.push_back(loss_shift(r, trials)); }
  { auto r = stream("argmin"); v.push_back(argmin_invariance(r, trials)); }
  { auto r = stream("legal"); v.push_back(legal_enumeration(r, trials)); }
  { auto r = stream("degeneracy"); v.push_back(permutation_degeneracy(r, trials)); }
  { auto r = stream("scaling"); v.push_back(scaling_invariance(r, trials)); }
  { auto r = stream("monte_carlo"); v.push_back(monte_carlo_joint(r)); }
  { auto r = stream("corrupt"); v.push_back(corrupt_frequencies(r)); }
  { auto r = stream("det"); v.push_back(det_multiplicative(r, trials)); }
  return report;
}

void print_report(std::ostream &os, const VerificationReport &report) {
  const auto old = os.precision(3);
  for (const auto &c : report.checks) {
    os << (c.passed ? "PASS " : "FAIL ") << std::left << std::setw(28) << c.name << std::right
       << " instances=" << c.instances << " max_error=" << std::scientific << c.max_error
       << " tolerance=" << c.tolerance << std::defaultfloat << '\n';
    if (!c.passed) os << "  failing instance:\n" << c.failing_instance;
  }
  os << (report.passed() ? "all properties hold\n" : "property violations found\n");
  os.precision(old);
}

CounterexampleReport counterexample() {
  const JointDistribution q_h(Matrix{{0.1, 0.4}, {0.2, 0.3}});
  const JointDistribution q_hp(Matrix{{0.2, 0.6}, {0.1, 0.1}});
  const TransitionMatrix t(Matrix{{0.8, 0.2}, {0.4, 0.6}});
  const JointDistribution n_h = push_through_channel(q_h, t);
  const JointDistribution n_hp = push_through_channel(q_hp, t);
  CounterexampleReport r{q_h, q_hp, t, n_h, n_hp};
  r.mi_clean_h = shannon_mi(q_h);
  r.mi_clean_h_prime = shannon_mi(q_hp);
  r.mi_noisy_h = shannon_mi(n_h);
  r.mi_noisy_h_prime = shannon_mi(n_hp);
  r.dmi_clean_h = dmi(q_h);
  r.dmi_clean_h_prime = dmi(q_hp);
  r.dmi_noisy_h = dmi(n_h);
  r.dmi_noisy_h_prime = dmi(n_hp);
  r.shannon_order_flips = (r.mi_clean_h > r.mi_clean_h_prime) != (r.mi_noisy_h > r.mi_noisy_h_prime);
  r.dmi_order_consistent = (r.dmi_clean_h > r.dmi_clean_h_prime) == (r.dmi_noisy_h > r.dmi_noisy_h_prime);
  return r;
}

void print_counterexample(std::ostream &os, const CounterexampleReport &r) {
  const auto old = os.precision(5);
  os << "classifier h, clean joint Q(h(X), Y):\n" << to_string(r.clean_h.matrix(), 5) << '\n';
  os << "classifier h', clean joint Q(h'(X), Y):\n" << to_string(r.clean_h_prime.matrix(), 5) << '\n';
  os << "noise channel T:\n" << to_string(r.channel.matrix(), 5) << '\n';
  os << "classifier h, noisy joint Q(h(X), Y~) = Q T:\n" << to_string(r.noisy_h.matrix(), 5) << '\n';
  os << "classifier h', noisy joint Q(h'(X), Y~) = Q' T:\n" << to_string(r.noisy_h_prime.matrix(), 5) << '\n';
  os << std::scientific;
  os << "MI(h(X); Y)    = " << r.mi_clean_h << '\n';
  os << "MI(h'(X); Y)   = " << r.mi_clean_h_prime << '\n';
  os << "MI(h(X); Y~)   = " << r.mi_noisy_h << '\n';
  os << "MI(h'(X); Y~)  = " << r.mi_noisy_h_prime << '\n';
  os << std::defaultfloat;
  os << "DMI(h(X); Y)   = " << r.dmi_clean_h << '\n';
  os << "DMI(h'(X); Y)  = " << r.dmi_clean_h_prime << '\n';
  os << "DMI(h(X); Y~)  = " << r.dmi_noisy_h << '\n';
  os << "DMI(h'(X); Y~) = " << r.dmi_noisy_h_prime << '\n';
  os << "shannon ordering flips under noise: " << (r.shannon_order_flips ? "yes" : "no") << '\n';
  os << "dmi ordering consistent under noise: " << (r.dmi_order_consistent ? "yes" : "no") << '\n';
  os.precision(old);
}

}  // namespace ldmi
