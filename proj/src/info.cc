// src/info.cc

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

#include "ldmi/info.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "ldmi/random.h"

namespace ldmi {

namespace {

// Slack on the [0, 1] range of individual entries; products of valid
// distributions can land a few ulps outside it.
constexpr double kRangeSlack = 1e-12;

void check_probability_entries(const Matrix &m, const char *what) {
  if (m.empty() || !m.is_square())
    throw std::invalid_argument(std::string(what) + ": expected a non-empty square matrix");
  for (double v : m.values()) {
    if (!std::isfinite(v) || v < -kRangeSlack || v > 1.0 + kRangeSlack)
      throw std::invalid_argument(std::string(what) + ": entry outside [0, 1]");
  }
}

void check_rate(double r, const char *what) {
  if (!(r >= 0.0 && r <= 1.0))
    throw std::invalid_argument(std::string(what) + ": noise rate must lie in [0, 1]");
}

double parse_double(const std::string &s, const std::string &context) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception &) {
    used = 0;
  }
  if (used == 0 || used != s.size())
    throw std::invalid_argument("bad number '" + s + "' in " + context);
  return v;
}

long parse_int(const std::string &s, const std::string &context) {
  std::size_t used = 0;
  long v = 0;
  try {
    v = std::stol(s, &used);
  } catch (const std::exception &) {
    used = 0;
  }
  if (used == 0 || used != s.size())
    throw std::invalid_argument("bad integer '" + s + "' in " + context);
  return v;
}

std::vector<std::string> split(const std::string &s, char sep) {
  std::vector<std::string> parts;
  std::string cur;
  std::istringstream is(s);
  while (std::getline(is, cur, sep)) parts.push_back(cur);
  if (!s.empty() && s.back() == sep) parts.emplace_back();
  return parts;
}

}  // namespace

JointDistribution::JointDistribution(Matrix q) : q_(std::move(q)) {
  check_probability_entries(q_, "JointDistribution");
  if (std::abs(q_.sum() - 1.0) > kProbabilityTolerance)
    throw std::invalid_argument("JointDistribution: entries must sum to 1");
}

std::vector<double> JointDistribution::row_marginal() const {
  std::vector<double> m(classes(), 0.0);
  for (std::size_t i = 0; i < classes(); ++i)
    for (std::size_t j = 0; j < classes(); ++j) m[i] += q_(i, j);
  return m;
}

std::vector<double> JointDistribution::col_marginal() const {
  std::vector<double> m(classes(), 0.0);
  for (std::size_t i = 0; i < classes(); ++i)
    for (std::size_t j = 0; j < classes(); ++j) m[j] += q_(i, j);
  return m;
}

JointDistribution JointDistribution::transposed() const {
  return JointDistribution(transpose(q_));
}

TransitionMatrix::TransitionMatrix(Matrix t, std::optional<double> noise_rate)
    : t_(std::move(t)), noise_rate_(noise_rate) {
  check_probability_entries(t_, "TransitionMatrix");
  for (std::size_t i = 0; i < t_.rows(); ++i) {
    double s = 0.0;
    for (double v : t_.row(i)) s += v;
    if (std::abs(s - 1.0) > kProbabilityTolerance)
      throw std::invalid_argument("TransitionMatrix: row " + std::to_string(i) +
                                  " does not sum to 1");
  }
}

std::string_view to_string(NoisePattern p) {
  switch (p) {
    case NoisePattern::kClassIndependent: return "class-independent";
    case NoisePattern::kDiagonallyDominant: return "diagonally-dominant";
    case NoisePattern::kDiagonallyNonDominant: return "diagonally-non-dominant";
  }
  return "unknown";
}

double dmi(const JointDistribution &q) { return std::abs(lu_det(q.matrix())); }

double shannon_mi(const JointDistribution &q) {
  const auto rows = q.row_marginal();
  const auto cols = q.col_marginal();
  double mi = 0.0;
  for (std::size_t i = 0; i < q.classes(); ++i) {
    for (std::size_t j = 0; j < q.classes(); ++j) {
      const double p = q(i, j);
      if (p <= 0.0) continue;
      mi += p * std::log(p / (rows[i] * cols[j]));
    }
  }
  // Rounding can leave a -1e-17 residue for independent inputs.
  return std::max(mi, 0.0);
}

double entropy(std::span<const double> p) {
  double h = 0.0;
  for (double v : p)
    if (v > 0.0) h -= v * std::log(v);
  return h;
}

JointDistribution push_through_channel(const JointDistribution &q, const TransitionMatrix &t) {
  if (q.classes() != t.classes())
    throw ShapeError("push_through_channel: joint has " + std::to_string(q.classes()) +
                     " classes, channel has " + std::to_string(t.classes()));
  return JointDistribution(matmul(q.matrix(), t.matrix()));
}

TransitionMatrix uniform_channel(std::size_t classes, double r) {
  if (classes < 2) throw std::invalid_argument("uniform_channel: need at least 2 classes");
  check_rate(r, "uniform_channel");
  const double off = r / static_cast<double>(classes);
  Matrix t(classes, classes, off);
  for (std::size_t i = 0; i < classes; ++i) t(i, i) = 1.0 - r + off;
  return TransitionMatrix(std::move(t), r);
}

TransitionMatrix flip_channel(std::size_t classes, std::span<const Flip> flips) {
  if (classes < 2) throw std::invalid_argument("flip_channel: need at least 2 classes");
  Matrix t(classes, classes);
  const auto c = static_cast<Label>(classes);
  for (const Flip &f : flips) {
    if (f.from < 0 || f.from >= c || f.to < 0 || f.to >= c)
      throw std::invalid_argument("flip_channel: class index out of range");
    if (f.from == f.to) throw std::invalid_argument("flip_channel: flip onto the same class");
    if (!(f.probability >= 0.0 && f.probability <= 1.0))
      throw std::invalid_argument("flip_channel: probability outside [0, 1]");
    t(f.from, f.to) += f.probability;
  }
  for (std::size_t i = 0; i < classes; ++i) {
    double out = 0.0;
    for (std::size_t j = 0; j < classes; ++j) out += t(i, j);
    if (out > 1.0 + kRangeSlack)
      throw std::invalid_argument("flip_channel: flips out of class " + std::to_string(i) +
                                  " exceed probability 1");
    t(i, i) = std::max(0.0, 1.0 - out);
  }
  std::optional<double> rate;
  if (!flips.empty()) {
    rate = flips.front().probability;
    for (const Flip &f : flips) {
      if (f.probability != *rate) {
        rate.reset();
        break;
      }
    }
  }
  return TransitionMatrix(std::move(t), rate);
}

TransitionMatrix noise_case_channel(int noise_case, double r) {
  check_rate(r, "noise_case_channel");
  switch (noise_case) {
    case 1: return uniform_channel(2, r);
    case 2: {
      const Flip f[] = {{0, 1, r}};
      return flip_channel(2, f);
    }
    case 3: {
      const Flip f[] = {{1, 0, r}};
      return flip_channel(2, f);
    }
    default:
      throw std::invalid_argument("noise case must be 1, 2 or 3, got " + std::to_string(noise_case));
  }
}

TransitionMatrix cifar10_channel(double r) {
  check_rate(r, "cifar10_channel");
  // airplane 0, automobile 1, bird 2, cat 3, deer 4, dog 5, frog 6,
  // horse 7, ship 8, truck 9
  const Flip flips[] = {{9, 1, r}, {2, 0, r}, {4, 7, r}, {3, 5, r}};
  return flip_channel(10, flips);
}

NoisePattern classify_pattern(const TransitionMatrix &t) {
  constexpr double kTie = 1e-12;
  const std::size_t c = t.classes();

  // Class-independent: every off-diagonal entry equal (and non-zero, so the
  // noiseless identity stays diagonally dominant).
  bool uniform_off = true;
  const double ref = t(0, 1);
  for (std::size_t i = 0; i < c && uniform_off; ++i)
    for (std::size_t j = 0; j < c; ++j)
      if (i != j && std::abs(t(i, j) - ref) > kTie) {
        uniform_off = false;
        break;
      }
  if (uniform_off && ref > kTie) return NoisePattern::kClassIndependent;

  for (std::size_t i = 0; i < c; ++i)
    for (std::size_t j = 0; j < c; ++j)
      if (i != j && !(t(i, i) > t(i, j))) return NoisePattern::kDiagonallyNonDominant;
  return NoisePattern::kDiagonallyDominant;
}

bool is_informative(const TransitionMatrix &t) { return std::abs(lu_det(t.matrix())) > 1e-12; }

std::vector<Label> corrupt_labels(std::span<const Label> labels, const TransitionMatrix &t,
                                  std::uint64_t seed, std::string_view stream) {
  const auto c = static_cast<Label>(t.classes());
  Rng rng = make_rng(seed, stream);
  std::vector<Label> out;
  out.reserve(labels.size());
  for (Label y : labels) {
    if (y < 0 || y >= c)
      throw std::invalid_argument("corrupt_labels: label " + std::to_string(y) +
                                  " outside [0, " + std::to_string(c) + ")");
    const double u = uniform01(rng);
    auto row = t.matrix().row(static_cast<std::size_t>(y));
    double acc = 0.0;
    Label pick = c - 1;
    for (Label j = 0; j < c; ++j) {
      acc += row[j];
      if (u < acc) {
        pick = j;
        break;
      }
    }
    // Rounding can leave acc just below 1; never land on a zero-mass class.
    while (row[pick] == 0.0 && pick > 0) --pick;
    out.push_back(pick);
  }
  return out;
}

void write_channel(std::ostream &os, const TransitionMatrix &t) {
  os << std::setprecision(17);
  for (std::size_t i = 0; i < t.classes(); ++i) {
    for (std::size_t j = 0; j < t.classes(); ++j) os << (j ? " " : "") << t(i, j);
    os << '\n';
  }
}

TransitionMatrix read_channel(std::istream &is) {
  std::vector<double> values;
  std::size_t rows = 0, cols = 0;
  std::string line;
  while (std::getline(is, line)) {
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::istringstream ls(line);
    std::string tok;
    std::size_t n = 0;
    while (ls >> tok) {
      values.push_back(parse_double(tok, "channel row " + std::to_string(rows + 1)));
      ++n;
    }
    if (rows == 0) cols = n;
    else if (n != cols)
      throw ShapeError("read_channel: row " + std::to_string(rows + 1) + " has " +
                       std::to_string(n) + " entries, expected " + std::to_string(cols));
    ++rows;
  }
  if (rows == 0) throw std::invalid_argument("read_channel: no rows");
  if (rows != cols) throw ShapeError("read_channel: channel matrix is not square");
  return TransitionMatrix(Matrix(rows, cols, std::move(values)));
}

TransitionMatrix load_channel(const std::string &path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open channel file '" + path + "'");
  return read_channel(in);
}

TransitionMatrix channel_from_spec(const std::string &spec) {
  const auto parts = split(spec, ':');
  const std::string &kind = parts.empty() ? spec : parts[0];
  auto want = [&](std::size_t n) {
    if (parts.size() != n)
      throw std::invalid_argument("channel spec '" + spec + "': expected " + std::to_string(n - 1) +
                                  " argument(s)");
  };
  if (kind == "identity") {
    want(2);
    const long c = parse_int(parts[1], spec);
    if (c < 1) throw std::invalid_argument("channel spec '" + spec + "': bad class count");
    return TransitionMatrix(Matrix::identity(static_cast<std::size_t>(c)), 0.0);
  }
  if (kind == "uniform") {
    want(3);
    const long c = parse_int(parts[1], spec);
    if (c < 2) throw std::invalid_argument("channel spec '" + spec + "': bad class count");
    return uniform_channel(static_cast<std::size_t>(c), parse_double(parts[2], spec));
  }
  if (kind == "case1" || kind == "case2" || kind == "case3") {
    want(2);
    return noise_case_channel(kind.back() - '0', parse_double(parts[1], spec));
  }
  if (kind == "cifar") {
    want(2);
    return cifar10_channel(parse_double(parts[1], spec));
  }
  if (kind == "flip") {
    want(3);
    const long c = parse_int(parts[1], spec);
    if (c < 2) throw std::invalid_argument("channel spec '" + spec + "': bad class count");
    std::vector<Flip> flips;
    for (const auto &item : split(parts[2], ',')) {
      const auto gt = item.find('>');
      const auto at = item.find('@');
      if (gt == std::string::npos || at == std::string::npos || at < gt)
        throw std::invalid_argument("channel spec '" + spec + "': flips are written a>b@p");
      flips.push_back({static_cast<Label>(parse_int(item.substr(0, gt), spec)),
                       static_cast<Label>(parse_int(item.substr(gt + 1, at - gt - 1), spec)),
                       parse_double(item.substr(at + 1), spec)});
    }
    return flip_channel(static_cast<std::size_t>(c), flips);
  }
  return load_channel(spec);
}

}  // namespace ldmi
