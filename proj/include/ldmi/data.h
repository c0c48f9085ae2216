// ldmi/data.h

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

#ifndef LDMI_DATA_H_
#define LDMI_DATA_H_

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "ldmi/info.h"
#include "ldmi/numerics.h"

namespace ldmi {

enum class Split : std::uint8_t { kTrain, kVal, kTest };

std::string_view to_string(Split s);

struct Dataset {
  Matrix features;                                // N x d
  std::vector<Label> clean_labels;                // N
  std::optional<std::vector<Label>> noisy_labels;  // N when present
  std::size_t classes = 0;
  std::vector<Split> splits;                      // N, all kTrain by default

  std::size_t size() const { return clean_labels.size(); }
  std::size_t dim() const { return features.cols(); }

  /// Labels a learner may see: noisy when present, otherwise clean.
  std::span<const Label> observed_labels() const {
    return noisy_labels ? std::span<const Label>(*noisy_labels) : std::span<const Label>(clean_labels);
  }

  std::vector<std::size_t> indices(Split s) const;

  /// Throws std::invalid_argument if any invariant is broken.
  void validate() const;
};

/// Rows of `features` at `idx`, in order.
Matrix gather_rows(const Matrix &features, std::span<const std::size_t> idx);

template <typename T>
std::vector<T> gather(std::span<const T> values, std::span<const std::size_t> idx) {
  std::vector<T> out;
  out.reserve(idx.size());
  for (std::size_t i : idx) out.push_back(values[i]);
  return out;
}

struct ClassBlob {
  double prior = 0.0;
  std::vector<double> mean;
  std::vector<double> variance;  // diagonal covariance
};

struct BlobSpec {
  std::vector<ClassBlob> classes;
  std::size_t samples = 0;
  std::uint64_t seed = 0;

  void validate() const;
};

/// Two-dimensional 10/90 binary blobs used by the experiment defaults:
/// minority class 0 at (-2.5, 0), majority class 1 at (2.5, 0), unit
/// variance.
BlobSpec default_imbalanced_blobs(std::size_t samples, std::uint64_t seed);

/// Labels drawn from the priors, features from the per-class Gaussian.
Dataset gaussian_blobs(const BlobSpec &spec);

class IdxError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};
class IdxMagicError : public IdxError {
 public:
  using IdxError::IdxError;
};
class IdxTruncatedError : public IdxError {
 public:
  using IdxError::IdxError;
};
class IdxMismatchError : public IdxError {
 public:
  using IdxError::IdxError;
};

inline constexpr std::uint32_t kIdxImageMagic = 0x00000803;
inline constexpr std::uint32_t kIdxLabelMagic = 0x00000801;

/// Reads an IDX image/label pair.  Pixels are scaled to [0, 1] by 1/255,
/// the class count is max label + 1.
Dataset load_idx(const std::string &images_path, const std::string &labels_path);

/// Writes an IDX image file (count x rows x cols, row-major uint8).
void write_idx_images(const std::string &path, std::size_t rows, std::size_t cols,
                      std::span<const std::uint8_t> pixels);
void write_idx_labels(const std::string &path, std::span<const std::uint8_t> labels);

/// Class 0 = members of `positive_classes`, class 1 = everything else.
Dataset binarize(const Dataset &data, std::span<const Label> positive_classes);

/// Seeded shuffle, then contiguous train / val / test blocks with sizes
/// round(f0 N), round((f0 + f1) N) - round(f0 N) and the remainder.
Dataset split(const Dataset &data, std::array<double, 3> fractions, std::uint64_t seed);

/// Corrupts train and validation labels through `channel`; test examples
/// keep their clean labels.
Dataset apply_noise(const Dataset &data, const TransitionMatrix &channel, std::uint64_t seed);

/// CSV with header feature_0..feature_{d-1},clean_label,noisy_label,split.
void write_csv(std::ostream &os, const Dataset &data);

}  // namespace ldmi

#endif  // LDMI_DATA_H_
