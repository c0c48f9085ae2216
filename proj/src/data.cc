// src/data.cc

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

#include "ldmi/data.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <iterator>
#include <ostream>
#include <random>
#include <set>
#include <sstream>

#include "ldmi/random.h"

namespace ldmi {

namespace {

std::vector<std::uint8_t> read_file(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IdxError("cannot open '" + path + "'");
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::uint32_t read_be32(const std::vector<std::uint8_t> &buf, std::size_t offset,
                        const std::string &path) {
  if (buf.size() < offset + 4) throw IdxTruncatedError("'" + path + "': header is truncated");
  return (std::uint32_t{buf[offset]} << 24) | (std::uint32_t{buf[offset + 1]} << 16) |
         (std::uint32_t{buf[offset + 2]} << 8) | std::uint32_t{buf[offset + 3]};
}

void write_be32(std::ostream &os, std::uint32_t v) {
  const char bytes[4] = {static_cast<char>(v >> 24), static_cast<char>(v >> 16),
                         static_cast<char>(v >> 8), static_cast<char>(v)};
  os.write(bytes, 4);
}

std::string hex(std::uint32_t v) {
  std::ostringstream os;
  os << "0x" << std::hex << std::setw(8) << std::setfill('0') << v;
  return os.str();
}

}  // namespace

std::string_view to_string(Split s) {
  switch (s) {
    case Split::kTrain: return "train";
    case Split::kVal: return "val";
    case Split::kTest: return "test";
  }
  return "unknown";
}

std::vector<std::size_t> Dataset::indices(Split s) const {
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < splits.size(); ++i)
    if (splits[i] == s) idx.push_back(i);
  return idx;
}

void Dataset::validate() const {
  const std::size_t n = clean_labels.size();
  if (features.rows() != n) throw std::invalid_argument("Dataset: feature rows != label count");
  if (splits.size() != n) throw std::invalid_argument("Dataset: split tags != label count");
  if (noisy_labels && noisy_labels->size() != n)
    throw std::invalid_argument("Dataset: noisy label count != clean label count");
  auto check = [&](std::span<const Label> labels) {
    for (Label y : labels)
      if (y < 0 || static_cast<std::size_t>(y) >= classes)
        throw std::invalid_argument("Dataset: label " + std::to_string(y) + " outside [0, " +
                                    std::to_string(classes) + ")");
  };
  check(clean_labels);
  if (noisy_labels) check(*noisy_labels);
}

Matrix gather_rows(const Matrix &features, std::span<const std::size_t> idx) {
  Matrix out(idx.size(), features.cols());
  for (std::size_t r = 0; r < idx.size(); ++r) {
    auto src = features.row(idx[r]);
    std::copy(src.begin(), src.end(), out.row(r).begin());
  }
  return out;
}

void BlobSpec::validate() const {
  if (classes.size() < 2) throw std::invalid_argument("BlobSpec: need at least 2 classes");
  const std::size_t d = classes.front().mean.size();
  if (d == 0) throw std::invalid_argument("BlobSpec: empty mean vector");
  double total = 0.0;
  for (const auto &c : classes) {
    if (!(c.prior >= 0.0)) throw std::invalid_argument("BlobSpec: negative prior");
    total += c.prior;
    if (c.mean.size() != d || c.variance.size() != d)
      throw std::invalid_argument("BlobSpec: every class needs a mean and variance of dimension " +
                                  std::to_string(d));
    for (double v : c.variance)
      if (!(v > 0.0)) throw std::invalid_argument("BlobSpec: variances must be positive");
  }
  if (std::abs(total - 1.0) > 1e-9) throw std::invalid_argument("BlobSpec: priors must sum to 1");
}

BlobSpec default_imbalanced_blobs(std::size_t samples, std::uint64_t seed) {
  BlobSpec spec;
  spec.classes = {{0.1, {-2.5, 0.0}, {1.0, 1.0}}, {0.9, {2.5, 0.0}, {1.0, 1.0}}};
  spec.samples = samples;
  spec.seed = seed;
  return spec;
}

Dataset gaussian_blobs(const BlobSpec &spec) {
  spec.validate();
  const std::size_t n = spec.samples;
  const std::size_t d = spec.classes.front().mean.size();
  Rng rng = make_rng(spec.seed, "gaussian_blobs");
  std::normal_distribution<double> normal(0.0, 1.0);

  Dataset data;
  data.classes = spec.classes.size();
  data.features = Matrix(n, d);
  data.clean_labels.reserve(n);
  data.splits.assign(n, Split::kTrain);
  for (std::size_t i = 0; i < n; ++i) {
    const double u = uniform01(rng);
    double acc = 0.0;
    std::size_t y = spec.classes.size() - 1;
    for (std::size_t c = 0; c < spec.classes.size(); ++c) {
      acc += spec.classes[c].prior;
      if (u < acc) {
        y = c;
        break;
      }
    }
    const ClassBlob &blob = spec.classes[y];
    auto row = data.features.row(i);
    for (std::size_t k = 0; k < d; ++k) row[k] = blob.mean[k] + std::sqrt(blob.variance[k]) * normal(rng);
    data.clean_labels.push_back(static_cast<Label>(y));
  }
  return data;
}

Dataset load_idx(const std::string &images_path, const std::string &labels_path) {
  const auto images = read_file(images_path);
  const auto labels = read_file(labels_path);

  const std::uint32_t image_magic = read_be32(images, 0, images_path);
  if (image_magic != kIdxImageMagic)
    throw IdxMagicError("'" + images_path + "': image magic " + hex(image_magic) + ", expected " +
                        hex(kIdxImageMagic));
  const std::uint32_t label_magic = read_be32(labels, 0, labels_path);
  if (label_magic != kIdxLabelMagic)
    throw IdxMagicError("'" + labels_path + "': label magic " + hex(label_magic) + ", expected " +
                        hex(kIdxLabelMagic));

  const std::size_t count = read_be32(images, 4, images_path);
  const std::size_t rows = read_be32(images, 8, images_path);
  const std::size_t cols = read_be32(images, 12, images_path);
  const std::size_t label_count = read_be32(labels, 4, labels_path);
  const std::size_t pixels = rows * cols;
  if (images.size() < 16 + count * pixels)
    throw IdxTruncatedError("'" + images_path + "': expected " + std::to_string(count * pixels) +
                            " pixel bytes, found " + std::to_string(images.size() - 16));
  if (labels.size() < 8 + label_count)
    throw IdxTruncatedError("'" + labels_path + "': expected " + std::to_string(label_count) +
                            " label bytes, found " + std::to_string(labels.size() - 8));
  if (count != label_count)
    throw IdxMismatchError("IDX pair has " + std::to_string(count) + " images but " +
                           std::to_string(label_count) + " labels");

  Dataset data;
  data.features = Matrix(count, pixels);
  auto dst = data.features.values();
  for (std::size_t k = 0; k < count * pixels; ++k) dst[k] = images[16 + k] / 255.0;
  data.clean_labels.reserve(count);
  int max_label = -1;
  for (std::size_t i = 0; i < count; ++i) {
    data.clean_labels.push_back(labels[8 + i]);
    max_label = std::max<int>(max_label, labels[8 + i]);
  }
  data.classes = static_cast<std::size_t>(max_label + 1);
  data.splits.assign(count, Split::kTrain);
  return data;
}

void write_idx_images(const std::string &path, std::size_t rows, std::size_t cols,
                      std::span<const std::uint8_t> pixels) {
  if (rows == 0 || cols == 0 || pixels.size() % (rows * cols) != 0)
    throw std::invalid_argument("write_idx_images: pixel count is not a multiple of rows*cols");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IdxError("cannot write '" + path + "'");
  write_be32(out, kIdxImageMagic);
  write_be32(out, static_cast<std::uint32_t>(pixels.size() / (rows * cols)));
  write_be32(out, static_cast<std::uint32_t>(rows));
  write_be32(out, static_cast<std::uint32_t>(cols));
  out.write(reinterpret_cast<const char *>(pixels.data()), static_cast<std::streamsize>(pixels.size()));
}

void write_idx_labels(const std::string &path, std::span<const std::uint8_t> labels) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IdxError("cannot write '" + path + "'");
  write_be32(out, kIdxLabelMagic);
  write_be32(out, static_cast<std::uint32_t>(labels.size()));
  out.write(reinterpret_cast<const char *>(labels.data()), static_cast<std::streamsize>(labels.size()));
}

Dataset binarize(const Dataset &data, std::span<const Label> positive_classes) {
  const std::set<Label> positive(positive_classes.begin(), positive_classes.end());
  if (positive.empty()) throw std::invalid_argument("binarize: positive class set is empty");
  for (Label c : positive)
    if (c < 0 || static_cast<std::size_t>(c) >= data.classes)
      throw std::invalid_argument("binarize: class " + std::to_string(c) + " does not exist");
  if (positive.size() == data.classes)
    throw std::invalid_argument("binarize: positive set covers every class");

  auto relabel = [&](std::span<const Label> labels) {
    std::vector<Label> out;
    out.reserve(labels.size());
    for (Label y : labels) out.push_back(positive.count(y) ? 0 : 1);
    return out;
  };
  Dataset out = data;
  out.classes = 2;
  out.clean_labels = relabel(data.clean_labels);
  if (data.noisy_labels) out.noisy_labels = relabel(*data.noisy_labels);
  return out;
}

Dataset split(const Dataset &data, std::array<double, 3> fractions, std::uint64_t seed) {
  for (double f : fractions)
    if (!(f >= 0.0)) throw std::invalid_argument("split: fractions must be non-negative");
  if (std::abs(fractions[0] + fractions[1] + fractions[2] - 1.0) > 1e-9)
    throw std::invalid_argument("split: fractions must sum to 1");

  const std::size_t n = data.size();
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  Rng rng = make_rng(seed, "split");
  shuffle_in_place(order, rng);

  const auto n_train = static_cast<std::size_t>(std::llround(fractions[0] * static_cast<double>(n)));
  const auto n_train_val = std::min<std::size_t>(
      n, static_cast<std::size_t>(std::llround((fractions[0] + fractions[1]) * static_cast<double>(n))));
  Dataset out = data;
  for (std::size_t k = 0; k < n; ++k)
    out.splits[order[k]] = k < n_train ? Split::kTrain : k < n_train_val ? Split::kVal : Split::kTest;
  return out;
}

Dataset apply_noise(const Dataset &data, const TransitionMatrix &channel, std::uint64_t seed) {
  if (channel.classes() != data.classes)
    throw ShapeError("apply_noise: channel has " + std::to_string(channel.classes()) +
                     " classes, dataset has " + std::to_string(data.classes));
  std::vector<std::size_t> noisy_idx;
  for (std::size_t i = 0; i < data.size(); ++i)
    if (data.splits[i] != Split::kTest) noisy_idx.push_back(i);
  const auto source = gather<Label>(data.clean_labels, noisy_idx);
  const auto corrupted = corrupt_labels(source, channel, seed, "apply_noise");

  Dataset out = data;
  out.noisy_labels = data.clean_labels;
  for (std::size_t k = 0; k < noisy_idx.size(); ++k) (*out.noisy_labels)[noisy_idx[k]] = corrupted[k];
  return out;
}

void write_csv(std::ostream &os, const Dataset &data) {
  for (std::size_t k = 0; k < data.dim(); ++k) os << "feature_" << k << ',';
  os << "clean_label,noisy_label,split\n";
  os << std::setprecision(17);
  for (std::size_t i = 0; i < data.size(); ++i) {
    for (double v : data.features.row(i)) os << v << ',';
    os << data.clean_labels[i] << ',';
    if (data.noisy_labels) os << (*data.noisy_labels)[i];
    os << ',' << to_string(data.splits[i]) << '\n';
  }
}

}  // namespace ldmi
