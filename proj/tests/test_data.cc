// tests/test_data.cc

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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "ldmi/data.h"

using namespace ldmi;

namespace {

std::size_t count_label(std::span<const Label> labels, Label y) {
  return static_cast<std::size_t>(std::count(labels.begin(), labels.end(), y));
}

void write_bytes(const std::string &path, const std::vector<unsigned char> &bytes) {
  std::ofstream out(path, std::ios::binary);
  out.write(reinterpret_cast<const char *>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

std::vector<unsigned char> be32(std::uint32_t v) {
  return {static_cast<unsigned char>(v >> 24), static_cast<unsigned char>(v >> 16),
          static_cast<unsigned char>(v >> 8), static_cast<unsigned char>(v)};
}

std::vector<unsigned char> concat(std::initializer_list<std::vector<unsigned char>> parts) {
  std::vector<unsigned char> out;
  for (const auto &p : parts) out.insert(out.end(), p.begin(), p.end());
  return out;
}

// Ten classes, label i % 10.
Dataset ten_class(std::size_t n) {
  Dataset d;
  d.features = Matrix(n, 1);
  for (std::size_t i = 0; i < n; ++i) {
    d.clean_labels.push_back(static_cast<Label>(i % 10));
    d.features(i, 0) = static_cast<double>(i);
  }
  d.classes = 10;
  d.splits.assign(n, Split::kTrain);
  return d;
}

}  // namespace

TEST_CASE("gaussian blobs") {
  const BlobSpec spec = default_imbalanced_blobs(50000, 3);
  const Dataset d = gaussian_blobs(spec);
  CHECK(d.size() == 50000);
  CHECK(d.dim() == 2);
  CHECK(d.classes == 2);
  const auto minority = count_label(d.clean_labels, 0);
  CHECK(minority >= 4700);
  CHECK(minority <= 5300);
  CHECK_NOTHROW(d.validate());

  // per-class sample means sit at the configured centres
  double sum0 = 0.0, sum1 = 0.0;
  for (std::size_t i = 0; i < d.size(); ++i) (d.clean_labels[i] == 0 ? sum0 : sum1) += d.features(i, 0);
  CHECK(sum0 / static_cast<double>(minority) == doctest::Approx(spec.classes[0].mean[0]).epsilon(0.02));
  CHECK(sum1 / static_cast<double>(d.size() - minority) == doctest::Approx(spec.classes[1].mean[0]).epsilon(0.02));

  const Dataset again = gaussian_blobs(spec);
  CHECK(again.features == d.features);
  CHECK(again.clean_labels == d.clean_labels);
  CHECK_FALSE(gaussian_blobs(default_imbalanced_blobs(50000, 4)).features == d.features);

  const Dataset empty = gaussian_blobs(default_imbalanced_blobs(0, 3));
  CHECK(empty.size() == 0);
  CHECK_NOTHROW(empty.validate());

  BlobSpec bad = spec;
  bad.classes[0].prior = 0.2;
  CHECK_THROWS(bad.validate());
  bad = spec;
  bad.classes[1].variance[1] = 0.0;
  CHECK_THROWS(gaussian_blobs(bad));
  bad = spec;
  bad.classes[1].mean.push_back(1.0);
  CHECK_THROWS(bad.validate());
}

TEST_CASE("IDX files") {
  const std::string images = "test_data_images.idx", labels = "test_data_labels.idx";
  SUBCASE("hand-built big-endian pair") {
    write_bytes(images, concat({be32(0x803), be32(2), be32(2), be32(3), {0, 51, 255, 102, 0, 0, 1, 2, 3, 4, 5, 255}}));
    write_bytes(labels, concat({be32(0x801), be32(2), {7, 2}}));
    const Dataset d = load_idx(images, labels);
    CHECK(d.size() == 2);
    CHECK(d.dim() == 6);
    CHECK(d.classes == 8);
    CHECK(d.clean_labels == std::vector<Label>{7, 2});
    CHECK(d.features(0, 1) == doctest::Approx(0.2));
    CHECK(d.features(0, 2) == 1.0);
    CHECK(d.features(1, 5) == 1.0);
    CHECK(d.features(1, 0) == doctest::Approx(1.0 / 255));
  }
  SUBCASE("writer round trip") {
    const std::vector<std::uint8_t> pixels{1, 2, 3, 4, 250, 251, 252, 253};
    write_idx_images(images, 2, 2, pixels);
    write_idx_labels(labels, std::vector<std::uint8_t>{1, 0});
    const Dataset d = load_idx(images, labels);
    for (std::size_t i = 0; i < 2; ++i)
      for (std::size_t j = 0; j < 4; ++j) CHECK(std::lround(d.features(i, j) * 255.0) == pixels[i * 4 + j]);
    std::ifstream raw(images, std::ios::binary);
    std::vector<unsigned char> head(16);
    raw.read(reinterpret_cast<char *>(head.data()), 16);
    CHECK(head == concat({be32(0x803), be32(2), be32(2), be32(2)}));
  }
  SUBCASE("errors") {
    write_bytes(images, concat({be32(0x801), be32(1), be32(1), be32(1), {9}}));
    write_bytes(labels, concat({be32(0x801), be32(1), {0}}));
    CHECK_THROWS_AS(load_idx(images, labels), IdxMagicError);

    write_bytes(images, concat({be32(0x803), be32(1), be32(1), be32(1), {9}}));
    write_bytes(labels, concat({be32(0x803), be32(1), {0}}));
    CHECK_THROWS_AS(load_idx(images, labels), IdxMagicError);

    write_bytes(labels, concat({be32(0x801), be32(1), {0}}));
    write_bytes(images, concat({be32(0x803), be32(2), be32(2), be32(2), {1, 2, 3}}));
    CHECK_THROWS_AS(load_idx(images, labels), IdxTruncatedError);
    write_bytes(images, concat({be32(0x803), be32(1)}));
    CHECK_THROWS_AS(load_idx(images, labels), IdxTruncatedError);

    write_bytes(images, concat({be32(0x803), be32(2), be32(1), be32(1), {1, 2}}));
    CHECK_THROWS_AS(load_idx(images, labels), IdxMismatchError);
    CHECK_THROWS_AS(load_idx("/nonexistent/images", labels), IdxError);
  }
  std::remove(images.c_str());
  std::remove(labels.c_str());
}

TEST_CASE("binarize") {
  const Dataset d = ten_class(1000);
  const std::vector<Label> bags{8};
  const Dataset b = binarize(d, bags);
  CHECK(b.classes == 2);
  CHECK(count_label(b.clean_labels, 0) == 100);
  CHECK(count_label(b.clean_labels, 1) == 900);
  for (std::size_t i = 0; i < d.size(); ++i) CHECK((b.clean_labels[i] == 0) == (d.clean_labels[i] == 8));

  std::vector<Label> all(10);
  for (int i = 0; i < 10; ++i) all[i] = i;
  CHECK_THROWS(binarize(d, all));
  CHECK_THROWS(binarize(d, std::vector<Label>{}));
  CHECK_THROWS(binarize(d, std::vector<Label>{12}));

  Dataset two = binarize(d, bags);
  CHECK(binarize(two, std::vector<Label>{0}).clean_labels == two.clean_labels);
}

TEST_CASE("split") {
  const Dataset d = ten_class(70000);
  const Dataset all_train = split(d, {1.0, 0.0, 0.0}, 1);
  CHECK(all_train.indices(Split::kTrain).size() == 70000);

  const Dataset s = split(d, {5.0 / 7, 1.0 / 7, 1.0 / 7}, 1);
  CHECK(s.indices(Split::kTrain).size() == 50000);
  CHECK(s.indices(Split::kVal).size() == 10000);
  CHECK(s.indices(Split::kTest).size() == 10000);
  CHECK(split(d, {5.0 / 7, 1.0 / 7, 1.0 / 7}, 1).splits == s.splits);
  CHECK(split(d, {5.0 / 7, 1.0 / 7, 1.0 / 7}, 2).splits != s.splits);
  // shuffled, not contiguous in the source order
  CHECK(s.indices(Split::kTest).front() < 60000);

  CHECK_THROWS(split(d, {0.5, 0.4, 0.3}, 1));
  CHECK_THROWS(split(d, {1.2, -0.1, -0.1}, 1));
}

TEST_CASE("apply_noise corrupts train and validation only") {
  Dataset d = split(gaussian_blobs(default_imbalanced_blobs(20000, 5)), {0.6, 0.2, 0.2}, 5);
  const auto channel = noise_case_channel(3, 0.7);
  const Dataset noisy = apply_noise(d, channel, 9);
  REQUIRE(noisy.noisy_labels.has_value());
  CHECK(noisy.clean_labels == d.clean_labels);
  CHECK(noisy.features == d.features);
  std::size_t majority = 0, flipped = 0;
  for (std::size_t i = 0; i < d.size(); ++i) {
    if (d.splits[i] == Split::kTest) {
      CHECK((*noisy.noisy_labels)[i] == d.clean_labels[i]);
      continue;
    }
    if (d.clean_labels[i] == 1) {
      ++majority;
      flipped += (*noisy.noisy_labels)[i] == 0;
    }
    if (d.clean_labels[i] == 0) CHECK((*noisy.noisy_labels)[i] == 0);
  }
  const double n = static_cast<double>(majority);
  CHECK(std::abs(static_cast<double>(flipped) - 0.7 * n) <= 3 * std::sqrt(n * 0.21));
  CHECK(apply_noise(d, channel, 9).noisy_labels == noisy.noisy_labels);
  CHECK_THROWS(apply_noise(d, uniform_channel(3, 0.1), 9));
  CHECK(noisy.observed_labels().data() == noisy.noisy_labels->data());
}

TEST_CASE("dataset validation and export") {
  Dataset d = ten_class(20);
  CHECK_NOTHROW(d.validate());
  Dataset bad = d;
  bad.clean_labels[3] = 10;
  CHECK_THROWS(bad.validate());
  bad = d;
  bad.splits.pop_back();
  CHECK_THROWS(bad.validate());
  bad = d;
  bad.noisy_labels = std::vector<Label>(19, 0);
  CHECK_THROWS(bad.validate());

  Dataset small = split(gaussian_blobs(default_imbalanced_blobs(5, 1)), {0.6, 0.2, 0.2}, 1);
  std::ostringstream os;
  write_csv(os, small);
  std::istringstream lines(os.str());
  std::string header;
  std::getline(lines, header);
  CHECK(header == "feature_0,feature_1,clean_label,noisy_label,split");
  std::size_t rows = 0;
  for (std::string line; std::getline(lines, line);) ++rows;
  CHECK(rows == 5);

  const std::vector<std::size_t> idx{4, 1};
  const Matrix g = gather_rows(d.features, idx);
  CHECK(g == Matrix{{4.0}, {1.0}});
  CHECK(gather<Label>(d.clean_labels, idx) == std::vector<Label>{4, 1});
}
