#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "rankdnn/errors.hpp"
#include "rankdnn/feature_store.hpp"
#include "rankdnn/synthetic_tasks.hpp"

using namespace rankdnn;
namespace fs = std::filesystem;

namespace {

fs::path temp_file(const std::string& name) {
  return fs::temp_directory_path() / ("rankdnn_fs_" + std::to_string(::getpid()) + "_" + name);
}

std::vector<char> slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

void dump(const fs::path& p, const std::vector<char>& bytes) {
  std::ofstream out(p, std::ios::binary);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

// Brute-force nearest centroid: centroids from the first half of each class,
// accuracy over the second half.
double nearest_centroid_accuracy(const FeatureSet& set) {
  std::vector<std::vector<double>> centroids;
  std::vector<ClassId> ids;
  for (const auto& [c, rows] : set.class_index()) {
    std::vector<double> mean(set.dim(), 0.0);
    const std::size_t half = rows.size() / 2;
    for (std::size_t r = 0; r < half; ++r)
      for (std::size_t k = 0; k < set.dim(); ++k) mean[k] += set.vectors()(rows[r], k) / half;
    centroids.push_back(mean);
    ids.push_back(c);
  }
  std::size_t correct = 0, total = 0;
  for (const auto& [c, rows] : set.class_index()) {
    for (std::size_t r = rows.size() / 2; r < rows.size(); ++r) {
      double best = 1e300;
      ClassId pick = 0;
      for (std::size_t m = 0; m < centroids.size(); ++m) {
        double d = 0;
        for (std::size_t k = 0; k < set.dim(); ++k) {
          double t = set.vectors()(rows[r], k) - centroids[m][k];
          d += t * t;
        }
        if (d < best) best = d, pick = ids[m];
      }
      correct += pick == c;
      ++total;
    }
  }
  return double(correct) / double(total);
}

}  // namespace

TEST_CASE("zero-noise synthetic vectors sit on their centers") {
  SyntheticSpec spec{2, 1, 3, 10.0, 0.0, 3};
  FeatureSet s = generate_synthetic(spec);
  REQUIRE(s.size() == 2);
  // With one sample per class and no noise, a second draw with more samples
  // must reproduce the same first row for each class center.
  spec.per_class = 4;
  FeatureSet t = generate_synthetic(spec);
  CHECK(t.row(0) == s.row(0));
  CHECK(t.row(4) == s.row(1));
  for (std::size_t k = 1; k < 4; ++k) CHECK(t.row(k) == t.row(0));
  CHECK(t.row(4) == t.row(7));
  CHECK(t.row(0) != t.row(4));
}

TEST_CASE("synthetic generation is deterministic in the spec") {
  SyntheticSpec spec{5, 20, 16, 10.0, 1.0, 42};
  CHECK(generate_synthetic(spec) == generate_synthetic(spec));
  spec.seed = 43;
  CHECK_FALSE(generate_synthetic(SyntheticSpec{5, 20, 16, 10.0, 1.0, 42}) == generate_synthetic(spec));
}

TEST_CASE("well separated synthetic data is nearest-centroid separable") {
  FeatureSet s = generate_synthetic(SyntheticSpec{5, 600, 640, 10.0, 1.0, 7});
  CHECK(s.num_classes() == 5);
  CHECK(nearest_centroid_accuracy(s) > 0.99);
}

TEST_CASE("synthetic spec validation") {
  CHECK_THROWS_AS(generate_synthetic(SyntheticSpec{0, 1, 1, 1.0, 1.0, 0}), InvalidArgument);
  CHECK_THROWS_AS(generate_synthetic(SyntheticSpec{1, 1, 1, 1.0, -1.0, 0}), InvalidArgument);
  CHECK_THROWS_AS(generate_synthetic(SyntheticSpec{1, 1, 1, 0.0, 1.0, 0}), InvalidArgument);
}

TEST_CASE("FeatureSet rejects bad input") {
  Matrix m(2, 2);
  m << 1, 2, 3, 4;
  CHECK_THROWS_AS(FeatureSet(m, {0}), InvalidArgument);
  m(1, 1) = std::nan("");
  CHECK_THROWS_AS(FeatureSet(m, {0, 1}), InvalidArgument);
}

TEST_CASE("FVEC round trip of a single vector") {
  Matrix m(1, 2);
  m << 1.5, -2.0;
  FeatureSet s(m, {0});
  auto p = temp_file("one.rkdn");
  write_feature_set(s, p);
  CHECK(read_feature_set(p) == s);
  CHECK(fs::file_size(p) == 4 + 4 * 4 + 2 * 4 + 4);
  fs::remove(p);
}

TEST_CASE("FVEC header layout is little-endian with no padding") {
  Matrix m(2, 3);
  m << 1, 2, 3, 4, 5, 6;
  auto p = temp_file("layout.rkdn");
  write_feature_set(FeatureSet(m, {7, 9}), p);
  auto b = slurp(p);
  REQUIRE(b.size() == 4 + 16 + 24 + 8);
  CHECK(std::string(b.begin(), b.begin() + 4) == "RKDN");
  auto u32_at = [&](std::size_t off) {
    std::uint32_t v = 0;
    for (int k = 3; k >= 0; --k) v = (v << 8) | static_cast<unsigned char>(b[off + k]);
    return v;
  };
  CHECK(u32_at(4) == 1);
  CHECK(u32_at(8) == 2);
  CHECK(u32_at(12) == 3);
  CHECK(u32_at(16) == 1);
  CHECK(u32_at(20) == 0x3f800000u);  // 1.0f
  CHECK(u32_at(44) == 7);
  CHECK(u32_at(48) == 9);
  fs::remove(p);
}

TEST_CASE("FVEC round trip is bit exact for float32 data, labeled or not") {
  FeatureSet s = generate_task(TaskSpec{TaskKind::scalemix, 7, 5, 9, 1.0, 0.5, 1.0, 11});
  auto p = temp_file("rt.rkdn");
  write_feature_set(s, p);
  CHECK(read_feature_set(p) == s);
  FeatureSet u = FeatureSet::unlabeled(s.vectors());
  write_feature_set(u, p);
  FeatureSet back = read_feature_set(p);
  CHECK_FALSE(back.has_labels());
  CHECK(back == u);
  fs::remove(p);
}

TEST_CASE("FVEC reader reports bad magic, version and truncation") {
  Matrix m(3, 4);
  m.setConstant(0.25);
  auto p = temp_file("bad.rkdn");
  write_feature_set(FeatureSet(m, {0, 1, 2}), p);
  const auto good = slurp(p);

  auto bytes = good;
  bytes[0] = 'X';
  dump(p, bytes);
  try {
    read_feature_set(p);
    FAIL("expected a format error");
  } catch (const FormatError& e) {
    CHECK(e.field() == "magic");
  }

  bytes = good;
  bytes[4] = 2;
  dump(p, bytes);
  CHECK_THROWS_AS(read_feature_set(p), FormatError);

  bytes = good;
  bytes.resize(bytes.size() - 13);
  dump(p, bytes);
  try {
    read_feature_set(p);
    FAIL("expected a truncation error");
  } catch (const TruncationError& e) {
    CHECK(e.expected_bytes() == 3 * 4 * 4 + 3 * 4);
    CHECK(e.actual_bytes() == 3 * 4 * 4 + 3 * 4 - 13);
  }

  bytes.resize(10);
  dump(p, bytes);
  CHECK_THROWS_AS(read_feature_set(p), FormatError);
  fs::remove(p);
  CHECK_THROWS(read_feature_set(p));
}

TEST_CASE("split_by_class") {
  FeatureSet s = generate_synthetic(SyntheticSpec{5, 4, 3, 10.0, 1.0, 1});
  std::vector<ClassId> a{0, 1, 2}, b{3, 4};
  auto [tr, te] = split_by_class(s, a, b);
  CHECK(tr.size() == 12);
  CHECK(te.size() == 8);
  CHECK(tr.classes() == a);
  CHECK(te.classes() == b);

  SUBCASE("overlap is rejected") {
    std::vector<ClassId> x{0, 1}, y{1, 2};
    CHECK_THROWS_AS(split_by_class(s, x, y), InvalidArgument);
  }
  SUBCASE("unknown and repeated ids are rejected") {
    std::vector<ClassId> x{0, 9}, y{1};
    CHECK_THROWS_AS(split_by_class(s, x, y), InvalidArgument);
    std::vector<ClassId> z{0, 0};
    CHECK_THROWS_AS(split_by_class(s, z, y), InvalidArgument);
  }
  SUBCASE("re-merging the splits gives back the original rows") {
    std::vector<std::vector<double>> orig, merged;
    for (std::size_t r = 0; r < s.size(); ++r)
      orig.emplace_back(s.row(r).begin(), s.row(r).end());
    for (const FeatureSet* part : {&tr, &te})
      for (std::size_t r = 0; r < part->size(); ++r)
        merged.emplace_back(part->row(r).begin(), part->row(r).end());
    std::sort(orig.begin(), orig.end());
    std::sort(merged.begin(), merged.end());
    CHECK(orig == merged);
  }
}

TEST_CASE("task generators") {
  for (TaskKind k : {TaskKind::gaussian, TaskKind::scalemix, TaskKind::gated}) {
    CAPTURE(to_string(k));
    TaskSpec spec{k, 6, 5, 8, 2.0, 0.5, 1.0, 5};
    FeatureSet s = generate_task(spec);
    CHECK(s.size() == 30);
    CHECK(s.dim() == 8);
    CHECK(s.num_classes() == 6);
    CHECK(generate_task(spec) == s);
    CHECK(parse_task_kind(to_string(k)) == k);
  }
  CHECK_THROWS_AS(parse_task_kind("xor"), InvalidArgument);
  CHECK_THROWS_AS(generate_task(TaskSpec{TaskKind::gated, 2, 2, 1, 1.0, 1.0, 1.0, 0}), InvalidArgument);

  SUBCASE("gaussian task matches generate_synthetic") {
    FeatureSet a = generate_task(TaskSpec{TaskKind::gaussian, 4, 3, 5, 3.0, 1.0, 0.0, 9});
    FeatureSet b = generate_synthetic(SyntheticSpec{4, 3, 5, 3.0, 1.0, 9});
    CHECK(a == b);
  }
  SUBCASE("scalemix with no noise keeps every sample on its class ray") {
    FeatureSet s = generate_task(TaskSpec{TaskKind::scalemix, 3, 4, 6, 1.0, 0.0, 1.0, 2});
    for (std::size_t r = 1; r < 4; ++r) {
      Vector a = s.row(0).transpose(), b = s.row(r).transpose();
      CHECK(std::abs(a.normalized().dot(b.normalized()) - 1.0) < 1e-6);
    }
  }
}
