#include <doctest.h>

#include <cmath>
#include <random>

#include "rankdnn/encoding.hpp"
#include "rankdnn/errors.hpp"

using namespace rankdnn;

namespace {

Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index k = 0;
  for (double x : v) out(k++) = x;
  return out;
}

Vector random_vec(std::mt19937_64& rng, Eigen::Index d) {
  std::normal_distribution<double> normal(0.0, 2.0);
  Vector v(d);
  for (Eigen::Index k = 0; k < d; ++k) v(k) = normal(rng);
  return v;
}

}  // namespace

TEST_CASE("encoded dimensions") {
  CHECK(encoded_dim(EncodingScheme::kronecker, 80) == 6400);
  CHECK(encoded_dim(EncodingScheme::kronecker, 640) == 409600);
  CHECK(encoded_dim(EncodingScheme::combined, 80) == 6480);
  CHECK(encoded_dim(EncodingScheme::hadamard, 80) == 80);
  CHECK(encoded_dim(EncodingScheme::disparity, 80) == 80);
  CHECK(encoded_dim(EncodingScheme::triple_concat, 80) == 240);
  CHECK(encoded_dim(EncodingScheme::pairwise_concat_diff, 80) == 160);
}

TEST_CASE("scheme names round trip") {
  for (EncodingScheme s : kAllSchemes) CHECK(parse_scheme(to_string(s)) == s);
  CHECK(parse_scheme("triple_concat") == EncodingScheme::triple_concat);
  CHECK(to_string(EncodingScheme::pairwise_concat_diff) == "pairwise-concat-diff");
  CHECK_THROWS_AS(parse_scheme("polynomial"), InvalidArgument);
  CHECK(is_known_divergent(EncodingScheme::triple_concat));
  CHECK_FALSE(is_known_divergent(EncodingScheme::kronecker));
}

TEST_CASE("pair encodings by hand") {
  Vector q = vec({1, 2}), s = vec({3, 4});
  CHECK(encode_pair(EncodingScheme::kronecker, q, s) == vec({3, 4, 6, 8}));
  CHECK(encode_pair(EncodingScheme::hadamard, q, s) == vec({3, 8}));
  CHECK(encode_pair(EncodingScheme::combined, q, s) == vec({3, 4, 6, 8, 3, 8}));
  CHECK_THROWS_AS(encode_pair(EncodingScheme::triple_concat, q, s), UnsupportedForPairs);
  CHECK_THROWS_AS(encode_pair(EncodingScheme::pairwise_concat_diff, q, s), UnsupportedForPairs);
  CHECK_THROWS_AS(encode_pair(EncodingScheme::kronecker, q, vec({1, 2, 3})), InvalidArgument);
}

TEST_CASE("kronecker of basis vectors is one-hot at a*d+b") {
  const Eigen::Index d = 4;
  for (Eigen::Index a = 0; a < d; ++a)
    for (Eigen::Index b = 0; b < d; ++b) {
      Vector out = encode_pair(EncodingScheme::kronecker, Vector::Unit(d, a), Vector::Unit(d, b));
      CHECK(out.sum() == 1.0);
      CHECK(out(a * d + b) == 1.0);
    }
}

TEST_CASE("triplet encodings by hand") {
  Vector q = vec({1, 2}), i = vec({3, 4}), j = vec({1, 0});
  CHECK(encode_triplet(EncodingScheme::kronecker, q, i, j) == vec({2, 4, 4, 8}));
  CHECK(encode_triplet(EncodingScheme::hadamard, q, i, j) == vec({2, 8}));
  CHECK(encode_triplet(EncodingScheme::disparity, q, i, j) == vec({2, 0}));
  CHECK(encode_triplet(EncodingScheme::triple_concat, q, i, j) == vec({1, 2, 3, 4, 1, 0}));
  CHECK(encode_triplet(EncodingScheme::pairwise_concat_diff, q, i, j) == vec({0, 0, 2, 4}));
}

TEST_CASE("equal supports encode to zero") {
  std::mt19937_64 rng(1);
  Vector q = random_vec(rng, 6), i = random_vec(rng, 6);
  for (EncodingScheme s : {EncodingScheme::kronecker, EncodingScheme::hadamard, EncodingScheme::disparity,
                           EncodingScheme::combined})
    CHECK(encode_triplet(s, q, i, i).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("kronecker matches a two-loop oracle") {
  std::mt19937_64 rng(2);
  for (int t = 0; t < 50; ++t) {
    Vector q = random_vec(rng, 5), i = random_vec(rng, 5), j = random_vec(rng, 5);
    Vector got = encode_triplet(EncodingScheme::kronecker, q, i, j);
    double worst = 0;
    for (int a = 0; a < 5; ++a)
      for (int b = 0; b < 5; ++b) worst = std::max(worst, std::abs(got(a * 5 + b) - (q(a) * i(b) - q(a) * j(b))));
    CHECK(worst <= 1e-12);
  }
}

TEST_CASE("antisymmetry under swapping the supports") {
  std::mt19937_64 rng(3);
  for (EncodingScheme s : kAllSchemes) {
    if (!is_antisymmetric(s)) continue;
    CAPTURE(to_string(s));
    double worst = 0;
    for (int t = 0; t < 200; ++t) {
      Vector q = random_vec(rng, 7), i = random_vec(rng, 7), j = random_vec(rng, 7);
      worst = std::max(worst, (encode_triplet(s, q, i, j) + encode_triplet(s, q, j, i)).cwiseAbs().maxCoeff());
    }
    CHECK(worst <= 1e-12);
  }
  CHECK_FALSE(is_antisymmetric(EncodingScheme::triple_concat));
}

TEST_CASE("kronecker pair encoding is bilinear and invertible") {
  std::mt19937_64 rng(4);
  Vector q = random_vec(rng, 6), s = random_vec(rng, 6);
  const double alpha = -2.75;
  Vector scaled = encode_pair(EncodingScheme::kronecker, alpha * q, s);
  CHECK((scaled - alpha * encode_pair(EncodingScheme::kronecker, q, s)).cwiseAbs().maxCoeff() <= 1e-12);

  Vector e = encode_pair(EncodingScheme::kronecker, q, s);
  for (Eigen::Index a = 0; a < 6; ++a) {
    Vector recovered = e.segment(a * 6, 6) / q(a);
    CHECK((recovered - s).cwiseAbs().maxCoeff() <= 1e-10);
  }
}

TEST_CASE("pairwise concat diff drops the query") {
  std::mt19937_64 rng(5);
  Vector q1 = random_vec(rng, 4), q2 = random_vec(rng, 4), i = random_vec(rng, 4), j = random_vec(rng, 4);
  Vector a = encode_triplet(EncodingScheme::pairwise_concat_diff, q1, i, j);
  CHECK(a.head(4).cwiseAbs().maxCoeff() == 0.0);
  CHECK(a == encode_triplet(EncodingScheme::pairwise_concat_diff, q2, i, j));
}

TEST_CASE("encode_triplet_into checks the buffer") {
  Vector q = vec({1, 2});
  Eigen::RowVectorXd buf(3);
  CHECK_THROWS_AS(encode_triplet_into(EncodingScheme::kronecker, q, q, q, buf), InvalidArgument);
  Eigen::RowVectorXd ok(4);
  encode_triplet_into(EncodingScheme::kronecker, q, vec({3, 4}), vec({1, 0}), ok);
  CHECK(ok.transpose() == vec({2, 4, 4, 8}));
}
