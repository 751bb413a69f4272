#include "rankdnn/encoding.hpp"

#include "rankdnn/errors.hpp"

namespace rankdnn {

namespace {

void check_lengths(Eigen::Index a, Eigen::Index b) {
  if (a != b)
    throw InvalidArgument("encoder inputs differ in length: " + std::to_string(a) + " vs " +
                          std::to_string(b));
  if (a == 0) throw InvalidArgument("encoder inputs are empty");
}

}  // namespace

std::string to_string(EncodingScheme scheme) {
  switch (scheme) {
    case EncodingScheme::kronecker: return "kronecker";
    case EncodingScheme::hadamard: return "hadamard";
    case EncodingScheme::disparity: return "disparity";
    case EncodingScheme::combined: return "combined";
    case EncodingScheme::triple_concat: return "triple-concat";
    case EncodingScheme::pairwise_concat_diff: return "pairwise-concat-diff";
  }
  return "unknown";
}

EncodingScheme parse_scheme(std::string_view name) {
  for (EncodingScheme s : kAllSchemes)
    if (to_string(s) == name) return s;
  // Accept snake_case too.
  std::string dashed(name);
  for (char& c : dashed)
    if (c == '_') c = '-';
  for (EncodingScheme s : kAllSchemes)
    if (to_string(s) == dashed) return s;
  throw InvalidArgument("unknown encoder '" + std::string(name) + "'");
}

bool supports_pairs(EncodingScheme scheme) noexcept {
  return scheme == EncodingScheme::kronecker || scheme == EncodingScheme::hadamard ||
         scheme == EncodingScheme::combined;
}

bool is_antisymmetric(EncodingScheme scheme) noexcept {
  return supports_pairs(scheme) || scheme == EncodingScheme::disparity;
}

bool is_known_divergent(EncodingScheme scheme) noexcept {
  return scheme == EncodingScheme::triple_concat;
}

std::size_t encoded_dim(EncodingScheme scheme, std::size_t d) noexcept {
  switch (scheme) {
    case EncodingScheme::kronecker: return d * d;
    case EncodingScheme::hadamard: return d;
    case EncodingScheme::disparity: return d;
    case EncodingScheme::combined: return d * d + d;
    case EncodingScheme::triple_concat: return 3 * d;
    case EncodingScheme::pairwise_concat_diff: return 2 * d;
  }
  return 0;
}

Vector encode_pair(EncodingScheme scheme, const Eigen::Ref<const Vector>& q,
                   const Eigen::Ref<const Vector>& s) {
  if (!supports_pairs(scheme)) throw UnsupportedForPairs(to_string(scheme));
  check_lengths(q.size(), s.size());
  const Eigen::Index d = q.size();
  Vector out(static_cast<Eigen::Index>(encoded_dim(scheme, static_cast<std::size_t>(d))));
  if (scheme != EncodingScheme::hadamard) {
    for (Eigen::Index a = 0; a < d; ++a) out.segment(a * d, d) = q(a) * s;
  }
  if (scheme == EncodingScheme::hadamard) out = q.cwiseProduct(s);
  if (scheme == EncodingScheme::combined) out.tail(d) = q.cwiseProduct(s);
  return out;
}

void encode_triplet_into(EncodingScheme scheme, const Eigen::Ref<const Vector>& q,
                         const Eigen::Ref<const Vector>& i, const Eigen::Ref<const Vector>& j,
                         Eigen::Ref<Eigen::RowVectorXd> out) {
  check_lengths(q.size(), i.size());
  check_lengths(q.size(), j.size());
  const Eigen::Index d = q.size();
  if (static_cast<std::size_t>(out.size()) != encoded_dim(scheme, static_cast<std::size_t>(d)))
    throw InvalidArgument("output buffer has wrong length for " + to_string(scheme));

  switch (scheme) {
    case EncodingScheme::kronecker:
    case EncodingScheme::combined:
      // q ⊗ i − q ⊗ j, computed entrywise as the difference of the two products
      // so that swapping i and j negates the result exactly.
      for (Eigen::Index a = 0; a < d; ++a)
        for (Eigen::Index b = 0; b < d; ++b) out(a * d + b) = q(a) * i(b) - q(a) * j(b);
      if (scheme == EncodingScheme::combined)
        for (Eigen::Index b = 0; b < d; ++b) out(d * d + b) = q(b) * i(b) - q(b) * j(b);
      return;
    case EncodingScheme::hadamard:
      for (Eigen::Index b = 0; b < d; ++b) out(b) = q(b) * i(b) - q(b) * j(b);
      return;
    case EncodingScheme::disparity:
      for (Eigen::Index b = 0; b < d; ++b) out(b) = std::abs(q(b) - i(b)) - std::abs(q(b) - j(b));
      return;
    case EncodingScheme::triple_concat:
      out.segment(0, d) = q.transpose();
      out.segment(d, d) = i.transpose();
      out.segment(2 * d, d) = j.transpose();
      return;
    case EncodingScheme::pairwise_concat_diff:
      // (q; i) − (q; j): the query half cancels.
      out.segment(0, d).setZero();
      out.segment(d, d) = (i - j).transpose();
      return;
  }
}

Vector encode_triplet(EncodingScheme scheme, const Eigen::Ref<const Vector>& q,
                      const Eigen::Ref<const Vector>& i, const Eigen::Ref<const Vector>& j) {
  check_lengths(q.size(), i.size());
  Eigen::RowVectorXd out(static_cast<Eigen::Index>(encoded_dim(scheme, static_cast<std::size_t>(q.size()))));
  encode_triplet_into(scheme, q, i, j, out);
  return out.transpose();
}

}  // namespace rankdnn
