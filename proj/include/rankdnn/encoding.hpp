#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <string_view>

#include "rankdnn/types.hpp"

namespace rankdnn {

enum class EncodingScheme {
  kronecker,
  hadamard,
  disparity,
  combined,
  triple_concat,
  pairwise_concat_diff,
};

inline constexpr std::array<EncodingScheme, 6> kAllSchemes{
    EncodingScheme::kronecker,     EncodingScheme::hadamard,
    EncodingScheme::disparity,     EncodingScheme::combined,
    EncodingScheme::triple_concat, EncodingScheme::pairwise_concat_diff};

// CLI spelling: kronecker, hadamard, disparity, combined, triple-concat, pairwise-concat-diff.
std::string to_string(EncodingScheme scheme);
EncodingScheme parse_scheme(std::string_view name);

bool supports_pairs(EncodingScheme scheme) noexcept;
// Encoders whose output flips sign when the two supports are swapped.
bool is_antisymmetric(EncodingScheme scheme) noexcept;
// Triple concatenation is kept for ablations; it is expected to train badly.
bool is_known_divergent(EncodingScheme scheme) noexcept;

std::size_t encoded_dim(EncodingScheme scheme, std::size_t d) noexcept;

// Kronecker output is the row-major flattened outer product: entry a*d + b = q[a] * s[b].
Vector encode_pair(EncodingScheme scheme, const Eigen::Ref<const Vector>& q,
                   const Eigen::Ref<const Vector>& s);

Vector encode_triplet(EncodingScheme scheme, const Eigen::Ref<const Vector>& q,
                      const Eigen::Ref<const Vector>& i, const Eigen::Ref<const Vector>& j);

// Writes encode_triplet(q, i, j) into `out` (length encoded_dim) without allocating.
void encode_triplet_into(EncodingScheme scheme, const Eigen::Ref<const Vector>& q,
                         const Eigen::Ref<const Vector>& i, const Eigen::Ref<const Vector>& j,
                         Eigen::Ref<Eigen::RowVectorXd> out);

}  // namespace rankdnn
