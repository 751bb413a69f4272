#include "rankdnn/ranksvm.hpp"

#include <algorithm>
#include <numeric>
#include <random>
#include <vector>

#include "rankdnn/binary_io.hpp"
#include "rankdnn/errors.hpp"

namespace rankdnn {

namespace {

constexpr io::Magic kMagic{'R', 'K', 'S', 'V'};
constexpr std::uint32_t kVersion = 1;

using RowSource = std::function<void(std::size_t, Eigen::Ref<Eigen::RowVectorXd>)>;

SvmModel dual_cd(std::size_t n, std::size_t width, const RowSource& row, std::span<const int> y,
                 double c_param, std::size_t epochs, std::uint64_t seed) {
  if (n == 0) throw InvalidArgument("RankSVM needs at least one training triplet");
  if (!(c_param > 0)) throw InvalidArgument("RankSVM C must be > 0");
  if (epochs == 0) throw InvalidArgument("RankSVM needs at least one epoch");

  // Dual coordinate descent: w = sum alpha_k y_k z_k with 0 <= alpha_k <= C.
  Vector w = Vector::Zero(static_cast<Eigen::Index>(width));
  std::vector<double> alpha(n, 0.0), q_diag(n, -1.0);
  Eigen::RowVectorXd z(static_cast<Eigen::Index>(width));
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::mt19937_64 rng(seed);

  for (std::size_t e = 0; e < epochs; ++e) {
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t k : order) {
      row(k, z);
      if (q_diag[k] < 0) q_diag[k] = z.squaredNorm();
      if (q_diag[k] == 0.0) continue;
      const double g = y[k] * z.dot(w.transpose()) - 1.0;
      const double a = alpha[k];
      const double projected = a == 0.0 ? std::min(g, 0.0) : a == c_param ? std::max(g, 0.0) : g;
      if (projected == 0.0) continue;
      alpha[k] = std::clamp(a - g / q_diag[k], 0.0, c_param);
      w += ((alpha[k] - a) * y[k]) * z.transpose();
    }
  }
  if (!w.allFinite()) throw TrainingDiverged(0, "RankSVM weights became non-finite");
  return SvmModel{std::move(w), c_param, epochs, seed};
}

}  // namespace

SvmModel train_ranksvm_encoded(const Matrix& z, std::span<const int> y, double c_param,
                               std::size_t epochs, std::uint64_t seed) {
  if (static_cast<std::size_t>(z.rows()) != y.size())
    throw InvalidArgument("RankSVM: row count does not match label count");
  for (int label : y)
    if (label != 1 && label != -1) throw InvalidArgument("RankSVM labels must be +1 or -1");
  return dual_cd(
      y.size(), static_cast<std::size_t>(z.cols()),
      [&](std::size_t k, Eigen::Ref<Eigen::RowVectorXd> out) { out = z.row(static_cast<Eigen::Index>(k)); },
      y, c_param, epochs, seed);
}

SvmModel train_ranksvm(const TripletSet& triplets, EncodingScheme scheme, double c_param,
                       std::size_t epochs, std::uint64_t seed) {
  if (!supports_pairs(scheme))
    throw InvalidArgument("RankSVM needs a pair encoder (kronecker, hadamard or combined), got " +
                          to_string(scheme));
  if (triplets.triplets.empty()) throw InvalidArgument("RankSVM needs at least one training triplet");
  const auto d = static_cast<std::size_t>(triplets.pool.front().feature.size());
  std::vector<int> y;
  y.reserve(triplets.triplets.size());
  for (const LabeledTriplet& t : triplets.triplets) y.push_back(t.label);
  return dual_cd(
      y.size(), encoded_dim(scheme, d),
      [&](std::size_t k, Eigen::Ref<Eigen::RowVectorXd> out) {
        const LabeledTriplet& t = triplets.triplets[k];
        encode_triplet_into(scheme, triplets.pool[t.query].feature, triplets.pool[t.support_i].feature,
                            triplets.pool[t.support_j].feature, out);
      },
      y, c_param, epochs, seed);
}

int svm_decide(const SvmModel& model, const Eigen::Ref<const Vector>& encoded) {
  if (encoded.size() != model.w.size())
    throw InvalidArgument("RankSVM input has length " + std::to_string(encoded.size()) + ", expected " +
                          std::to_string(model.w.size()));
  return model.w.dot(encoded) > 0.0 ? 1 : -1;
}

double svm_objective(const Vector& w, const Matrix& z, std::span<const int> y, double c_param) {
  double hinge = 0.0;
  for (Eigen::Index r = 0; r < z.rows(); ++r)
    hinge += std::max(0.0, 1.0 - y[static_cast<std::size_t>(r)] * z.row(r).dot(w.transpose()));
  return 0.5 * w.squaredNorm() + c_param * hinge;
}

std::vector<bool> SvmRanker::decide(const Matrix& encoded) const {
  if (encoded.cols() != model_.w.size()) throw InvalidArgument("RankSVM input width mismatch");
  Vector scores = encoded * model_.w;
  std::vector<bool> out(static_cast<std::size_t>(scores.size()));
  for (Eigen::Index r = 0; r < scores.size(); ++r) out[static_cast<std::size_t>(r)] = scores(r) > 0.0;
  return out;
}

void write_svm(const SvmModel& model, const std::filesystem::path& path) {
  io::ByteWriter w;
  w.magic(kMagic);
  w.u32(kVersion);
  w.u32(static_cast<std::uint32_t>(model.w.size()));
  w.f32s(std::span<const double>(model.w.data(), static_cast<std::size_t>(model.w.size())));
  w.save(path);
}

SvmModel read_svm(const std::filesystem::path& path) {
  auto r = io::ByteReader::load(path);
  r.expect_magic(kMagic);
  r.expect_version(kVersion);
  const std::uint32_t dim = r.u32("dim");
  if (dim == 0) throw FormatError("dim", "must be positive");
  SvmModel m;
  m.w.resize(dim);
  r.f32s(std::span<double>(m.w.data(), dim));
  return m;
}

}  // namespace rankdnn
