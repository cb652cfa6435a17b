#include "sipkit/activations.hpp"

#include <cmath>
#include <cstdio>
#include <set>

#include "sipkit/binary_io.hpp"
#include "sipkit/error.hpp"

namespace sipkit {

namespace {
constexpr std::uint32_t kActvVersion = 1;
}

ActivationMatrix read_activations(const std::filesystem::path& path) {
  const auto bytes = detail::read_file_bytes(path);
  detail::ByteReader in(bytes);
  if (bytes.size() < 4 || in.magic(4) != "ACTV") throw Error(ErrorCode::FormatError, path.string() + ": bad magic");
  const auto version = in.u32("version");
  if (version != kActvVersion) {
    throw Error(ErrorCode::FormatError, path.string() + ": unsupported version " + std::to_string(version));
  }
  ActivationMatrix m;
  m.layer_id = in.u32("layer_id");
  const std::size_t n = in.u32("N");
  const std::size_t d = in.u32("D");
  m.pooling = in.u8("pooling tag");
  if (m.layer_id < 1 || m.layer_id > 16) {
    throw Error(ErrorCode::FormatError, path.string() + ": layer id " + std::to_string(m.layer_id) + " outside 1..16");
  }
  if (m.pooling != kPoolingSpatialMean) {
    throw Error(ErrorCode::FormatError, path.string() + ": unsupported pooling tag " + std::to_string(m.pooling));
  }
  if (n < 2 || d < 1) throw Error(ErrorCode::FormatError, path.string() + ": need N >= 2 and D >= 1");

  m.image_ids.reserve(n);
  std::set<std::string> seen;
  for (std::size_t i = 0; i < n; ++i) {
    const auto len = in.u16("image id length");
    auto id = in.text(len, "image id");
    if (!seen.insert(id).second) throw Error(ErrorCode::FormatError, path.string() + ": duplicate image id " + id);
    m.image_ids.push_back(std::move(id));
  }
  in.need(4 * n * d, "activation payload");
  m.data.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < d; ++c) {
      const float v = in.f32("activation");
      if (!std::isfinite(v)) {
        throw Error(ErrorCode::NonFiniteData, path.string() + ": non-finite value in row " + std::to_string(r) +
                                                  " (image " + m.image_ids[r] + ")");
      }
      m.data(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = v;
    }
  }
  if (in.remaining() != 0) throw Error(ErrorCode::FormatError, path.string() + ": trailing bytes after payload");
  return m;
}

void write_activations(const ActivationMatrix& m, const std::filesystem::path& path) {
  if (static_cast<std::size_t>(m.data.rows()) != m.image_ids.size()) {
    throw Error(ErrorCode::DimensionMismatch, "row count differs from image id count");
  }
  detail::ByteWriter out;
  out.raw("ACTV");
  out.u32(kActvVersion);
  out.u32(m.layer_id);
  out.u32(static_cast<std::uint32_t>(m.data.rows()));
  out.u32(static_cast<std::uint32_t>(m.data.cols()));
  out.u8(m.pooling);
  for (const auto& id : m.image_ids) {
    out.u16(static_cast<std::uint16_t>(id.size()));
    out.raw(id);
  }
  for (Eigen::Index r = 0; r < m.data.rows(); ++r)
    for (Eigen::Index c = 0; c < m.data.cols(); ++c) out.f32(static_cast<float>(m.data(r, c)));
  detail::write_file_bytes(path, out.bytes());
}

std::filesystem::path activation_file(const std::filesystem::path& dir, std::uint32_t layer_id) {
  char name[32];
  std::snprintf(name, sizeof(name), "layer_%02u.actv", layer_id);
  return dir / name;
}

std::size_t pca_components_for(std::size_t n, std::size_t d, std::size_t wanted) {
  std::size_t k = d < wanted ? (d > 1 ? d - 1 : 1) : wanted;
  if (n >= 2) k = std::min(k, n - 1);
  return k;
}

PcaModel fit_pca(const Eigen::MatrixXd& data, std::size_t k) {
  const auto n = static_cast<std::size_t>(data.rows());
  const auto d = static_cast<std::size_t>(data.cols());
  if (n < 2) throw Error(ErrorCode::RankError, "PCA needs at least two rows");
  if (k == 0 || k > std::min(n - 1, d)) {
    throw Error(ErrorCode::RankError, "k=" + std::to_string(k) + " exceeds min(N-1, D)=" +
                                          std::to_string(std::min(n - 1, d)));
  }
  PcaModel model;
  model.mean = data.colwise().mean().transpose();
  const Eigen::MatrixXd centered = data.rowwise() - model.mean.transpose();
  const Eigen::MatrixXd cov = (centered.transpose() * centered) / static_cast<double>(n - 1);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov);
  if (solver.info() != Eigen::Success) throw Error(ErrorCode::RankError, "covariance eigendecomposition failed");

  // Eigen returns ascending eigenvalues.
  const auto ki = static_cast<Eigen::Index>(k);
  const auto di = static_cast<Eigen::Index>(d);
  model.components.resize(ki, di);
  model.explained_variance.resize(ki);
  for (Eigen::Index j = 0; j < ki; ++j) {
    const Eigen::Index src = di - 1 - j;
    Eigen::VectorXd v = solver.eigenvectors().col(src);
    Eigen::Index arg = 0;
    double best = -1.0;
    for (Eigen::Index i = 0; i < di; ++i) {
      if (std::fabs(v(i)) > best + 1e-12) {
        best = std::fabs(v(i));
        arg = i;
      }
    }
    if (v(arg) < 0.0) v = -v;
    model.components.row(j) = v.transpose();
    model.explained_variance(j) = std::max(0.0, solver.eigenvalues()(src));
  }
  return model;
}

Eigen::MatrixXd project(const PcaModel& model, const Eigen::MatrixXd& data) {
  if (data.cols() != model.mean.size()) {
    throw Error(ErrorCode::DimensionMismatch, "data has " + std::to_string(data.cols()) + " columns, model expects " +
                                                  std::to_string(model.mean.size()));
  }
  return (data.rowwise() - model.mean.transpose()) * model.components.transpose();
}

}  // namespace sipkit
