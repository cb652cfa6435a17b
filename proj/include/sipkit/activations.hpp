#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace sipkit {

inline constexpr std::uint8_t kPoolingSpatialMean = 1;

/// Per-image descriptors of one convolutional layer, one row per image.
struct ActivationMatrix {
  std::uint32_t layer_id = 0;
  std::uint8_t pooling = kPoolingSpatialMean;
  std::vector<std::string> image_ids;
  Eigen::MatrixXd data;  // N x D
};

// ACTV v1 reader. Throws FormatError (magic, version, layer id, pooling tag,
// duplicate ids), TruncatedFile and NonFiniteData (message names the row).
ActivationMatrix read_activations(const std::filesystem::path& path);
void write_activations(const ActivationMatrix& m, const std::filesystem::path& path);

/// Conventional file name for a layer inside an activations directory.
std::filesystem::path activation_file(const std::filesystem::path& dir, std::uint32_t layer_id);

struct PcaModel {
  Eigen::VectorXd mean;                // D
  Eigen::MatrixXd components;          // k x D, orthonormal rows
  Eigen::VectorXd explained_variance;  // k, nonincreasing

  std::size_t k() const { return static_cast<std::size_t>(components.rows()); }
};

// Eigendecomposition of the sample covariance (N-1 divisor). Each component
// is signed so that its largest-magnitude coordinate is positive (first such
// coordinate on ties). Throws RankError when k > min(N-1, D).
PcaModel fit_pca(const Eigen::MatrixXd& data, std::size_t k = 20);

/// Largest admissible component count for an N x D layer, capped at `wanted`.
/// Layers with D < wanted keep D - 1 components.
std::size_t pca_components_for(std::size_t n, std::size_t d, std::size_t wanted = 20);

/// (data - mean) * components^T. Throws DimensionMismatch on a D mismatch.
Eigen::MatrixXd project(const PcaModel& model, const Eigen::MatrixXd& data);

}  // namespace sipkit
