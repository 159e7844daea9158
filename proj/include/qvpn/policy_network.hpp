#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <vector>

#include "qvpn/random.hpp"

namespace qvpn {

struct DenseLayer {
  std::size_t inputs = 0;
  std::size_t outputs = 0;
  std::vector<double> weights;  ///< outputs x inputs, row-major
  std::vector<double> bias;     ///< outputs
  bool operator==(const DenseLayer&) const = default;
};

/// Feed-forward network: leaky-ReLU hidden layers, linear output layer producing logits.
class PolicyNetwork {
 public:
  /// Per-layer inputs and pre-activations recorded by forward().
  struct Tape {
    std::vector<std::vector<double>> inputs;
    std::vector<std::vector<double>> pre_activations;
  };

  PolicyNetwork() = default;
  PolicyNetwork(std::size_t input_dim, const std::vector<std::size_t>& hidden,
                std::size_t output_dim, Rng& rng, double leaky_slope = 0.01);
  PolicyNetwork(std::vector<DenseLayer> layers, double leaky_slope);

  std::size_t input_dim() const { return layers_.front().inputs; }
  std::size_t output_dim() const { return layers_.back().outputs; }
  const std::vector<DenseLayer>& layers() const noexcept { return layers_; }
  double leaky_slope() const noexcept { return leaky_slope_; }

  std::vector<double> forward(std::span<const double> input, Tape* tape = nullptr) const;
  /// Gradient of a scalar objective w.r.t. all parameters (flattened layout) given its
  /// gradient w.r.t. the logits.
  std::vector<double> backward(const Tape& tape, std::span<const double> logit_grad) const;

  /// Flattened layout: for each layer, weights (row-major) then bias.
  std::size_t parameter_count() const;
  std::vector<double> parameters() const;
  void set_parameters(std::span<const double> params);
  /// params += scale * direction
  void add_scaled(std::span<const double> direction, double scale);
  bool finite() const;

  bool operator==(const PolicyNetwork&) const = default;

 private:
  std::vector<DenseLayer> layers_;
  double leaky_slope_ = 0.01;
};

/// Binary checkpoint, little-endian regardless of host:
///   8 bytes  magic "QVPNPOL\0"
///   u32      version (1)
///   f64      leaky-ReLU slope
///   u32      layer count
///   per layer: u32 inputs, u32 outputs, f64[outputs*inputs] weights, f64[outputs] bias
void save_policy(std::ostream& out, const PolicyNetwork& policy);
PolicyNetwork load_policy(std::istream& in);
void save_policy_file(const std::filesystem::path& path, const PolicyNetwork& policy);
PolicyNetwork load_policy_file(const std::filesystem::path& path);

}  // namespace qvpn
