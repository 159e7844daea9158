#include "qvpn/policy_network.hpp"

#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <stdexcept>

#include "qvpn/errors.hpp"

namespace qvpn {

namespace {

constexpr std::array<char, 8> kMagic{'Q', 'V', 'P', 'N', 'P', 'O', 'L', '\0'};
constexpr std::uint32_t kVersion = 1;

void put_u32(std::ostream& out, std::uint32_t v) {
  std::array<char, 4> b{};
  for (int i = 0; i < 4; ++i) b[static_cast<std::size_t>(i)] = static_cast<char>((v >> (8 * i)) & 0xFF);
  out.write(b.data(), 4);
}

void put_f64(std::ostream& out, double d) {
  const auto v = std::bit_cast<std::uint64_t>(d);
  std::array<char, 8> b{};
  for (int i = 0; i < 8; ++i) b[static_cast<std::size_t>(i)] = static_cast<char>((v >> (8 * i)) & 0xFF);
  out.write(b.data(), 8);
}

std::uint64_t get_le(std::istream& in, int bytes) {
  std::array<unsigned char, 8> b{};
  in.read(reinterpret_cast<char*>(b.data()), bytes);
  if (!in) throw ParseError("truncated policy checkpoint");
  std::uint64_t v = 0;
  for (int i = bytes - 1; i >= 0; --i) v = (v << 8) | b[static_cast<std::size_t>(i)];
  return v;
}

double leaky(double x, double slope) { return x > 0.0 ? x : slope * x; }

}  // namespace

PolicyNetwork::PolicyNetwork(std::size_t input_dim, const std::vector<std::size_t>& hidden,
                             std::size_t output_dim, Rng& rng, double leaky_slope)
    : leaky_slope_(leaky_slope) {
  if (input_dim == 0 || output_dim == 0) throw std::invalid_argument("empty policy dimensions");
  std::vector<std::size_t> dims{input_dim};
  dims.insert(dims.end(), hidden.begin(), hidden.end());
  dims.push_back(output_dim);
  for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
    DenseLayer layer;
    layer.inputs = dims[l];
    layer.outputs = dims[l + 1];
    const double scale = std::sqrt(2.0 / static_cast<double>(layer.inputs));
    layer.weights.resize(layer.inputs * layer.outputs);
    for (auto& w : layer.weights) w = scale * rng.normal();
    layer.bias.assign(layer.outputs, 0.0);
    layers_.push_back(std::move(layer));
  }
}

PolicyNetwork::PolicyNetwork(std::vector<DenseLayer> layers, double leaky_slope)
    : layers_(std::move(layers)), leaky_slope_(leaky_slope) {
  if (layers_.empty()) throw std::invalid_argument("policy needs at least one layer");
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    const auto& layer = layers_[l];
    if (layer.weights.size() != layer.inputs * layer.outputs ||
        layer.bias.size() != layer.outputs)
      throw std::invalid_argument("policy layer has inconsistent shapes");
    if (l > 0 && layers_[l - 1].outputs != layer.inputs)
      throw std::invalid_argument("policy layers do not chain");
  }
}

std::vector<double> PolicyNetwork::forward(std::span<const double> input, Tape* tape) const {
  if (input.size() != input_dim()) throw std::invalid_argument("policy input has wrong size");
  std::vector<double> x(input.begin(), input.end());
  if (tape) {
    tape->inputs.clear();
    tape->pre_activations.clear();
  }
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    const auto& layer = layers_[l];
    std::vector<double> z(layer.bias);
    for (std::size_t o = 0; o < layer.outputs; ++o) {
      const double* row = &layer.weights[o * layer.inputs];
      double acc = 0.0;
      for (std::size_t i = 0; i < layer.inputs; ++i) acc += row[i] * x[i];
      z[o] += acc;
    }
    if (tape) {
      tape->inputs.push_back(x);
      tape->pre_activations.push_back(z);
    }
    if (l + 1 < layers_.size()) {
      for (auto& v : z) v = leaky(v, leaky_slope_);
    }
    x = std::move(z);
  }
  return x;
}

std::vector<double> PolicyNetwork::backward(const Tape& tape,
                                            std::span<const double> logit_grad) const {
  if (logit_grad.size() != output_dim()) throw std::invalid_argument("logit gradient size");
  std::vector<std::size_t> offset(layers_.size());
  std::size_t total = 0;
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    offset[l] = total;
    total += layers_[l].weights.size() + layers_[l].bias.size();
  }
  std::vector<double> grad(total, 0.0);
  std::vector<double> delta(logit_grad.begin(), logit_grad.end());
  for (std::size_t l = layers_.size(); l-- > 0;) {
    const auto& layer = layers_[l];
    const auto& x = tape.inputs[l];
    double* gw = &grad[offset[l]];
    double* gb = gw + layer.weights.size();
    for (std::size_t o = 0; o < layer.outputs; ++o) {
      gb[o] = delta[o];
      for (std::size_t i = 0; i < layer.inputs; ++i) gw[o * layer.inputs + i] = delta[o] * x[i];
    }
    if (l == 0) break;
    std::vector<double> prev(layer.inputs, 0.0);
    for (std::size_t o = 0; o < layer.outputs; ++o) {
      const double* row = &layer.weights[o * layer.inputs];
      for (std::size_t i = 0; i < layer.inputs; ++i) prev[i] += row[i] * delta[o];
    }
    const auto& z = tape.pre_activations[l - 1];
    for (std::size_t i = 0; i < prev.size(); ++i) prev[i] *= z[i] > 0.0 ? 1.0 : leaky_slope_;
    delta = std::move(prev);
  }
  return grad;
}

std::size_t PolicyNetwork::parameter_count() const {
  std::size_t n = 0;
  for (const auto& l : layers_) n += l.weights.size() + l.bias.size();
  return n;
}

std::vector<double> PolicyNetwork::parameters() const {
  std::vector<double> out;
  out.reserve(parameter_count());
  for (const auto& l : layers_) {
    out.insert(out.end(), l.weights.begin(), l.weights.end());
    out.insert(out.end(), l.bias.begin(), l.bias.end());
  }
  return out;
}

void PolicyNetwork::set_parameters(std::span<const double> params) {
  if (params.size() != parameter_count()) throw std::invalid_argument("parameter count");
  std::size_t k = 0;
  for (auto& l : layers_) {
    for (auto& w : l.weights) w = params[k++];
    for (auto& b : l.bias) b = params[k++];
  }
}

void PolicyNetwork::add_scaled(std::span<const double> direction, double scale) {
  if (direction.size() != parameter_count()) throw std::invalid_argument("parameter count");
  std::size_t k = 0;
  for (auto& l : layers_) {
    for (auto& w : l.weights) w += scale * direction[k++];
    for (auto& b : l.bias) b += scale * direction[k++];
  }
}

bool PolicyNetwork::finite() const {
  for (const auto& l : layers_) {
    for (double w : l.weights)
      if (!std::isfinite(w)) return false;
    for (double b : l.bias)
      if (!std::isfinite(b)) return false;
  }
  return true;
}

void save_policy(std::ostream& out, const PolicyNetwork& policy) {
  out.write(kMagic.data(), kMagic.size());
  put_u32(out, kVersion);
  put_f64(out, policy.leaky_slope());
  put_u32(out, static_cast<std::uint32_t>(policy.layers().size()));
  for (const auto& l : policy.layers()) {
    put_u32(out, static_cast<std::uint32_t>(l.inputs));
    put_u32(out, static_cast<std::uint32_t>(l.outputs));
    for (double w : l.weights) put_f64(out, w);
    for (double b : l.bias) put_f64(out, b);
  }
}

PolicyNetwork load_policy(std::istream& in) {
  std::array<char, 8> magic{};
  in.read(magic.data(), magic.size());
  if (!in || magic != kMagic) throw ParseError("not a policy checkpoint (bad magic)");
  if (get_le(in, 4) != kVersion) throw ParseError("unsupported policy checkpoint version");
  const double slope = std::bit_cast<double>(get_le(in, 8));
  const auto count = get_le(in, 4);
  std::vector<DenseLayer> layers;
  for (std::uint64_t l = 0; l < count; ++l) {
    DenseLayer layer;
    layer.inputs = static_cast<std::size_t>(get_le(in, 4));
    layer.outputs = static_cast<std::size_t>(get_le(in, 4));
    if (layer.inputs * layer.outputs > (std::size_t{1} << 28))
      throw ParseError("policy checkpoint layer too large");
    layer.weights.resize(layer.inputs * layer.outputs);
    for (auto& w : layer.weights) w = std::bit_cast<double>(get_le(in, 8));
    layer.bias.resize(layer.outputs);
    for (auto& b : layer.bias) b = std::bit_cast<double>(get_le(in, 8));
    layers.push_back(std::move(layer));
  }
  try {
    return PolicyNetwork(std::move(layers), slope);
  } catch (const std::invalid_argument& e) {
    throw ParseError(std::string("inconsistent policy checkpoint: ") + e.what());
  }
}

void save_policy_file(const std::filesystem::path& path, const PolicyNetwork& policy) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write policy checkpoint '" + path.string() + "'");
  save_policy(out, policy);
}

PolicyNetwork load_policy_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open policy checkpoint '" + path.string() + "'");
  return load_policy(in);
}

}  // namespace qvpn
