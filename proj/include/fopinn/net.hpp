#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "fopinn/errors.hpp"

namespace fopinn {

enum class OutputTransform { Identity, SoftplusFirst };

/// Overflow-safe ln(1+e^z): z for z > 30, e^z for z < -30.
double softplus(double z);
/// d/dz softplus = logistic sigmoid, computed overflow-safely.
double sigmoid(double z);

/// Fully connected feed-forward network, tanh hidden layers, affine output
/// layer, parameters stored as one flat vector (per layer: row-major W then b).
struct MlpNet {
    std::vector<int> widths;     // [d, n1, ..., c]
    OutputTransform transform = OutputTransform::Identity;
    std::vector<double> params;  // length sum n_i (n_{i-1} + 1)

    MlpNet() = default;
    explicit MlpNet(std::vector<int> layer_widths,
                    OutputTransform t = OutputTransform::Identity);

    int input_dim() const { return widths.front(); }
    int output_dim() const { return widths.back(); }
    int num_layers() const { return static_cast<int>(widths.size()) - 1; }
    int param_count() const;
    /// Offset of layer k's weight block; biases follow the weights.
    int weight_offset(int layer) const;
    int bias_offset(int layer) const;

    /// Glorot-uniform weights, zero biases, fully determined by the seed.
    void init_glorot(std::uint64_t seed);

    std::vector<double> forward(std::span<const double> x) const;

    void save_binary(const std::string& path) const;
    static MlpNet load_binary(const std::string& path,
                              OutputTransform t = OutputTransform::Identity);
    void save_text(const std::string& path) const;
    static MlpNet load_text(const std::string& path,
                            OutputTransform t = OutputTransform::Identity);
};

/// Deterministic uniform doubles in [0,1) from a 64-bit state; identical
/// sequences on every platform for the same seed.
class SplitMix64 {
  public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}
    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }
    double next_unit() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  private:
    std::uint64_t state_;
};

} // namespace fopinn
