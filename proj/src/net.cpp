#include "fopinn/net.hpp"

#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>

namespace fopinn {

double softplus(double z) {
    if (z > 30.0) return z;
    if (z < -30.0) return std::exp(z);
    return std::log1p(std::exp(z));
}

double sigmoid(double z) {
    if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
    const double e = std::exp(z);
    return e / (1.0 + e);
}

MlpNet::MlpNet(std::vector<int> layer_widths, OutputTransform t)
    : widths(std::move(layer_widths)), transform(t) {
    if (widths.size() < 2) throw ConfigError("MlpNet: need at least input and output widths");
    for (int w : widths)
        if (w < 1) throw ConfigError("MlpNet: widths must be positive");
    params.assign(param_count(), 0.0);
}

int MlpNet::param_count() const {
    int n = 0;
    for (std::size_t i = 1; i < widths.size(); ++i) n += widths[i] * (widths[i - 1] + 1);
    return n;
}

int MlpNet::weight_offset(int layer) const {
    int off = 0;
    for (int i = 1; i < layer; ++i) off += widths[i] * (widths[i - 1] + 1);
    return off;
}

int MlpNet::bias_offset(int layer) const {
    return weight_offset(layer) + widths[layer] * widths[layer - 1];
}

void MlpNet::init_glorot(std::uint64_t seed) {
    SplitMix64 rng(seed);
    for (int k = 1; k <= num_layers(); ++k) {
        const int fan_in = widths[k - 1], fan_out = widths[k];
        const double bound = std::sqrt(6.0 / (fan_in + fan_out));
        double* w = params.data() + weight_offset(k);
        for (int i = 0; i < fan_out * fan_in; ++i)
            w[i] = bound * (2.0 * rng.next_unit() - 1.0);
        double* b = params.data() + bias_offset(k);
        for (int i = 0; i < fan_out; ++i) b[i] = 0.0;
    }
}

std::vector<double> MlpNet::forward(std::span<const double> x) const {
    if (static_cast<int>(x.size()) != input_dim())
        throw DimensionMismatchError("forward: input length does not match network");
    std::vector<double> cur(x.begin(), x.end()), next;
    const int L = num_layers();
    for (int k = 1; k <= L; ++k) {
        const int nin = widths[k - 1], nout = widths[k];
        const double* w = params.data() + weight_offset(k);
        const double* b = params.data() + bias_offset(k);
        next.assign(nout, 0.0);
        for (int i = 0; i < nout; ++i) {
            double s = b[i];
            for (int j = 0; j < nin; ++j) s += w[i * nin + j] * cur[j];
            next[i] = (k < L) ? std::tanh(s) : s;
        }
        cur.swap(next);
    }
    if (transform == OutputTransform::SoftplusFirst) cur[0] = softplus(cur[0]);
    return cur;
}

// Binary layout (little-endian): u64 width count, u64 widths[], u64 param
// count, f64 params[].
void MlpNet::save_binary(const std::string& path) const {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw ConfigError("cannot open " + path + " for writing");
    const std::uint64_t nw = widths.size();
    f.write(reinterpret_cast<const char*>(&nw), sizeof nw);
    for (int w : widths) {
        const std::uint64_t v = static_cast<std::uint64_t>(w);
        f.write(reinterpret_cast<const char*>(&v), sizeof v);
    }
    const std::uint64_t np = params.size();
    f.write(reinterpret_cast<const char*>(&np), sizeof np);
    f.write(reinterpret_cast<const char*>(params.data()),
            static_cast<std::streamsize>(np * sizeof(double)));
}

MlpNet MlpNet::load_binary(const std::string& path, OutputTransform t) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw ConfigError("cannot open " + path);
    std::uint64_t nw = 0;
    f.read(reinterpret_cast<char*>(&nw), sizeof nw);
    if (!f || nw < 2 || nw > 64) throw ConfigError("corrupt network file: " + path);
    std::vector<int> widths(nw);
    for (auto& w : widths) {
        std::uint64_t v = 0;
        f.read(reinterpret_cast<char*>(&v), sizeof v);
        w = static_cast<int>(v);
    }
    MlpNet net(widths, t);
    std::uint64_t np = 0;
    f.read(reinterpret_cast<char*>(&np), sizeof np);
    if (np != net.params.size()) throw ConfigError("parameter count mismatch in " + path);
    f.read(reinterpret_cast<char*>(net.params.data()),
           static_cast<std::streamsize>(np * sizeof(double)));
    if (!f) throw ConfigError("truncated network file: " + path);
    return net;
}

void MlpNet::save_text(const std::string& path) const {
    std::FILE* f = std::fopen(path.c_str(), "w");
    if (!f) throw ConfigError("cannot open " + path + " for writing");
    for (std::size_t i = 0; i < widths.size(); ++i)
        std::fprintf(f, "%s%d", i ? " " : "", widths[i]);
    std::fprintf(f, "\n");
    for (double p : params) std::fprintf(f, "%.17g\n", p);
    std::fclose(f);
}

MlpNet MlpNet::load_text(const std::string& path, OutputTransform t) {
    std::ifstream f(path);
    if (!f) throw ConfigError("cannot open " + path);
    std::string line;
    if (!std::getline(f, line)) throw ConfigError("empty network file: " + path);
    std::vector<int> widths;
    {
        std::size_t pos = 0;
        while (pos < line.size()) {
            std::size_t end = 0;
            widths.push_back(std::stoi(line.substr(pos), &end));
            pos += end;
            while (pos < line.size() && line[pos] == ' ') ++pos;
        }
    }
    MlpNet net(widths, t);
    for (auto& p : net.params)
        if (!(f >> p)) throw ConfigError("truncated network file: " + path);
    return net;
}

} // namespace fopinn
