#pragma once

#include <optional>
#include <string>

#include "fopinn/optimize.hpp"

namespace fopinn {

/// Inline problem definition: piecewise-constant tensors, constant or
/// box-indicator sources, constant boundary data.
struct InlineProblemConfig {
    int dim = 2;
    Pt lo{0, 0, 0}, hi{1, 1, 1};
    struct InterfaceDecl {
        std::string kind; // "axis-plane" | "segment"
        int axis = 0;
        double offset = 0.0;
        Pt a{0, 0, 0}, b{0, 0, 0};
    };
    std::vector<InterfaceDecl> interfaces;
    struct TensorPiece {
        Pt sample{0, 0, 0};
        std::vector<std::vector<double>> matrix;
    };
    std::vector<TensorPiece> tensor_pieces;
    double source_value = 0.0;
    bool source_is_box = false;
    Pt source_lo{0, 0, 0}, source_hi{0, 0, 0};
    double boundary_value = 0.0;
    double epsilon = 0.01;

    Problem build() const;
};

/// Everything a run needs, with defaults mirroring the benchmark protocol.
struct RunConfig {
    std::string problem_name;
    std::optional<InlineProblemConfig> inline_problem;
    std::string method = "weighted-fo";

    std::vector<int> hidden_widths{16, 16, 16, 16};
    std::uint64_t init_seed = 1;

    int n_interior = 10000;
    int n_boundary = 1000;
    std::uint64_t sample_seed = 1;

    LossSpec loss; // epsilon < 0 means "use the problem default"
    TrainConfig optimizer;

    int eval_resolution = 0;       // 0 = auto (101 in 2D, 51 in 3D)
    int reference_resolution = 257;
    std::string output_dir;
    int threads = 1;

    RunConfig() { loss.epsilon = -1.0; }

    static RunConfig from_json_file(const std::string& path);
    static RunConfig from_json_text(const std::string& text);
    std::string to_json_text() const; // resolved configuration, reproducible

    Problem resolve_problem() const; // registry lookup or inline build
};

} // namespace fopinn
