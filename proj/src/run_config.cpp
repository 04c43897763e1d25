#include "fopinn/run_config.hpp"

#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <json.hpp>

namespace fopinn {

using nlohmann::json;

namespace {

void require_keys(const json& obj, const std::string& where,
                  const std::set<std::string>& allowed) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        if (!allowed.count(it.key()))
            throw ConfigError("unknown configuration key: " +
                              (where.empty() ? it.key() : where + "." + it.key()));
    }
}

Pt read_pt(const json& a, int dim, const std::string& where) {
    if (!a.is_array() || static_cast<int>(a.size()) != dim)
        throw ConfigError(where + ": expected an array of length " + std::to_string(dim));
    Pt p{0, 0, 0};
    for (int k = 0; k < dim; ++k) p[k] = a[k].get<double>();
    return p;
}

LrSchedule::Kind schedule_kind(const std::string& s) {
    if (s == "constant") return LrSchedule::Kind::Constant;
    if (s == "step") return LrSchedule::Kind::Step;
    if (s == "inverse-time") return LrSchedule::Kind::InverseTime;
    throw ConfigError("unknown lr_schedule kind: " + s);
}

std::string schedule_name(LrSchedule::Kind k) {
    switch (k) {
        case LrSchedule::Kind::Constant: return "constant";
        case LrSchedule::Kind::Step: return "step";
        case LrSchedule::Kind::InverseTime: return "inverse-time";
    }
    return "?";
}

Positivity positivity_from(const std::string& s) {
    if (s == "none") return Positivity::None;
    if (s == "penalty") return Positivity::Penalty;
    if (s == "softplus") return Positivity::Softplus;
    throw ConfigError("unknown positivity mode: " + s);
}

std::string positivity_name(Positivity p) {
    switch (p) {
        case Positivity::None: return "none";
        case Positivity::Penalty: return "penalty";
        case Positivity::Softplus: return "softplus";
    }
    return "?";
}

} // namespace

Problem InlineProblemConfig::build() const {
    Problem p;
    p.name = "inline";
    p.domain = BoxDomain(dim, lo, hi);
    for (const auto& decl : interfaces) {
        if (decl.kind == "axis-plane")
            p.interfaces.items.push_back(Interface::axis_plane(decl.axis, decl.offset));
        else if (decl.kind == "segment")
            p.interfaces.items.push_back(Interface::segment(decl.a, decl.b));
        else
            throw ConfigError("inline problem: unknown interface kind " + decl.kind);
    }
    std::vector<std::pair<Pt, SpdTensor>> pieces;
    for (const auto& piece : tensor_pieces) {
        const auto& m = piece.matrix;
        if (static_cast<int>(m.size()) != dim)
            throw ConfigError("inline problem: tensor matrix must be " + std::to_string(dim) +
                              "x" + std::to_string(dim));
        SpdTensor t = dim == 2 ? SpdTensor::make2d(m[0][0], m[0][1], m[1][1])
                               : SpdTensor::make3d(m[0][0], m[0][1], m[0][2], m[1][1], m[1][2],
                                                   m[2][2]);
        pieces.emplace_back(piece.sample, t);
    }
    if (pieces.empty()) throw ConfigError("inline problem: no tensor pieces");
    if (p.interfaces.empty() && pieces.size() == 1)
        p.tensor = TensorField::constant(pieces.front().second);
    else
        p.tensor = TensorField::piecewise_constant(p.interfaces, pieces);

    const double sv = source_value;
    if (source_is_box) {
        const Pt slo = source_lo, shi = source_hi;
        const int d = dim;
        p.source = [sv, slo, shi, d](const Pt& x) {
            for (int k = 0; k < d; ++k)
                if (x[k] < slo[k] || x[k] > shi[k]) return 0.0;
            return sv;
        };
    } else {
        p.source = [sv](const Pt&) { return sv; };
    }
    const double bv = boundary_value;
    p.boundary = [bv](const Pt&) { return bv; };
    p.default_epsilon = epsilon;
    return p;
}

RunConfig RunConfig::from_json_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ConfigError("cannot open config file: " + path);
    std::stringstream ss;
    ss << f.rdbuf();
    return from_json_text(ss.str());
}

RunConfig RunConfig::from_json_text(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    RunConfig c;
    require_keys(j, "", {"problem", "inline_problem", "method", "net", "sampling", "loss",
                         "optimizer", "eval", "output_dir", "threads"});

    if (j.contains("problem")) c.problem_name = j["problem"].get<std::string>();
    if (j.contains("inline_problem")) {
        const auto& ip = j["inline_problem"];
        require_keys(ip, "inline_problem",
                     {"dim", "lo", "hi", "interfaces", "tensor_pieces", "source", "boundary",
                      "epsilon"});
        InlineProblemConfig inc;
        inc.dim = ip.value("dim", 2);
        if (ip.contains("lo")) inc.lo = read_pt(ip["lo"], inc.dim, "inline_problem.lo");
        if (ip.contains("hi"))
            inc.hi = read_pt(ip["hi"], inc.dim, "inline_problem.hi");
        else
            inc.hi = make_pt(1, 1, 1);
        if (ip.contains("interfaces")) {
            for (const auto& d : ip["interfaces"]) {
                require_keys(d, "inline_problem.interfaces", {"kind", "axis", "offset", "a", "b"});
                InlineProblemConfig::InterfaceDecl decl;
                decl.kind = d.at("kind").get<std::string>();
                if (decl.kind == "axis-plane") {
                    decl.axis = d.at("axis").get<int>();
                    decl.offset = d.at("offset").get<double>();
                } else if (decl.kind == "segment") {
                    decl.a = read_pt(d.at("a"), inc.dim, "segment.a");
                    decl.b = read_pt(d.at("b"), inc.dim, "segment.b");
                }
                inc.interfaces.push_back(decl);
            }
        }
        if (ip.contains("tensor_pieces")) {
            for (const auto& tp : ip["tensor_pieces"]) {
                require_keys(tp, "inline_problem.tensor_pieces", {"sample", "matrix"});
                InlineProblemConfig::TensorPiece piece;
                piece.sample = read_pt(tp.at("sample"), inc.dim, "tensor_pieces.sample");
                piece.matrix = tp.at("matrix").get<std::vector<std::vector<double>>>();
                inc.tensor_pieces.push_back(piece);
            }
        }
        if (ip.contains("source")) {
            const auto& s = ip["source"];
            require_keys(s, "inline_problem.source", {"kind", "value", "lo", "hi"});
            const std::string kind = s.value("kind", "constant");
            inc.source_value = s.value("value", 0.0);
            if (kind == "box") {
                inc.source_is_box = true;
                inc.source_lo = read_pt(s.at("lo"), inc.dim, "source.lo");
                inc.source_hi = read_pt(s.at("hi"), inc.dim, "source.hi");
            } else if (kind != "constant") {
                throw ConfigError("inline_problem.source.kind must be constant or box");
            }
        }
        if (ip.contains("boundary")) {
            const auto& b = ip["boundary"];
            require_keys(b, "inline_problem.boundary", {"kind", "value"});
            inc.boundary_value = b.value("value", 0.0);
        }
        inc.epsilon = ip.value("epsilon", 0.01);
        c.inline_problem = inc;
    }
    if (c.problem_name.empty() && !c.inline_problem)
        throw ConfigError("config: either problem or inline_problem is required");

    if (j.contains("method")) c.method = j["method"].get<std::string>();
    c.loss.method = method_from_string(c.method);

    if (j.contains("net")) {
        const auto& n = j["net"];
        require_keys(n, "net", {"hidden", "init_seed"});
        if (n.contains("hidden")) c.hidden_widths = n["hidden"].get<std::vector<int>>();
        c.init_seed = n.value("init_seed", 1ULL);
    }
    if (j.contains("sampling")) {
        const auto& s = j["sampling"];
        require_keys(s, "sampling", {"n_interior", "n_boundary", "seed", "resample_every"});
        c.n_interior = s.value("n_interior", 10000);
        c.n_boundary = s.value("n_boundary", 1000);
        c.sample_seed = s.value("seed", 1ULL);
        c.optimizer.resample_every = s.value("resample_every", 0);
    }
    if (j.contains("loss")) {
        const auto& l = j["loss"];
        require_keys(l, "loss",
                     {"boundary_weight", "weight_strategy", "interior_weights", "positivity",
                      "positivity_weight", "epsilon"});
        c.loss.boundary_weight = l.value("boundary_weight", 100.0);
        const std::string strat = l.value("weight_strategy", "fixed");
        if (strat == "fixed")
            c.loss.strategy = WeightStrategy::Fixed;
        else if (strat == "inverse-initial")
            c.loss.strategy = WeightStrategy::InverseInitial;
        else
            throw ConfigError("loss.weight_strategy must be fixed or inverse-initial");
        if (l.contains("interior_weights"))
            c.loss.interior_weights = l["interior_weights"].get<std::vector<double>>();
        c.loss.positivity = positivity_from(l.value("positivity", std::string("none")));
        c.loss.positivity_weight = l.value("positivity_weight", 100.0);
        if (l.contains("epsilon")) c.loss.epsilon = l["epsilon"].get<double>();
    }
    if (j.contains("optimizer")) {
        const auto& o = j["optimizer"];
        require_keys(o, "optimizer",
                     {"adam_steps", "lr0", "lr_schedule", "beta1", "beta2", "adam_eps", "lbfgs",
                      "checkpoint_every"});
        c.optimizer.adam_steps = o.value("adam_steps", 10000);
        c.optimizer.lr0 = o.value("lr0", 1e-3);
        c.optimizer.beta1 = o.value("beta1", 0.9);
        c.optimizer.beta2 = o.value("beta2", 0.999);
        c.optimizer.adam_eps = o.value("adam_eps", 1e-8);
        c.optimizer.checkpoint_every = o.value("checkpoint_every", 0);
        if (o.contains("lr_schedule")) {
            const auto& s = o["lr_schedule"];
            require_keys(s, "optimizer.lr_schedule", {"kind", "gamma", "every", "k"});
            c.optimizer.schedule.kind = schedule_kind(s.value("kind", std::string("step")));
            c.optimizer.schedule.gamma = s.value("gamma", 0.5);
            c.optimizer.schedule.every = s.value("every", 2500);
            c.optimizer.schedule.k = s.value("k", 0.0);
        }
        if (o.contains("lbfgs")) {
            const auto& l = o["lbfgs"];
            require_keys(l, "optimizer.lbfgs",
                         {"memory", "max_iters", "grad_tol", "step_tol", "c1", "c2",
                          "max_linesearch", "f_rel_tol", "f_window"});
            auto& lb = c.optimizer.lbfgs;
            lb.memory = l.value("memory", 50);
            lb.max_iters = l.value("max_iters", 50000);
            lb.grad_tol = l.value("grad_tol", 1e-9);
            lb.step_tol = l.value("step_tol", 1e-12);
            lb.c1 = l.value("c1", 1e-4);
            lb.c2 = l.value("c2", 0.9);
            lb.max_linesearch = l.value("max_linesearch", 40);
            lb.f_rel_tol = l.value("f_rel_tol", 1e-10);
            lb.f_window = l.value("f_window", 10);
        }
    }
    if (j.contains("eval")) {
        const auto& e = j["eval"];
        require_keys(e, "eval", {"resolution", "reference_resolution"});
        c.eval_resolution = e.value("resolution", 0);
        c.reference_resolution = e.value("reference_resolution", 257);
    }
    if (j.contains("output_dir")) c.output_dir = j["output_dir"].get<std::string>();
    if (j.contains("threads")) c.threads = j["threads"].get<int>();
    c.optimizer.threads = c.threads;
    c.optimizer.seed = c.sample_seed;

    if (c.optimizer.lr0 <= 0.0) throw ConfigError("optimizer.lr0 must be positive");
    if (!(c.optimizer.beta1 > 0 && c.optimizer.beta1 < c.optimizer.beta2 &&
          c.optimizer.beta2 < 1))
        throw ConfigError("optimizer: need 0 < beta1 < beta2 < 1");
    if (c.optimizer.lbfgs.memory < 1) throw ConfigError("optimizer.lbfgs.memory must be >= 1");
    for (double w : c.loss.interior_weights)
        if (!(w > 0.0)) throw ConfigError("loss.interior_weights must be positive");
    if (!(c.loss.boundary_weight > 0.0))
        throw ConfigError("loss.boundary_weight must be positive");
    return c;
}

std::string RunConfig::to_json_text() const {
    json j;
    if (!problem_name.empty()) j["problem"] = problem_name;
    if (inline_problem) {
        const auto& ip = *inline_problem;
        json p;
        p["dim"] = ip.dim;
        p["lo"] = std::vector<double>(ip.lo.begin(), ip.lo.begin() + ip.dim);
        p["hi"] = std::vector<double>(ip.hi.begin(), ip.hi.begin() + ip.dim);
        json ifaces = json::array();
        for (const auto& d : ip.interfaces) {
            json e;
            e["kind"] = d.kind;
            if (d.kind == "axis-plane") {
                e["axis"] = d.axis;
                e["offset"] = d.offset;
            } else {
                e["a"] = std::vector<double>(d.a.begin(), d.a.begin() + ip.dim);
                e["b"] = std::vector<double>(d.b.begin(), d.b.begin() + ip.dim);
            }
            ifaces.push_back(e);
        }
        p["interfaces"] = ifaces;
        json pieces = json::array();
        for (const auto& tp : ip.tensor_pieces) {
            json e;
            e["sample"] = std::vector<double>(tp.sample.begin(), tp.sample.begin() + ip.dim);
            e["matrix"] = tp.matrix;
            pieces.push_back(e);
        }
        p["tensor_pieces"] = pieces;
        json src;
        src["kind"] = ip.source_is_box ? "box" : "constant";
        src["value"] = ip.source_value;
        if (ip.source_is_box) {
            src["lo"] = std::vector<double>(ip.source_lo.begin(), ip.source_lo.begin() + ip.dim);
            src["hi"] = std::vector<double>(ip.source_hi.begin(), ip.source_hi.begin() + ip.dim);
        }
        p["source"] = src;
        p["boundary"] = {{"kind", "constant"}, {"value", ip.boundary_value}};
        p["epsilon"] = ip.epsilon;
        j["inline_problem"] = p;
    }
    j["method"] = method;
    j["net"] = {{"hidden", hidden_widths}, {"init_seed", init_seed}};
    j["sampling"] = {{"n_interior", n_interior},
                     {"n_boundary", n_boundary},
                     {"seed", sample_seed},
                     {"resample_every", optimizer.resample_every}};
    json l;
    l["boundary_weight"] = loss.boundary_weight;
    l["weight_strategy"] =
        loss.strategy == WeightStrategy::Fixed ? "fixed" : "inverse-initial";
    if (!loss.interior_weights.empty()) l["interior_weights"] = loss.interior_weights;
    l["positivity"] = positivity_name(loss.positivity);
    l["positivity_weight"] = loss.positivity_weight;
    l["epsilon"] = loss.epsilon;
    j["loss"] = l;
    j["optimizer"] = {
        {"adam_steps", optimizer.adam_steps},
        {"lr0", optimizer.lr0},
        {"lr_schedule",
         {{"kind", schedule_name(optimizer.schedule.kind)},
          {"gamma", optimizer.schedule.gamma},
          {"every", optimizer.schedule.every},
          {"k", optimizer.schedule.k}}},
        {"beta1", optimizer.beta1},
        {"beta2", optimizer.beta2},
        {"adam_eps", optimizer.adam_eps},
        {"lbfgs",
         {{"memory", optimizer.lbfgs.memory},
          {"max_iters", optimizer.lbfgs.max_iters},
          {"grad_tol", optimizer.lbfgs.grad_tol},
          {"step_tol", optimizer.lbfgs.step_tol},
          {"c1", optimizer.lbfgs.c1},
          {"c2", optimizer.lbfgs.c2},
          {"max_linesearch", optimizer.lbfgs.max_linesearch},
          {"f_rel_tol", optimizer.lbfgs.f_rel_tol},
          {"f_window", optimizer.lbfgs.f_window}}},
        {"checkpoint_every", optimizer.checkpoint_every}};
    j["eval"] = {{"resolution", eval_resolution},
                 {"reference_resolution", reference_resolution}};
    j["output_dir"] = output_dir;
    j["threads"] = threads;
    return j.dump(2);
}

Problem RunConfig::resolve_problem() const {
    if (inline_problem) return inline_problem->build();
    return get_problem(problem_name);
}

} // namespace fopinn
