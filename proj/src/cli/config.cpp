#include "iurlse/cli/config.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <initializer_list>
#include <limits>
#include <sstream>

#include <toml.hpp>

#include "iurlse/ccpp.hpp"
#include "iurlse/rng.hpp"

namespace iurlse::cli {

namespace {

std::string where(const std::string& file, const toml::source_region& src) {
    std::ostringstream os;
    os << file << ':' << src.begin.line << ':' << src.begin.column << ": ";
    return os.str();
}

[[noreturn]] void fail(const std::string& file, const toml::source_region& src, const std::string& msg) {
    throw ConfigError(where(file, src) + msg);
}

/// One TOML table with key whitelisting and typed, position-aware reads.
class Section {
public:
    Section(const std::string& file, std::string name, const toml::table& tbl) : file_(file), name_(std::move(name)), tbl_(tbl) {}

    void allow(std::initializer_list<std::string_view> keys) const {
        for (auto&& [k, v] : tbl_) {
            if (std::find(keys.begin(), keys.end(), k.str()) == keys.end())
                fail(file_, k.source(), "unknown key '" + std::string(k.str()) + "' in [" + name_ + "]");
        }
    }

    bool has(std::string_view key) const { return tbl_.get(key) != nullptr; }

    const toml::node& node(std::string_view key) const {
        const toml::node* n = tbl_.get(key);
        if (!n) fail(file_, tbl_.source(), "missing required key '" + std::string(key) + "' in [" + name_ + "]");
        return *n;
    }

    double number(std::string_view key) const {
        const toml::node& n = node(key);
        if (!n.is_number()) fail(file_, n.source(), "'" + std::string(key) + "' must be a number");
        return *n.value<double>();
    }
    double number(std::string_view key, double fallback) const { return has(key) ? number(key) : fallback; }

    std::int64_t integer(std::string_view key) const {
        const toml::node& n = node(key);
        if (!n.is_integer()) fail(file_, n.source(), "'" + std::string(key) + "' must be an integer");
        return *n.value<std::int64_t>();
    }

    std::size_t count(std::string_view key, std::size_t min) const {
        const std::int64_t v = integer(key);
        if (v < static_cast<std::int64_t>(min))
            fail(file_, node(key).source(), std::string(key) + " out of range (must be >= " + std::to_string(min) + ")");
        return static_cast<std::size_t>(v);
    }
    std::size_t count(std::string_view key, std::size_t min, std::size_t fallback) const {
        return has(key) ? count(key, min) : fallback;
    }

    std::uint64_t seed(std::string_view key, std::uint64_t fallback) const {
        if (!has(key)) return fallback;
        const std::int64_t v = integer(key);
        if (v < 0) fail(file_, node(key).source(), std::string(key) + " out of range (must be >= 0)");
        return static_cast<std::uint64_t>(v);
    }

    bool boolean(std::string_view key, bool fallback) const {
        if (!has(key)) return fallback;
        const toml::node& n = node(key);
        if (!n.is_boolean()) fail(file_, n.source(), "'" + std::string(key) + "' must be true or false");
        return *n.value<bool>();
    }

    std::string string(std::string_view key) const {
        const toml::node& n = node(key);
        if (!n.is_string()) fail(file_, n.source(), "'" + std::string(key) + "' must be a string");
        return *n.value<std::string>();
    }
    std::string string(std::string_view key, std::string fallback) const {
        return has(key) ? string(key) : std::move(fallback);
    }

    /// A number or an array of numbers; a scalar is broadcast to dim entries.
    Eigen::VectorXd vector(std::string_view key, Eigen::Index dim) const {
        const toml::node& n = node(key);
        if (n.is_number()) return Eigen::VectorXd::Constant(dim, *n.value<double>());
        const toml::array* arr = n.as_array();
        if (!arr) fail(file_, n.source(), "'" + std::string(key) + "' must be a number or an array of numbers");
        if (dim > 0 && static_cast<Eigen::Index>(arr->size()) != dim)
            fail(file_, n.source(), "'" + std::string(key) + "' needs " + std::to_string(dim) + " entries");
        Eigen::VectorXd out(static_cast<Eigen::Index>(arr->size()));
        for (std::size_t i = 0; i < arr->size(); ++i) {
            const toml::node& e = *arr->get(i);
            if (!e.is_number()) fail(file_, e.source(), "'" + std::string(key) + "' entries must be numbers");
            out[static_cast<Eigen::Index>(i)] = *e.value<double>();
        }
        return out;
    }

    void check(bool ok, std::string_view key, const std::string& msg) const {
        if (!ok) fail(file_, has(key) ? node(key).source() : tbl_.source(), msg);
    }

    const toml::table* table(std::string_view key) const {
        const toml::node* n = tbl_.get(key);
        if (!n) return nullptr;
        if (!n->is_table()) fail(file_, n->source(), "'" + std::string(key) + "' must be a table");
        return n->as_table();
    }

    const std::string& file() const { return file_; }
    const toml::table& raw() const { return tbl_; }

private:
    const std::string& file_;
    std::string name_;
    const toml::table& tbl_;
};

const toml::table& require_table(const std::string& file, const toml::table& root, std::string_view key) {
    const toml::node* n = root.get(key);
    if (!n) fail(file, root.source(), "missing required section [" + std::string(key) + "]");
    if (!n->is_table()) fail(file, n->source(), "'" + std::string(key) + "' must be a table");
    return *n->as_table();
}

const toml::table& optional_table(const std::string& file, const toml::table& root, std::string_view key) {
    static const toml::table empty;
    const toml::node* n = root.get(key);
    if (!n) return empty;
    if (!n->is_table()) fail(file, n->source(), "'" + std::string(key) + "' must be a table");
    return *n->as_table();
}

GridSpec read_grid(const Section& s) {
    GridSpec g;
    g.lower = s.vector("lower", 0);
    g.upper = s.vector("upper", g.lower.size());
    const Eigen::VectorXd div = s.vector("divisions", g.lower.size());
    for (Eigen::Index k = 0; k < div.size(); ++k) {
        s.check(div[k] >= 1 && div[k] == std::floor(div[k]), "divisions", "divisions must be positive integers");
        s.check(g.upper[k] > g.lower[k], "upper", "upper must exceed lower on every axis");
        g.divisions.push_back(static_cast<int>(div[k]));
    }
    return g;
}

InputDistribution read_truth(const Section& s, const BenchmarkFunction* bf, Eigen::Index dim) {
    const std::string type = s.string("type");
    if (type == "case1" || type == "case2") {
        s.allow({"type"});
        if (!bf) {
            // The surrogate benchmark uses one perturbation for both cases.
            return GaussianShift{Eigen::VectorXd::Zero(dim), Eigen::VectorXd::Constant(dim, 0.125)};
        }
        return type == "case1" ? bf->case1 : bf->case2;
    }
    if (type == "gaussian") {
        s.allow({"type", "offset", "sd"});
        GaussianShift g{s.has("offset") ? s.vector("offset", dim) : Eigen::VectorXd::Zero(dim), s.vector("sd", dim)};
        s.check((g.sd.array() >= 0.0).all(), "sd", "sd out of range (must be >= 0)");
        return g;
    }
    if (type == "gamma") {
        s.allow({"type", "shape", "scale"});
        GammaShift g{s.vector("shape", dim), s.vector("scale", dim)};
        s.check((g.shape.array() > 0.0).all(), "shape", "shape out of range (must be > 0)");
        s.check((g.scale.array() > 0.0).all(), "scale", "scale out of range (must be > 0)");
        return g;
    }
    s.check(false, "type", "unknown distribution type '" + type + "' (case1, case2, gaussian, gamma)");
    return {};
}

EstimatedShift read_belief(const Section& s, Eigen::Index dim) {
    const std::string type = s.string("type");
    EstimatedShift e;
    e.dim = dim;
    e.base = BaseFamily::Normal;
    if (type == "normal_mean_known_var") {
        s.allow({"type", "prior_mean", "prior_var", "known_var"});
        NormalMeanKnownVar p;
        p.prior_mean = s.number("prior_mean");
        p.prior_var = s.number("prior_var");
        p.known_var = s.number("known_var");
        s.check(p.prior_var > 0.0, "prior_var", "prior_var out of range (must be > 0)");
        s.check(p.known_var > 0.0, "known_var", "known_var out of range (must be > 0)");
        e.xi = p;
        return e;
    }
    if (type == "gamma_precision") {
        s.allow({"type", "prior_shape", "prior_second", "reading", "known_mean"});
        const double shape = s.number("prior_shape");
        const double second = s.number("prior_second");
        const std::string reading = s.string("reading", "rate");
        s.check(shape > 0.0, "prior_shape", "prior_shape out of range (must be > 0)");
        s.check(second > 0.0, "prior_second", "prior_second out of range (must be > 0)");
        s.check(reading == "rate" || reading == "scale", "reading", "reading must be 'rate' or 'scale'");
        e.xi = GammaPrecision::from_prior(shape, second,
                                          reading == "rate" ? GammaParameterization::Rate : GammaParameterization::Scale,
                                          s.number("known_mean", 0.0));
        return e;
    }
    s.check(false, "type", "unknown belief type '" + type + "' (known, normal_mean_known_var, gamma_precision)");
    return e;
}

ExperimentConfig parse_table(const toml::table& root, const std::string& file) {
    ExperimentConfig cfg;
    cfg.source = file;
    {
        const Section top(file, "top level", root);
        top.allow({"schema_version", "benchmark", "kernel", "distribution", "algorithm", "run", "oracle", "output"});
        const std::int64_t v = top.integer("schema_version");
        top.check(v == kSchemaVersion, "schema_version",
                  "unsupported schema_version " + std::to_string(v) + " (expected " + std::to_string(kSchemaVersion) + ")");
    }

    // [benchmark]
    std::optional<BenchmarkFunction> bf;
    {
        const Section s(file, "benchmark", require_table(file, root, "benchmark"));
        cfg.benchmark = s.string("name");
        if (cfg.benchmark == "polynomial") {
            s.allow({"name", "coefficients", "lower", "upper", "divisions", "threshold", "subsample", "subsample_seed"});
            const Eigen::VectorXd c = s.vector("coefficients", 0);
            s.check(c.size() >= 1, "coefficients", "coefficients must not be empty");
            cfg.coefficients.assign(c.data(), c.data() + c.size());
            cfg.grid = read_grid(s);
            s.check(cfg.grid->dim() == 1, "lower", "polynomial benchmark is one-dimensional");
            bf = polynomial(cfg.coefficients, *cfg.grid, KernelSpec{}, 1e-4, s.number("threshold"));
        } else if (cfg.benchmark == "ccpp") {
            s.allow({"name", "data", "rows", "train_rows", "split_seed", "threshold", "subsample", "subsample_seed"});
            cfg.data_path = s.string("data");
            cfg.data_rows = s.count("rows", 2, 9568);
            cfg.train_rows = s.count("train_rows", 1, 7568);
            s.check(cfg.train_rows < cfg.data_rows, "train_rows", "train_rows out of range (must be < rows)");
            cfg.split_seed = s.seed("split_seed", 0);
            cfg.dim = 4;
            cfg.threshold = s.number("threshold", -15.0);
            cfg.kernel = {300.0, 2.0};
            cfg.noise_variance = 0.5;
        } else {
            s.allow({"name", "threshold", "subsample", "subsample_seed"});
            const auto names = benchmark_names();
            s.check(std::find(names.begin(), names.end(), cfg.benchmark) != names.end(), "name",
                    "unknown benchmark '" + cfg.benchmark + "'");
            bf = make_benchmark(cfg.benchmark);
        }
        if (bf) {
            cfg.dim = bf->dim;
            cfg.threshold = s.number("threshold", bf->threshold);
            cfg.kernel = bf->kernel;
            cfg.noise_variance = bf->noise_variance;
        }
        s.check(std::isfinite(cfg.threshold), "threshold", "threshold must be finite");
        cfg.subsample = s.count("subsample", 0, 0);
        cfg.subsample_seed = s.seed("subsample_seed", 0);
    }

    // [kernel]
    {
        const Section s(file, "kernel", optional_table(file, root, "kernel"));
        s.allow({"signal_variance", "length_scale", "noise_variance"});
        cfg.kernel.signal_variance = s.number("signal_variance", cfg.kernel.signal_variance);
        cfg.kernel.length_scale = s.number("length_scale", cfg.kernel.length_scale);
        cfg.noise_variance = s.number("noise_variance", cfg.noise_variance);
        s.check(cfg.kernel.signal_variance > 0.0, "signal_variance", "signal_variance out of range (must be > 0)");
        s.check(cfg.kernel.length_scale > 0.0, "length_scale", "length_scale out of range (must be > 0)");
        s.check(cfg.noise_variance >= 0.0, "noise_variance", "noise_variance out of range (must be >= 0)");
    }

    // [distribution]
    {
        const Section s(file, "distribution", require_table(file, root, "distribution"));
        s.allow({"truth", "belief"});
        const toml::table* truth = s.table("truth");
        s.check(truth != nullptr, "truth", "missing required table [distribution.truth]");
        cfg.truth = read_truth(Section(file, "distribution.truth", *truth), bf ? &*bf : nullptr, cfg.dim);
        cfg.belief = cfg.truth;
        if (const toml::table* belief = s.table("belief")) {
            const Section b(file, "distribution.belief", *belief);
            if (b.string("type") == "known") {
                b.allow({"type"});
            } else {
                cfg.belief = read_belief(b, cfg.dim);
                cfg.belief_estimated = true;
            }
        }
    }

    // [algorithm]
    {
        const Section s(file, "algorithm", require_table(file, root, "algorithm"));
        s.allow({"method", "alpha", "epsilon", "beta_sqrt", "exploration", "exploration_schedule", "max_trials",
                 "quadrature_nodes", "outer_nodes", "initial_points", "stop_on_empty_u", "straddle_kappa"});
        AlgorithmConfig& a = cfg.algorithm;
        const std::string method = s.string("method");
        try {
            a.method = parse_method(method);
        } catch (const ParameterError&) {
            s.check(false, "method", "unknown method '" + method + "' (proposed, straddle, mile, random)");
        }
        a.alpha = s.number("alpha", a.alpha);
        s.check(a.alpha > 0.0 && a.alpha < 1.0, "alpha", "alpha out of range (0, 1)");
        a.epsilon = s.number("epsilon", a.epsilon);
        s.check(a.epsilon >= 0.0 && a.alpha - a.epsilon > 0.0, "epsilon", "epsilon out of range [0, alpha)");
        a.beta_sqrt = s.number("beta_sqrt", a.beta_sqrt);
        s.check(a.beta_sqrt >= 0.0 && std::isfinite(a.beta_sqrt), "beta_sqrt", "beta_sqrt out of range (must be >= 0)");
        a.exploration.p = s.number("exploration", 0.0);
        s.check(a.exploration.p >= 0.0 && a.exploration.p <= 1.0, "exploration", "exploration out of range [0, 1]");
        const std::string schedule = s.string("exploration_schedule", "constant");
        s.check(schedule == "constant" || schedule == "harmonic", "exploration_schedule",
                "exploration_schedule must be 'constant' or 'harmonic'");
        a.exploration.kind =
            schedule == "constant" ? ExplorationSchedule::Kind::Constant : ExplorationSchedule::Kind::Harmonic;
        a.max_trials = s.count("max_trials", 1);
        a.quadrature_nodes = s.count("quadrature_nodes", 1, a.quadrature_nodes);
        a.outer_nodes = s.count("outer_nodes", 1, a.outer_nodes);
        a.initial_points = s.count("initial_points", 0, a.initial_points);
        a.stop_on_empty_u = s.boolean("stop_on_empty_u", a.stop_on_empty_u);
        a.straddle_kappa = s.number("straddle_kappa", a.straddle_kappa);
        s.check(a.straddle_kappa >= 0.0, "straddle_kappa", "straddle_kappa out of range (must be >= 0)");
    }

    // [run]
    {
        const Section s(file, "run", require_table(file, root, "run"));
        s.allow({"seed", "replications", "observation_noise_sd"});
        s.node("seed");
        cfg.seed = s.seed("seed", 0);
        cfg.replications = s.count("replications", 1);
        cfg.observation_noise_sd = s.number("observation_noise_sd", std::sqrt(cfg.noise_variance));
        s.check(cfg.observation_noise_sd >= 0.0, "observation_noise_sd",
                "observation_noise_sd out of range (must be >= 0)");
    }

    // [oracle]
    {
        const Section s(file, "oracle", optional_table(file, root, "oracle"));
        s.allow({"samples", "seed", "path"});
        cfg.oracle_samples = s.count("samples", 1, cfg.oracle_samples);
        cfg.oracle_seed = s.seed("seed", cfg.oracle_seed);
        cfg.oracle_path = s.string("path", "");
    }

    // [output]
    {
        const Section s(file, "output", optional_table(file, root, "output"));
        s.allow({"dir", "prefix"});
        cfg.out_dir = s.string("dir", cfg.out_dir);
        cfg.prefix = s.string("prefix", "");
    }

    // Paths in the file are relative to the file itself.
    if (file.front() != '<') {
        const auto base = std::filesystem::path(file).parent_path();
        const auto rebase = [&](std::string& p) {
            if (!p.empty() && std::filesystem::path(p).is_relative()) p = (base / p).lexically_normal().string();
        };
        rebase(cfg.data_path);
        rebase(cfg.oracle_path);
        rebase(cfg.out_dir);
    }
    return cfg;
}

}  // namespace

ExperimentConfig parse_config_string(const std::string& text, const std::string& source) {
    toml::table root;
    try {
        root = toml::parse(text, source);
    } catch (const toml::parse_error& e) {
        throw ConfigError(where(source, e.source()) + std::string(e.description()));
    }
    return parse_table(root, source);
}

ExperimentConfig parse_config_file(const std::string& path) {
    toml::table root;
    try {
        root = toml::parse_file(path);
    } catch (const toml::parse_error& e) {
        throw ConfigError(where(path, e.source()) + std::string(e.description()));
    }
    return parse_table(root, path);
}

namespace {

nlohmann::json vec(const Eigen::VectorXd& v) {
    return std::vector<double>(v.data(), v.data() + v.size());
}

nlohmann::json scalar_json(const ScalarLaw& law) {
    return std::visit(
        [](const auto& l) -> nlohmann::json {
            using T = std::decay_t<decltype(l)>;
            if constexpr (std::is_same_v<T, NormalLaw>) return {{"type", "normal"}, {"mean", l.mean}, {"sd", l.sd}};
            if constexpr (std::is_same_v<T, GammaLaw>)
                return {{"type", "gamma"}, {"shape", l.shape}, {"scale", l.scale}};
            if constexpr (std::is_same_v<T, StudentTLaw>)
                return {{"type", "student_t"}, {"location", l.location}, {"scale", l.scale}, {"dof", l.dof}};
        },
        law);
}

}  // namespace

nlohmann::json to_json(const InputDistribution& dist) {
    return std::visit(
        [](const auto& d) -> nlohmann::json {
            using T = std::decay_t<decltype(d)>;
            if constexpr (std::is_same_v<T, GaussianShift>)
                return {{"type", "gaussian"}, {"offset", vec(d.offset)}, {"sd", vec(d.sd)}};
            if constexpr (std::is_same_v<T, GammaShift>)
                return {{"type", "gamma"}, {"shape", vec(d.shape)}, {"scale", vec(d.scale)}};
            if constexpr (std::is_same_v<T, ProductIndependent>) {
                nlohmann::json m = nlohmann::json::array();
                for (const auto& law : d.marginals) m.push_back(scalar_json(law));
                return {{"type", "product"}, {"marginals", m}};
            }
            if constexpr (std::is_same_v<T, EstimatedShift>) {
                nlohmann::json j{{"type", "estimated"}, {"dim", d.dim}, {"base", "normal"}};
                if (const auto* n = std::get_if<NormalMeanKnownVar>(&d.xi))
                    j["xi"] = {{"type", "normal_mean_known_var"},
                               {"prior_mean", n->prior_mean},
                               {"prior_var", n->prior_var},
                               {"known_var", n->known_var}};
                if (const auto* g = std::get_if<GammaPrecision>(&d.xi))
                    j["xi"] = {{"type", "gamma_precision"},
                               {"prior_shape", g->prior_shape},
                               {"prior_rate", g->prior_rate},
                               {"known_mean", g->known_mean}};
                return j;
            }
        },
        dist);
}

nlohmann::json to_json(const ExperimentConfig& c) {
    nlohmann::json bench{{"name", c.benchmark}, {"dim", c.dim}, {"threshold", c.threshold}, {"subsample", c.subsample},
                         {"subsample_seed", c.subsample_seed}};
    if (!c.coefficients.empty()) bench["coefficients"] = c.coefficients;
    if (c.grid) {
        bench["lower"] = vec(c.grid->lower);
        bench["upper"] = vec(c.grid->upper);
        bench["divisions"] = c.grid->divisions;
    }
    if (c.benchmark == "ccpp") {
        bench["data"] = c.data_path;
        bench["rows"] = c.data_rows;
        bench["train_rows"] = c.train_rows;
        bench["split_seed"] = c.split_seed;
    }
    const AlgorithmConfig& a = c.algorithm;
    return {
        {"schema_version", c.schema_version},
        {"benchmark", bench},
        {"kernel",
         {{"signal_variance", c.kernel.signal_variance},
          {"length_scale", c.kernel.length_scale},
          {"noise_variance", c.noise_variance}}},
        {"distribution", {{"truth", to_json(c.truth)}, {"belief", to_json(c.belief)}}},
        {"algorithm",
         {{"method", method_name(a.method)},
          {"alpha", a.alpha},
          {"epsilon", a.epsilon},
          {"beta_sqrt", a.beta_sqrt},
          {"exploration", a.exploration.p},
          {"exploration_schedule",
           a.exploration.kind == ExplorationSchedule::Kind::Constant ? "constant" : "harmonic"},
          {"max_trials", a.max_trials},
          {"quadrature_nodes", a.quadrature_nodes},
          {"outer_nodes", a.outer_nodes},
          {"initial_points", a.initial_points},
          {"stop_on_empty_u", a.stop_on_empty_u},
          {"straddle_kappa", a.straddle_kappa}}},
        {"run",
         {{"seed", c.seed}, {"replications", c.replications}, {"observation_noise_sd", c.observation_noise_sd}}},
        {"oracle", {{"samples", c.oracle_samples}, {"seed", c.oracle_seed}, {"path", c.oracle_path}}},
    };
}

ResolvedProblem resolve_problem(const ExperimentConfig& c) {
    ResolvedProblem r;
    r.name = c.benchmark;
    if (c.benchmark == "ccpp") {
        const CcppData data = load_ccpp(c.data_path, c.data_rows);
        CcppSurrogate s = build_ccpp_surrogate(data, c.split_seed, c.train_rows);
        r.candidates = std::move(s.candidates);
        r.f = std::move(s.f);
    } else {
        const BenchmarkFunction bf = c.benchmark == "polynomial"
                                         ? polynomial(c.coefficients, *c.grid, c.kernel, c.noise_variance, c.threshold)
                                         : make_benchmark(c.benchmark);
        r.candidates = make_grid(bf.grid);
        r.f = bf.f;
    }
    if (c.subsample > 0 && c.subsample < static_cast<std::size_t>(r.candidates.cols())) {
        // Partial Fisher-Yates, then ascending order so indices stay stable.
        std::vector<std::size_t> idx(static_cast<std::size_t>(r.candidates.cols()));
        for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
        auto stream = rng::stream(c.subsample_seed, rng::Purpose::Subsample);
        for (std::size_t i = 0; i < c.subsample; ++i)
            std::swap(idx[i], idx[i + rng::uniform_index(stream, idx.size() - i)]);
        idx.resize(c.subsample);
        std::sort(idx.begin(), idx.end());
        PointSet sub(r.candidates.rows(), static_cast<Eigen::Index>(idx.size()));
        for (std::size_t i = 0; i < idx.size(); ++i)
            sub.col(static_cast<Eigen::Index>(i)) = r.candidates.col(static_cast<Eigen::Index>(idx[i]));
        r.candidates = std::move(sub);
    }
    const nlohmann::json full = to_json(c);
    const nlohmann::json identity{{"benchmark", full["benchmark"]},
                                  {"truth", full["distribution"]["truth"]},
                                  {"candidates", r.candidates.cols()}};
    r.hash = fnv1a_hex(identity.dump());
    return r;
}

Problem make_problem(const ExperimentConfig& c, const ResolvedProblem& resolved, const OracleTable* oracle) {
    return Problem{GpPosterior(c.kernel, c.noise_variance, c.dim),
                   c.truth,
                   c.belief,
                   resolved.candidates,
                   resolved.f,
                   c.threshold,
                   c.observation_noise_sd,
                   oracle};
}

}  // namespace iurlse::cli
