#include "iurlse/experiment.hpp"

#include <algorithm>
#include <cmath>

#include "iurlse/error.hpp"
#include "iurlse/parallel.hpp"
#include "iurlse/rng.hpp"

namespace iurlse {

SeriesStat mean_se(std::span<const double> values) {
    SeriesStat s;
    s.n = values.size();
    if (s.n == 0) return s;
    double sum = 0.0;
    for (double v : values) sum += v;
    s.mean = sum / static_cast<double>(s.n);
    if (s.n > 1) {
        double ss = 0.0;
        for (double v : values) ss += (v - s.mean) * (v - s.mean);
        s.se = std::sqrt(ss / static_cast<double>(s.n - 1)) / std::sqrt(static_cast<double>(s.n));
    }
    return s;
}

std::uint64_t replication_seed(std::uint64_t base_seed, std::size_t replication) {
    return rng::derive(base_seed, rng::Purpose::Replication, replication);
}

std::vector<SeriesStat> aggregate_series(const std::vector<std::vector<double>>& per_run) {
    std::size_t length = 0;
    for (const auto& run : per_run) length = std::max(length, run.size());
    std::vector<SeriesStat> out(length);
    std::vector<double> column;
    for (std::size_t t = 0; t < length; ++t) {
        column.clear();
        for (const auto& run : per_run)
            if (!run.empty()) column.push_back(run[std::min(t, run.size() - 1)]);
        out[t] = mean_se(column);
    }
    return out;
}

AggregateSeries aggregate_metrics(std::span<const ReplicationOutcome> runs) {
    std::vector<std::vector<double>> f1, precision, recall;
    for (const auto& r : runs) {
        if (!r.ok()) continue;
        std::vector<double> a, b, c;
        for (const auto& rec : r.result->trials) {
            if (!rec.metrics) continue;
            a.push_back(rec.metrics->f1);
            b.push_back(rec.metrics->precision);
            c.push_back(rec.metrics->recall);
        }
        f1.push_back(std::move(a));
        precision.push_back(std::move(b));
        recall.push_back(std::move(c));
    }
    return {aggregate_series(f1), aggregate_series(precision), aggregate_series(recall)};
}

ExperimentResult experiment(const AlgorithmConfig& config, const ProblemFactory& factory, std::size_t replications,
                            std::uint64_t base_seed) {
    if (replications < 1) throw ParameterError("replications must be at least 1");
    config.validate();
    ExperimentResult out;
    out.runs.resize(replications);
    parallel_for(replications, [&](std::size_t r) {
        ReplicationOutcome& o = out.runs[r];
        o.replication = r;
        o.seed = replication_seed(base_seed, r);
        try {
            AlgorithmConfig c = config;
            c.seed = o.seed;
            const Problem problem = factory(r, o.seed);
            o.result = run(c, problem);
            if (o.result->reason == StopReason::GpFailure) o.error = o.result->diagnostic;
        } catch (const std::exception& e) {
            o.error = e.what();
        }
    });
    for (const auto& o : out.runs)
        if (!o.ok()) out.failed.push_back(o.replication);
    out.series = aggregate_metrics(out.runs);
    return out;
}

}  // namespace iurlse
