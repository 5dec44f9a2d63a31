#include "iurlse/ccpp.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <memory>
#include <numeric>
#include <sstream>
#include <vector>

#include "iurlse/error.hpp"
#include "iurlse/rng.hpp"

namespace iurlse {

namespace {

std::string trim(std::string s) {
    const auto keep = [](unsigned char c) { return !std::isspace(c); };
    s.erase(s.begin(), std::find_if(s.begin(), s.end(), keep));
    s.erase(std::find_if(s.rbegin(), s.rend(), keep).base(), s.end());
    return s;
}

}  // namespace

CcppData load_ccpp(const std::string& path, std::size_t expected_rows) {
    std::ifstream in(path);
    if (!in) throw ParameterError("cannot open CCPP file '" + path + "'");
    std::string line;
    if (!std::getline(in, line)) throw ParameterError(path + ": empty file");
    {
        std::vector<std::string> header;
        std::stringstream ss(line);
        for (std::string cell; std::getline(ss, cell, ',');) header.push_back(trim(cell));
        const std::vector<std::string> want{"AT", "V", "AP", "RH", "PE"};
        if (header != want) throw ParameterError(path + ":1: header must be AT,V,AP,RH,PE");
    }
    std::vector<double> values;
    std::size_t rows = 0;
    for (std::size_t lineno = 2; std::getline(in, line); ++lineno) {
        if (trim(line).empty()) continue;
        std::stringstream ss(line);
        std::size_t cols = 0;
        for (std::string cell; std::getline(ss, cell, ',');) {
            cell = trim(cell);
            double v = 0.0;
            const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
            if (ec != std::errc() || ptr != cell.data() + cell.size())
                throw ParameterError(path + ":" + std::to_string(lineno) + ": malformed number '" + cell + "'");
            values.push_back(v);
            ++cols;
        }
        if (cols != 5) throw ParameterError(path + ":" + std::to_string(lineno) + ": expected 5 columns");
        ++rows;
    }
    if (rows != expected_rows)
        throw ParameterError(path + ": expected " + std::to_string(expected_rows) + " data rows, found " +
                             std::to_string(rows));
    CcppData data;
    data.features.resize(4, static_cast<Eigen::Index>(rows));
    data.target.resize(static_cast<Eigen::Index>(rows));
    for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t k = 0; k < 4; ++k)
            data.features(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(r)) = values[r * 5 + k];
        data.target[static_cast<Eigen::Index>(r)] = values[r * 5 + 4];
    }
    return data;
}

CcppSurrogate build_ccpp_surrogate(const CcppData& data, std::uint64_t seed, std::size_t train_rows) {
    const Eigen::Index n = data.features.cols();
    if (data.features.rows() != 4 || data.target.size() != n) throw ParameterError("malformed CCPP data");
    if (train_rows < 1 || static_cast<Eigen::Index>(train_rows) >= n)
        throw ParameterError("train_rows must leave at least one candidate row");

    // Features to zero mean and unit variance, target to zero mean.
    const Eigen::VectorXd mean = data.features.rowwise().mean();
    const Eigen::MatrixXd centered = data.features.colwise() - mean;
    const Eigen::VectorXd sd = (centered.array().square().rowwise().sum() / static_cast<double>(n)).sqrt();
    if ((sd.array() <= 0.0).any()) throw ParameterError("constant CCPP feature column");
    const Eigen::MatrixXd z = sd.cwiseInverse().asDiagonal() * centered;
    const Eigen::VectorXd y = data.target.array() - data.target.mean();

    std::vector<std::size_t> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    auto stream = rng::stream(seed, rng::Purpose::Split);
    for (std::size_t i = order.size() - 1; i > 0; --i)
        std::swap(order[i], order[rng::uniform_index(stream, i + 1)]);

    const auto m = static_cast<Eigen::Index>(train_rows);
    CcppSurrogate out;
    auto train = std::make_shared<Eigen::MatrixXd>(4, m);
    Eigen::VectorXd ty(m);
    for (Eigen::Index j = 0; j < m; ++j) {
        train->col(j) = z.col(static_cast<Eigen::Index>(order[static_cast<std::size_t>(j)]));
        ty[j] = y[static_cast<Eigen::Index>(order[static_cast<std::size_t>(j)])];
    }
    out.candidates.resize(4, n - m);
    for (Eigen::Index j = m; j < n; ++j)
        out.candidates.col(j - m) = z.col(static_cast<Eigen::Index>(order[static_cast<std::size_t>(j)]));

    // Only the inputs and C^{-1} y are kept; the factor is dropped after solving.
    auto weights = std::make_shared<Eigen::VectorXd>();
    {
        Eigen::MatrixXd gram = out.kernel.cross(*train, *train);
        gram.diagonal().array() += out.noise_variance;
        Eigen::LLT<Eigen::MatrixXd> llt(gram);
        if (llt.info() != Eigen::Success) throw NumericalError("CCPP surrogate Gram matrix is not positive definite");
        *weights = llt.solve(ty);
    }
    const KernelSpec k = out.kernel;
    out.f = [train, weights, k](const Eigen::Ref<const Eigen::VectorXd>& s) {
        const Eigen::ArrayXd d2 = (train->colwise() - s).colwise().squaredNorm().transpose().array();
        return k.signal_variance * ((-d2 / k.length_scale).exp().matrix().dot(*weights));
    };
    out.perturbation = GaussianShift{Eigen::VectorXd::Zero(4), Eigen::VectorXd::Constant(4, 0.125)};
    return out;
}

}  // namespace iurlse
