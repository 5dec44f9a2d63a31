#pragma once

#include <cstddef>
#include <cstdint>
#include <string>

#include <Eigen/Dense>

#include "iurlse/engine.hpp"
#include "iurlse/gp.hpp"
#include "iurlse/input_models.hpp"

namespace iurlse {

/// Combined-cycle power plant table: AT, V, AP, RH features and PE target.
struct CcppData {
    Eigen::MatrixXd features;  ///< 4 x n
    Eigen::VectorXd target;
};

/// Reads a CSV whose header is exactly AT,V,AP,RH,PE. Throws ParameterError
/// on a header mismatch, malformed cell or a row count other than expected_rows.
CcppData load_ccpp(const std::string& path, std::size_t expected_rows = 9568);

/// Surrogate truth: the GP posterior mean fitted on train_rows random rows of
/// the standardized data; the remaining rows form the candidate set.
struct CcppSurrogate {
    PointSet candidates;
    BlackBox f;
    KernelSpec kernel{300.0, 2.0};
    double noise_variance = 0.5;
    double threshold = -15.0;
    InputDistribution perturbation;
};

CcppSurrogate build_ccpp_surrogate(const CcppData& data, std::uint64_t seed, std::size_t train_rows = 7568);

}  // namespace iurlse
