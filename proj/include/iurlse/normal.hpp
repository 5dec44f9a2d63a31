#pragma once

namespace iurlse {

/// Standard normal CDF.
double norm_cdf(double z);

/// Standard normal density.
double norm_pdf(double z);

/// Inverse of norm_cdf on (0, 1); returns +-infinity at the endpoints.
double norm_quantile(double p);

}  // namespace iurlse
