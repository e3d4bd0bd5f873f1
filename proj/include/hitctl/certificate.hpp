#pragma once

#include "hitctl/model.hpp"

#include <span>
#include <string>
#include <vector>

namespace hitctl {

/**
Weight function w >= 1 on X\K with the constants that make the restricted
Bellman operator a contraction in the w-weighted sup norm:

    c(x,a)                    <= cost_bound  * w(x)
    sum_{y not in K} Q(y|x,a) w(y) <= drift_bound * w(x)

with modulus = discount * drift_bound < 1.
*/
struct WeightCertificate {
    std::vector<double> weight;
    double cost_bound = 0.0;
    double drift_bound = 1.0;
    double modulus = 0.0;

    /// cost_bound * modulus^n / (1 - modulus): the certified weighted gap
    /// between V* and the n-th value-iteration function.
    double gap_bound(std::size_t n) const;
};

/// Tightest certificate for w == 1.
WeightCertificate make_weight_certificate(const MarkovControlModel& model);

/// Tightest certificate for the given weight (indexed by non-target position).
/// Throws std::invalid_argument on a malformed weight and CertificateInfeasible
/// when discount * drift_bound >= 1.
WeightCertificate make_weight_certificate(const MarkovControlModel& model, std::span<const double> weight);

/// Checks both bounding inequalities by enumeration (tolerance 1e-12, relative
/// to the right-hand side). Empty when the certificate holds.
std::vector<std::string> certificate_violations(const MarkovControlModel& model, const WeightCertificate& cert);

} // namespace hitctl
