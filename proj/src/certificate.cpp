#include "hitctl/certificate.hpp"

#include "hitctl/errors.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace hitctl {

namespace {

constexpr double kCertificateTolerance = 1e-12;

double restricted_weight_mass(const MarkovControlModel& model, StateIndex s, std::size_t a,
                              std::span<const double> weight) {
    double mass = 0.0;
    for (const auto& e : model.restricted_row(s, a)) mass += e.probability * weight[e.position];
    return mass;
}

} // namespace

double WeightCertificate::gap_bound(std::size_t n) const {
    return cost_bound * std::pow(modulus, static_cast<double>(n)) / (1.0 - modulus);
}

WeightCertificate make_weight_certificate(const MarkovControlModel& model) {
    const std::vector<double> unit(model.nontarget_count(), 1.0);
    return make_weight_certificate(model, unit);
}

WeightCertificate make_weight_certificate(const MarkovControlModel& model, std::span<const double> weight) {
    if (weight.size() != model.nontarget_count())
        throw std::invalid_argument("weight must have one entry per non-target state");
    for (double w : weight)
        if (!(w >= 1.0) || !std::isfinite(w)) throw std::invalid_argument("weight entries must be finite and >= 1");

    WeightCertificate cert;
    cert.weight.assign(weight.begin(), weight.end());
    cert.drift_bound = 1.0;
    for (std::size_t i = 0; i < model.nontarget_count(); ++i) {
        const StateIndex s = model.state_at(i);
        const auto& acts = model.actions(s);
        for (std::size_t a = 0; a < acts.size(); ++a) {
            cert.cost_bound = std::max(cert.cost_bound, acts[a].cost / weight[i]);
            cert.drift_bound = std::max(cert.drift_bound, restricted_weight_mass(model, s, a, weight) / weight[i]);
        }
    }
    cert.modulus = model.discount() * cert.drift_bound;
    if (!(cert.modulus < 1.0)) {
        std::ostringstream msg;
        msg << "weight does not certify a contraction: discount * drift bound = " << cert.modulus << " >= 1";
        throw CertificateInfeasible(msg.str());
    }
    return cert;
}

std::vector<std::string> certificate_violations(const MarkovControlModel& model, const WeightCertificate& cert) {
    std::vector<std::string> out;
    if (cert.weight.size() != model.nontarget_count()) {
        out.emplace_back("weight size does not match the non-target state count");
        return out;
    }
    if (!(cert.modulus < 1.0)) out.emplace_back("modulus must be < 1");
    if (std::abs(cert.modulus - model.discount() * cert.drift_bound) > kCertificateTolerance)
        out.emplace_back("modulus must equal discount * drift bound");
    if (cert.drift_bound < 1.0) out.emplace_back("drift bound must be >= 1");
    for (std::size_t i = 0; i < model.nontarget_count(); ++i) {
        const StateIndex s = model.state_at(i);
        const double w = cert.weight[i];
        if (w < 1.0) out.push_back("weight of state " + model.state_name(s) + " is below 1");
        const auto& acts = model.actions(s);
        for (std::size_t a = 0; a < acts.size(); ++a) {
            const double cost_rhs = cert.cost_bound * w;
            if (acts[a].cost > cost_rhs + kCertificateTolerance * std::max(1.0, cost_rhs))
                out.push_back("cost bound fails at state " + model.state_name(s) + ", action '" +
                              acts[a].label + "'");
            const double drift_rhs = cert.drift_bound * w;
            if (restricted_weight_mass(model, s, a, cert.weight) >
                drift_rhs + kCertificateTolerance * std::max(1.0, drift_rhs))
                out.push_back("drift bound fails at state " + model.state_name(s) + ", action '" +
                              acts[a].label + "'");
        }
    }
    return out;
}

} // namespace hitctl
