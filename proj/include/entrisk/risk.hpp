#pragma once

#include "entrisk/types.hpp"

namespace entrisk {

// (1/alpha) log((1/N) sum exp(alpha * loss_i)); sample mean at alpha = 0.
double empirical_risk(const ScenarioSet& s, const RiskAversion& a);

// Entropic risk of a Gamma(kappa, lambda) loss: (1/alpha) log((1 - lambda*alpha)^(-kappa)).
// Requires lambda * alpha < 1; kappa * lambda at alpha = 0.
double gamma_risk(const GammaSpec& g, const RiskAversion& a);

// Closed-form entropic risk of a Gaussian mixture.
double gmm_risk(const Gmm& q, const RiskAversion& a);

// Certainty-equivalent loss h(t, l) = t + (1/alpha) exp(alpha (l - t)) - 1/alpha.
// Minimizing its expectation over t recovers the entropic risk.
double oce_loss(double t, double loss, const RiskAversion& a);

// First-order sensitivity of the entropic risk to a point mass at
// xi_hat: -1/alpha + exp(alpha xi_hat) / (alpha * mgf).
double influence_function(double xi_hat, const RiskAversion& a, double mgf);

}  // namespace entrisk
