// sampler.hpp
// Finite-shot estimates of p_rho, p_sigma and d = p_rho - p_sigma.

#pragma once

#include <cstdint>

#include "qgan/bloch.hpp"
#include "qgan/noise.hpp"

namespace qgan {

/// Shot count used to request exact (infinite-shot) probabilities.
inline constexpr std::int64_t kExactShots = 0;

struct OutcomeEstimate {
    double p_rho_hat = 0.0;
    double p_sigma_hat = 0.0;
    double d_hat = 0.0;     // always p_rho_hat - p_sigma_hat
    std::int64_t shots = 0; // per state; kExactShots for exact estimates

    /// The same data read out with the complementary projector I - M.
    OutcomeEstimate complement() const;

    bool is_exact() const { return shots == kExactShots; }
    bool operator==(const OutcomeEstimate&) const = default;
};

enum class SamplingMode {
    /// One Binomial(n, p_rho) draw for the generated state.
    kWholeState,
    /// Each shot first picks an ensemble branch with probability r, then an
    /// outcome.  Same distribution, more draws.
    kBranchwise,
};

/// k/n with k ~ Binomial(n, p).  Rejects p outside [0,1] and n < 1.
double sample_frequency(double p, std::int64_t n, Rng& rng);

/// Noise is applied to rho (and sigma, unless targeting the generated state
/// only) before the probabilities are formed.  shots == kExactShots returns
/// exact probabilities without touching the stream.
OutcomeEstimate estimate_d(const GeneratorParams& gen, const MeasurementParams& meas, const DensityMatrix& sigma,
                           std::int64_t shots, const NoiseSettings& noise, Rng& rng,
                           SamplingMode mode = SamplingMode::kWholeState);

/// sqrt(p_rho(1-p_rho)/n + p_sigma(1-p_sigma)/n).
double d_standard_deviation(double p_rho, double p_sigma, std::int64_t n);

}  // namespace qgan
