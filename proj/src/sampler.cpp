#include "qgan/sampler.hpp"

#include <cmath>
#include <random>
#include <stdexcept>
#include <string>

namespace qgan {

namespace {

void check_probability(double p, const char* what) {
    if (!(p >= 0.0 && p <= 1.0)) {
        throw std::invalid_argument(std::string(what) + " must lie in [0,1], got " + std::to_string(p));
    }
}

std::int64_t sample_count(double p, std::int64_t n, Rng& rng) {
    if (n == 0) return 0;
    std::binomial_distribution<std::int64_t> dist(n, p);
    return dist(rng);
}

}  // namespace

OutcomeEstimate OutcomeEstimate::complement() const {
    OutcomeEstimate out = *this;
    out.p_rho_hat = 1.0 - p_rho_hat;
    out.p_sigma_hat = 1.0 - p_sigma_hat;
    out.d_hat = out.p_rho_hat - out.p_sigma_hat;
    return out;
}

double sample_frequency(double p, std::int64_t n, Rng& rng) {
    check_probability(p, "probability");
    if (n < 1) throw std::invalid_argument("shot count must be at least 1");
    return static_cast<double>(sample_count(p, n, rng)) / static_cast<double>(n);
}

OutcomeEstimate estimate_d(const GeneratorParams& gen, const MeasurementParams& meas, const DensityMatrix& sigma,
                           std::int64_t shots, const NoiseSettings& noise, Rng& rng, SamplingMode mode) {
    if (shots < 0) throw std::invalid_argument("shot count must be non-negative");
    noise.validate();

    const BlochVector axis = measurement_axis(meas);
    const BlochVector v_rho = apply_noise(state_bloch(gen), noise);
    const BlochVector v_sigma =
        noise.apply_to == NoiseTarget::kBoth ? apply_noise(sigma.to_bloch(), noise) : sigma.to_bloch();
    const double p_rho = outcome_probability(axis, v_rho);
    const double p_sigma = outcome_probability(axis, v_sigma);

    OutcomeEstimate est;
    est.shots = shots;
    if (shots == kExactShots) {
        est.p_rho_hat = p_rho;
        est.p_sigma_hat = p_sigma;
    } else {
        const double n = static_cast<double>(shots);
        if (mode == SamplingMode::kWholeState) {
            est.p_rho_hat = static_cast<double>(sample_count(p_rho, shots, rng)) / n;
        } else {
            const BlochVector dir = unit_direction(gen.theta, gen.phi);
            const double p_first = outcome_probability(axis, apply_noise(dir, noise));
            const double p_second = outcome_probability(axis, apply_noise(-dir, noise));
            const std::int64_t n_first = sample_count(gen.r, shots, rng);
            const std::int64_t k =
                sample_count(p_first, n_first, rng) + sample_count(p_second, shots - n_first, rng);
            est.p_rho_hat = static_cast<double>(k) / n;
        }
        est.p_sigma_hat = static_cast<double>(sample_count(p_sigma, shots, rng)) / n;
    }
    est.d_hat = est.p_rho_hat - est.p_sigma_hat;
    return est;
}

double d_standard_deviation(double p_rho, double p_sigma, std::int64_t n) {
    check_probability(p_rho, "p_rho");
    check_probability(p_sigma, "p_sigma");
    if (n < 1) throw std::invalid_argument("shot count must be at least 1");
    const double nd = static_cast<double>(n);
    return std::sqrt(p_rho * (1.0 - p_rho) / nd + p_sigma * (1.0 - p_sigma) / nd);
}

}  // namespace qgan
