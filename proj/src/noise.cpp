#include "qgan/noise.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace qgan {

namespace {

void check_unit_interval(double value, const char* field) {
    if (!std::isfinite(value) || value < 0.0 || value > 1.0) {
        throw std::invalid_argument(std::string(field) + " must lie in [0,1], got " + std::to_string(value));
    }
}

}  // namespace

void NoiseSettings::validate() const {
    check_unit_interval(depolarizing_eps, "noise.depolarizing_eps");
    check_unit_interval(amplitude_damping_gamma, "noise.amplitude_damping_gamma");
}

BlochVector depolarize(const BlochVector& v, double eps) {
    check_unit_interval(eps, "depolarizing eps");
    return v * (1.0 - eps);
}

BlochVector amplitude_damp(const BlochVector& v, double gamma) {
    check_unit_interval(gamma, "amplitude damping gamma");
    const double s = std::sqrt(1.0 - gamma);
    return {v.x * s, v.y * s, v.z * (1.0 - gamma) + gamma};
}

BlochVector apply_noise(const BlochVector& v, const NoiseSettings& noise) {
    if (noise.is_identity()) return v;
    return amplitude_damp(depolarize(v, noise.depolarizing_eps), noise.amplitude_damping_gamma);
}

}  // namespace qgan
