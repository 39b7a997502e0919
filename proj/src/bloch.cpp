#include "qgan/bloch.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace qgan {

namespace {

constexpr double kStateTol = 1e-12;
constexpr double kAxisTol = 1e-9;
constexpr double kSqrtClamp = -1e-10;

// Clamps tiny negative round-off to zero, rejects anything larger.
double checked_sqrt(double value, const char* what) {
    if (value < kSqrtClamp) {
        throw std::invalid_argument(std::string(what) + ": negative radicand " + std::to_string(value));
    }
    return std::sqrt(std::max(value, 0.0));
}

// Shift x by a multiple of 2pi so that it lands nearest to ref.
double nearest_turn(double x, double ref) {
    return x + kTwoPi * std::round((ref - x) / kTwoPi);
}

// Picks (theta, phi) for the unit vector n nearest to (theta_ref, phi_ref)
// among n(theta, phi) = n(-theta, phi + pi) and their 2pi shifts.
std::pair<double, double> angles_near(const BlochVector& n, double theta_ref, double phi_ref) {
    const double theta = std::acos(std::clamp(n.z, -1.0, 1.0));
    const double rho = std::hypot(n.x, n.y);
    const double phi = rho < 1e-12 ? phi_ref : std::atan2(n.x, n.y);

    const double t1 = nearest_turn(theta, theta_ref);
    const double p1 = nearest_turn(phi, phi_ref);
    const double t2 = nearest_turn(-theta, theta_ref);
    const double p2 = nearest_turn(phi + kPi, phi_ref);
    const double c1 = (t1 - theta_ref) * (t1 - theta_ref) + (p1 - phi_ref) * (p1 - phi_ref);
    const double c2 = (t2 - theta_ref) * (t2 - theta_ref) + (p2 - phi_ref) * (p2 - phi_ref);
    return c1 <= c2 ? std::pair{t1, p1} : std::pair{t2, p2};
}

}  // namespace

double BlochVector::norm() const { return std::sqrt(dot(*this)); }

bool BlochVector::is_pure(double tol) const { return std::abs(norm() - 1.0) <= tol; }

DensityMatrix DensityMatrix::from_bloch(const BlochVector& v) {
    if (!std::isfinite(v.x) || !std::isfinite(v.y) || !std::isfinite(v.z)) {
        throw std::invalid_argument("Bloch vector has non-finite components");
    }
    if (v.dot(v) > 1.0 + kStateTol) {
        throw std::invalid_argument("Bloch vector outside the unit ball (|v| = " + std::to_string(v.norm()) + ")");
    }
    DensityMatrix m;
    m.entries_[0] = Complex(0.5 * (1.0 + v.z), 0.0);
    m.entries_[1] = Complex(0.5 * v.x, -0.5 * v.y);
    m.entries_[2] = std::conj(m.entries_[1]);
    m.entries_[3] = Complex(0.5 * (1.0 - v.z), 0.0);
    return m;
}

DensityMatrix DensityMatrix::from_entries(Complex e00, Complex e01, Complex e10, Complex e11) {
    if (std::abs(e00.imag()) > kStateTol || std::abs(e11.imag()) > kStateTol ||
        std::abs(e01 - std::conj(e10)) > kStateTol) {
        throw std::invalid_argument("density matrix is not Hermitian");
    }
    if (std::abs(e00.real() + e11.real() - 1.0) > kStateTol) {
        throw std::invalid_argument("density matrix trace differs from 1");
    }
    DensityMatrix m;
    m.entries_ = {Complex(e00.real(), 0.0), e01, std::conj(e01), Complex(e11.real(), 0.0)};
    const auto [lo, hi] = m.eigenvalues();
    (void)hi;
    if (lo < -kStateTol) {
        throw std::invalid_argument("density matrix is not positive semidefinite");
    }
    return m;
}

BlochVector DensityMatrix::to_bloch() const {
    return {2.0 * entries_[1].real(), -2.0 * entries_[1].imag(), entries_[0].real() - entries_[3].real()};
}

double DensityMatrix::determinant() const {
    return entries_[0].real() * entries_[3].real() - std::norm(entries_[1]);
}

std::pair<double, double> DensityMatrix::eigenvalues() const {
    const double half_trace = 0.5 * trace();
    const double diff = 0.5 * (entries_[0].real() - entries_[3].real());
    const double radius = std::sqrt(diff * diff + std::norm(entries_[1]));
    return {half_trace - radius, half_trace + radius};
}

void GeneratorParams::validate() const {
    if (!std::isfinite(r) || r < 0.0 || r > 1.0) {
        throw std::invalid_argument("generator.r must lie in [0,1], got " + std::to_string(r));
    }
    if (!std::isfinite(theta)) throw std::invalid_argument("generator.theta must be finite");
    if (!std::isfinite(phi)) throw std::invalid_argument("generator.phi must be finite");
}

void MeasurementParams::validate() const {
    if (!std::isfinite(beta)) throw std::invalid_argument("measurement.beta must be finite");
    if (!std::isfinite(gamma)) throw std::invalid_argument("measurement.gamma must be finite");
}

BlochVector unit_direction(double theta, double phi) {
    const double s = std::sin(theta);
    return {s * std::sin(phi), s * std::cos(phi), std::cos(theta)};
}

BlochVector polar_tangent(double theta, double phi) {
    const double c = std::cos(theta);
    return {c * std::sin(phi), c * std::cos(phi), -std::sin(theta)};
}

BlochVector azimuthal_tangent(double phi) { return {std::cos(phi), -std::sin(phi), 0.0}; }

BlochVector state_bloch(const GeneratorParams& params) {
    params.validate();
    return (2.0 * params.r - 1.0) * unit_direction(params.theta, params.phi);
}

BlochVector measurement_axis(const MeasurementParams& params) {
    params.validate();
    return unit_direction(params.beta, params.gamma);
}

double outcome_probability(const BlochVector& axis, const BlochVector& state) {
    if (std::abs(axis.norm() - 1.0) > kAxisTol) {
        throw std::invalid_argument("measurement axis is not a unit vector");
    }
    if (state.dot(state) > 1.0 + kStateTol) {
        throw std::invalid_argument("state Bloch vector outside the unit ball");
    }
    return std::clamp(0.5 * (1.0 + axis.dot(state)), 0.0, 1.0);
}

double fidelity(const DensityMatrix& a, const DensityMatrix& b) {
    // tr(ab) for Hermitian a, b.
    const auto& x = a.entries();
    const auto& y = b.entries();
    const double tr_ab = (x[0] * y[0] + x[1] * y[2] + x[2] * y[1] + x[3] * y[3]).real();
    const double det_a = std::max(a.determinant(), 0.0);
    const double det_b = std::max(b.determinant(), 0.0);
    const double f = checked_sqrt(tr_ab + 2.0 * std::sqrt(det_a * det_b), "fidelity");
    return std::min(f, 1.0);
}

double trace_distance(const DensityMatrix& a, const DensityMatrix& b) {
    return std::min(0.5 * (a.to_bloch() - b.to_bloch()).norm(), 1.0);
}

BlochVector optimal_axis(const BlochVector& rho, const BlochVector& sigma) {
    const BlochVector diff = rho - sigma;
    const double n = diff.norm();
    if (n == 0.0) return {0.0, 0.0, 1.0};
    return diff * (1.0 / n);
}

GeneratorParams generator_params_near(const BlochVector& v, const GeneratorParams& reference) {
    const double length = v.norm();
    if (length > 1.0 + kStateTol) {
        throw std::invalid_argument("Bloch vector outside the unit ball");
    }
    if (length < 1e-15) return {0.5, reference.theta, reference.phi};

    // Keep the sign of (2r - 1) unless v crossed the origin.
    const BlochVector ref_dir = unit_direction(reference.theta, reference.phi);
    const double sign = v.dot(ref_dir) >= 0.0 ? 1.0 : -1.0;
    const auto [theta, phi] = angles_near(v * (sign / length), reference.theta, reference.phi);
    const double r = std::clamp(0.5 * (1.0 + sign * std::min(length, 1.0)), 0.0, 1.0);
    return {r, theta, phi};
}

MeasurementParams measurement_params_near(const BlochVector& axis, const MeasurementParams& reference) {
    const double length = axis.norm();
    if (length < 1e-15) throw std::invalid_argument("measurement axis has zero length");
    const auto [beta, gamma] = angles_near(axis * (1.0 / length), reference.beta, reference.gamma);
    return {beta, gamma};
}

DensityMatrix random_true_state(TrueStateKind kind, Rng& rng, const BlochVector& fixed) {
    switch (kind) {
        case TrueStateKind::kPureGround:
            return DensityMatrix::ground();
        case TrueStateKind::kFixed:
            return DensityMatrix::from_bloch(fixed);
        case TrueStateKind::kBlochBall: {
            std::normal_distribution<double> normal;
            std::uniform_real_distribution<double> unit;
            BlochVector dir{};
            double n = 0.0;
            while (n < 1e-12) {
                dir = {normal(rng), normal(rng), normal(rng)};
                n = dir.norm();
            }
            const double radius = std::cbrt(unit(rng));
            return DensityMatrix::from_bloch(dir * (radius / n));
        }
        case TrueStateKind::kHilbertSchmidt: {
            // rho = G G^dagger / tr(G G^dagger) with a complex Ginibre G.
            std::normal_distribution<double> normal;
            std::array<Complex, 4> g{};
            for (auto& e : g) e = Complex(normal(rng), normal(rng));
            const Complex a = g[0] * std::conj(g[0]) + g[1] * std::conj(g[1]);
            const Complex b = g[0] * std::conj(g[2]) + g[1] * std::conj(g[3]);
            const Complex d = g[2] * std::conj(g[2]) + g[3] * std::conj(g[3]);
            const double tr = a.real() + d.real();
            const BlochVector v{2.0 * b.real() / tr, -2.0 * b.imag() / tr, (a.real() - d.real()) / tr};
            const double len = v.norm();
            return DensityMatrix::from_bloch(len > 1.0 ? v * (1.0 / len) : v);
        }
    }
    throw std::invalid_argument("unknown true-state kind");
}

DensityMatrix make_true_state(const TrueStateSpec& spec) {
    Rng rng(spec.seed);
    return random_true_state(spec.kind, rng, spec.fixed);
}

std::pair<GeneratorParams, MeasurementParams> random_initial_params(Rng& rng) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    GeneratorParams gen;
    gen.r = unit(rng);
    gen.theta = kPi * unit(rng);
    gen.phi = kTwoPi * unit(rng);
    MeasurementParams meas;
    meas.beta = kPi * unit(rng);
    meas.gamma = kTwoPi * unit(rng);
    return {gen, meas};
}

}  // namespace qgan
