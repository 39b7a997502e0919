// bloch.hpp
// Single-qubit state and measurement algebra: Bloch vectors, density
// matrices, the generator/discriminator parameterizations, fidelity and
// trace distance.
//
// Convention: |g> is the +z eigenstate of sigma_z, Bloch vector (0,0,1).

#pragma once

#include <array>
#include <complex>
#include <cstdint>
#include <random>
#include <utility>

namespace qgan {

using Complex = std::complex<double>;

/// Every random draw in the library goes through an explicitly passed stream.
using Rng = std::mt19937_64;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoPi = 2.0 * kPi;

struct BlochVector {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;

    double dot(const BlochVector& o) const { return x * o.x + y * o.y + z * o.z; }
    double norm() const;
    bool is_pure(double tol = 1e-12) const;

    BlochVector operator+(const BlochVector& o) const { return {x + o.x, y + o.y, z + o.z}; }
    BlochVector operator-(const BlochVector& o) const { return {x - o.x, y - o.y, z - o.z}; }
    BlochVector operator-() const { return {-x, -y, -z}; }
    BlochVector operator*(double s) const { return {s * x, s * y, s * z}; }
    friend BlochVector operator*(double s, const BlochVector& v) { return v * s; }
    bool operator==(const BlochVector&) const = default;
};

/// 2x2 Hermitian, unit-trace, positive semidefinite matrix.  Only
/// constructible through the factories, which enforce those invariants.
class DensityMatrix {
public:
    /// Throws std::invalid_argument when |v| > 1 + 1e-12.
    static DensityMatrix from_bloch(const BlochVector& v);

    /// Validates an explicit matrix (Hermitian, trace 1, PSD within 1e-12).
    static DensityMatrix from_entries(Complex e00, Complex e01, Complex e10, Complex e11);

    static DensityMatrix ground() { return from_bloch({0.0, 0.0, 1.0}); }
    static DensityMatrix excited() { return from_bloch({0.0, 0.0, -1.0}); }
    static DensityMatrix maximally_mixed() { return from_bloch({0.0, 0.0, 0.0}); }

    Complex operator()(int row, int col) const { return entries_[static_cast<std::size_t>(2 * row + col)]; }
    const std::array<Complex, 4>& entries() const { return entries_; }

    BlochVector to_bloch() const;
    double trace() const { return entries_[0].real() + entries_[3].real(); }
    double determinant() const;
    std::pair<double, double> eigenvalues() const;

    bool operator==(const DensityMatrix&) const = default;

private:
    DensityMatrix() = default;
    std::array<Complex, 4> entries_{};
};

/// Ensemble {U(theta,phi)|g>, U(pi-theta,phi+pi)|g>} with weights {r, 1-r}.
/// Angles are stored unwrapped.
struct GeneratorParams {
    double r = 1.0;
    double theta = 0.0;
    double phi = 0.0;

    /// Throws std::invalid_argument naming the offending field.
    void validate() const;
    bool operator==(const GeneratorParams&) const = default;
};

/// Projective measurement onto U(beta,gamma)|g>.
struct MeasurementParams {
    double beta = 0.0;
    double gamma = 0.0;

    void validate() const;
    bool operator==(const MeasurementParams&) const = default;
};

/// n(theta,phi) = (sin theta sin phi, sin theta cos phi, cos theta).
BlochVector unit_direction(double theta, double phi);

/// Orthonormal tangent vectors d n/d theta and (1/sin theta) d n/d phi.
BlochVector polar_tangent(double theta, double phi);
BlochVector azimuthal_tangent(double phi);

/// (2r - 1) n(theta, phi).  Rejects r outside [0,1].
BlochVector state_bloch(const GeneratorParams& params);

/// Unit axis of the projector onto U(beta,gamma)|g>.
BlochVector measurement_axis(const MeasurementParams& params);

/// tr(M rho) = (1 + m.v)/2.  Rejects |m| != 1 beyond 1e-9.
double outcome_probability(const BlochVector& axis, const BlochVector& state);

/// Uhlmann fidelity tr sqrt(sqrt(a) b sqrt(a)) via the qubit closed form
/// sqrt(tr(ab) + 2 sqrt(det a det b)).
double fidelity(const DensityMatrix& a, const DensityMatrix& b);

/// 1/2 ||a - b||_1, half the Euclidean distance of the Bloch vectors.
double trace_distance(const DensityMatrix& a, const DensityMatrix& b);

/// Axis maximizing p(m, v_rho) - p(m, v_sigma).  (0,0,1) when the states coincide.
BlochVector optimal_axis(const BlochVector& rho, const BlochVector& sigma);

/// Parameters for a given Bloch vector, choosing among the equivalent
/// representations (2pi shifts, theta -> -theta, branch swap) the one nearest
/// to `reference`.  Keeps trajectories continuous when an update is computed
/// in Bloch coordinates.
GeneratorParams generator_params_near(const BlochVector& v, const GeneratorParams& reference);
MeasurementParams measurement_params_near(const BlochVector& axis, const MeasurementParams& reference);

enum class TrueStateKind { kPureGround, kBlochBall, kHilbertSchmidt, kFixed };

struct TrueStateSpec {
    TrueStateKind kind = TrueStateKind::kPureGround;
    BlochVector fixed{};      // used by kFixed
    std::uint64_t seed = 1;   // stream for the random kinds
};

/// Synthesizes the true data sigma.  kFixed rejects |v| > 1.
DensityMatrix random_true_state(TrueStateKind kind, Rng& rng, const BlochVector& fixed = {});

/// Resolves a spec with its own seeded stream.
DensityMatrix make_true_state(const TrueStateSpec& spec);

/// r0 ~ U[0,1], theta0, beta0 ~ U[0,pi], phi0, gamma0 ~ U[0,2pi).
std::pair<GeneratorParams, MeasurementParams> random_initial_params(Rng& rng);

}  // namespace qgan
