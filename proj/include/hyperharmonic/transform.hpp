/**
 * High-order signals, the canonical <-> Fourier change of basis, explained
 * variance reports and the random-basis control.
 */
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/QR>

#include "hyperharmonic/complex.hpp"
#include "hyperharmonic/errors.hpp"
#include "hyperharmonic/infotheory.hpp"
#include "hyperharmonic/random.hpp"
#include "hyperharmonic/spectral.hpp"

namespace hyperharmonic {

enum class BasisKind { canonical, fourier, custom };

struct BasisTag {
    BasisKind kind = BasisKind::canonical;
    std::string id;  ///< free-form identifier for custom bases

    friend bool operator==(const BasisTag&, const BasisTag&) = default;
};

inline std::string to_string(BasisKind k)
{
    switch (k) {
    case BasisKind::canonical: return "canonical";
    case BasisKind::fourier: return "fourier";
    case BasisKind::custom: return "custom";
    }
    return "unknown";
}

inline BasisKind parse_basis_kind(const std::string& name)
{
    if (name == "canonical") return BasisKind::canonical;
    if (name == "fourier") return BasisKind::fourier;
    if (name == "custom") return BasisKind::custom;
    throw ValidationError("unknown basis kind '" + name + "'");
}

/// Real coefficients on the n-simplices of the standard N-simplex.
class HighOrderSignal {
public:
    HighOrderSignal(int N, int n, Eigen::VectorXd coefficients, BasisTag basis, MeasureKind measure)
        : N_(N), n_(n), coefficients_(std::move(coefficients)), basis_(std::move(basis)), measure_(measure)
    {
        detail::validate_dimension(N_, n_);
        detail::require(coefficients_.size() == static_cast<Eigen::Index>(simplex_count(N_, n_)),
                        "signal length must equal C(N+1, n+1) = " + std::to_string(simplex_count(N_, n_)));
        detail::require(coefficients_.allFinite(), "signal coefficients must be finite");
    }

    int N() const { return N_; }
    int dimension() const { return n_; }
    const Eigen::VectorXd& coefficients() const { return coefficients_; }
    const BasisTag& basis() const { return basis_; }
    MeasureKind measure() const { return measure_; }
    Eigen::Index size() const { return coefficients_.size(); }

private:
    int N_;
    int n_;
    Eigen::VectorXd coefficients_;
    BasisTag basis_;
    MeasureKind measure_;
};

inline HighOrderSignal build_signal(const EntropyOracle& oracle, const StructuralSimplex& s, int n, MeasureKind kind)
{
    detail::require(n >= 2 && n <= s.N(), "high-order signals need 2 <= n <= N (got n = " + std::to_string(n) + ")");
    return HighOrderSignal(s.N(), n, signal_sweep(oracle, s.N(), n, kind), {BasisKind::canonical, {}}, kind);
}

namespace detail {

inline void require_basis_match(const HighOrderSignal& signal, const FourierBasis& basis)
{
    require(signal.dimension() == basis.n && signal.size() == basis.size(),
            "signal (n = " + std::to_string(signal.dimension()) + ", length " + std::to_string(signal.size()) +
                ") does not match the basis (n = " + std::to_string(basis.n) + ", size " +
                std::to_string(basis.size()) + ")");
}

}  // namespace detail

inline HighOrderSignal to_fourier(const HighOrderSignal& signal, const FourierBasis& basis)
{
    detail::require(signal.basis().kind == BasisKind::canonical, "to_fourier expects a canonical-basis signal");
    detail::require_basis_match(signal, basis);
    return HighOrderSignal(signal.N(), signal.dimension(), basis.forward * signal.coefficients(),
                           {BasisKind::fourier, {}}, signal.measure());
}

inline HighOrderSignal from_fourier(const HighOrderSignal& signal, const FourierBasis& basis)
{
    detail::require(signal.basis().kind == BasisKind::fourier, "from_fourier expects a Fourier-basis signal");
    detail::require_basis_match(signal, basis);
    return HighOrderSignal(signal.N(), signal.dimension(), basis.inverse * signal.coefficients(),
                           {BasisKind::canonical, {}}, signal.measure());
}

/// Thresholds reported in `CevReport::components_at`.
inline constexpr std::array<double, 5> kCevThresholds{0.60, 0.80, 0.90, 0.95, 0.99};

/// Coefficient vectors with max |c| at or below this are treated as zero.
inline constexpr double kZeroSignalTolerance = 1e-12;

struct CevReport {
    Eigen::VectorXd sorted_ev;           ///< descending normalised explained variances
    Eigen::VectorXd cev;                 ///< cumulative sums of sorted_ev
    std::vector<Eigen::Index> order;     ///< canonical index of each sorted component
    std::map<double, int> components_at; ///< smallest k with cev(k) >= threshold

    /// CEV after k strongest components (k >= 1); 1 beyond the end.
    double at(Eigen::Index k) const { return k >= cev.size() ? 1.0 : cev(k - 1); }
};

inline CevReport cev_report(const Eigen::VectorXd& coefficients)
{
    detail::require(coefficients.size() >= 1, "explained variance needs at least one coefficient");
    if (!(coefficients.cwiseAbs().maxCoeff() > kZeroSignalTolerance))
        throw NumericalError("explained variance undefined for an all-zero signal");

    const Eigen::Index d = coefficients.size();
    const Eigen::VectorXd energy = coefficients.array().square();
    CevReport r;
    r.order.resize(static_cast<std::size_t>(d));
    std::iota(r.order.begin(), r.order.end(), Eigen::Index{0});
    std::stable_sort(r.order.begin(), r.order.end(),
                     [&](Eigen::Index a, Eigen::Index b) { return energy(a) > energy(b); });

    const double total = energy.sum();
    r.sorted_ev.resize(d);
    r.cev.resize(d);
    double running = 0.0;
    for (Eigen::Index k = 0; k < d; ++k) {
        r.sorted_ev(k) = energy(r.order[static_cast<std::size_t>(k)]) / total;
        running += r.sorted_ev(k);
        r.cev(k) = running;
    }
    // Rounding can leave the last partial sum a few ulps away from 1.
    r.cev(d - 1) = 1.0;
    for (Eigen::Index k = 0; k < d; ++k)
        r.cev(k) = std::min(r.cev(k), 1.0);

    for (double threshold : kCevThresholds) {
        Eigen::Index k = 0;
        while (k < d - 1 && r.cev(k) < threshold)
            ++k;
        r.components_at[threshold] = static_cast<int>(k + 1);
    }
    return r;
}

inline CevReport cev_report(const HighOrderSignal& signal) { return cev_report(signal.coefficients()); }

/// How random bases are orthonormalised.
enum class RandomBasisInner { weighted, euclidean };

struct RandomBasis {
    Eigen::MatrixXd forward;
    Eigen::MatrixXd inverse;
};

/// Gaussian random matrix orthonormalised by QR, then rescaled so that its
/// inverse is orthonormal under the weighted inner product (or the Euclidean
/// one). Deterministic for a given seed.
inline RandomBasis random_basis(Eigen::Index d, const WeightedInnerProduct& inner, std::uint64_t seed,
                                RandomBasisInner mode = RandomBasisInner::weighted)
{
    detail::require(d >= 1, "random basis dimension must be positive");
    detail::require(inner.size() == d, "inner product dimension does not match the basis dimension");
    for (int attempt = 0; attempt < 3; ++attempt) {
        const Eigen::MatrixXd draw = standard_normal_matrix(d, d, derive_seed(seed, 0x5eed, attempt));
        const Eigen::HouseholderQR<Eigen::MatrixXd> qr(draw);
        const Eigen::VectorXd r_diag = qr.matrixQR().diagonal();
        if (r_diag.cwiseAbs().minCoeff() <= 1e-10 * std::max(1.0, r_diag.cwiseAbs().maxCoeff()))
            continue;
        // Fix the QR sign ambiguity so Q depends only on the draw.
        Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(d, d);
        for (Eigen::Index c = 0; c < d; ++c)
            if (r_diag(c) < 0.0)
                q.col(c) *= -1.0;

        RandomBasis out;
        if (mode == RandomBasisInner::euclidean) {
            out.inverse = q;
            out.forward = q.transpose();
        } else {
            const Eigen::VectorXd root = inner.weights().cwiseSqrt();
            out.inverse = root.cwiseInverse().asDiagonal() * q;
            out.forward = q.transpose() * root.asDiagonal();
        }
        return out;
    }
    throw NumericalError("random basis draw was singular three times in a row");
}

/// Pointwise mean and 95% normal-approximation band over replicate curves.
struct CurveBand {
    Eigen::VectorXd mean;
    Eigen::VectorXd low;
    Eigen::VectorXd high;
};

inline CurveBand summarize_curves(const std::vector<Eigen::VectorXd>& curves)
{
    detail::require(!curves.empty(), "need at least one curve to summarise");
    const Eigen::Index d = curves.front().size();
    const double m = static_cast<double>(curves.size());
    CurveBand band;
    band.mean = Eigen::VectorXd::Zero(d);
    for (const auto& c : curves) {
        detail::require(c.size() == d, "curves must have equal length");
        band.mean += c;
    }
    band.mean /= m;
    Eigen::VectorXd half_width = Eigen::VectorXd::Zero(d);
    if (curves.size() > 1) {
        Eigen::VectorXd var = Eigen::VectorXd::Zero(d);
        for (const auto& c : curves)
            var += (c - band.mean).array().square().matrix();
        var /= (m - 1.0);
        half_width = 1.96 * (var / m).cwiseSqrt();
    }
    band.low = band.mean - half_width;
    band.high = band.mean + half_width;
    return band;
}

struct ControlComparison {
    Eigen::VectorXd fourier_cev;
    std::vector<Eigen::VectorXd> random_cev;  ///< one curve per draw, in draw order
    CurveBand random_band;                   ///< across random-basis draws
};

/// CEV in the Fourier basis against CEV in `num_random` random bases.
inline ControlComparison control_comparison(const HighOrderSignal& signal, const FourierBasis& basis, int num_random,
                                            std::uint64_t seed, RandomBasisInner mode = RandomBasisInner::weighted,
                                            int jobs = 1)
{
    detail::require(num_random >= 1, "need at least one random basis");
    ControlComparison out;
    out.fourier_cev = cev_report(to_fourier(signal, basis)).cev;
    out.random_cev.resize(static_cast<std::size_t>(num_random));
    parallel_for(static_cast<std::size_t>(num_random), jobs, [&](std::size_t r) {
        const RandomBasis rb = random_basis(basis.size(), basis.inner, derive_seed(seed, 0xC0, r), mode);
        out.random_cev[r] = cev_report(Eigen::VectorXd(rb.forward * signal.coefficients())).cev;
    });
    out.random_band = summarize_curves(out.random_cev);
    return out;
}

}  // namespace hyperharmonic
