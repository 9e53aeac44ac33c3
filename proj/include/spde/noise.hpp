#pragma once

#include <cstdint>
#include <vector>

#include "spde/field.hpp"

namespace spde {

/// Spatial covariance of the additive Q-Wiener noise, diagonal in the sine basis.
/// Mode j of W carries variance rate q_j = <Q e_j, e_j>.
struct NoiseSpec {
    enum class Kind { power_law, explicit_modes };

    Kind kind = Kind::power_law;
    double kappa = 0.0;           ///< decay exponent for the power-law family
    std::vector<double> q_list;   ///< per-mode variances for the explicit family
    int n_modes = 0;              ///< number of driven modes M_W

    /// q_j = 1 / (1 + j^kappa)^2, the square of the coefficient multiplying mode j of
    /// the driving series.
    static NoiseSpec power_law(double kappa, int n_modes);

    /// Explicitly listed per-mode variances (all entries >= 0, finite).
    static NoiseSpec explicit_list(std::vector<double> q);
};

/// Variance rate q_j of driven mode j (1-based); zero for j > n_modes.
double q_coefficient(const NoiseSpec& spec, int j);

/// Spatial regularity exponent of the noise: the largest beta (capped at 2) with
/// sum_j lambda_j^{beta - 1} q_j < infinity, which governs the attainable convergence
/// rates.  For the power-law family this is min(kappa + 1/2, 2) in closed form; for
/// explicit lists it is probed from the tail decay and flagged as an estimate.
struct BetaEstimate {
    double beta;
    bool exact;
};

BetaEstimate beta_max(const NoiseSpec& spec, double length);

/// K x M_W table of scaled Wiener increments delta_k beta_j ~ N(0, q_j dt), row k being
/// the increment over [k dt, (k+1) dt).  Entries are a pure function of
/// (seed, trajectory, k, j), so blocks for different trajectories can be generated in
/// any order, on any thread, with identical results.
class IncrementBlock {
public:
    IncrementBlock(int steps, int modes, double dt, std::uint64_t seed,
                   std::uint64_t trajectory, std::vector<double> data);

    int steps() const { return steps_; }
    int modes() const { return modes_; }
    double dt() const { return dt_; }
    std::uint64_t seed() const { return seed_; }
    std::uint64_t trajectory() const { return trajectory_; }

    /// Increment of driven mode j over step k (0-based step, 1-based mode).
    double at(int k, int j) const { return data_[static_cast<std::size_t>(k) * modes_ + (j - 1)]; }

    /// Row k as a contiguous span of modes() entries.
    const double* row(int k) const { return data_.data() + static_cast<std::size_t>(k) * modes_; }

    const std::vector<double>& data() const { return data_; }

private:
    int steps_;
    int modes_;
    double dt_;
    std::uint64_t seed_;
    std::uint64_t trajectory_;
    std::vector<double> data_;
};

IncrementBlock sample_increments(const NoiseSpec& spec, std::uint64_t seed,
                                 std::uint64_t trajectory, int steps, double dt);

/// Sum consecutive groups of `factor` rows, producing the increments of the same Wiener
/// path on the coarser grid with step factor * dt.  Requires steps() % factor == 0.
IncrementBlock coarsen(const IncrementBlock& fine, int factor);

} // namespace spde
