#include "spde/noise.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "spde/rng.hpp"
#include "spde/spectral.hpp"

namespace spde {

NoiseSpec NoiseSpec::power_law(double kappa, int n_modes) {
    if (!std::isfinite(kappa) || kappa < 0.0)
        throw std::invalid_argument("NoiseSpec: kappa must be >= 0 and finite");
    if (n_modes < 1)
        throw std::invalid_argument("NoiseSpec: n_modes must be >= 1");
    NoiseSpec s;
    s.kind = Kind::power_law;
    s.kappa = kappa;
    s.n_modes = n_modes;
    return s;
}

NoiseSpec NoiseSpec::explicit_list(std::vector<double> q) {
    if (q.empty())
        throw std::invalid_argument("NoiseSpec: explicit list must not be empty");
    for (double v : q)
        if (!std::isfinite(v) || v < 0.0)
            throw std::invalid_argument("NoiseSpec: mode variances must be >= 0 and finite");
    NoiseSpec s;
    s.kind = Kind::explicit_modes;
    s.n_modes = static_cast<int>(q.size());
    s.q_list = std::move(q);
    return s;
}

double q_coefficient(const NoiseSpec& spec, int j) {
    if (j < 1)
        throw std::invalid_argument("q_coefficient: mode index must be >= 1");
    if (j > spec.n_modes) return 0.0;
    if (spec.kind == NoiseSpec::Kind::power_law) {
        const double c = 1.0 + std::pow(static_cast<double>(j), spec.kappa);
        return 1.0 / (c * c);
    }
    return spec.q_list[static_cast<std::size_t>(j) - 1];
}

BetaEstimate beta_max(const NoiseSpec& spec, double length) {
    if (spec.kind == NoiseSpec::Kind::power_law) {
        // q_j ~ j^{-2 kappa} and lambda_j ~ j^2, so sum_j lambda_j^{beta-1} q_j converges
        // iff 2(beta - 1) - 2 kappa < -1, i.e. beta < kappa + 1/2; the scheme cannot
        // exploit more than beta = 2 regardless of the noise.
        return BetaEstimate{std::min(spec.kappa + 0.5, 2.0), true};
    }

    // Probe the tail decay: least-squares slope of log q_j against log j over the upper
    // half of the listed modes, translated through the same convergence criterion.
    std::vector<std::pair<double, double>> pts;
    for (int j = std::max(2, spec.n_modes / 2); j <= spec.n_modes; ++j) {
        const double q = q_coefficient(spec, j);
        if (q > 0.0) pts.emplace_back(std::log(static_cast<double>(j)), std::log(q));
    }
    if (pts.size() < 2) {
        // Finitely many active modes (or too few points to fit): the series is a finite
        // sum, so every beta up to the cap is admissible.
        (void)length;
        return BetaEstimate{2.0, false};
    }
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    for (auto [x, y] : pts) {
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    const double n = static_cast<double>(pts.size());
    const double denom = n * sxx - sx * sx;
    if (denom <= 0.0) return BetaEstimate{0.5, false};
    const double slope = (n * sxy - sx * sy) / denom; // log q_j ~ slope * log j
    const double kappa_hat = -0.5 * slope;
    const double beta = std::clamp(kappa_hat + 0.5, 0.0, 2.0);
    return BetaEstimate{beta, false};
}

IncrementBlock::IncrementBlock(int steps, int modes, double dt, std::uint64_t seed,
                               std::uint64_t trajectory, std::vector<double> data)
    : steps_(steps), modes_(modes), dt_(dt), seed_(seed), trajectory_(trajectory),
      data_(std::move(data)) {
    if (steps_ < 0 || modes_ < 1)
        throw std::invalid_argument("IncrementBlock: bad shape");
    if (!std::isfinite(dt_) || dt_ <= 0.0)
        throw std::invalid_argument("IncrementBlock: dt must be positive and finite");
    if (data_.size() != static_cast<std::size_t>(steps_) * modes_)
        throw std::invalid_argument("IncrementBlock: data size does not match steps x modes");
}

IncrementBlock sample_increments(const NoiseSpec& spec, std::uint64_t seed,
                                 std::uint64_t trajectory, int steps, double dt) {
    if (steps < 0)
        throw std::invalid_argument("sample_increments: steps must be >= 0");
    if (!std::isfinite(dt) || dt <= 0.0)
        throw std::invalid_argument("sample_increments: dt must be positive and finite");

    const int m = spec.n_modes;
    std::vector<double> data(static_cast<std::size_t>(steps) * m);
    if (steps > 0) {
        // Draw index of entry (k, j) is k * m + j - 1; the stream is the trajectory id.
        rng::normal_fill(seed, trajectory, 0, data);
        std::vector<double> scale(static_cast<std::size_t>(m));
        const double root_dt = std::sqrt(dt);
        for (int j = 1; j <= m; ++j)
            scale[j - 1] = std::sqrt(q_coefficient(spec, j)) * root_dt;
        for (int k = 0; k < steps; ++k) {
            double* row = data.data() + static_cast<std::size_t>(k) * m;
            for (int j = 0; j < m; ++j) row[j] *= scale[j];
        }
    }
    return IncrementBlock(steps, m, dt, seed, trajectory, std::move(data));
}

IncrementBlock coarsen(const IncrementBlock& fine, int factor) {
    if (factor < 1)
        throw std::invalid_argument("coarsen: factor must be >= 1");
    if (fine.steps() % factor != 0)
        throw std::invalid_argument("coarsen: steps (" + std::to_string(fine.steps()) +
                                    ") must be divisible by factor (" +
                                    std::to_string(factor) + ")");

    const int coarse_steps = fine.steps() / factor;
    const int m = fine.modes();
    std::vector<double> data(static_cast<std::size_t>(coarse_steps) * m, 0.0);
    for (int k = 0; k < fine.steps(); ++k) {
        double* dst = data.data() + static_cast<std::size_t>(k / factor) * m;
        const double* src = fine.row(k);
        for (int j = 0; j < m; ++j) dst[j] += src[j];
    }
    return IncrementBlock(coarse_steps, m, fine.dt() * factor, fine.seed(),
                          fine.trajectory(), std::move(data));
}

} // namespace spde
